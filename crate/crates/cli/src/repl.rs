use std::cell::RefCell;
use std::io::{self, BufRead, Write};
use std::path::Path;

use linweb::parse_goal;

use crate::session::Session;

const PROMPT: &str = "?- ";
const CONTINUE: &str = "|  ";

/// Interactive loop. Ends on `:quit` or end of input.
pub fn run(
    session: &mut Session,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> io::Result<()> {
    let mut pending = String::new();
    loop {
        write!(
            out,
            "{}",
            if pending.is_empty() { PROMPT } else { CONTINUE }
        )?;
        out.flush()?;
        let Some(line) = read_line(input)? else {
            return Ok(());
        };
        let line = line.trim();
        if pending.is_empty() {
            if let Some(directive) = line.strip_prefix(':') {
                if !directive_line(session, directive, out, diag)? {
                    return Ok(());
                }
                continue;
            }
        }
        let line = if pending.is_empty() {
            line.strip_prefix("?-").unwrap_or(line).trim_start()
        } else {
            line
        };
        if line.is_empty() && pending.is_empty() {
            continue;
        }
        pending.push_str(line);
        pending.push('\n');
        if !line.ends_with('.') {
            continue;
        }
        let query = std::mem::take(&mut pending);
        query_loop(session, &query, input, out, diag)?;
    }
}

fn read_line(input: &mut dyn BufRead) -> io::Result<Option<String>> {
    let mut line = String::new();
    if input.read_line(&mut line)? == 0 {
        return Ok(None);
    }
    Ok(Some(line))
}

/// Returns false when the loop should stop.
fn directive_line(
    session: &mut Session,
    directive: &str,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> io::Result<bool> {
    let mut words = directive.split_whitespace();
    match (words.next(), words.next()) {
        (Some("quit"), None) => return Ok(false),
        (Some("load"), Some(_)) => {
            let file = directive.trim_start()["load".len()..].trim();
            match session.consult(Path::new(file)) {
                Ok(n) => writeln!(out, "% loaded {n} clause(s) from {file}")?,
                Err(e) => writeln!(diag, "error: {e:#}")?,
            }
        }
        (Some("trace"), Some(state @ ("on" | "off"))) => {
            session.trace = state == "on";
            writeln!(out, "% trace {state}")?;
        }
        (Some("stats"), None) => match session.last_stats {
            Some(s) => writeln!(out, "% {s}")?,
            None => writeln!(out, "% no query run yet")?,
        },
        _ => writeln!(
            diag,
            "error: unknown directive :{directive} (try :load FILE, :trace on|off, :stats, :quit)"
        )?,
    }
    Ok(true)
}

/// Prints answers one at a time; `;` asks for the next one.
fn query_loop(
    session: &mut Session,
    query: &str,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> io::Result<()> {
    let goal = match parse_goal(query) {
        Ok(g) => g,
        Err(e) => return writeln!(diag, "error: {e}"),
    };
    let diag = RefCell::new(diag);
    let mut solver = session.solver(&goal);
    if session.trace {
        solver.set_tracer(|e| {
            let _ = writeln!(diag.borrow_mut(), "{e}");
        });
    }
    let mut found = 0;
    loop {
        match solver.next_answer() {
            Ok(Some(a)) => {
                found += 1;
                write!(out, "{a} ")?;
                out.flush()?;
                match read_line(input)? {
                    Some(reply) if reply.trim() == ";" => {}
                    _ => {
                        writeln!(out)?;
                        break;
                    }
                }
            }
            Ok(None) => {
                writeln!(
                    out,
                    "{}",
                    if found == 0 {
                        "false"
                    } else {
                        "no more answers"
                    }
                )?;
                break;
            }
            Err(e) => {
                writeln!(diag.borrow_mut(), "error: {e}")?;
                break;
            }
        }
    }
    let stats = solver.stats();
    drop(solver);
    session.last_stats = Some(stats);
    Ok(())
}
