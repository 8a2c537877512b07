use super::ast::{DFormula, GFormula, SourceModule};
use crate::term::{Term, CONS, NIL};

pub fn pretty_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, &mut out);
    out
}

fn write_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(&v.display_name()),
        Term::Int(i) => out.push_str(&i.to_string()),
        Term::Const(name) if &**name == NIL => out.push_str("[]"),
        Term::Const(name) => write_atom(name, out),
        Term::Compound(f, args) if &**f == CONS && args.len() == 2 => write_list(t, out),
        Term::Compound(f, args) => {
            write_atom(f, out);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_term(a, out);
            }
            out.push(')');
        }
    }
}

fn write_list(t: &Term, out: &mut String) {
    out.push('[');
    let mut cur = t;
    let mut first = true;
    loop {
        match cur {
            Term::Compound(f, args) if &**f == CONS && args.len() == 2 => {
                if !first {
                    out.push(',');
                }
                first = false;
                write_term(&args[0], out);
                cur = &args[1];
            }
            Term::Const(n) if &**n == NIL => break,
            tail => {
                out.push('|');
                write_term(tail, out);
                break;
            }
        }
    }
    out.push(']');
}

fn is_plain_atom(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_lowercase())
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn write_atom(name: &str, out: &mut String) {
    if is_plain_atom(name) {
        out.push_str(name);
    } else {
        write_quoted(name, '\'', out);
    }
}

fn write_quoted(s: &str, quote: char, out: &mut String) {
    out.push(quote);
    for c in s.chars() {
        if c == quote || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push(quote);
}

fn infix_symbol(name: &str) -> Option<&'static str> {
    match name {
        "ge" => Some(">="),
        "gt" => Some(">"),
        "le" => Some("=<"),
        "lt" => Some("<"),
        "=" => Some("="),
        _ => None,
    }
}

pub fn pretty_goal(g: &GFormula) -> String {
    let mut out = String::new();
    write_goal(g, &mut out);
    out
}

fn write_goal(g: &GFormula, out: &mut String) {
    match g {
        GFormula::Atom { atom, builtin } => match atom {
            Term::Compound(f, args) if *builtin && args.len() == 2 => match infix_symbol(f) {
                Some(op) => {
                    write_term(&args[0], out);
                    out.push(' ');
                    out.push_str(op);
                    out.push(' ');
                    write_term(&args[1], out);
                }
                None => write_term(atom, out),
            },
            _ => write_term(atom, out),
        },
        GFormula::And(l, r) => {
            write_goal_paren(l, matches!(**l, GFormula::And(..)), out);
            out.push_str(", ");
            write_goal(r, out);
        }
        GFormula::Assume(d, body) => {
            out.push('(');
            write_clause(d, out);
            out.push_str(") => ");
            write_arrow_body(body, out);
        }
        GFormula::Load(url, body) => {
            write_quoted(url, '"', out);
            out.push_str(" => ");
            write_arrow_body(body, out);
        }
        GFormula::Exists(_, body) => write_goal(body, out),
    }
}

fn strip_exists(g: &GFormula) -> &GFormula {
    let mut g = g;
    while let GFormula::Exists(_, inner) = g {
        g = inner;
    }
    g
}

fn write_arrow_body(g: &GFormula, out: &mut String) {
    write_goal_paren(g, matches!(strip_exists(g), GFormula::And(..)), out);
}

fn write_goal_paren(g: &GFormula, paren: bool, out: &mut String) {
    if paren {
        out.push('(');
        write_goal(g, out);
        out.push(')');
    } else {
        write_goal(g, out);
    }
}

pub fn pretty_clause(d: &DFormula) -> String {
    let mut out = String::new();
    write_clause(d, &mut out);
    out
}

fn strip_all(d: &DFormula) -> &DFormula {
    let mut d = d;
    while let DFormula::All(_, inner) = d {
        d = inner;
    }
    d
}

fn write_clause(d: &DFormula, out: &mut String) {
    match d {
        DFormula::Atom(t) => write_term(t, out),
        DFormula::Imp(body, head) => {
            write_clause_paren(head, !matches!(strip_all(head), DFormula::Atom(_)), out);
            out.push_str(" :- ");
            write_goal(body, out);
        }
        DFormula::All(_, inner) => write_clause(inner, out),
        DFormula::Choice(l, r) => {
            write_choice_operand(l, true, out);
            out.push_str(" & ");
            write_choice_operand(r, false, out);
        }
    }
}

fn write_choice_operand(d: &DFormula, left: bool, out: &mut String) {
    let paren = match strip_all(d) {
        DFormula::Atom(_) => false,
        DFormula::Imp(..) => true,
        DFormula::Choice(..) => left,
        DFormula::All(..) => unreachable!(),
    };
    write_clause_paren(d, paren, out);
}

fn write_clause_paren(d: &DFormula, paren: bool, out: &mut String) {
    if paren {
        out.push('(');
        write_clause(d, out);
        out.push(')');
    } else {
        write_clause(d, out);
    }
}

/// Canonical program text: the `mod` line, then one unit per clause with
/// each top-level alternative on its own line.
pub fn pretty_program(m: &SourceModule) -> String {
    let mut out = String::new();
    if let Some(url) = &m.url {
        out.push_str("mod(");
        write_quoted(url, '"', &mut out);
        out.push_str(").\n");
    }
    for d in &m.clauses {
        let mut cur = strip_all(d);
        let mut first = true;
        loop {
            if !first {
                out.push_str(" &\n    ");
            }
            first = false;
            match cur {
                DFormula::Choice(l, r) => {
                    write_choice_operand(l, true, &mut out);
                    cur = strip_all(r);
                }
                last => {
                    if first_is_only(d) {
                        write_clause(last, &mut out);
                    } else {
                        write_choice_operand(last, false, &mut out);
                    }
                    break;
                }
            }
        }
        out.push_str(".\n");
    }
    out
}

fn first_is_only(d: &DFormula) -> bool {
    !matches!(strip_all(d), DFormula::Choice(..))
}
