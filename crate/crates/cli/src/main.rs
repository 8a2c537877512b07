mod repl;
mod session;

use std::io::{self, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Parser;
use linweb::{Mode, ModuleRegistry, SolveOptions};

use session::{Session, EXIT_ERROR};

/// Interpreter for Horn clauses with committed-choice conjunction (`&`)
/// and URL-addressed modules.
///
/// Without `-q`, starts an interactive session reading queries like
/// `?- max(9,3,M).` from standard input.
#[derive(Parser, Debug)]
#[command(name = "linweb", version)]
struct Args {
    /// Program file to load (repeatable).
    #[arg(short = 'c', long = "consult", value_name = "FILE")]
    consult: Vec<PathBuf>,

    /// Run this goal and exit.
    #[arg(short = 'q', long = "query", value_name = "GOAL")]
    query: Option<String>,

    /// Print every answer.
    #[arg(long, conflicts_with = "first")]
    all: bool,

    /// Print only the first answer (default).
    #[arg(long)]
    first: bool,

    /// Print trace events to standard error.
    #[arg(long)]
    trace: bool,

    /// Print inference and choice counters to standard error.
    #[arg(long)]
    stats: bool,

    /// Also run the exhaustive reference solver and print a comparison.
    #[arg(long)]
    oracle: bool,

    /// Unify without the occurs check.
    #[arg(long)]
    no_occurs_check: bool,

    /// Once a choice alternative succeeds, drop all of its remaining solutions.
    #[arg(long)]
    strict_commit: bool,

    /// Serve a module URL (or URL prefix) from a local file or directory.
    #[arg(long = "map", value_name = "URL=PATH")]
    map: Vec<String>,

    /// Read URL mappings from a file of `url<TAB>path` lines.
    #[arg(long, value_name = "FILE")]
    map_file: Option<PathBuf>,

    /// Maximum number of resolution steps per query.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: Option<u64>,

    /// Maximum goal nesting depth per query.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    max_depth: Option<u64>,

    /// Never fetch modules over HTTP.
    #[arg(long)]
    offline: bool,
}

fn build_session(args: &Args) -> anyhow::Result<Session> {
    let mut registry = ModuleRegistry::new().with_env_search_path();
    if !args.offline {
        registry = registry.with_http();
    }
    if let Some(path) = &args.map_file {
        registry
            .load_map_file(path)
            .with_context(|| format!("map file {}", path.display()))?;
    }
    for m in &args.map {
        let Some((url, path)) = m.split_once('=') else {
            bail!("--map expects URL=PATH, got {m:?}");
        };
        if url.is_empty() || path.is_empty() {
            bail!("--map expects URL=PATH, got {m:?}");
        }
        registry.register_mapping(url, path);
    }

    let mut options = SolveOptions {
        occurs_check: !args.no_occurs_check,
        strict_commit: args.strict_commit,
        ..SolveOptions::default()
    };
    if args.max_steps.is_some() {
        options.max_steps = args.max_steps;
    }
    if args.max_depth.is_some() {
        options.max_depth = args.max_depth.map(|d| d as usize);
    }

    let mut session = Session::new(registry, options);
    session.mode = if args.all { Mode::All } else { Mode::First };
    session.trace = args.trace;
    session.stats = args.stats;
    session.oracle = args.oracle;
    for path in &args.consult {
        session.consult(path)?;
    }
    Ok(session)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let args = Args::parse();
    let mut session = match build_session(&args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    let result = match &args.query {
        Some(q) => session.run_batch(q, &mut stdout.lock(), &mut stderr.lock()),
        None => {
            if io::stdin().is_terminal() {
                eprintln!("linweb {}: type :quit to leave", env!("CARGO_PKG_VERSION"));
            }
            repl::run(
                &mut session,
                &mut io::stdin().lock(),
                &mut stdout.lock(),
                &mut stderr.lock(),
            )
            .map(|()| 0)
        }
    };
    let _ = io::stdout().flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
