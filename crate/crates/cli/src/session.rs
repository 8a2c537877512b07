use std::cell::RefCell;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use linweb::{
    differential_check, parse_goal, parse_program, GFormula, Mode, ModuleRegistry, Program,
    SolveOptions, Solver, StatCounters,
};

pub const EXIT_ANSWER: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_ERROR: u8 = 2;
pub const EXIT_UNSOUND: u8 = 3;

/// Loaded program plus the settings every query runs with.
pub struct Session {
    pub program: Program,
    pub registry: ModuleRegistry,
    pub options: SolveOptions,
    pub mode: Mode,
    pub trace: bool,
    pub stats: bool,
    pub oracle: bool,
    pub last_stats: Option<StatCounters>,
}

impl Session {
    pub fn new(registry: ModuleRegistry, options: SolveOptions) -> Session {
        Session {
            program: Program::default(),
            registry,
            options,
            mode: Mode::First,
            trace: false,
            stats: false,
            oracle: false,
            last_stats: None,
        }
    }

    /// Adds a file's clauses to the program. Returns how many were added.
    pub fn consult(&mut self, path: &Path) -> anyhow::Result<usize> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let module = parse_program(&text).with_context(|| format!("{}", path.display()))?;
        let n = module.clauses.len();
        self.program.extend(module.clauses);
        Ok(n)
    }

    pub fn solver<'a>(&'a self, goal: &GFormula) -> Solver<'a> {
        Solver::new(&self.program, goal, &self.registry, self.options.clone())
    }

    /// Runs one query non-interactively and returns the process exit code.
    pub fn run_batch(
        &mut self,
        query: &str,
        out: &mut dyn Write,
        diag: &mut dyn Write,
    ) -> io::Result<u8> {
        let goal = match parse_goal(query) {
            Ok(g) => g,
            Err(e) => {
                writeln!(diag, "error: query: {e}")?;
                return Ok(EXIT_ERROR);
            }
        };
        if self.oracle {
            return self.run_oracle(&goal, out, diag);
        }
        let diag = RefCell::new(diag);
        let mut solver = self.solver(&goal);
        if self.trace {
            solver.set_tracer(|e| {
                let _ = writeln!(diag.borrow_mut(), "{e}");
            });
        }
        let mut found = 0;
        let code = loop {
            match solver.next_answer() {
                Ok(Some(a)) => {
                    found += 1;
                    writeln!(out, "{a}")?;
                    if self.mode == Mode::First {
                        break EXIT_ANSWER;
                    }
                }
                Ok(None) if found == 0 => {
                    writeln!(out, "false")?;
                    break EXIT_FAILURE;
                }
                Ok(None) => {
                    writeln!(out, "no more answers")?;
                    break EXIT_ANSWER;
                }
                Err(e) => {
                    writeln!(diag.borrow_mut(), "error: {e}")?;
                    break EXIT_ERROR;
                }
            }
        };
        let stats = solver.stats();
        drop(solver);
        if self.stats {
            writeln!(diag.borrow_mut(), "% {stats}")?;
        }
        self.last_stats = Some(stats);
        Ok(code)
    }

    fn run_oracle(
        &mut self,
        goal: &GFormula,
        out: &mut dyn Write,
        diag: &mut dyn Write,
    ) -> io::Result<u8> {
        let report = differential_check(&self.program, goal, &self.registry, &self.options);
        for a in &report.engine_answers {
            writeln!(out, "{a}")?;
        }
        writeln!(
            out,
            "{}",
            if report.engine_answers.is_empty() {
                "false"
            } else {
                "no more answers"
            }
        )?;
        writeln!(out, "{report}")?;
        Ok(if let Some(why) = &report.inconclusive {
            writeln!(diag, "error: {why}")?;
            EXIT_ERROR
        } else if !report.subset_holds {
            EXIT_UNSOUND
        } else if report.engine_answers.is_empty() {
            EXIT_FAILURE
        } else {
            EXIT_ANSWER
        })
    }
}
