//! Horn-clause logic programming extended with choice-conjunctive clauses
//! (`D0 & D1`) and URL-addressed modules loaded with `"url" => Goal`.
//!
//! Once one alternative of a choice clause proves a goal, the other is
//! discarded and never tried on backtracking.

pub mod engine;
pub mod modules;
pub mod oracle;
pub mod syntax;
pub mod term;

pub use engine::{
    call_builtin, solve, Answer, BuiltinError, Mode, Program, Solution, SolveError, SolveOptions,
    Solver, StatCounters, TraceEvent, TraceKind,
};
pub use modules::{elaborate_load, ModuleError, ModuleLoader, ModuleRegistry, NoModules};
pub use oracle::{differential_check, solve_nondet, DiffReport};
pub use syntax::{
    parse_clause, parse_goal, parse_program, parse_term, pretty_clause, pretty_goal,
    pretty_program, pretty_term, rename_fresh, DFormula, GFormula, ParseError, SourceModule,
};
pub use term::{apply, unify, Substitution, Term, UnifyError, Var, VarCounter};
