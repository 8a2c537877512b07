//! Concrete syntax of `.lw` programs and queries.
//!
//! ```text
//! program   ::= [ "mod" "(" STRING ")" "." ] unit*
//! unit      ::= choice "."
//! choice    ::= imp ( "&" imp )*                 % right-associative
//! imp       ::= conj [ ":-" conj ]
//! conj      ::= arrow ( "," arrow )*             % right-associative
//! arrow     ::= primary [ "=>" arrow ]
//! primary   ::= "(" choice ")" | STRING | term [ cmp term ]
//! cmp       ::= ">=" | ">" | "=<" | "<" | "="
//! term      ::= VAR | INT | atom [ "(" term ( "," term )* ")" ]
//!             | "[" "]" | "[" term ( "," term )* [ "|" term ] "]"
//! ```
//!
//! In clause position `head :- body` is an implication and `&` joins
//! alternatives; in goal position `,` is conjunction and `lhs => goal`
//! either loads a module (`lhs` a string) or assumes a clause.

mod ast;
mod lexer;
mod parser;
mod pretty;

use std::fmt;

use thiserror::Error;

pub use ast::{
    alpha_eq_clauses, alpha_eq_goals, is_builtin, is_builtin_term, rename_fresh, DFormula,
    GFormula, SourceModule, BUILTINS,
};
pub use lexer::Pos;
pub use parser::{parse_clause, parse_goal, parse_program, parse_term};
pub use pretty::{pretty_clause, pretty_goal, pretty_program, pretty_term};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn new(pos: Pos, message: String, expected: Vec<String>) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            message,
            expected,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}
