#![allow(dead_code)]

use std::path::PathBuf;

use linweb::syntax::{DFormula, GFormula};
use linweb::term::SOURCE_VAR_BASE;
use linweb::{Term, Var};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap()
}

const CONSTS: [&str; 3] = ["a", "b", "c"];
const VARS: [&str; 3] = ["X", "Y", "Z"];

/// A generated program together with a query against it.
#[derive(Clone, Debug)]
pub struct Case {
    pub program: String,
    pub goal: String,
}

pub struct ProgramShape {
    pub max_leaves: usize,
    pub max_choices: usize,
    pub hypotheses: bool,
}

impl ProgramShape {
    pub fn with_choice() -> Self {
        ProgramShape {
            max_leaves: 8,
            max_choices: 2,
            hypotheses: true,
        }
    }

    pub fn horn() -> Self {
        ProgramShape {
            max_leaves: 8,
            max_choices: 0,
            hypotheses: true,
        }
    }
}

/// Term text over a fixed alphabet, function-symbol depth at most `depth`.
fn term_text(rng: &mut impl Rng, depth: usize, vars: bool) -> String {
    let roll = rng.random_range(0..10);
    if depth > 0 && roll < 3 {
        if rng.random_bool(0.5) {
            format!("f({})", term_text(rng, depth - 1, vars))
        } else {
            format!(
                "g({},{})",
                term_text(rng, depth - 1, vars),
                term_text(rng, depth - 1, vars)
            )
        }
    } else if vars && roll < 7 {
        VARS.choose(rng).unwrap().to_string()
    } else {
        CONSTS.choose(rng).unwrap().to_string()
    }
}

fn atom_text(rng: &mut impl Rng, name: &str, arity: usize, vars: bool) -> String {
    if arity == 0 {
        return name.to_string();
    }
    let args: Vec<String> = (0..arity).map(|_| term_text(rng, 2, vars)).collect();
    format!("{name}({})", args.join(","))
}

/// Predicates p0..pn; pi only calls pj with j < i, so every search is finite.
fn arities(rng: &mut impl Rng) -> Vec<usize> {
    (0..4).map(|_| rng.random_range(0..=2)).collect()
}

fn body_text(rng: &mut impl Rng, level: usize, arity: &[usize], hypotheses: bool) -> String {
    let n = rng.random_range(1..=2);
    let goals: Vec<String> = (0..n)
        .map(|_| {
            let callee = rng.random_range(0..level);
            let call = atom_text(rng, &format!("p{callee}"), arity[callee], true);
            if hypotheses && rng.random_bool(0.15) {
                let h = rng.random_range(0..level);
                let hyp = atom_text(rng, &format!("p{h}"), arity[h], true);
                format!("({hyp}) => {call}")
            } else {
                call
            }
        })
        .collect();
    goals.join(", ")
}

fn leaf_text(rng: &mut impl Rng, level: usize, arity: &[usize], hypotheses: bool) -> String {
    let head = atom_text(rng, &format!("p{level}"), arity[level], true);
    if level == 0 || rng.random_bool(0.3) {
        head
    } else {
        format!("{head} :- {}", body_text(rng, level, arity, hypotheses))
    }
}

/// Random stratified program, no builtins, with a query on its top predicate.
pub fn random_case(rng: &mut impl Rng, shape: &ProgramShape) -> Case {
    let arity = arities(rng);
    let mut leaves = 0;
    let mut choices = 0;
    let mut program = String::new();
    let mut top = 0;
    'levels: for level in 0..arity.len() {
        for _ in 0..rng.random_range(1..=2) {
            let room = shape.max_leaves - leaves;
            if room == 0 {
                break 'levels;
            }
            top = level;
            if choices < shape.max_choices && room >= 2 && rng.random_bool(0.5) {
                let l = leaf_text(rng, level, &arity, shape.hypotheses);
                let r = leaf_text(rng, level, &arity, shape.hypotheses);
                program.push_str(&format!("({l}) & ({r}).\n"));
                choices += 1;
                leaves += 2;
            } else {
                program.push_str(&leaf_text(rng, level, &arity, shape.hypotheses));
                program.push_str(".\n");
                leaves += 1;
            }
        }
    }
    let goal = atom_text(rng, &format!("p{top}"), arity[top], true);
    Case { program, goal }
}

fn var(i: usize) -> Term {
    Term::Var(Var::new(
        SOURCE_VAR_BASE + i as u64,
        Some(format!("X{i}").into()),
    ))
}

/// Random term with at most `depth` nested function symbols.
pub fn random_term(rng: &mut impl Rng, depth: usize, nvars: usize) -> Term {
    let roll = rng.random_range(0..10);
    if depth > 0 && roll < 4 {
        let arity = rng.random_range(1..=3);
        let name = ["f", "g", "h"][arity - 1];
        Term::compound(
            name,
            (0..arity)
                .map(|_| random_term(rng, depth - 1, nvars))
                .collect(),
        )
    } else if roll < 7 {
        var(rng.random_range(0..nvars))
    } else if roll < 9 {
        Term::constant(CONSTS.choose(rng).unwrap())
    } else {
        Term::Int(rng.random_range(-3..=3))
    }
}

/// A pair sharing variables, biased toward pairs that unify.
pub fn random_pair(rng: &mut impl Rng, depth: usize) -> (Term, Term) {
    let a = random_term(rng, depth, 4);
    let b = if rng.random_bool(0.5) {
        perturb(rng, &a, depth)
    } else {
        random_term(rng, depth, 4)
    };
    (a, b)
}

fn perturb(rng: &mut impl Rng, t: &Term, depth: usize) -> Term {
    if rng.random_bool(0.25) {
        return random_term(rng, depth.min(2), 4);
    }
    match t {
        Term::Compound(f, args) => Term::Compound(
            f.clone(),
            args.iter()
                .map(|a| perturb(rng, a, depth.saturating_sub(1)))
                .collect(),
        ),
        other => other.clone(),
    }
}

/// A pair whose only unifiers would bind a variable to a term containing it.
pub fn cyclic_pair(rng: &mut impl Rng, i: usize) -> (Term, Term) {
    let x = var(0);
    let mut t = x.clone();
    for _ in 0..rng.random_range(1..=3) {
        let other = ground(&random_term(rng, 1, 1));
        t = if rng.random_bool(0.5) {
            Term::compound("f", vec![t])
        } else {
            Term::compound("g", vec![other, t])
        };
    }
    match i % 3 {
        0 => (x, t),
        1 => (t, x),
        // Through an intermediate variable: g(X, Y) = g(Y, t).
        _ => {
            let y = var(1);
            (
                Term::compound("g", vec![x, y.clone()]),
                Term::compound("g", vec![y, t]),
            )
        }
    }
}

fn ground(t: &Term) -> Term {
    match t {
        Term::Var(_) => Term::constant("a"),
        Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(ground).collect()),
        other => other.clone(),
    }
}

/// Random clause, closed over its variables.
pub fn random_clause(rng: &mut impl Rng, depth: usize) -> DFormula {
    clause_matrix(rng, depth).close()
}

/// Random goal, closed over its variables.
pub fn random_goal(rng: &mut impl Rng, depth: usize) -> GFormula {
    goal_matrix(rng, depth).close()
}

fn user_atom(rng: &mut impl Rng, depth: usize) -> Term {
    let name = ["p", "q", "r", "hello world", "s"].choose(rng).unwrap();
    let arity = rng.random_range(0..=2);
    Term::compound(
        name,
        (0..arity)
            .map(|_| random_list_or_term(rng, depth))
            .collect(),
    )
}

fn random_list_or_term(rng: &mut impl Rng, depth: usize) -> Term {
    if rng.random_bool(0.15) {
        let n = rng.random_range(0..3);
        let items: Vec<Term> = (0..n).map(|_| random_term(rng, 1, 3)).collect();
        if rng.random_bool(0.3) {
            Term::list_with_tail(items, var(rng.random_range(0..3)))
        } else {
            Term::list(items)
        }
    } else {
        random_term(rng, depth.min(2), 3)
    }
}

fn clause_matrix(rng: &mut impl Rng, depth: usize) -> DFormula {
    let roll = if depth == 0 {
        0
    } else {
        rng.random_range(0..10)
    };
    match roll {
        0..=3 => DFormula::atom(user_atom(rng, depth)),
        4..=7 => {
            let head = if rng.random_bool(0.8) {
                DFormula::atom(user_atom(rng, depth))
            } else {
                clause_matrix(rng, depth - 1)
            };
            DFormula::imp(goal_matrix(rng, depth - 1), head)
        }
        _ => DFormula::choice(clause_matrix(rng, depth - 1), clause_matrix(rng, depth - 1)),
    }
}

fn goal_matrix(rng: &mut impl Rng, depth: usize) -> GFormula {
    let roll = if depth == 0 {
        0
    } else {
        rng.random_range(0..10)
    };
    match roll {
        0..=2 => GFormula::atom(user_atom(rng, depth)),
        3 => {
            let name = linweb::syntax::BUILTINS.choose(rng).unwrap();
            GFormula::atom(Term::compound(
                name,
                vec![random_term(rng, 1, 3), random_term(rng, 1, 3)],
            ))
        }
        4..=6 => GFormula::and(goal_matrix(rng, depth - 1), goal_matrix(rng, depth - 1)),
        7..=8 => GFormula::assume(clause_matrix(rng, depth - 1), goal_matrix(rng, depth - 1)),
        _ => {
            let url = ["u", "www.dau.com/lists", "http://x.org/m.lw"]
                .choose(rng)
                .unwrap();
            GFormula::load(url, goal_matrix(rng, depth - 1))
        }
    }
}
