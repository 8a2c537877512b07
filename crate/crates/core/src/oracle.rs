//! Reference solver: every choice clause is read as plain alternation, so
//! both sides are always reachable on backtracking.
//!
//! It shares terms, syntax and module loading with the engine but has its
//! own, deliberately simple search: clauses are expanded up front into their
//! Horn alternatives and the search is a recursive depth-first enumeration
//! over immutable substitutions. Used as ground truth in differential tests.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use crate::engine::{call_builtin, Answer, Program, SolveError, SolveOptions, Solver};
use crate::modules::{elaborate, ModuleLoader};
use crate::syntax::{DFormula, GFormula};
use crate::term::{Substitution, Term, VarCounter};

/// Stack for the oracle's recursion.
const ORACLE_STACK_BYTES: usize = 512 << 20;
/// Recursion bound, kept well inside the stack above.
const MAX_RECURSION: usize = 200_000;

/// Enumerates every answer of `goal`, depth-first, left to right.
pub fn solve_nondet(
    program: &Program,
    goal: &GFormula,
    loader: &dyn ModuleLoader,
    options: &SolveOptions,
) -> Result<Vec<Answer>, SolveError> {
    let (answers, err) = enumerate(program, goal, loader, options);
    match err {
        Some(e) => Err(e),
        None => Ok(answers),
    }
}

/// Answers found, plus the error that cut enumeration short, if any.
fn enumerate(
    program: &Program,
    goal: &GFormula,
    loader: &dyn ModuleLoader,
    options: &SolveOptions,
) -> (Vec<Answer>, Option<SolveError>) {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .name("linweb-oracle".into())
            .stack_size(ORACLE_STACK_BYTES)
            .spawn_scoped(s, || {
                let mut search = Search::new(program, loader, options);
                let err = search.run(goal).err();
                (search.answers, err)
            })
            .expect("spawn oracle thread")
            .join()
            .expect("oracle thread panicked")
    })
}

#[derive(Clone)]
enum Hyps {
    Empty,
    Cons(Arc<DFormula>, Rc<Hyps>),
}

/// Pending goals, each with the hypotheses in force for it.
enum Goals {
    Done,
    Goal(Arc<GFormula>, Rc<Hyps>, Rc<Goals>),
}

struct Search<'a> {
    program: &'a Program,
    loader: &'a dyn ModuleLoader,
    occurs_check: bool,
    max_steps: Option<u64>,
    max_depth: Option<usize>,
    steps: u64,
    vars: VarCounter,
    query: Vec<(String, Term)>,
    answers: Vec<Answer>,
}

impl<'a> Search<'a> {
    fn new(program: &'a Program, loader: &'a dyn ModuleLoader, options: &SolveOptions) -> Self {
        Search {
            program,
            loader,
            occurs_check: options.occurs_check,
            max_steps: options.max_steps,
            max_depth: options.max_depth,
            steps: 0,
            vars: VarCounter::new(),
            query: Vec::new(),
            answers: Vec::new(),
        }
    }

    fn run(&mut self, goal: &GFormula) -> Result<(), SolveError> {
        let mut map = HashMap::new();
        let mut g = goal;
        while let GFormula::Exists(v, inner) = g {
            let fresh = Term::Var(self.vars.fresh());
            self.query.push((v.display_name(), fresh.clone()));
            map.insert(v.id, fresh);
            g = inner;
        }
        let goals = Rc::new(Goals::Goal(
            Arc::new(g.rename(&map)),
            Rc::new(Hyps::Empty),
            Rc::new(Goals::Done),
        ));
        self.prove(&goals, &Substitution::new(), 0, 0)
    }

    fn prove(
        &mut self,
        goals: &Rc<Goals>,
        s: &Substitution,
        depth: usize,
        recursion: usize,
    ) -> Result<(), SolveError> {
        if recursion > MAX_RECURSION {
            return Err(SolveError::DepthLimit(MAX_RECURSION));
        }
        let Goals::Goal(goal, hyps, rest) = &**goals else {
            let bindings = self
                .query
                .iter()
                .map(|(n, t)| (n.clone(), s.apply(t)))
                .collect();
            self.answers.push(Answer::new(bindings));
            return Ok(());
        };
        match &**goal {
            GFormula::Atom {
                atom,
                builtin: true,
            } => {
                self.count_step()?;
                let mut s2 = s.clone();
                let mut trail = Vec::new();
                if call_builtin(atom, &mut s2, &mut trail, self.occurs_check)? {
                    self.prove(rest, &s2, depth, recursion + 1)?;
                }
                Ok(())
            }
            GFormula::Atom { atom, .. } => {
                if let Some(max) = self.max_depth {
                    if depth > max {
                        return Err(SolveError::DepthLimit(max));
                    }
                }
                for clause in self.clauses_for(atom, hyps) {
                    self.count_step()?;
                    for (head, bodies) in expand(&clause, &mut self.vars) {
                        let mut s2 = s.clone();
                        let mut trail = Vec::new();
                        if s2
                            .unify_in_place(&head, atom, self.occurs_check, &mut trail)
                            .is_err()
                        {
                            continue;
                        }
                        let mut next = rest.clone();
                        for b in bodies.into_iter().rev() {
                            next = Rc::new(Goals::Goal(b, hyps.clone(), next));
                        }
                        self.prove(&next, &s2, depth + 1, recursion + 1)?;
                    }
                }
                Ok(())
            }
            GFormula::And(l, r) => {
                let next = Rc::new(Goals::Goal(
                    l.clone(),
                    hyps.clone(),
                    Rc::new(Goals::Goal(r.clone(), hyps.clone(), rest.clone())),
                ));
                self.prove(&next, s, depth, recursion + 1)
            }
            GFormula::Exists(v, body) => {
                let fresh = Term::Var(self.vars.fresh());
                let body = body.rename(&HashMap::from([(v.id, fresh)]));
                let next = Rc::new(Goals::Goal(Arc::new(body), hyps.clone(), rest.clone()));
                self.prove(&next, s, depth, recursion + 1)
            }
            GFormula::Assume(d, body) => {
                let inner = Rc::new(Hyps::Cons(d.clone(), hyps.clone()));
                let next = Rc::new(Goals::Goal(body.clone(), inner, rest.clone()));
                self.prove(&next, s, depth, recursion + 1)
            }
            GFormula::Load(url, body) => {
                let clauses = self.loader.load_module(url)?;
                let g = elaborate(&clauses, (**body).clone());
                let next = Rc::new(Goals::Goal(Arc::new(g), hyps.clone(), rest.clone()));
                self.prove(&next, s, depth, recursion + 1)
            }
        }
    }

    fn count_step(&mut self) -> Result<(), SolveError> {
        self.steps += 1;
        match self.max_steps {
            Some(max) if self.steps > max => Err(SolveError::StepLimit(max)),
            _ => Ok(()),
        }
    }

    fn clauses_for(&self, atom: &Term, hyps: &Rc<Hyps>) -> Vec<Arc<DFormula>> {
        let Some((name, arity)) = atom.functor() else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut h = &**hyps;
        while let Hyps::Cons(d, next) = h {
            out.push(d.clone());
            h = next;
        }
        out.extend(self.program.clauses().iter().cloned());
        out.retain(|d| d.heads().iter().any(|t| t.functor() == Some((name, arity))));
        out
    }
}

/// Instantiates a clause and lists its Horn alternatives as
/// `(head, bodies outermost first)`, left alternative first.
fn expand(d: &DFormula, vars: &mut VarCounter) -> Vec<(Term, Vec<Arc<GFormula>>)> {
    fn go(
        d: &DFormula,
        env: &HashMap<u64, Term>,
        vars: &mut VarCounter,
        prefix: &mut Vec<Arc<GFormula>>,
        out: &mut Vec<(Term, Vec<Arc<GFormula>>)>,
    ) {
        match d {
            DFormula::Atom(h) => out.push((h.rename(env), prefix.clone())),
            DFormula::Imp(body, head) => {
                prefix.push(Arc::new(body.rename(env)));
                go(head, env, vars, prefix, out);
                prefix.pop();
            }
            DFormula::All(v, inner) => {
                let mut env = env.clone();
                env.insert(v.id, Term::Var(vars.fresh()));
                go(inner, &env, vars, prefix, out);
            }
            DFormula::Choice(l, r) => {
                go(l, env, vars, prefix, out);
                go(r, env, vars, prefix, out);
            }
        }
    }
    let mut out = Vec::new();
    go(d, &HashMap::new(), vars, &mut Vec::new(), &mut out);
    out
}

/// Outcome of running the engine and the oracle on the same query.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffReport {
    pub engine_answers: Vec<Answer>,
    pub oracle_answers: Vec<Answer>,
    /// Every engine answer is also an oracle answer.
    pub subset_holds: bool,
    /// The engine's first answer is among the oracle's answers (when the
    /// engine has no answer: the oracle has none either).
    pub first_answer_matched: bool,
    /// Why the comparison is not conclusive (a limit or error on either side).
    pub inconclusive: Option<String>,
}

impl DiffReport {
    pub fn is_conclusive(&self) -> bool {
        self.inconclusive.is_none()
    }

    /// Same answers in the same order.
    pub fn sequences_identical(&self) -> bool {
        self.engine_answers == self.oracle_answers
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |answers: &[Answer]| {
            answers
                .iter()
                .map(|a| format!("{{{a}}}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(
            f,
            "% engine answers ({}): {}",
            self.engine_answers.len(),
            list(&self.engine_answers)
        )?;
        writeln!(
            f,
            "% oracle answers ({}): {}",
            self.oracle_answers.len(),
            list(&self.oracle_answers)
        )?;
        writeln!(f, "% subset holds: {}", self.subset_holds)?;
        write!(f, "% first answer matched: {}", self.first_answer_matched)?;
        if let Some(why) = &self.inconclusive {
            write!(f, "\n% inconclusive: {why}")?;
        }
        Ok(())
    }
}

/// Runs both solvers in all-answers mode and compares their answer sets.
pub fn differential_check(
    program: &Program,
    goal: &GFormula,
    loader: &dyn ModuleLoader,
    options: &SolveOptions,
) -> DiffReport {
    let mut engine_answers = Vec::new();
    let mut engine_err = None;
    let mut solver = Solver::new(program, goal, loader, options.clone());
    loop {
        match solver.next_answer() {
            Ok(Some(a)) => engine_answers.push(a),
            Ok(None) => break,
            Err(e) => {
                engine_err = Some(e);
                break;
            }
        }
    }
    let (oracle_answers, oracle_err) = enumerate(program, goal, loader, options);
    let oracle_set: HashSet<&Answer> = oracle_answers.iter().collect();
    let subset_holds = engine_answers.iter().all(|a| oracle_set.contains(a));
    let first_answer_matched = match engine_answers.first() {
        Some(a) => oracle_set.contains(a),
        None => oracle_answers.is_empty(),
    };
    let inconclusive = match (engine_err, oracle_err) {
        (None, None) => None,
        (Some(e), None) => Some(format!("engine: {e}")),
        (None, Some(e)) => Some(format!("oracle: {e}")),
        (Some(e), Some(o)) => Some(format!("engine: {e}; oracle: {o}")),
    };
    DiffReport {
        engine_answers,
        oracle_answers,
        subset_holds,
        first_answer_matched,
        inconclusive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::NoModules;
    use crate::syntax::parse_goal;

    fn nondet(src: &str, goal: &str) -> Vec<String> {
        let p = Program::parse(src).unwrap();
        solve_nondet(
            &p,
            &parse_goal(goal).unwrap(),
            &NoModules,
            &SolveOptions::default(),
        )
        .unwrap()
        .iter()
        .map(|a| a.to_string())
        .collect()
    }

    const MAX: &str = "(max(X,Y,X) :- X >= Y) & (max(X,Y,Y) :- X < Y).";
    const APPEND: &str = "append([],L,L) & (append([X|L1],L2,[X|L3]) :- append(L1,L2,L3)).";

    #[test]
    fn both_disjuncts_reachable() {
        assert_eq!(
            nondet(APPEND, "append(X,Y,[1,2])"),
            ["X = [], Y = [1,2]", "X = [1], Y = [2]", "X = [1,2], Y = []"]
        );
    }

    #[test]
    fn exclusive_guards_add_nothing() {
        assert_eq!(nondet(MAX, "max(9,3,M)"), ["M = 9"]);
        assert_eq!(nondet(MAX, "max(3,9,M)"), ["M = 9"]);
    }

    #[test]
    fn empty_program() {
        assert!(nondet("", "p").is_empty());
    }

    #[test]
    fn expansion_keeps_bodies_outermost_first() {
        let d = crate::syntax::parse_clause("((h(X) :- b2(X)) & h(z)) :- b1(X).").unwrap();
        let alts = expand(&d, &mut VarCounter::new());
        let shown: Vec<String> = alts
            .iter()
            .map(|(h, bs)| {
                let bs: Vec<String> = bs.iter().map(|b| b.to_string()).collect();
                format!("{h} <- {}", bs.join(" ; "))
            })
            .collect();
        assert_eq!(shown, ["h(_G0) <- b1(_G0) ; b2(_G0)", "h(z) <- b1(_G0)"]);
    }

    #[test]
    fn report_for_max() {
        let p = Program::parse(MAX).unwrap();
        let r = differential_check(
            &p,
            &parse_goal("max(9,3,M)").unwrap(),
            &NoModules,
            &SolveOptions::default(),
        );
        assert!(r.is_conclusive());
        assert!(r.subset_holds && r.first_answer_matched);
        assert_eq!(r.engine_answers, r.oracle_answers);
    }

    #[test]
    fn report_for_choice_append() {
        let p = Program::parse(APPEND).unwrap();
        let r = differential_check(
            &p,
            &parse_goal("append(X,Y,[1,2])").unwrap(),
            &NoModules,
            &SolveOptions::default(),
        );
        assert_eq!((r.engine_answers.len(), r.oracle_answers.len()), (1, 3));
        assert!(r.subset_holds);
        assert!(!r.sequences_identical());
    }

    #[test]
    fn report_for_horn_append_is_identical() {
        let p = Program::parse("append([],L,L).\nappend([X|L1],L2,[X|L3]) :- append(L1,L2,L3).")
            .unwrap();
        let r = differential_check(
            &p,
            &parse_goal("append([1],[2],L)").unwrap(),
            &NoModules,
            &SolveOptions::default(),
        );
        assert!(r.sequences_identical());
        assert_eq!(r.engine_answers[0].to_string(), "L = [1,2]");
    }

    #[test]
    fn limits_make_reports_inconclusive() {
        let p = Program::parse("loop :- loop.").unwrap();
        let opts = SolveOptions {
            max_steps: Some(500),
            ..SolveOptions::default()
        };
        let r = differential_check(&p, &parse_goal("loop").unwrap(), &NoModules, &opts);
        assert!(!r.is_conclusive());
    }
}
