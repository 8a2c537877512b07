//! Proof search with committed choice.
//!
//! Goals are reduced by their top-level connective (conjunction, hypothesis,
//! module load, existential); atomic goals select a clause and backchain on
//! it. Backchaining walks down the clause to its head, unifies the head with
//! the goal, then solves the bodies collected on the way, outermost first.
//!
//! A choice clause `D0 & D1` tries `D0` first. The first time `D0` succeeds
//! (head and bodies), the choice commits: `D1` is dropped and will not be
//! tried on backtracking. Further solutions from inside `D0` remain
//! available. `D1` is tried only if `D0` fails without ever succeeding.
//! With [`SolveOptions::strict_commit`] a commit also discards the
//! remaining alternatives inside the committed side.

mod builtins;
mod trace;

use std::cell::Cell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use thiserror::Error;

pub use builtins::{call_builtin, BuiltinError};
pub use trace::{find_pruned_exploration, Side, TraceEvent, TraceKind};

use crate::modules::{elaborate, ModuleError, ModuleLoader};
use crate::syntax::{rename_fresh, DFormula, GFormula, SourceModule};
use crate::term::{Substitution, Term, Var, VarCounter};

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    First,
    All,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    /// Bound on inference steps (clause tries and builtin calls).
    pub max_steps: Option<u64>,
    /// Bound on goal nesting depth.
    pub max_depth: Option<usize>,
    pub occurs_check: bool,
    /// Commit discards every remaining alternative inside the committed
    /// side, not only the sibling.
    pub strict_commit: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_steps: Some(DEFAULT_MAX_STEPS),
            max_depth: None,
            occurs_check: true,
            strict_commit: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StatCounters {
    /// Backchaining steps (one per clause tried).
    pub inferences: u64,
    pub choice_commits: u64,
    /// Sibling alternatives discarded without being explored.
    pub choice_prunes: u64,
    pub hypotheses_pushed: u64,
}

impl fmt::Display for StatCounters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "inferences={} choice_commits={} choice_prunes={} hypotheses_pushed={}",
            self.inferences, self.choice_commits, self.choice_prunes, self.hypotheses_pushed
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("step limit of {0} exceeded")]
    StepLimit(u64),
    #[error("depth limit of {0} exceeded")]
    DepthLimit(usize),
    #[error(transparent)]
    Builtin(#[from] BuiltinError),
    #[error(transparent)]
    Module(#[from] ModuleError),
}

impl SolveError {
    pub fn is_limit(&self) -> bool {
        matches!(self, SolveError::StepLimit(_) | SolveError::DepthLimit(_))
    }
}

/// Bindings of the query's variables, fully dereferenced. Unbound variables
/// left in the answer are renamed `_G0`, `_G1`, ... in order of appearance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Answer {
    pub bindings: Vec<(String, Term)>,
}

impl Answer {
    pub fn new(bindings: Vec<(String, Term)>) -> Answer {
        let mut rename = HashMap::new();
        let mut next = 0u64;
        for (_, t) in &bindings {
            for v in t.vars() {
                rename.entry(v.id).or_insert_with(|| {
                    let fresh = Term::Var(Var::anonymous(next));
                    next += 1;
                    fresh
                });
            }
        }
        Answer {
            bindings: bindings
                .into_iter()
                .map(|(n, t)| (n, t.rename(&rename)))
                .collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.bindings
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bindings.is_empty() {
            return f.write_str("true");
        }
        for (i, (name, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name} = {t}")?;
        }
        Ok(())
    }
}

/// Static clauses in source order. Immutable and shareable across solvers.
#[derive(Clone, Debug, Default)]
pub struct Program {
    clauses: Vec<Arc<DFormula>>,
}

impl Program {
    pub fn new(clauses: impl IntoIterator<Item = DFormula>) -> Program {
        Program {
            clauses: clauses.into_iter().map(Arc::new).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Program, crate::syntax::ParseError> {
        Ok(Program::from(crate::syntax::parse_program(text)?))
    }

    pub fn extend(&mut self, clauses: impl IntoIterator<Item = DFormula>) {
        self.clauses.extend(clauses.into_iter().map(Arc::new));
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clauses(&self) -> &[Arc<DFormula>] {
        &self.clauses
    }
}

impl From<SourceModule> for Program {
    fn from(m: SourceModule) -> Self {
        Program::new(m.clauses)
    }
}

/// Collected result of [`solve`].
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub answers: Vec<Answer>,
    pub stats: StatCounters,
}

/// Runs a query to completion (or to its first answer in [`Mode::First`]).
pub fn solve(
    program: &Program,
    goal: &GFormula,
    mode: Mode,
    loader: &dyn ModuleLoader,
    options: &SolveOptions,
) -> Result<Solution, SolveError> {
    let mut solver = Solver::new(program, goal, loader, options.clone());
    let mut answers = Vec::new();
    while let Some(a) = solver.next_answer()? {
        answers.push(a);
        if mode == Mode::First {
            break;
        }
    }
    Ok(Solution {
        answers,
        stats: solver.stats(),
    })
}

type Hyps = Option<Rc<HypNode>>;

type Tracer<'a> = Box<dyn FnMut(&TraceEvent) + 'a>;

struct HypNode {
    clause: Arc<DFormula>,
    next: Hyps,
}

type Cont = Option<Rc<ContNode>>;

struct ContNode {
    frame: Frame,
    next: Cont,
}

fn push(frame: Frame, next: Cont) -> Cont {
    Some(Rc::new(ContNode { frame, next }))
}

/// One choice-clause use. Shared by the sibling's choice point and the
/// commit frames so the flag outlives neither.
struct ChoiceInstance {
    id: u64,
    committed: Cell<bool>,
    /// Choice-point stack height just before the sibling was pushed.
    cp_height: usize,
    left: Arc<DFormula>,
    right: Arc<DFormula>,
}

enum Frame {
    Goal {
        goal: Arc<GFormula>,
        hyps: Hyps,
        depth: usize,
    },
    Commit {
        choice: Rc<ChoiceInstance>,
        side: Side,
        depth: usize,
    },
    Exit {
        atom: Term,
        depth: usize,
    },
    Pop {
        clause: Arc<DFormula>,
        depth: usize,
    },
}

enum Alternative {
    /// Remaining candidate clauses for an atomic goal.
    Clauses {
        atom: Term,
        depth: usize,
        hyps: Hyps,
        candidates: Rc<[Arc<DFormula>]>,
        next: usize,
    },
    /// The right side of a choice, pending until the left side fails.
    Sibling {
        choice: Rc<ChoiceInstance>,
        atom: Term,
        depth: usize,
        hyps: Hyps,
        bodies: Vec<Arc<GFormula>>,
        commits: Vec<(Rc<ChoiceInstance>, Side)>,
    },
}

struct ChoicePoint {
    alt: Alternative,
    cont: Cont,
    trail_mark: usize,
    hyp_depth: usize,
}

/// Walks down a clause toward its head.
struct Descent {
    bodies: Vec<Arc<GFormula>>,
    commits: Vec<(Rc<ChoiceInstance>, Side)>,
}

/// A single query's proof search. Yields answers lazily; single-threaded.
pub struct Solver<'a> {
    program: &'a Program,
    loader: &'a dyn ModuleLoader,
    options: SolveOptions,
    subst: Substitution,
    trail: Vec<u64>,
    vars: VarCounter,
    choicepoints: Vec<ChoicePoint>,
    next_choice_id: u64,
    stats: StatCounters,
    steps: u64,
    hyp_depth: usize,
    query: Vec<(String, Term)>,
    /// `Some(cont)` to resume; `None` means backtrack first.
    pending: Option<Cont>,
    done: bool,
    tracer: Option<Tracer<'a>>,
}

impl<'a> Solver<'a> {
    pub fn new(
        program: &'a Program,
        goal: &GFormula,
        loader: &'a dyn ModuleLoader,
        options: SolveOptions,
    ) -> Solver<'a> {
        let mut vars = VarCounter::new();
        let mut query = Vec::new();
        let mut map = HashMap::new();
        let mut g = goal;
        while let GFormula::Exists(v, inner) = g {
            let fresh = Term::Var(vars.fresh());
            query.push((v.display_name(), fresh.clone()));
            map.insert(v.id, fresh);
            g = inner;
        }
        let body = Arc::new(g.rename(&map));
        Solver {
            program,
            loader,
            options,
            subst: Substitution::new(),
            trail: Vec::new(),
            vars,
            choicepoints: Vec::new(),
            next_choice_id: 0,
            stats: StatCounters::default(),
            steps: 0,
            hyp_depth: 0,
            query,
            pending: Some(push(
                Frame::Goal {
                    goal: body,
                    hyps: None,
                    depth: 0,
                },
                None,
            )),
            done: false,
            tracer: None,
        }
    }

    pub fn set_tracer(&mut self, tracer: impl FnMut(&TraceEvent) + 'a) {
        self.tracer = Some(Box::new(tracer));
    }

    pub fn stats(&self) -> StatCounters {
        self.stats
    }

    /// Static program size plus hypotheses currently in force.
    pub fn context_len(&self) -> usize {
        self.program.len() + self.hyp_depth
    }

    /// Names of the query variables, in answer order.
    pub fn query_vars(&self) -> impl Iterator<Item = &str> {
        self.query.iter().map(|(n, _)| n.as_str())
    }

    pub fn next_answer(&mut self) -> Result<Option<Answer>, SolveError> {
        if self.done {
            return Ok(None);
        }
        match self.run() {
            Ok(true) => Ok(Some(self.answer())),
            Ok(false) => {
                self.finish();
                Ok(None)
            }
            Err(e) => {
                self.finish();
                Err(e)
            }
        }
    }

    fn finish(&mut self) {
        self.done = true;
        self.choicepoints.clear();
        self.hyp_depth = 0;
    }

    fn answer(&self) -> Answer {
        Answer::new(
            self.query
                .iter()
                .map(|(n, t)| (n.clone(), self.subst.apply(t)))
                .collect(),
        )
    }

    fn tracing(&self) -> bool {
        self.tracer.is_some()
    }

    fn emit(
        &mut self,
        kind: TraceKind,
        depth: usize,
        choice: Option<(u64, Side)>,
        subject: String,
    ) {
        if let Some(t) = self.tracer.as_mut() {
            t(&TraceEvent {
                kind,
                depth,
                choice,
                subject,
            });
        }
    }

    fn show_term(&self, t: &Term) -> String {
        self.subst.apply(t).to_string()
    }

    fn show_clause(&self, d: &DFormula) -> String {
        let map: HashMap<u64, Term> = d
            .free_vars()
            .into_iter()
            .map(|v| {
                let t = self.subst.apply(&Term::Var(v.clone()));
                (v.id, t)
            })
            .collect();
        d.rename(&map).to_string()
    }

    fn tick(&mut self) -> Result<(), SolveError> {
        self.steps += 1;
        match self.options.max_steps {
            Some(max) if self.steps > max => Err(SolveError::StepLimit(max)),
            _ => Ok(()),
        }
    }

    /// Returns true on reaching an empty continuation, false once every
    /// alternative is exhausted.
    fn run(&mut self) -> Result<bool, SolveError> {
        loop {
            let cont = match self.pending.take() {
                Some(c) => c,
                None => match self.backtrack()? {
                    Some(c) => c,
                    None => return Ok(false),
                },
            };
            let Some(node) = cont else {
                return Ok(true);
            };
            self.pending = self.step(&node.frame, node.next.clone())?;
        }
    }

    /// Executes one frame. `None` means failure.
    fn step(&mut self, frame: &Frame, rest: Cont) -> Result<Option<Cont>, SolveError> {
        match frame {
            Frame::Goal { goal, hyps, depth } => self.reduce(goal, hyps, *depth, rest),
            Frame::Commit {
                choice,
                side,
                depth,
            } => {
                if !choice.committed.get() {
                    choice.committed.set(true);
                    self.stats.choice_commits += 1;
                    if self.tracing() {
                        let chosen = match side {
                            Side::Left => &choice.left,
                            Side::Right => &choice.right,
                        };
                        let s = self.show_clause(chosen);
                        self.emit(TraceKind::Commit, *depth, Some((choice.id, *side)), s);
                    }
                    if *side == Side::Left {
                        self.stats.choice_prunes += 1;
                        if self.tracing() {
                            let s = self.show_clause(&choice.right);
                            self.emit(TraceKind::Prune, *depth, Some((choice.id, Side::Right)), s);
                        }
                    }
                    if self.options.strict_commit {
                        self.choicepoints.truncate(choice.cp_height);
                    }
                }
                Ok(Some(rest))
            }
            Frame::Exit { atom, depth } => {
                if self.tracing() {
                    let s = self.show_term(atom);
                    self.emit(TraceKind::Exit, *depth, None, s);
                }
                Ok(Some(rest))
            }
            Frame::Pop { clause, depth } => {
                self.hyp_depth -= 1;
                if self.tracing() {
                    let s = self.show_clause(clause);
                    self.emit(TraceKind::Pop, *depth, None, s);
                }
                Ok(Some(rest))
            }
        }
    }

    fn reduce(
        &mut self,
        goal: &Arc<GFormula>,
        hyps: &Hyps,
        depth: usize,
        rest: Cont,
    ) -> Result<Option<Cont>, SolveError> {
        match &**goal {
            GFormula::Atom {
                atom,
                builtin: true,
            } => {
                self.tick()?;
                let ok = call_builtin(
                    atom,
                    &mut self.subst,
                    &mut self.trail,
                    self.options.occurs_check,
                )?;
                Ok(ok.then_some(rest))
            }
            GFormula::Atom { atom, .. } => {
                if let Some(max) = self.options.max_depth {
                    if depth > max {
                        return Err(SolveError::DepthLimit(max));
                    }
                }
                if self.tracing() {
                    let s = self.show_term(atom);
                    self.emit(TraceKind::Call, depth, None, s);
                }
                let candidates = self.candidates(atom, hyps);
                self.choicepoints.push(ChoicePoint {
                    alt: Alternative::Clauses {
                        atom: atom.clone(),
                        depth,
                        hyps: hyps.clone(),
                        candidates,
                        next: 0,
                    },
                    cont: rest,
                    trail_mark: self.trail.len(),
                    hyp_depth: self.hyp_depth,
                });
                // the choice point just pushed supplies the first clause
                Ok(None)
            }
            GFormula::And(l, r) => {
                let rest = push(
                    Frame::Goal {
                        goal: r.clone(),
                        hyps: hyps.clone(),
                        depth,
                    },
                    rest,
                );
                Ok(Some(push(
                    Frame::Goal {
                        goal: l.clone(),
                        hyps: hyps.clone(),
                        depth,
                    },
                    rest,
                )))
            }
            GFormula::Exists(v, body) => {
                let fresh = Term::Var(self.vars.fresh());
                let body = body.rename(&HashMap::from([(v.id, fresh)]));
                Ok(Some(push(
                    Frame::Goal {
                        goal: Arc::new(body),
                        hyps: hyps.clone(),
                        depth,
                    },
                    rest,
                )))
            }
            GFormula::Assume(clause, body) => {
                self.hyp_depth += 1;
                self.stats.hypotheses_pushed += 1;
                if self.tracing() {
                    let s = self.show_clause(clause);
                    self.emit(TraceKind::Push, depth, None, s);
                }
                let inner: Hyps = Some(Rc::new(HypNode {
                    clause: clause.clone(),
                    next: hyps.clone(),
                }));
                let rest = push(
                    Frame::Pop {
                        clause: clause.clone(),
                        depth,
                    },
                    rest,
                );
                Ok(Some(push(
                    Frame::Goal {
                        goal: body.clone(),
                        hyps: inner,
                        depth,
                    },
                    rest,
                )))
            }
            GFormula::Load(url, body) => {
                let clauses = self.loader.load_module(url)?;
                let elaborated = elaborate(&clauses, (**body).clone());
                Ok(Some(push(
                    Frame::Goal {
                        goal: Arc::new(elaborated),
                        hyps: hyps.clone(),
                        depth,
                    },
                    rest,
                )))
            }
        }
    }

    /// Hypotheses (most recent first), then static clauses in source order,
    /// restricted to clauses with a leaf for the goal's predicate.
    fn candidates(&self, atom: &Term, hyps: &Hyps) -> Rc<[Arc<DFormula>]> {
        let Some((name, arity)) = atom.functor() else {
            return Rc::from(Vec::new());
        };
        let mut out = Vec::new();
        let mut h = hyps;
        while let Some(node) = h {
            if node.clause.defines(name, arity) {
                out.push(node.clause.clone());
            }
            h = &node.next;
        }
        out.extend(
            self.program
                .clauses
                .iter()
                .filter(|d| d.defines(name, arity))
                .cloned(),
        );
        out.into()
    }

    fn backtrack(&mut self) -> Result<Option<Cont>, SolveError> {
        while let Some(cp) = self.choicepoints.pop() {
            self.subst.undo(&mut self.trail, cp.trail_mark);
            self.hyp_depth = cp.hyp_depth;
            match cp.alt {
                Alternative::Clauses {
                    atom,
                    depth,
                    hyps,
                    candidates,
                    next,
                } => {
                    let Some(clause) = candidates.get(next).cloned() else {
                        if self.tracing() {
                            let s = self.show_term(&atom);
                            self.emit(TraceKind::Fail, depth, None, s);
                        }
                        continue;
                    };
                    self.choicepoints.push(ChoicePoint {
                        alt: Alternative::Clauses {
                            atom: atom.clone(),
                            depth,
                            hyps: hyps.clone(),
                            candidates,
                            next: next + 1,
                        },
                        cont: cp.cont.clone(),
                        trail_mark: cp.trail_mark,
                        hyp_depth: cp.hyp_depth,
                    });
                    self.tick()?;
                    self.stats.inferences += 1;
                    let renamed = Arc::new(rename_fresh(&clause, &mut self.vars));
                    let descent = Descent {
                        bodies: Vec::new(),
                        commits: Vec::new(),
                    };
                    if let Some(c) = self.descend(renamed, &atom, depth, &hyps, descent, cp.cont) {
                        return Ok(Some(c));
                    }
                }
                Alternative::Sibling {
                    choice,
                    atom,
                    depth,
                    hyps,
                    bodies,
                    mut commits,
                } => {
                    if choice.committed.get() {
                        continue;
                    }
                    if self.tracing() {
                        self.emit(
                            TraceKind::Try,
                            depth,
                            Some((choice.id, Side::Right)),
                            String::new(),
                        );
                    }
                    let right = choice.right.clone();
                    commits.push((choice, Side::Right));
                    let descent = Descent { bodies, commits };
                    if let Some(c) = self.descend(right, &atom, depth, &hyps, descent, cp.cont) {
                        return Ok(Some(c));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Backchains on an instantiated clause: descends to the head, leaving a
    /// sibling choice point at every choice passed, and unifies the head.
    fn descend(
        &mut self,
        mut clause: Arc<DFormula>,
        atom: &Term,
        depth: usize,
        hyps: &Hyps,
        mut descent: Descent,
        cont: Cont,
    ) -> Option<Cont> {
        loop {
            match &*clause {
                DFormula::Atom(head) => {
                    self.subst
                        .unify_in_place(head, atom, self.options.occurs_check, &mut self.trail)
                        .ok()?;
                    let mut c = push(
                        Frame::Exit {
                            atom: atom.clone(),
                            depth,
                        },
                        cont,
                    );
                    // innermost choice commits first
                    for (choice, side) in descent.commits {
                        c = push(
                            Frame::Commit {
                                choice,
                                side,
                                depth,
                            },
                            c,
                        );
                    }
                    for goal in descent.bodies.into_iter().rev() {
                        c = push(
                            Frame::Goal {
                                goal,
                                hyps: hyps.clone(),
                                depth: depth + 1,
                            },
                            c,
                        );
                    }
                    return Some(c);
                }
                DFormula::Imp(body, head) => {
                    descent.bodies.push(body.clone());
                    let next = head.clone();
                    clause = next;
                }
                DFormula::All(..) => {
                    let renamed = rename_fresh(&clause, &mut self.vars);
                    clause = Arc::new(renamed);
                }
                DFormula::Choice(left, right) => {
                    let choice = Rc::new(ChoiceInstance {
                        id: self.next_choice_id,
                        committed: Cell::new(false),
                        cp_height: self.choicepoints.len(),
                        left: left.clone(),
                        right: right.clone(),
                    });
                    self.next_choice_id += 1;
                    self.choicepoints.push(ChoicePoint {
                        alt: Alternative::Sibling {
                            choice: choice.clone(),
                            atom: atom.clone(),
                            depth,
                            hyps: hyps.clone(),
                            bodies: descent.bodies.clone(),
                            commits: descent.commits.clone(),
                        },
                        cont: cont.clone(),
                        trail_mark: self.trail.len(),
                        hyp_depth: self.hyp_depth,
                    });
                    if self.tracing() {
                        self.emit(
                            TraceKind::Try,
                            depth,
                            Some((choice.id, Side::Left)),
                            String::new(),
                        );
                    }
                    let next = left.clone();
                    descent.commits.push((choice, Side::Left));
                    clause = next;
                }
            }
        }
    }
}

impl Iterator for Solver<'_> {
    type Item = Result<Answer, SolveError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_answer().transpose()
    }
}
