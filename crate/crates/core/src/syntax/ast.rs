use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::term::{alpha_eq_terms, Sym, Term, Var, VarBijection, VarCounter};

/// Builtin guard predicates: name and arity 2.
pub const BUILTINS: [&str; 6] = ["ge", "gt", "le", "lt", "neq", "="];

pub fn is_builtin(name: &str, arity: usize) -> bool {
    arity == 2 && BUILTINS.contains(&name)
}

pub fn is_builtin_term(t: &Term) -> bool {
    t.functor().is_some_and(|(n, a)| is_builtin(n, a))
}

/// Goal formulas.
#[derive(Clone, Debug, PartialEq)]
pub enum GFormula {
    Atom {
        atom: Term,
        builtin: bool,
    },
    And(Arc<GFormula>, Arc<GFormula>),
    /// `D => G`: solve the body with `D` added to the program.
    Assume(Arc<DFormula>, Arc<GFormula>),
    /// `"url" => G`: solve the body with the module at `url` loaded.
    Load(Sym, Arc<GFormula>),
    Exists(Var, Arc<GFormula>),
}

/// Program clauses.
#[derive(Clone, Debug, PartialEq)]
pub enum DFormula {
    Atom(Term),
    /// `body ⊃ head`, written `head :- body`.
    Imp(Arc<GFormula>, Arc<DFormula>),
    All(Var, Arc<DFormula>),
    /// `left & right`: committed choice between the two.
    Choice(Arc<DFormula>, Arc<DFormula>),
}

/// A parsed `.lw` file.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SourceModule {
    pub url: Option<String>,
    pub clauses: Vec<DFormula>,
}

impl GFormula {
    /// Atomic goal; the builtin flag is derived from the functor.
    pub fn atom(atom: Term) -> GFormula {
        let builtin = is_builtin_term(&atom);
        GFormula::Atom { atom, builtin }
    }

    pub fn and(l: GFormula, r: GFormula) -> GFormula {
        GFormula::And(Arc::new(l), Arc::new(r))
    }

    pub fn assume(d: DFormula, g: GFormula) -> GFormula {
        GFormula::Assume(Arc::new(d), Arc::new(g))
    }

    pub fn load(url: &str, g: GFormula) -> GFormula {
        GFormula::Load(Arc::from(url), Arc::new(g))
    }

    pub fn exists(v: Var, g: GFormula) -> GFormula {
        GFormula::Exists(v, Arc::new(g))
    }

    /// Right-associated conjunction of the given goals.
    pub fn conj(goals: Vec<GFormula>) -> Option<GFormula> {
        goals
            .into_iter()
            .rev()
            .reduce(|acc, g| GFormula::and(g, acc))
    }

    /// Free variables in source order.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.collect_free(&mut out, &mut seen, &mut Vec::new());
        out
    }

    fn collect_free(&self, out: &mut Vec<Var>, seen: &mut HashSet<u64>, bound: &mut Vec<u64>) {
        match self {
            GFormula::Atom { atom, .. } => collect_term_free(atom, out, seen, bound),
            GFormula::And(l, r) => {
                l.collect_free(out, seen, bound);
                r.collect_free(out, seen, bound);
            }
            GFormula::Assume(d, g) => {
                d.collect_free(out, seen, bound);
                g.collect_free(out, seen, bound);
            }
            GFormula::Load(_, g) => g.collect_free(out, seen, bound),
            GFormula::Exists(v, g) => {
                bound.push(v.id);
                g.collect_free(out, seen, bound);
                bound.pop();
            }
        }
    }

    /// Wraps the goal in existentials over its free variables.
    pub fn close(self) -> GFormula {
        let vars = self.free_vars();
        vars.into_iter()
            .rev()
            .fold(self, |g, v| GFormula::exists(v, g))
    }

    /// Capture-avoiding replacement of free variables.
    pub fn rename(&self, map: &HashMap<u64, Term>) -> GFormula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            GFormula::Atom { atom, builtin } => GFormula::Atom {
                atom: atom.rename(map),
                builtin: *builtin,
            },
            GFormula::And(l, r) => GFormula::and(l.rename(map), r.rename(map)),
            GFormula::Assume(d, g) => GFormula::assume(d.rename(map), g.rename(map)),
            GFormula::Load(u, g) => GFormula::Load(u.clone(), Arc::new(g.rename(map))),
            GFormula::Exists(v, g) => {
                let inner = without(map, v.id);
                GFormula::exists(v.clone(), g.rename(&inner))
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            GFormula::Atom { .. } => 0,
            GFormula::And(l, r) => 1 + l.depth().max(r.depth()),
            GFormula::Assume(d, g) => 1 + d.depth().max(g.depth()),
            GFormula::Load(_, g) | GFormula::Exists(_, g) => 1 + g.depth(),
        }
    }
}

impl DFormula {
    pub fn atom(t: Term) -> DFormula {
        DFormula::Atom(t)
    }

    pub fn imp(body: GFormula, head: DFormula) -> DFormula {
        DFormula::Imp(Arc::new(body), Arc::new(head))
    }

    pub fn all(v: Var, d: DFormula) -> DFormula {
        DFormula::All(v, Arc::new(d))
    }

    pub fn choice(l: DFormula, r: DFormula) -> DFormula {
        DFormula::Choice(Arc::new(l), Arc::new(r))
    }

    /// Free variables in source order (heads before bodies).
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.collect_free(&mut out, &mut seen, &mut Vec::new());
        out
    }

    fn collect_free(&self, out: &mut Vec<Var>, seen: &mut HashSet<u64>, bound: &mut Vec<u64>) {
        match self {
            DFormula::Atom(t) => collect_term_free(t, out, seen, bound),
            DFormula::Imp(body, head) => {
                head.collect_free(out, seen, bound);
                body.collect_free(out, seen, bound);
            }
            DFormula::All(v, d) => {
                bound.push(v.id);
                d.collect_free(out, seen, bound);
                bound.pop();
            }
            DFormula::Choice(l, r) => {
                l.collect_free(out, seen, bound);
                r.collect_free(out, seen, bound);
            }
        }
    }

    /// Universally closes the clause over its free variables.
    pub fn close(self) -> DFormula {
        let vars = self.free_vars();
        vars.into_iter()
            .rev()
            .fold(self, |d, v| DFormula::all(v, d))
    }

    /// Variables bound by the outermost chain of quantifiers.
    pub fn quantified_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut d = self;
        while let DFormula::All(v, inner) = d {
            out.push(v.clone());
            d = inner;
        }
        out
    }

    /// Strips the outermost quantifier chain.
    pub fn matrix(&self) -> &DFormula {
        let mut d = self;
        while let DFormula::All(_, inner) = d {
            d = inner;
        }
        d
    }

    /// Capture-avoiding replacement of free variables.
    pub fn rename(&self, map: &HashMap<u64, Term>) -> DFormula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            DFormula::Atom(t) => DFormula::Atom(t.rename(map)),
            DFormula::Imp(body, head) => DFormula::imp(body.rename(map), head.rename(map)),
            DFormula::All(v, d) => {
                let inner = without(map, v.id);
                DFormula::all(v.clone(), d.rename(&inner))
            }
            DFormula::Choice(l, r) => DFormula::choice(l.rename(map), r.rename(map)),
        }
    }

    /// Head atoms of every leaf, left to right.
    pub fn heads(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(d) = stack.pop() {
            match d {
                DFormula::Atom(t) => out.push(t),
                DFormula::Imp(_, head) => stack.push(head),
                DFormula::All(_, inner) => stack.push(inner),
                DFormula::Choice(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        out
    }

    /// Number of Horn alternatives (leaves of the choice tree).
    pub fn leaf_count(&self) -> usize {
        self.heads().len()
    }

    pub fn choice_count(&self) -> usize {
        match self {
            DFormula::Atom(_) => 0,
            DFormula::Imp(_, d) | DFormula::All(_, d) => d.choice_count(),
            DFormula::Choice(l, r) => 1 + l.choice_count() + r.choice_count(),
        }
    }

    pub fn has_choice(&self) -> bool {
        self.choice_count() > 0
    }

    /// Whether some leaf could match a goal with this predicate key.
    pub fn defines(&self, name: &str, arity: usize) -> bool {
        self.heads()
            .iter()
            .any(|h| h.functor() == Some((name, arity)))
    }

    pub fn depth(&self) -> usize {
        match self {
            DFormula::Atom(_) => 0,
            DFormula::Imp(g, d) => 1 + g.depth().max(d.depth()),
            DFormula::All(_, d) => 1 + d.depth(),
            DFormula::Choice(l, r) => 1 + l.depth().max(r.depth()),
        }
    }
}

fn collect_term_free(t: &Term, out: &mut Vec<Var>, seen: &mut HashSet<u64>, bound: &[u64]) {
    for v in t.vars() {
        if !bound.contains(&v.id) && seen.insert(v.id) {
            out.push(v);
        }
    }
}

fn without(map: &HashMap<u64, Term>, id: u64) -> HashMap<u64, Term> {
    if map.contains_key(&id) {
        let mut m = map.clone();
        m.remove(&id);
        m
    } else {
        map.clone()
    }
}

/// Instantiates every universally quantified variable along the clause
/// spine with a fresh variable, consuming the quantifier nodes.
///
/// A variable quantified above a choice is shared by both alternatives.
/// Quantifiers inside hypothetical clauses of bodies are left alone: they
/// are instantiated when that clause is itself used.
pub fn rename_fresh(d: &DFormula, counter: &mut VarCounter) -> DFormula {
    rename_spine(d, &HashMap::new(), counter)
}

fn rename_spine(d: &DFormula, map: &HashMap<u64, Term>, counter: &mut VarCounter) -> DFormula {
    match d {
        DFormula::All(v, inner) => {
            let mut map = map.clone();
            map.insert(v.id, Term::Var(counter.fresh()));
            rename_spine(inner, &map, counter)
        }
        DFormula::Atom(t) => DFormula::Atom(t.rename(map)),
        DFormula::Imp(body, head) => {
            DFormula::imp(body.rename(map), rename_spine(head, map, counter))
        }
        DFormula::Choice(l, r) => {
            DFormula::choice(rename_spine(l, map, counter), rename_spine(r, map, counter))
        }
    }
}

/// Alpha-equivalence of goals: equal up to a consistent renaming of
/// variables (bound and free).
pub fn alpha_eq_goals(a: &GFormula, b: &GFormula) -> bool {
    goal_eq(a, b, &mut VarBijection::new())
}

pub fn alpha_eq_clauses(a: &DFormula, b: &DFormula) -> bool {
    clause_eq(a, b, &mut VarBijection::new())
}

fn goal_eq(a: &GFormula, b: &GFormula, m: &mut VarBijection) -> bool {
    match (a, b) {
        (
            GFormula::Atom {
                atom: x,
                builtin: bx,
            },
            GFormula::Atom {
                atom: y,
                builtin: by,
            },
        ) => bx == by && alpha_eq_terms(x, y, m),
        (GFormula::And(l1, r1), GFormula::And(l2, r2)) => goal_eq(l1, l2, m) && goal_eq(r1, r2, m),
        (GFormula::Assume(d1, g1), GFormula::Assume(d2, g2)) => {
            clause_eq(d1, d2, m) && goal_eq(g1, g2, m)
        }
        (GFormula::Load(u1, g1), GFormula::Load(u2, g2)) => u1 == u2 && goal_eq(g1, g2, m),
        (GFormula::Exists(v1, g1), GFormula::Exists(v2, g2)) => {
            m.relate(v1.id, v2.id) && goal_eq(g1, g2, m)
        }
        _ => false,
    }
}

fn clause_eq(a: &DFormula, b: &DFormula, m: &mut VarBijection) -> bool {
    match (a, b) {
        (DFormula::Atom(x), DFormula::Atom(y)) => alpha_eq_terms(x, y, m),
        (DFormula::Imp(g1, d1), DFormula::Imp(g2, d2)) => {
            clause_eq(d1, d2, m) && goal_eq(g1, g2, m)
        }
        (DFormula::All(v1, d1), DFormula::All(v2, d2)) => {
            m.relate(v1.id, v2.id) && clause_eq(d1, d2, m)
        }
        (DFormula::Choice(l1, r1), DFormula::Choice(l2, r2)) => {
            clause_eq(l1, l2, m) && clause_eq(r1, r2, m)
        }
        _ => false,
    }
}

impl fmt::Display for GFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::pretty::pretty_goal(self))
    }
}

impl fmt::Display for DFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::pretty::pretty_clause(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_clause;

    #[test]
    fn rename_fresh_consumes_quantifiers() {
        let d = parse_clause("p(X).").unwrap();
        let mut counter = VarCounter::new();
        let r = rename_fresh(&d, &mut counter);
        match &r {
            DFormula::Atom(Term::Compound(_, args)) => {
                assert!(matches!(&args[0], Term::Var(v) if v.id == 0 && v.name.is_none()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rename_fresh_shares_across_choice() {
        let d = parse_clause("p(X,Y) & q(Y,X).").unwrap();
        let mut counter = VarCounter::starting_at(10);
        let r = rename_fresh(&d, &mut counter);
        assert_eq!(r.to_string(), "p(_G10,_G11) & q(_G11,_G10)");
        let again = rename_fresh(&d, &mut counter);
        assert_eq!(again.to_string(), "p(_G12,_G13) & q(_G13,_G12)");
    }

    #[test]
    fn rename_fresh_preserves_shape() {
        let d = parse_clause("(max(X,Y,X) :- X >= Y) & (max(X,Y,Y) :- X < Y).").unwrap();
        let r = rename_fresh(&d, &mut VarCounter::new());
        assert!(alpha_eq_clauses(d.matrix(), &r));
    }

    #[test]
    fn heads_and_leaf_counts() {
        let d = parse_clause("uni([],L,L) & uni([X|L],M,N) :- memb(X,M), uni(L,M,N) & uni([X|L],M,[X|N]) :- uni(L,M,N).").unwrap();
        assert_eq!(d.leaf_count(), 3);
        assert_eq!(d.choice_count(), 2);
        assert!(d.defines("uni", 3));
        assert!(!d.defines("memb", 2));
    }
}
