//! First-order terms, substitutions and unification.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

/// Interned-ish symbol. Cheap to clone and shareable across threads.
pub type Sym = Arc<str>;

/// Variables created by the parser live above this id so they can never
/// collide with variables minted by a solver's counter.
pub const SOURCE_VAR_BASE: u64 = 1 << 62;

pub const NIL: &str = "nil";
pub const CONS: &str = "cons";

/// A logic variable. Identity is the id; the name is only for display.
#[derive(Clone, Debug)]
pub struct Var {
    pub id: u64,
    pub name: Option<Sym>,
}

impl Var {
    pub fn new(id: u64, name: Option<Sym>) -> Self {
        Var { id, name }
    }

    pub fn anonymous(id: u64) -> Self {
        Var { id, name: None }
    }

    /// Name used when printing: the source name, or `_G<id>`.
    pub fn display_name(&self) -> String {
        match &self.name {
            Some(n) => n.to_string(),
            None => format!("_G{}", self.id),
        }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Var {}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Const(Sym),
    Int(i64),
    Compound(Sym, Arc<[Term]>),
}

impl Term {
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(Arc::from(name))
    }

    /// Builds a compound; a zero-argument compound collapses to a constant.
    pub fn compound(functor: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Const(Arc::from(functor))
        } else {
            Term::Compound(Arc::from(functor), args.into())
        }
    }

    pub fn nil() -> Term {
        Term::constant(NIL)
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::compound(CONS, vec![head, tail])
    }

    /// Proper list from the given elements.
    pub fn list(items: impl IntoIterator<Item = Term, IntoIter: DoubleEndedIterator>) -> Term {
        Term::list_with_tail(items, Term::nil())
    }

    pub fn list_with_tail(
        items: impl IntoIterator<Item = Term, IntoIter: DoubleEndedIterator>,
        tail: Term,
    ) -> Term {
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::cons(item, acc))
    }

    /// Predicate key (name, arity) for constants and compounds.
    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::Const(name) => Some((name, 0)),
            Term::Compound(name, args) => Some((name, args.len())),
            _ => None,
        }
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, Term::Const(_) | Term::Compound(..))
    }

    pub fn is_ground(&self) -> bool {
        self.subterms().all(|t| !matches!(t, Term::Var(_)))
    }

    /// Pre-order, left-to-right walk over all subterms, without recursion.
    pub fn subterms(&self) -> impl Iterator<Item = &Term> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let t = stack.pop()?;
            if let Term::Compound(_, args) = t {
                stack.extend(args.iter().rev());
            }
            Some(t)
        })
    }

    /// Variables in left-to-right first-occurrence order.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.collect_vars(&mut out, &mut seen);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Var>, seen: &mut HashSet<u64>) {
        for t in self.subterms() {
            if let Term::Var(v) = t {
                if seen.insert(v.id) {
                    out.push(v.clone());
                }
            }
        }
    }

    pub fn contains_var(&self, id: u64) -> bool {
        self.subterms()
            .any(|t| matches!(t, Term::Var(v) if v.id == id))
    }

    /// Replaces variables by id according to `map`, without dereferencing.
    pub fn rename(&self, map: &HashMap<u64, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(&v.id).cloned().unwrap_or_else(|| self.clone()),
            Term::Compound(f, args) => {
                if map.is_empty() {
                    return self.clone();
                }
                Term::Compound(f.clone(), args.iter().map(|a| a.rename(map)).collect())
            }
            _ => self.clone(),
        }
    }

    /// Nesting depth: atomic terms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Compound(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }
}

// Long lists are deeply nested cons cells; drop them without recursion.
impl Drop for Term {
    fn drop(&mut self) {
        let Term::Compound(_, args) = self else {
            return;
        };
        let Some(args) = Arc::get_mut(args) else {
            return;
        };
        let mut stack: Vec<Term> = Vec::new();
        let detach = |args: &mut [Term], stack: &mut Vec<Term>| {
            for a in args.iter_mut() {
                if matches!(a, Term::Compound(..)) {
                    stack.push(std::mem::replace(a, Term::Int(0)));
                }
            }
        };
        detach(args, &mut stack);
        while let Some(mut t) = stack.pop() {
            if let Term::Compound(_, inner) = &mut t {
                if let Some(inner) = Arc::get_mut(inner) {
                    detach(inner, &mut stack);
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::pretty_term(self))
    }
}

/// Monotone source of fresh variable ids.
#[derive(Clone, Debug, Default)]
pub struct VarCounter {
    next: u64,
}

impl VarCounter {
    pub fn new() -> Self {
        VarCounter { next: 0 }
    }

    pub fn starting_at(next: u64) -> Self {
        VarCounter { next }
    }

    pub fn fresh(&mut self) -> Var {
        let id = self.next;
        self.next += 1;
        Var::anonymous(id)
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum UnifyError {
    #[error("cannot unify {0} with {1}")]
    Clash(Term, Term),
    #[error("occurs check: {0} occurs in {1}")]
    Occurs(Term, Term),
}

/// A triangular binding map from variable ids to terms.
///
/// Bindings may mention other bound variables; [`Substitution::apply`]
/// dereferences fully, so applying a substitution twice gives the same
/// result as applying it once.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: HashMap<u64, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Self {
        Substitution {
            bindings: pairs.into_iter().map(|(v, t)| (v.id, t)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&Term> {
        self.bindings.get(&id)
    }

    pub fn bound_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.bindings.keys().copied()
    }

    /// Follows variable bindings at the root only.
    pub fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.bindings.get(&v.id) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// Replaces every bound variable, recursively, until none remain.
    ///
    /// A variable met again while its own binding is being expanded (only
    /// possible after unifying without the occurs check) is left in place.
    pub fn apply(&self, t: &Term) -> Term {
        if self.bindings.is_empty() {
            return t.clone();
        }
        let mut expanding = Vec::new();
        self.apply_inner(t, &mut expanding)
    }

    fn apply_inner(&self, t: &Term, expanding: &mut Vec<u64>) -> Term {
        match t {
            Term::Var(v) => {
                if expanding.contains(&v.id) {
                    return t.clone();
                }
                match self.bindings.get(&v.id) {
                    Some(bound) => {
                        expanding.push(v.id);
                        let out = self.apply_inner(bound, expanding);
                        expanding.pop();
                        out
                    }
                    None => t.clone(),
                }
            }
            Term::Compound(f, args) => Term::Compound(
                f.clone(),
                args.iter()
                    .map(|a| self.apply_inner(a, expanding))
                    .collect(),
            ),
            _ => t.clone(),
        }
    }

    /// The idempotent (fully resolved) form of this substitution.
    pub fn resolved(&self) -> Substitution {
        Substitution {
            bindings: self
                .bindings
                .iter()
                .map(|(id, t)| (*id, self.apply(t)))
                .collect(),
        }
    }

    fn occurs(&self, id: u64, t: &Term) -> bool {
        let mut stack = vec![t];
        while let Some(t) = stack.pop() {
            match self.walk(t) {
                Term::Var(v) => {
                    if v.id == id {
                        return true;
                    }
                }
                Term::Compound(_, args) => stack.extend(args.iter()),
                _ => {}
            }
        }
        false
    }

    /// Binds `v` to `t`, recording the binding on `trail`.
    pub fn bind(&mut self, v: &Var, t: Term, trail: &mut Vec<u64>) {
        self.bindings.insert(v.id, t);
        trail.push(v.id);
    }

    /// Undoes every binding recorded on `trail` past `mark`.
    pub fn undo(&mut self, trail: &mut Vec<u64>, mark: usize) {
        for id in trail.drain(mark..) {
            self.bindings.remove(&id);
        }
    }

    /// Unifies in place. On failure every binding this call made is undone,
    /// so the substitution is observably unchanged.
    pub fn unify_in_place(
        &mut self,
        a: &Term,
        b: &Term,
        occurs_check: bool,
        trail: &mut Vec<u64>,
    ) -> Result<(), UnifyError> {
        let mark = trail.len();
        let result = self.unify_worklist(a, b, occurs_check, trail);
        if result.is_err() {
            self.undo(trail, mark);
        }
        result
    }

    fn unify_worklist(
        &mut self,
        a: &Term,
        b: &Term,
        occurs_check: bool,
        trail: &mut Vec<u64>,
    ) -> Result<(), UnifyError> {
        let mut work = vec![(a.clone(), b.clone())];
        while let Some((a, b)) = work.pop() {
            let a = self.walk(&a).clone();
            let b = self.walk(&b).clone();
            match (&a, &b) {
                (Term::Var(x), Term::Var(y)) if x.id == y.id => {}
                (Term::Var(x), other) | (other, Term::Var(x)) => {
                    if occurs_check && self.occurs(x.id, other) {
                        return Err(UnifyError::Occurs(Term::Var(x.clone()), self.apply(other)));
                    }
                    self.bind(x, other.clone(), trail);
                }
                (Term::Const(x), Term::Const(y)) if x == y => {}
                (Term::Int(x), Term::Int(y)) if x == y => {}
                (Term::Compound(f, xs), Term::Compound(g, ys))
                    if f == g && xs.len() == ys.len() =>
                {
                    work.extend(xs.iter().cloned().zip(ys.iter().cloned()).rev());
                }
                _ => return Err(UnifyError::Clash(self.apply(&a), self.apply(&b))),
            }
        }
        Ok(())
    }
}

/// Pure unification: a most general idempotent extension of `s`, or an error
/// with `s` untouched.
pub fn unify(
    a: &Term,
    b: &Term,
    s: &Substitution,
    occurs_check: bool,
) -> Result<Substitution, UnifyError> {
    let mut out = s.clone();
    let mut trail = Vec::new();
    out.unify_in_place(a, b, occurs_check, &mut trail)?;
    Ok(out.resolved())
}

pub fn apply(s: &Substitution, t: &Term) -> Term {
    s.apply(t)
}

/// Structural equality up to a consistent bijective renaming of variables.
pub fn alpha_eq_terms(a: &Term, b: &Term, map: &mut VarBijection) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => map.relate(x.id, y.id),
        (Term::Const(x), Term::Const(y)) => x == y,
        (Term::Int(x), Term::Int(y)) => x == y,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs
                    .iter()
                    .zip(ys.iter())
                    .all(|(x, y)| alpha_eq_terms(x, y, map))
        }
        _ => false,
    }
}

/// Two-way variable correspondence used by alpha-equivalence checks.
#[derive(Default, Debug)]
pub struct VarBijection {
    left: HashMap<u64, u64>,
    right: HashMap<u64, u64>,
}

impl VarBijection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn relate(&mut self, l: u64, r: u64) -> bool {
        match (self.left.get(&l), self.right.get(&r)) {
            (Some(&r2), Some(&l2)) => r2 == r && l2 == l,
            (None, None) => {
                self.left.insert(l, r);
                self.right.insert(r, l);
                true
            }
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: u64, name: &str) -> Term {
        Term::Var(Var::new(id, Some(Arc::from(name))))
    }
    fn c(name: &str) -> Term {
        Term::constant(name)
    }
    fn f(name: &str, args: Vec<Term>) -> Term {
        Term::compound(name, args)
    }

    #[test]
    fn apply_replaces_bound_vars() {
        let x = v(0, "X");
        let y = v(1, "Y");
        let s = Substitution::from_pairs([(Var::new(0, None), c("a"))]);
        assert_eq!(
            s.apply(&f("f", vec![x, y.clone()])),
            f("f", vec![c("a"), y])
        );
    }

    #[test]
    fn apply_empty_is_identity() {
        let t = f("f", vec![v(0, "X")]);
        assert_eq!(Substitution::new().apply(&t), t);
    }

    #[test]
    fn apply_dereferences_chains() {
        let s = Substitution::from_pairs([
            (Var::new(0, None), f("g", vec![v(1, "Y")])),
            (Var::new(1, None), c("b")),
        ]);
        assert_eq!(s.apply(&v(0, "X")), f("g", vec![c("b")]));
    }

    #[test]
    fn unify_decomposes() {
        let s = unify(
            &f("f", vec![v(0, "X"), c("b")]),
            &f("f", vec![c("a"), v(1, "Y")]),
            &Substitution::new(),
            true,
        )
        .unwrap();
        assert_eq!(s.get(0), Some(&c("a")));
        assert_eq!(s.get(1), Some(&c("b")));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn unify_functor_clash() {
        let err = unify(
            &f("f", vec![c("a")]),
            &f("g", vec![c("a")]),
            &Substitution::new(),
            true,
        );
        assert!(matches!(err, Err(UnifyError::Clash(..))));
    }

    #[test]
    fn unify_arity_and_int_clash() {
        let s = Substitution::new();
        assert!(unify(
            &f("f", vec![c("a")]),
            &f("f", vec![c("a"), c("a")]),
            &s,
            true
        )
        .is_err());
        assert!(unify(&Term::Int(1), &Term::Int(2), &s, true).is_err());
        assert!(unify(&Term::Int(1), &c("a"), &s, true).is_err());
    }

    #[test]
    fn occurs_check_on_and_off() {
        let x = v(0, "X");
        let fx = f("f", vec![x.clone()]);
        assert!(matches!(
            unify(&x, &fx, &Substitution::new(), true),
            Err(UnifyError::Occurs(..))
        ));
        let mut s = Substitution::new();
        let mut trail = Vec::new();
        s.unify_in_place(&x, &fx, false, &mut trail).unwrap();
        assert_eq!(s.get(0), Some(&fx));
        // apply terminates on the cyclic binding
        assert_eq!(s.apply(&x), fx);
    }

    #[test]
    fn failed_unify_leaves_no_bindings() {
        let mut s = Substitution::new();
        let mut trail = Vec::new();
        let a = f("f", vec![v(0, "X"), c("a")]);
        let b = f("f", vec![c("b"), c("c")]);
        assert!(s.unify_in_place(&a, &b, true, &mut trail).is_err());
        assert!(s.is_empty());
        assert!(trail.is_empty());
    }

    #[test]
    fn undo_restores_mark() {
        let mut s = Substitution::new();
        let mut trail = Vec::new();
        s.unify_in_place(&v(0, "X"), &c("a"), true, &mut trail)
            .unwrap();
        let mark = trail.len();
        s.unify_in_place(&v(1, "Y"), &c("b"), true, &mut trail)
            .unwrap();
        s.undo(&mut trail, mark);
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(0), Some(&c("a")));
    }

    #[test]
    fn alpha_eq_requires_bijection() {
        let a = f("f", vec![v(0, "X"), v(1, "Y")]);
        let b = f("f", vec![v(5, "A"), v(6, "B")]);
        let same = f("f", vec![v(5, "A"), v(5, "A")]);
        assert!(alpha_eq_terms(&a, &b, &mut VarBijection::new()));
        assert!(!alpha_eq_terms(&a, &same, &mut VarBijection::new()));
    }
}
