use thiserror::Error;

use crate::term::{Substitution, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuiltinError {
    #[error("instantiation error in {goal}: {reason}")]
    Instantiation { goal: String, reason: String },
    #[error("unknown builtin {0}")]
    Unknown(String),
}

/// Runs a builtin guard against `subst`. Builtins are deterministic: they
/// succeed at most once and never leave a choice point.
///
/// Comparisons (`ge`, `gt`, `le`, `lt`) need both arguments bound to
/// integers; `neq` needs both ground; `=` unifies.
pub fn call_builtin(
    atom: &Term,
    subst: &mut Substitution,
    trail: &mut Vec<u64>,
    occurs_check: bool,
) -> Result<bool, BuiltinError> {
    let Term::Compound(name, args) = atom else {
        return Err(BuiltinError::Unknown(atom.to_string()));
    };
    if args.len() != 2 {
        return Err(BuiltinError::Unknown(format!("{name}/{}", args.len())));
    }
    let lhs = subst.apply(&args[0]);
    let rhs = subst.apply(&args[1]);
    let instantiation = |reason: &str| BuiltinError::Instantiation {
        goal: subst.apply(atom).to_string(),
        reason: reason.to_string(),
    };
    match &**name {
        "ge" | "gt" | "le" | "lt" => {
            let (Term::Int(a), Term::Int(b)) = (&lhs, &rhs) else {
                return Err(instantiation(
                    "comparison arguments must be bound to integers",
                ));
            };
            Ok(match &**name {
                "ge" => a >= b,
                "gt" => a > b,
                "le" => a <= b,
                _ => a < b,
            })
        }
        "neq" => {
            if !lhs.is_ground() || !rhs.is_ground() {
                return Err(instantiation("neq arguments must be ground"));
            }
            Ok(lhs != rhs)
        }
        "=" => Ok(subst
            .unify_in_place(&lhs, &rhs, occurs_check, trail)
            .is_ok()),
        other => Err(BuiltinError::Unknown(format!("{other}/2"))),
    }
}
