//! Trace events.
//!
//! One line per event: `KIND DEPTH SUBJECT`. Choice events put the choice
//! instance and side before the clause:
//!
//! ```text
//! CALL 0 max(9,3,_G0)
//! TRY 0 #0 left
//! COMMIT 0 #0 left max(9,3,9) :- 9 >= 3
//! PRUNE 0 #0 right max(9,3,3) :- 9 < 3
//! EXIT 0 max(9,3,9)
//! ```
//!
//! `TRY` marks the start of exploring one side of a choice; `PRUNE` names
//! the side that is discarded unexplored. `PUSH`/`POP` bracket a
//! hypothetical clause, `FAIL` reports an atom with no remaining clauses.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TraceKind {
    Call,
    Exit,
    Fail,
    Try,
    Commit,
    Prune,
    Push,
    Pop,
}

impl TraceKind {
    pub fn label(self) -> &'static str {
        match self {
            TraceKind::Call => "CALL",
            TraceKind::Exit => "EXIT",
            TraceKind::Fail => "FAIL",
            TraceKind::Try => "TRY",
            TraceKind::Commit => "COMMIT",
            TraceKind::Prune => "PRUNE",
            TraceKind::Push => "PUSH",
            TraceKind::Pop => "POP",
        }
    }
}

impl FromStr for TraceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "CALL" => TraceKind::Call,
            "EXIT" => TraceKind::Exit,
            "FAIL" => TraceKind::Fail,
            "TRY" => TraceKind::Try,
            "COMMIT" => TraceKind::Commit,
            "PRUNE" => TraceKind::Prune,
            "PUSH" => TraceKind::Push,
            "POP" => TraceKind::Pop,
            other => return Err(format!("unknown trace event {other}")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub kind: TraceKind,
    pub depth: usize,
    /// Choice instance and side, for TRY/COMMIT/PRUNE.
    pub choice: Option<(u64, Side)>,
    pub subject: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.label(), self.depth)?;
        if let Some((id, side)) = self.choice {
            write!(f, " #{id} {}", side.label())?;
        }
        if !self.subject.is_empty() {
            write!(f, " {}", self.subject)?;
        }
        Ok(())
    }
}

impl FromStr for TraceEvent {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let mut parts = line.splitn(3, ' ');
        let kind: TraceKind = parts.next().unwrap_or_default().parse()?;
        let depth = parts
            .next()
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| format!("missing depth in {line:?}"))?;
        let mut rest = parts.next().unwrap_or("");
        let mut choice = None;
        if matches!(kind, TraceKind::Try | TraceKind::Commit | TraceKind::Prune) {
            let mut it = rest.splitn(3, ' ');
            let id = it
                .next()
                .and_then(|s| s.strip_prefix('#'))
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| format!("missing choice id in {line:?}"))?;
            let side = match it.next() {
                Some("left") => Side::Left,
                Some("right") => Side::Right,
                _ => return Err(format!("missing choice side in {line:?}")),
            };
            choice = Some((id, side));
            rest = it.next().unwrap_or("");
        }
        Ok(TraceEvent {
            kind,
            depth,
            choice,
            subject: rest.to_string(),
        })
    }
}

/// Checks that no choice side discarded by a commit is explored afterwards.
/// Returns the offending line, if any.
pub fn find_pruned_exploration(events: &[TraceEvent]) -> Option<&TraceEvent> {
    let mut pruned = std::collections::HashSet::new();
    for e in events {
        match (e.kind, e.choice) {
            (TraceKind::Prune, Some(c)) => {
                pruned.insert(c);
            }
            (TraceKind::Try | TraceKind::Commit, Some(c)) if pruned.contains(&c) => return Some(e),
            _ => {}
        }
    }
    None
}
