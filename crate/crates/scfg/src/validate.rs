use std::fmt;

use hg_predicate::{Bdd, Manager};

use crate::encode::Scfg;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationIssue {
    /// Two guards at a location overlap.
    Nondeterministic { location: usize, first: usize, second: usize },
    /// Some state has no enabled transition.
    Blocking { location: usize },
    TargetOutOfRange { location: usize, transition: usize },
    /// An assignment writes an input or unknown variable.
    AssignsNonState { location: usize, transition: usize, var: String },
    /// The initial predicate is unsatisfiable.
    EmptyInitial,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Nondeterministic { location, first, second } => {
                write!(f, "location {location}: guards {first} and {second} overlap")
            }
            Self::Blocking { location } => write!(f, "location {location}: guards do not cover every state"),
            Self::TargetOutOfRange { location, transition } => {
                write!(f, "location {location}: transition {transition} targets a missing location")
            }
            Self::AssignsNonState { location, transition, var } => {
                write!(f, "location {location}: transition {transition} assigns non-state variable {var}")
            }
            Self::EmptyInitial => write!(f, "initial predicate is unsatisfiable"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
    pub locations: usize,
    pub transitions: usize,
}

impl ValidationReport {
    pub fn deterministic(&self) -> bool {
        !self.issues.iter().any(|i| matches!(i, ValidationIssue::Nondeterministic { .. }))
    }

    pub fn reactive(&self) -> bool {
        !self.issues.iter().any(|i| matches!(i, ValidationIssue::Blocking { .. }))
    }

    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks that guards at every location are pairwise disjoint and cover the
/// whole state/input space, and that transitions are well formed.
pub fn validate_scfg(mgr: &mut Manager, g: &Scfg) -> ValidationReport {
    let mut issues = Vec::new();
    let state: std::collections::BTreeSet<_> = g.state_vars.iter().copied().collect();
    for (l, ts) in g.delta.iter().enumerate() {
        for i in 0..ts.len() {
            for j in i + 1..ts.len() {
                if mgr.and(ts[i].guard, ts[j].guard) != Bdd::FALSE {
                    issues.push(ValidationIssue::Nondeterministic { location: l, first: i, second: j });
                }
            }
            if ts[i].target >= g.locations.len() {
                issues.push(ValidationIssue::TargetOutOfRange { location: l, transition: i });
            }
            for v in ts[i].assign.vars() {
                if !state.contains(&v) {
                    let var = mgr.var_name(v).to_string();
                    issues.push(ValidationIssue::AssignsNonState { location: l, transition: i, var });
                }
            }
        }
        let cover = mgr.or_all(ts.iter().map(|t| t.guard));
        if cover != Bdd::TRUE {
            issues.push(ValidationIssue::Blocking { location: l });
        }
    }
    if g.x0 == Bdd::FALSE {
        issues.push(ValidationIssue::EmptyInitial);
    }
    ValidationReport { issues, locations: g.locations.len(), transitions: g.transition_count() }
}
