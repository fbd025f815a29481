//! Canonical Boolean predicates and simultaneous assignment sets.
//!
//! Security levels of the two-point lattice are plain Boolean variables with
//! `true` meaning high, so join is disjunction, `⊑` is implication and
//! "is low" is negation.

mod assign;
mod bdd;

pub use assign::AssignmentSet;
pub use bdd::{Bdd, Classification, Cube, EnumVar, Manager, NotACube, Var};
