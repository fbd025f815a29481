//! Symbolic control-flow graphs for heap-aware information-flow analysis.
//!
//! [`encode_method`] turns a typed method into an [`Scfg`] whose states track
//! variable levels, the symbolic heap and the upgrade-analysis bookkeeping,
//! together with a per-location safety predicate.

mod encode;
pub mod stubs;
mod validate;

pub use encode::{encode_method, EncodeError, EncodeOptions, Encoding, Location, Scfg, StateVars, Transition};
pub use stubs::{StubError, Summary, SummaryTable};
pub use validate::{validate_scfg, ValidationIssue, ValidationReport};
