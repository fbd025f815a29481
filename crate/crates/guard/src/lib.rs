//! Guard inference: bad states from the invariant, co-reachability, and
//! projection onto the calling context.

pub mod compare;
pub mod coreach;
mod guard;
pub mod render;

pub use compare::{align, entails_by_name};
pub use coreach::{coreach, kleene_iterates, pre_at, preimage, Coreach, Interrupt, Limits, StateSet};
pub use guard::{bad_states, classify, guard_of, synthesize_guard, AnalysisOptions, Guard, GuardClass, GuardError, GuardStats};
pub use render::{dnf, formula_text, guard_json, render_guard, Format};
