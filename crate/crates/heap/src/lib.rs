//! Symbolic abstract heap domains: relation families over a method's
//! references, the class-hierarchy pre-analysis deciding which relations
//! need variables, and the predicate transformers over those variables.

mod domain;
mod error;
mod hierarchy;
mod symbolic;

pub use domain::{all_keys, HeapDomainInstance, HeapFamily, RefDecl, RelKey, Slot};
pub use error::HeapError;
pub use hierarchy::{ClassHierarchy, Relation, ThreeVal};
pub use symbolic::{HeapOp, Mutant, RelUpdate, SymbolicHeap, H, H_PRIME};
