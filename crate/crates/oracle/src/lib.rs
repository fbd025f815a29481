//! Concrete heaps and programs, and the randomized and exhaustive checkers
//! that test the abstract domains and inferred guards against them.

pub mod abstraction;
pub mod concrete;
pub mod corpus;
pub mod inductive;
pub mod interp;
pub mod ni;
pub mod sample;

pub use abstraction::{check_covers, check_secure_abstraction, AbstractionConfig, AbstractionReport, AbstractionViolation, CoversReport};
pub use concrete::{
    concrete_apply, difference, indistinguishable, low_reference_graph, ConcreteError, ConcreteHeap, ConcreteOp, Difference, EdgeLabel, Matching,
    Object, ObjId, PVal, RefGraph,
};
pub use inductive::{check_inductive, InductiveReport, InductiveViolation, Scenario};
pub use interp::{low_equivalent, run_concrete, sub_heap, Observation, ProgState, Status, Trace};
pub use ni::{check_noninterference, NiConfig, NiReport, NiViolation};
