//! Frontend for the `.sir` security IR: parsing, type checking, control-flow
//! graphs, postdominators and control-dependence regions.
//!
//! ```text
//! class A { int fi; } class B { A fa; }
//! method m(A a, B b, int i) { local B r; L3: r = new B; a.fi = i; output low(b); }
//! ```

pub mod ast;
pub mod cfg;
mod error;
mod parse;
pub mod typed;

pub use cfg::{build_cfg, compute_cdrs, postdominator_tree, CdrTable, Cfg, PostDomTree, Region, P_BOTTOM};
pub use error::SirError;
pub use parse::parse_program;
pub use typed::{typecheck, ClassId, ClassTable, FieldId, TypedMethod, TypedProgram, VarRef};

/// Parses and type-checks a source text.
pub fn load(source: &str) -> Result<TypedProgram, SirError> {
    typecheck(&parse_program(source)?)
}
