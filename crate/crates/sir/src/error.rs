use thiserror::Error;

use crate::ast::Pos;

/// Frontend diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SirError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: duplicate label `{label}`")]
    DuplicateLabel { pos: Pos, label: String },
    #[error("{pos}: unresolved label `{label}`")]
    UnresolvedLabel { pos: Pos, label: String },
    #[error("{pos}: unbound identifier `{name}`")]
    Unbound { pos: Pos, name: String },
    #[error("{pos}: class `{class}` has no field `{field}`")]
    FieldNotFound { pos: Pos, class: String, field: String },
    #[error("{pos}: kind mismatch: {msg}")]
    KindMismatch { pos: Pos, msg: String },
    #[error("{pos}: type mismatch: {msg}")]
    TypeMismatch { pos: Pos, msg: String },
    #[error("{pos}: unknown class `{name}`")]
    UnknownClass { pos: Pos, name: String },
    #[error("{pos}: duplicate declaration `{name}`")]
    Duplicate { pos: Pos, name: String },
    #[error("{pos}: class hierarchy cycle through `{name}`")]
    HierarchyCycle { pos: Pos, name: String },
    #[error("method `{method}`: irreducible control flow at statement {node}")]
    Irreducible { method: String, node: usize },
}

impl SirError {
    pub fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        SirError::Syntax { pos, msg: msg.into() }
    }
}
