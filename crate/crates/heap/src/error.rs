use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeapError {
    #[error("unknown class id {0}")]
    UnknownType(usize),
    #[error("reference {0} is not in the domain")]
    UnknownRef(usize),
    #[error("unknown heap domain `{0}` (expected deep, shal or dumb)")]
    UnknownDomain(String),
}
