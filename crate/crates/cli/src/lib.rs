//! Batch driver behind the `heapguard` binary: guard inference over whole
//! programs, SCFG validation, the oracle suites and summary reports.

pub mod analyze;
pub mod pool;
pub mod report;
pub mod validate;
pub mod xcheck;

use std::path::{Path, PathBuf};
use std::time::Duration;

use hg_heap::{HeapError, HeapFamily, Mutant};
use hg_scfg::{EncodeError, StubError, SummaryTable};
use hg_sir::{SirError, TypedProgram};
use thiserror::Error;

pub use analyze::{analyze, Record};
pub use report::Summary;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Sir { path: String, source: SirError },
    #[error(transparent)]
    Stub(#[from] StubError),
    #[error("{0} (pass --assume-worst to analyze it anyway)")]
    MissingStub(String),
    #[error(transparent)]
    Heap(#[from] HeapError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 3 for a call without a summary, 2 for every other input problem.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingStub(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn encode(path: &str, e: EncodeError) -> Self {
        match e {
            EncodeError::Sir(source) => CliError::Sir { path: path.to_string(), source },
            EncodeError::Heap(h) => CliError::Heap(h),
            missing @ EncodeError::MissingSummary { .. } => CliError::MissingStub(format!("{path}: {missing}")),
        }
    }
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub domains: Vec<HeapFamily>,
    pub stubs: Option<PathBuf>,
    /// Per-method wall clock cap on the fixed point.
    pub timeout: Duration,
    pub node_cap: Option<usize>,
    pub assume_worst: bool,
    pub jobs: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            domains: vec![HeapFamily::deep()],
            stubs: None,
            timeout: Duration::from_secs(300),
            node_cap: None,
            assume_worst: false,
            jobs: 1,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.timeout.is_zero() {
            return Err(CliError::Usage("--timeout must be positive".into()));
        }
        if self.jobs == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        Ok(())
    }

    pub fn summaries(&self) -> Result<SummaryTable, CliError> {
        match &self.stubs {
            Some(p) => Ok(SummaryTable::load(p)?),
            None => Ok(SummaryTable::new()),
        }
    }
}

/// `deep`, `shal`, `dumb` or `all`.
pub fn parse_domains(s: &str) -> Result<Vec<HeapFamily>, CliError> {
    if s == "all" {
        Ok(HeapFamily::all().to_vec())
    } else {
        Ok(vec![HeapFamily::by_name(s)?])
    }
}

pub fn parse_mutant(s: &str) -> Result<Mutant, CliError> {
    std::iter::once(Mutant::None)
        .chain(Mutant::ALL)
        .find(|m| m.name() == s)
        .ok_or_else(|| CliError::Usage(format!("unknown mutant `{s}`")))
}

/// A parsed and typechecked input file.
#[derive(Clone, Debug)]
pub struct Input {
    pub path: String,
    pub program: TypedProgram,
}

pub fn load_file(path: &Path) -> Result<Input, CliError> {
    let name = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: name.clone(), source })?;
    load_source(&name, &src)
}

pub fn load_source(name: &str, src: &str) -> Result<Input, CliError> {
    let program = hg_sir::load(src).map_err(|source| CliError::Sir { path: name.to_string(), source })?;
    Ok(Input { path: name.to_string(), program })
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Vec<Input>, CliError> {
    if cfg.inputs.is_empty() {
        return Err(CliError::Usage("no input files".into()));
    }
    cfg.inputs.iter().map(|p| load_file(p)).collect()
}
