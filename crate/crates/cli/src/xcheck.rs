//! Drives the oracle suites and turns their reports into pass/fail lines.

use std::path::PathBuf;

use hg_guard::{synthesize_guard, AnalysisOptions, GuardError};
use hg_heap::{HeapFamily, Mutant};
use hg_oracle::{check_inductive, check_noninterference, check_secure_abstraction, corpus, AbstractionConfig, NiConfig};
use hg_predicate::Manager;
use hg_scfg::{EncodeOptions, SummaryTable};
use hg_sir::typed::TStmt;
use serde_json::Value;

use crate::{load_file, load_source, CliError, Input};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Inductive,
    Abstraction,
    Ni,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "inductive" => Ok(Suite::Inductive),
            "abstraction" => Ok(Suite::Abstraction),
            "ni" => Ok(Suite::Ni),
            _ => Err(format!("unknown suite `{s}` (inductive, abstraction, ni)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct XcheckConfig {
    pub suite: Suite,
    pub domains: Vec<HeapFamily>,
    /// Most references: enumerated exhaustively by the inductive suite,
    /// sampled up to by the abstraction suite.
    pub refs: Option<usize>,
    pub trials: Option<usize>,
    pub mutant: Mutant,
    /// Methods for the ni suite; a generated corpus when absent.
    pub program: Option<PathBuf>,
    pub budget: usize,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for XcheckConfig {
    fn default() -> Self {
        XcheckConfig {
            suite: Suite::Inductive,
            domains: vec![HeapFamily::deep()],
            refs: None,
            trials: None,
            mutant: Mutant::None,
            program: None,
            budget: 10_000,
            seed: 0,
            jobs: 1,
        }
    }
}

/// One report per domain (and per method for the ni suite).
#[derive(Clone, Debug)]
pub struct Outcome {
    pub line: String,
    pub passed: bool,
    pub json: Value,
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn xcheck(cfg: &XcheckConfig) -> Result<Vec<Outcome>, CliError> {
    match cfg.suite {
        Suite::Inductive => Ok(inductive(cfg)),
        Suite::Abstraction => Ok(abstraction(cfg)),
        Suite::Ni => ni(cfg),
    }
}

fn inductive(cfg: &XcheckConfig) -> Vec<Outcome> {
    let refs = cfg.refs.unwrap_or(3);
    crate::pool::run(cfg.jobs, cfg.domains.clone(), |fam| {
        let r = check_inductive(fam, refs, cfg.mutant);
        let mut line = format!(
            "inductive [{}] refs<={refs} mutant={}: states={} checks={} violations={} coherent={} {}",
            r.domain,
            cfg.mutant.name(),
            r.states,
            r.checks,
            r.violations,
            r.coherent_violations,
            verdict(r.passed())
        );
        for e in &r.examples {
            line.push_str(&format!("\n  {} breaks {} at {} [{}]", e.op, e.predicate, e.state, if e.coherent { "coherent" } else { "incoherent" }));
        }
        Outcome { line, passed: r.passed(), json: r.to_json() }
    })
}

fn abstraction(cfg: &XcheckConfig) -> Vec<Outcome> {
    let acfg = AbstractionConfig {
        trials: cfg.trials.unwrap_or(10_000),
        seed: cfg.seed,
        max_refs: cfg.refs.unwrap_or(4),
        mutant: cfg.mutant,
        ..Default::default()
    };
    crate::pool::run(cfg.jobs, cfg.domains.clone(), |fam| {
        let r = check_secure_abstraction(fam, acfg);
        let kinds: Vec<String> = r.by_kind().iter().map(|(k, n)| format!("{k}={n}")).collect();
        let mut line = format!(
            "abstraction [{}] mutant={} trials={} seed={}: violations={} observable={} {} {}",
            r.domain,
            cfg.mutant.name(),
            r.trials,
            r.seed,
            r.violations.len(),
            r.observable(),
            kinds.join(" "),
            verdict(r.passed())
        );
        if let Some(v) = r.violations.iter().find(|v| v.mutant_only).or(r.violations.first()) {
            line.push_str(&format!("\n  reproducer ({}; {}):\n  {}", v.kind.name(), v.context, v.program));
        }
        Outcome { line, passed: r.passed(), json: r.to_json() }
    })
}

fn ni(cfg: &XcheckConfig) -> Result<Vec<Outcome>, CliError> {
    let input: Input = match &cfg.program {
        Some(p) => load_file(p)?,
        None => load_source("<corpus>", &corpus::corpus(cfg.seed, 50))?,
    };
    let p = &input.program;
    let opts = AnalysisOptions { encode: EncodeOptions { mutant: cfg.mutant, ..Default::default() }, ..Default::default() };
    let mut jobs = Vec::new();
    let mut names: Vec<(usize, &str)> = p.methods.iter().enumerate().map(|(i, m)| (i, m.name.as_str())).collect();
    names.sort_by_key(|&(_, n)| n);
    for (i, _) in names {
        // Calls are summarized, not interpreted.
        if p.methods[i].body.iter().any(|s| matches!(s, TStmt::Call { .. })) {
            continue;
        }
        for fam in &cfg.domains {
            jobs.push((i, fam.clone()));
        }
    }
    let ncfg = NiConfig { trials: cfg.trials.unwrap_or(200), stop_after: 0, budget: cfg.budget, seed: cfg.seed };
    crate::pool::run(cfg.jobs, jobs, |(i, fam)| {
        let m = &p.methods[i];
        let mut mgr = Manager::new();
        let (g, e) = synthesize_guard(&mut mgr, &p.classes, m, fam, &SummaryTable::new(), opts).map_err(|e| match e {
            GuardError::Encode(e) => CliError::encode(&input.path, e),
            GuardError::Heap(h) => CliError::Heap(h),
        })?;
        let r = check_noninterference(&mut mgr, &e, &p.classes, m, g.formula, ncfg);
        let mut line = format!(
            "ni {} [{}] mutant={} trials={} seed={}: checked={} rejected={} diverged={} violations={} {}",
            m.name,
            r.domain,
            cfg.mutant.name(),
            r.trials,
            r.seed,
            r.checked,
            r.rejected,
            r.diverged,
            r.violations.len(),
            verdict(r.passed())
        );
        if let Some(v) = r.violations.first() {
            line.push_str(&format!("\n  {}: {:?} vs {:?}", v.context, v.low1, v.low2));
        }
        Ok(Outcome { line, passed: r.passed(), json: r.to_json() })
    })
    .into_iter()
    .collect()
}
