use hg_guard::{dnf, formula_text, synthesize_guard, AnalysisOptions, GuardError, Limits};
use hg_heap::HeapFamily;
use hg_predicate::{Bdd, Manager};
use hg_scfg::{EncodeOptions, SummaryTable};
use serde_json::{json, Value};

use crate::{load_inputs, pool, CliError, Input, RunConfig};

/// One guard per (method, domain).
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub file: String,
    pub method: String,
    pub domain: String,
    pub refcount: usize,
    pub statebits: usize,
    pub locations: usize,
    pub iterations: usize,
    pub millis: u64,
    pub classification: String,
    pub formula: String,
    pub dnf: Vec<String>,
    pub interrupted: Option<String>,
}

impl Record {
    pub fn text(&self) -> String {
        let mut s = format!("{} [{}] {}: {}", self.method, self.domain, self.classification, self.formula);
        if let Some(i) = &self.interrupted {
            s.push_str(&format!(" (interrupted: {i})"));
        }
        s
    }

    pub fn dnf_text(&self) -> String {
        let mut s = format!("{} [{}]", self.method, self.domain);
        if self.dnf.is_empty() {
            s.push_str("\n  false");
        }
        for c in &self.dnf {
            s.push_str("\n  ");
            s.push_str(c);
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "file": self.file,
            "method": self.method,
            "domain": self.domain,
            "refcount": self.refcount,
            "classification": self.classification,
            "formula": self.formula,
            "dnf": self.dnf,
            "interrupted": self.interrupted,
            "stats": {
                "locations": self.locations,
                "statebits": self.statebits,
                "iterations": self.iterations,
                "millis": self.millis,
            },
        })
    }

    pub fn from_json(v: &Value) -> Option<Record> {
        let s = |k: &str| v.get(k).and_then(Value::as_str).map(String::from);
        let st = v.get("stats")?;
        let n = |k: &str| st.get(k).and_then(Value::as_u64);
        Some(Record {
            file: s("file").unwrap_or_default(),
            method: s("method")?,
            domain: s("domain")?,
            refcount: v.get("refcount").and_then(Value::as_u64).unwrap_or(0) as usize,
            statebits: n("statebits")? as usize,
            locations: n("locations").unwrap_or(0) as usize,
            iterations: n("iterations").unwrap_or(0) as usize,
            millis: n("millis")?,
            classification: s("classification")?,
            formula: s("formula")?,
            dnf: v.get("dnf")?.as_array()?.iter().filter_map(|c| c.as_str().map(String::from)).collect(),
            interrupted: s("interrupted"),
        })
    }
}

fn options(cfg: &RunConfig) -> AnalysisOptions {
    AnalysisOptions {
        encode: EncodeOptions { assume_worst: cfg.assume_worst, ..Default::default() },
        limits: Limits { timeout: Some(cfg.timeout), node_cap: cfg.node_cap },
    }
}

/// Guard of one method in its own manager.
pub fn analyze_method(
    input: &Input,
    method: usize,
    family: HeapFamily,
    stubs: &SummaryTable,
    opts: AnalysisOptions,
) -> Result<Record, CliError> {
    let p = &input.program;
    let m = &p.methods[method];
    let mut mgr = Manager::new();
    let (g, _) = synthesize_guard(&mut mgr, &p.classes, m, family, stubs, opts).map_err(|e| match e {
        GuardError::Encode(e) => CliError::encode(&input.path, e),
        GuardError::Heap(h) => CliError::Heap(h),
    })?;
    Ok(Record {
        file: input.path.clone(),
        method: m.name.clone(),
        domain: g.domain.to_string(),
        refcount: m.refs.len(),
        statebits: g.stats.statebits,
        locations: g.stats.locations,
        iterations: g.stats.iterations,
        millis: g.stats.millis as u64,
        classification: g.class().name().to_string(),
        formula: formula_text(&mut mgr, g.formula),
        dnf: if g.formula == Bdd::FALSE { Vec::new() } else { dnf(&mut mgr, g.formula) },
        interrupted: g.interrupted.map(|i| i.to_string()),
    })
}

/// Every (method, domain) pair of the inputs, sorted by method name, then
/// file, then domain in the order given.
pub fn analyze_inputs(inputs: &[Input], cfg: &RunConfig) -> Result<Vec<Record>, CliError> {
    let stubs = cfg.summaries()?;
    let opts = options(cfg);
    let mut jobs = Vec::new();
    for (i, input) in inputs.iter().enumerate() {
        for m in 0..input.program.methods.len() {
            for (d, fam) in cfg.domains.iter().enumerate() {
                jobs.push((i, m, d, fam.clone()));
            }
        }
    }
    let mut results: Vec<((String, String, usize), Result<Record, CliError>)> = pool::run(cfg.jobs, jobs, |(i, m, d, fam)| {
        let key = (inputs[i].program.methods[m].name.clone(), inputs[i].path.clone(), d);
        (key, analyze_method(&inputs[i], m, fam, &stubs, opts))
    });
    results.sort_by(|a, b| a.0.cmp(&b.0));
    results.into_iter().map(|(_, r)| r).collect()
}

pub fn analyze(cfg: &RunConfig) -> Result<Vec<Record>, CliError> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    analyze_inputs(&inputs, cfg)
}
