use hg_heap::{ClassHierarchy, HeapDomainInstance, HeapFamily};
use hg_predicate::Manager;
use hg_scfg::{encode_method, validate_scfg, EncodeOptions, SummaryTable, ValidationReport};

use crate::{load_inputs, pool, CliError, Input, RunConfig};

#[derive(Clone, Debug)]
pub struct Validation {
    pub method: String,
    pub domain: &'static str,
    pub statebits: usize,
    pub report: ValidationReport,
}

impl Validation {
    pub fn text(&self) -> String {
        let r = &self.report;
        let verdict = if r.is_ok() { "valid".to_string() } else { format!("{} issue(s)", r.issues.len()) };
        let mut s = format!(
            "{} [{}] {verdict}: statebits={} locations={} transitions={}",
            self.method, self.domain, self.statebits, r.locations, r.transitions
        );
        for i in &r.issues {
            s.push_str(&format!("\n  {i}"));
        }
        s
    }
}

/// Encodes one method and checks determinism and reactivity of its SCFG.
pub fn validate_method(
    input: &Input,
    method: usize,
    family: HeapFamily,
    stubs: &SummaryTable,
    opts: EncodeOptions,
) -> Result<Validation, CliError> {
    let p = &input.program;
    let m = &p.methods[method];
    let domain = family.name;
    let inst = HeapDomainInstance::for_method(family, m, &ClassHierarchy::new(&p.classes))?;
    let mut mgr = Manager::new();
    let e = encode_method(&mut mgr, &p.classes, m, inst, stubs, opts).map_err(|e| CliError::encode(&input.path, e))?;
    let report = validate_scfg(&mut mgr, &e.scfg);
    Ok(Validation { method: m.name.clone(), domain, statebits: e.scfg.state_vars.len(), report })
}

pub fn validate_inputs(inputs: &[Input], cfg: &RunConfig) -> Result<Vec<Validation>, CliError> {
    let stubs = cfg.summaries()?;
    let opts = EncodeOptions { assume_worst: cfg.assume_worst, ..Default::default() };
    let mut jobs = Vec::new();
    for (i, input) in inputs.iter().enumerate() {
        for m in 0..input.program.methods.len() {
            for (d, fam) in cfg.domains.iter().enumerate() {
                jobs.push((i, m, d, fam.clone()));
            }
        }
    }
    let mut out = pool::run(cfg.jobs, jobs, |(i, m, d, fam)| {
        let key = (inputs[i].program.methods[m].name.clone(), inputs[i].path.clone(), d);
        (key, validate_method(&inputs[i], m, fam, &stubs, opts))
    });
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.into_iter().map(|(_, v)| v).collect()
}

pub fn validate(cfg: &RunConfig) -> Result<Vec<Validation>, CliError> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    validate_inputs(&inputs, cfg)
}
