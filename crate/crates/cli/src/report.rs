//! Classification counts, timing percentiles and CSV export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::analyze::Record;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DomainSummary {
    pub methods: usize,
    pub secure_always: usize,
    pub conditional: usize,
    pub insecure_always: usize,
    pub interrupted: usize,
    pub millis: Vec<u64>,
}

impl DomainSummary {
    /// Nearest-rank percentile of the analysis times.
    pub fn percentile(&self, p: f64) -> u64 {
        if self.millis.is_empty() {
            return 0;
        }
        let mut v = self.millis.clone();
        v.sort_unstable();
        let rank = ((p / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
        v[rank.min(v.len()) - 1]
    }
}

/// Per-domain summary, domains in first-seen order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub domains: Vec<(String, DomainSummary)>,
}

impl Summary {
    pub fn of(records: &[Record]) -> Summary {
        let mut s = Summary::default();
        for r in records {
            let i = match s.domains.iter().position(|(d, _)| *d == r.domain) {
                Some(i) => i,
                None => {
                    s.domains.push((r.domain.clone(), DomainSummary::default()));
                    s.domains.len() - 1
                }
            };
            let d = &mut s.domains[i].1;
            d.methods += 1;
            match r.classification.as_str() {
                "secure-always" => d.secure_always += 1,
                "insecure-always" => d.insecure_always += 1,
                _ => d.conditional += 1,
            }
            d.interrupted += r.interrupted.is_some() as usize;
            d.millis.push(r.millis);
        }
        s
    }

    pub fn text(&self) -> String {
        let mut out = String::from("domain  methods  secure-always  conditional  insecure-always  interrupted  p50ms  p90ms  maxms\n");
        for (name, d) in &self.domains {
            let _ = writeln!(
                out,
                "{name:<6}  {:>7}  {:>13}  {:>11}  {:>15}  {:>11}  {:>5}  {:>5}  {:>5}",
                d.methods,
                d.secure_always,
                d.conditional,
                d.insecure_always,
                d.interrupted,
                d.percentile(50.0),
                d.percentile(90.0),
                d.percentile(100.0),
            );
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let per: BTreeMap<&str, Value> = self
            .domains
            .iter()
            .map(|(n, d)| {
                (
                    n.as_str(),
                    json!({
                        "methods": d.methods,
                        "secure-always": d.secure_always,
                        "conditional": d.conditional,
                        "insecure-always": d.insecure_always,
                        "interrupted": d.interrupted,
                        "p50_ms": d.percentile(50.0),
                        "p90_ms": d.percentile(90.0),
                        "max_ms": d.percentile(100.0),
                    }),
                )
            })
            .collect();
        json!(per)
    }
}

pub fn csv(records: &[Record]) -> String {
    let mut out = String::from("method,domain,refcount,statebits,millis,class\n");
    for r in records {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.method, r.domain, r.refcount, r.statebits, r.millis, r.classification);
    }
    out
}

/// The JSON document `analyze --format json` prints.
pub fn document(records: &[Record]) -> Value {
    json!({
        "guards": records.iter().map(Record::to_json).collect::<Vec<_>>(),
        "summary": Summary::of(records).to_json(),
    })
}

/// Records of a document written by `analyze --format json`.
pub fn records_of(doc: &Value) -> Option<Vec<Record>> {
    doc.get("guards")?.as_array()?.iter().map(Record::from_json).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(domain: &str, class: &str, millis: u64) -> Record {
        Record {
            file: "x.sir".into(),
            method: "m".into(),
            domain: domain.into(),
            refcount: 2,
            statebits: 10,
            locations: 3,
            iterations: 2,
            millis,
            classification: class.into(),
            formula: "pc=low".into(),
            dnf: vec!["pc=low".into()],
            interrupted: None,
        }
    }

    #[test]
    fn counts_and_percentiles() {
        let rs: Vec<Record> = (1..=10).map(|k| rec("deep", if k % 2 == 0 { "conditional" } else { "secure-always" }, k)).collect();
        let s = Summary::of(&rs);
        let d = &s.domains[0].1;
        assert_eq!((d.methods, d.conditional, d.secure_always), (10, 5, 5));
        assert_eq!((d.percentile(50.0), d.percentile(90.0), d.percentile(100.0)), (5, 9, 10));
    }

    #[test]
    fn documents_round_trip() {
        let rs = vec![rec("deep", "conditional", 3), rec("dumb", "insecure-always", 1)];
        assert_eq!(records_of(&document(&rs)).unwrap(), rs);
        assert_eq!(csv(&rs).lines().nth(1), Some("m,deep,2,10,3,conditional"));
    }
}
