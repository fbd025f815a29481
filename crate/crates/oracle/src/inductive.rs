//! Exhaustive check that the heap invariant `φ∼ ∧ φ↪*⊒` survives every
//! transformer, over small reference sets.

use std::collections::BTreeMap;

use hg_heap::{all_keys, HeapFamily, HeapOp, Mutant, Relation, SymbolicHeap, H};
use hg_predicate::{Bdd, Manager};
use hg_sir::typed::{FieldTy, RefId};
use hg_sir::{ClassId, ClassTable};
use serde_json::json;

use crate::sample;

/// Class table and reference classes the check enumerates over.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub source: String,
    pub refs: Vec<String>,
}

impl Scenario {
    pub fn new(name: &str, source: &str, refs: &[&str]) -> Self {
        Scenario { name: name.into(), source: source.into(), refs: refs.iter().map(|s| s.to_string()).collect() }
    }
}

const RUNNING: &str = "class A { int fi; } class B { A fa; }";
const LIST: &str = "class N { N nx; int v; }";
const MIXED: &str = "class A { int fi; } class N { N nx; int v; } class M extends N { A ma; }";

/// Built-in scenarios with at most `max_refs` references.
pub fn scenarios(max_refs: usize) -> Vec<Scenario> {
    let mut out = vec![Scenario::new("running", RUNNING, &["A", "B", "B"])];
    for k in 1..=max_refs.min(3) {
        out.push(Scenario::new(&format!("list{k}"), LIST, &vec!["N"; k]));
    }
    out.push(Scenario::new("mixed", MIXED, &["N", "M", "A"]));
    out.retain(|s| s.refs.len() <= max_refs);
    out
}

#[derive(Clone, Debug)]
pub struct InductiveViolation {
    pub scenario: String,
    pub kind: &'static str,
    pub op: String,
    /// `phi-alias` or `phi-reach`.
    pub predicate: &'static str,
    pub state: String,
    /// The pre-state respects transitivity and alias congruence.
    pub coherent: bool,
}

#[derive(Clone, Debug, Default)]
pub struct InductiveReport {
    pub domain: &'static str,
    pub mutant: Mutant,
    /// Valuations satisfying the invariant.
    pub states: usize,
    pub checks: usize,
    pub violations: usize,
    pub coherent_violations: usize,
    /// Violation counts per (operation kind, predicate).
    pub by_class: BTreeMap<(String, String), usize>,
    /// One violation per operation kind, predicate and coherence.
    pub examples: Vec<InductiveViolation>,
    /// With a mutant: (state, operation) points that break the invariant
    /// under the mutant but not under the real transformers.
    pub mutant_only: usize,
}

impl InductiveReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "check": "inductive",
            "domain": self.domain,
            "mutant": self.mutant.name(),
            "states": self.states,
            "checks": self.checks,
            "violations": self.violations,
            "coherent_violations": self.coherent_violations,
            "mutant_only": self.mutant_only,
            "classes": self.by_class.iter().map(|((op, p), n)| json!({"op": op, "predicate": p, "count": n})).collect::<Vec<_>>(),
            "examples": self.examples.iter().map(|v| json!({
                "scenario": v.scenario, "op": v.op, "predicate": v.predicate, "state": v.state, "coherent": v.coherent,
            })).collect::<Vec<_>>(),
        })
    }
}

fn kind(op: &HeapOp) -> &'static str {
    match op {
        HeapOp::Null(_) => "null",
        HeapOp::Copy { .. } => "copy",
        HeapOp::Load { .. } => "load",
        HeapOp::New { .. } => "new",
        HeapOp::StorePrim { .. } => "store-prim",
        HeapOp::StoreRef { .. } => "store-ref",
    }
}

fn show(op: &HeapOp) -> String {
    let lv = |l: &Bdd| if *l == Bdd::TRUE { "high" } else { "low" };
    match op {
        HeapOp::Null(r) => format!("x{r} = null"),
        HeapOp::Copy { r, s } => format!("x{r} = x{s}"),
        HeapOp::Load { r, s } => format!("x{r} = x{s}.f"),
        HeapOp::New { r, l } => format!("x{r} = new [{}]", lv(l)),
        HeapOp::StorePrim { r, l } => format!("x{r}.p = [{}]", lv(l)),
        HeapOp::StoreRef { r, s, l } => format!("x{r}.f = x{s} [{}]", lv(l)),
    }
}

/// Every well-typed heap operation over the references, at both levels;
/// admissibility of store levels depends on the state and is checked later.
pub fn operations(classes: &ClassTable, refs: &[ClassId]) -> Vec<HeapOp> {
    let n = refs.len();
    let mut ops = Vec::new();
    let field_types = |c: ClassId| -> Vec<ClassId> {
        classes
            .ref_fields(c)
            .into_iter()
            .filter_map(|f| match classes.fields[f].ty {
                FieldTy::Ref(t) => Some(t),
                FieldTy::Prim(_) => None,
            })
            .collect()
    };
    for r in 0..n {
        ops.push(HeapOp::Null(r));
        for l in [Bdd::FALSE, Bdd::TRUE] {
            ops.push(HeapOp::New { r, l });
            if !classes.prim_fields(refs[r]).is_empty() {
                ops.push(HeapOp::StorePrim { r, l });
            }
        }
        for s in 0..n {
            if classes.is_subclass(refs[s], refs[r]) {
                ops.push(HeapOp::Copy { r, s });
            }
            if field_types(refs[s]).iter().any(|&t| classes.related(t, refs[r])) {
                ops.push(HeapOp::Load { r, s });
            }
            if field_types(refs[r]).iter().any(|&t| classes.related(refs[s], t)) {
                for l in [Bdd::FALSE, Bdd::TRUE] {
                    ops.push(HeapOp::StoreRef { r, s, l });
                }
            }
        }
    }
    ops
}

/// Transitivity of `∼` and `↪*`, and `↪*` respecting `∼` on both sides.
fn coherent(sh: &SymbolicHeap, val: &[bool]) -> bool {
    let n = sh.instance().len();
    let rel = |rel: Relation, r: RefId, s: RefId| sample::abstract_rel(sh, val, hg_heap::RelKey::new(rel, r, s));
    let (al, re) = (Relation::Alias, Relation::Reach);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if rel(al, a, b) && rel(al, b, c) && !rel(al, a, c) {
                    return false;
                }
                if rel(re, a, b) && rel(re, b, c) && !rel(re, a, c) {
                    return false;
                }
                if rel(al, a, b) && (rel(re, a, c) != rel(re, b, c) || rel(re, c, a) != rel(re, c, b)) {
                    return false;
                }
            }
        }
    }
    true
}

fn state_text(sh: &SymbolicHeap, val: &[bool]) -> String {
    let inst = sh.instance();
    let mut parts: Vec<String> = (0..inst.len())
        .map(|r| format!("reach(x{r})={}", if val[sh.level_var(H, r).index()] { "high" } else { "low" }))
        .collect();
    for k in all_keys(inst.len()) {
        if k.r != k.s && sample::abstract_rel(sh, val, k) {
            parts.push(inst.key_name(k));
        }
    }
    parts.join(" & ")
}

/// Enumerates every valuation of the heap variables satisfying the
/// invariant and applies every operation to it. Relation constants of the
/// domain are fixed, so only the variable part is enumerated.
pub fn check_inductive(family: HeapFamily, max_refs: usize, mutant: Mutant) -> InductiveReport {
    let mut report = InductiveReport { domain: family.name, mutant, ..Default::default() };
    for sc in scenarios(max_refs) {
        let classes = hg_sir::load(&format!("{} method main() {{ local int z; z = 0; }}", sc.source))
            .expect("scenario class table")
            .classes;
        let refs: Vec<ClassId> = sc.refs.iter().map(|c| classes.lookup(c).expect("declared class")).collect();
        check_scenario(&mut report, &sc.name, &classes, &refs, family.clone(), mutant);
    }
    report
}

fn check_scenario(
    report: &mut InductiveReport,
    name: &str,
    classes: &ClassTable,
    refs: &[ClassId],
    family: HeapFamily,
    mutant: Mutant,
) {
    let mut mgr = Manager::new();
    let inst = sample::instance(family, classes, refs);
    let base = SymbolicHeap::new(&mut mgr, inst, 1);
    let sh = base.clone().with_mutant(mutant);
    let pa = sh.phi_alias(&mut mgr, H);
    let pr = sh.phi_reach(&mut mgr, H);
    let phi = mgr.and(pa, pr);
    let ops = operations(classes, refs);
    let trans: Vec<_> = ops.iter().map(|&op| sh.transformer(&mut mgr, H, op).expect("refs in range")).collect();
    let base_trans: Vec<_> = ops.iter().map(|&op| base.transformer(&mut mgr, H, op).expect("refs in range")).collect();
    let vars = sh.vars(H);
    let mut val = vec![false; mgr.num_vars()];
    for mask in 0u64..1 << vars.len() {
        for (k, v) in vars.iter().enumerate() {
            val[v.index()] = mask & (1 << k) != 0;
        }
        if !mgr.eval(phi, |v| val[v.index()]) {
            continue;
        }
        report.states += 1;
        let coh = coherent(&sh, &val);
        for (i, op) in ops.iter().enumerate() {
            // Stores carry at least the level of the stored reference.
            if let HeapOp::StoreRef { s, l, .. } = *op {
                if l == Bdd::FALSE && val[sh.level_var(H, s).index()] {
                    continue;
                }
            }
            report.checks += 1;
            let post = trans[i].apply_to(&mgr, &val);
            let holds = |f: Bdd, post: &[bool]| mgr.eval(f, |v| post[v.index()]);
            if holds(phi, &post) {
                continue;
            }
            if mutant != Mutant::None {
                let bpost = base_trans[i].apply_to(&mgr, &val);
                if holds(phi, &bpost) {
                    report.mutant_only += 1;
                }
            }
            let predicate = if holds(pa, &post) { "phi-reach" } else { "phi-alias" };
            report.violations += 1;
            if coh {
                report.coherent_violations += 1;
            }
            *report.by_class.entry((kind(op).to_string(), predicate.to_string())).or_default() += 1;
            if !report.examples.iter().any(|e| e.kind == kind(op) && e.predicate == predicate && e.coherent == coh) {
                report.examples.push(InductiveViolation {
                    scenario: name.to_string(),
                    kind: kind(op),
                    op: show(op),
                    predicate,
                    state: state_text(&sh, &val),
                    coherent: coh,
                });
            }
        }
    }
}
