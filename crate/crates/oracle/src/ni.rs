//! Randomized two-run noninterference check of an inferred guard.
//!
//! Each trial draws a calling context and a concrete input, keeps it when
//! the guard holds, builds a second input that differs only in high data
//! and compares the low outputs of both runs.

use hg_heap::H;
use hg_predicate::{Bdd, Manager};
use hg_scfg::Encoding;
use hg_sir::ast::PrimTy;
use hg_sir::typed::VarRef;
use hg_sir::{ClassTable, TypedMethod};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::concrete::{ConcreteOp, PVal};
use crate::interp::{low_equivalent, run_concrete, ProgState, Trace};
use crate::sample;

#[derive(Clone, Copy, Debug)]
pub struct NiConfig {
    /// Upper bound on sampled contexts.
    pub trials: usize,
    /// Stop once this many pairs were checked; 0 runs every trial.
    pub stop_after: usize,
    /// Statement budget per run.
    pub budget: usize,
    pub seed: u64,
}

impl Default for NiConfig {
    fn default() -> Self {
        NiConfig { trials: 1000, stop_after: 0, budget: 500, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct NiViolation {
    pub trial: usize,
    /// Calling context the guard accepted.
    pub context: String,
    pub low1: Vec<String>,
    pub low2: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct NiReport {
    pub method: String,
    pub domain: &'static str,
    pub trials: usize,
    pub seed: u64,
    /// Trials whose context satisfied the guard and were run twice.
    pub checked: usize,
    /// Trials whose context the guard rejected.
    pub rejected: usize,
    /// Checked trials where some run trapped or ran out of budget.
    pub diverged: usize,
    pub violations: Vec<NiViolation>,
}

impl NiReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "check": "noninterference",
            "method": self.method,
            "domain": self.domain,
            "trials": self.trials,
            "seed": self.seed,
            "checked": self.checked,
            "rejected": self.rejected,
            "diverged": self.diverged,
            "violations": self.violations.iter().map(|v| json!({
                "trial": v.trial, "context": v.context, "low1": v.low1, "low2": v.low2,
            })).collect::<Vec<_>>(),
        })
    }
}

fn random_prim<R: Rng>(rng: &mut R, ty: PrimTy) -> PVal {
    match ty {
        PrimTy::Int => PVal::Int(rng.gen_range(-2..=3)),
        PrimTy::Bool => PVal::Bool(rng.gen_bool(0.5)),
    }
}

fn context_text(mgr: &Manager, enc: &Encoding, m: &TypedMethod, val: &[bool]) -> String {
    enc.vars
        .context_vars(m)
        .into_iter()
        .map(|v| format!("{}={}", mgr.var_name(v), if val[v.index()] { "high" } else { "low" }))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs `trials` two-run experiments of `m` against `guard`, a formula over
/// the calling-context variables of `enc`. The calling context is always
/// low (`pc = ⊥`); aliasing between references is kept equal in both runs.
pub fn check_noninterference(
    mgr: &mut Manager,
    enc: &Encoding,
    classes: &ClassTable,
    m: &TypedMethod,
    guard: Bdd,
    cfg: NiConfig,
) -> NiReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sv = &enc.vars;
    let sh = &sv.heap;
    let cubes = mgr.isop(guard);
    let statics: Vec<_> = m.refs.iter().map(|r| r.class).collect();
    let mut report = NiReport {
        method: m.name.clone(),
        domain: sh.instance().family().name,
        trials: cfg.trials,
        seed: cfg.seed,
        ..Default::default()
    };
    for trial in 0..cfg.trials {
        if cfg.stop_after > 0 && report.checked >= cfg.stop_after {
            report.trials = trial;
            break;
        }
        let mut val = vec![false; mgr.num_vars()];
        for &p in &m.params {
            val[sv.level_var(p).index()] = rng.gen_bool(0.5);
            if let VarRef::Ref(r) = p {
                val[sh.level_var(H, r).index()] = rng.gen_bool(0.5);
            }
        }
        if let Some(cube) = cubes.choose(&mut rng).filter(|_| rng.gen_bool(0.7)) {
            for &(v, b) in cube {
                val[v.index()] = b;
            }
        }
        val[sv.pc.index()] = false;

        let mut h1 = sample::heap(&mut rng, classes, &statics);
        for r in m.local_refs() {
            h1.apply(classes, ConcreteOp::Null(r)).expect("reference in range");
        }
        for (key, v) in sh.rel_vars(H) {
            val[v.index()] = sample::holds(&h1, key);
        }
        sample::close_levels(sh, &mut val);
        let low = sample::low_refs(sh, &val);
        let h2 = sample::perturb_high(&mut rng, classes, &h1, &low);
        for (key, v) in sh.rel_vars(H) {
            val[v.index()] |= sample::holds(&h2, key);
        }
        sample::close_levels(sh, &mut val);
        if !mgr.eval(guard, |v| val[v.index()]) {
            report.rejected += 1;
            continue;
        }
        report.checked += 1;

        let mut s1 = ProgState::new(classes, m);
        s1.heap = h1;
        for &p in &m.params {
            if let VarRef::Prim(i) = p {
                s1.prims[i] = random_prim(&mut rng, m.prims[i].ty);
            }
        }
        let mut s2 = s1.clone();
        s2.heap = h2;
        for &p in &m.params {
            if let VarRef::Prim(i) = p {
                if val[sv.level_var(p).index()] {
                    s2.prims[i] = random_prim(&mut rng, m.prims[i].ty);
                }
            }
        }
        let t1 = run_concrete(classes, m, s1, cfg.budget);
        let t2 = run_concrete(classes, m, s2, cfg.budget);
        let done = |t: &Trace| t.status == crate::interp::Status::Halted;
        if !done(&t1) || !done(&t2) {
            report.diverged += 1;
        }
        if !low_equivalent(&t1, &t2) {
            let own = |t: &Trace| t.low().into_iter().map(String::from).collect();
            report.violations.push(NiViolation {
                trial,
                context: context_text(mgr, enc, m, &val),
                low1: own(&t1),
                low2: own(&t2),
            });
        }
    }
    report
}
