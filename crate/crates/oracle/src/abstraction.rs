//! Randomized check that the abstract transformers preserve
//! indistinguishability of concrete heap pairs they abstract.

use std::collections::BTreeMap;

use hg_heap::{HeapFamily, HeapOp, Mutant, SymbolicHeap, H};
use hg_predicate::{AssignmentSet, Bdd, Manager};
use hg_sir::typed::{FieldTy, RefId};
use hg_sir::{ClassId, ClassTable};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::concrete::{difference, indistinguishable, ConcreteHeap, ConcreteOp, Difference, Matching, PVal};
use crate::sample;

#[derive(Clone, Copy, Debug)]
pub struct AbstractionConfig {
    pub trials: usize,
    pub seed: u64,
    pub max_refs: usize,
    /// Random operations run before every operation is tried.
    pub max_prefix: usize,
    pub mutant: Mutant,
    pub matching: Matching,
}

impl Default for AbstractionConfig {
    fn default() -> Self {
        AbstractionConfig { trials: 10_000, seed: 0, max_refs: 4, max_prefix: 4, mutant: Mutant::None, matching: Matching::Identity }
    }
}

/// The concrete operation on both heaps, the level of the flow into the
/// mutated or allocated object, and the value stored in the second heap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Step {
    op: ConcreteOp,
    high: bool,
    other: PVal,
}

#[derive(Clone, Debug)]
pub struct AbstractionViolation {
    pub trial: usize,
    pub kind: Difference,
    /// The real transformers preserve indistinguishability on the same
    /// states and operations; only set when checking a mutant.
    pub mutant_only: bool,
    /// Operations left after minimization.
    pub steps: usize,
    /// The class table and a method performing the operations; `h` stands
    /// for a high value.
    pub program: String,
    /// Initial levels and relation facts.
    pub context: String,
}

#[derive(Clone, Debug, Default)]
pub struct AbstractionReport {
    pub domain: &'static str,
    pub mutant: Mutant,
    pub trials: usize,
    pub seed: u64,
    /// Operations checked, prefixes included.
    pub checks: usize,
    /// Trials whose sampled second heap was not indistinguishable from the
    /// first and fell back to a copy.
    pub fallback: usize,
    /// Checked operations after which a concrete relation was missing from
    /// the abstract state.
    pub uncovered: usize,
    /// At most one per trial.
    pub violations: Vec<AbstractionViolation>,
}

impl AbstractionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn by_kind(&self) -> BTreeMap<&'static str, usize> {
        let mut m = BTreeMap::new();
        for v in &self.violations {
            *m.entry(v.kind.name()).or_default() += 1;
        }
        m
    }

    pub fn observable(&self) -> usize {
        self.violations.iter().filter(|v| v.kind.observable()).count()
    }

    pub fn mutant_only(&self) -> usize {
        self.violations.iter().filter(|v| v.mutant_only).count()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "check": "abstraction",
            "domain": self.domain,
            "mutant": self.mutant.name(),
            "trials": self.trials,
            "seed": self.seed,
            "checks": self.checks,
            "fallback": self.fallback,
            "uncovered": self.uncovered,
            "by_kind": self.by_kind(),
            "observable": self.observable(),
            "mutant_only": self.mutant_only(),
            "violations": self.violations.iter().map(|v| json!({
                "trial": v.trial,
                "kind": v.kind.name(),
                "mutant_only": v.mutant_only,
                "steps": v.steps,
                "program": v.program,
                "context": v.context,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Transformers are built once per abstract operation of a trial.
type OpKey = (u8, RefId, RefId, bool);

fn key(op: HeapOp) -> OpKey {
    match op {
        HeapOp::Null(r) => (0, r, r, false),
        HeapOp::Copy { r, s } => (1, r, s, false),
        HeapOp::Load { r, s } => (2, r, s, false),
        HeapOp::New { r, l } => (3, r, r, l == Bdd::TRUE),
        HeapOp::StorePrim { r, l } => (4, r, r, l == Bdd::TRUE),
        HeapOp::StoreRef { r, s, l } => (5, r, s, l == Bdd::TRUE),
    }
}

struct Trial {
    src: String,
    classes: ClassTable,
    ref_classes: Vec<ClassId>,
    h1: ConcreteHeap,
    h2: ConcreteHeap,
    mgr: Manager,
    sh: SymbolicHeap,
    val: Vec<bool>,
    cache: BTreeMap<(bool, OpKey), AssignmentSet>,
}

impl Trial {
    fn transformer(&mut self, op: HeapOp, real: bool) -> &AssignmentSet {
        let sh = if real { self.sh.clone().with_mutant(Mutant::None) } else { self.sh.clone() };
        let mgr = &mut self.mgr;
        self.cache
            .entry((real, key(op)))
            .or_insert_with(|| sh.transformer(mgr, H, op).expect("refs in range"))
    }

    fn level(&self, val: &[bool], r: RefId) -> bool {
        val[self.sh.level_var(H, r).index()]
    }
}

/// Every well-typed operation over the trial's references, each mutation at
/// every admissible level.
fn all_steps<R: Rng>(rng: &mut R, t: &Trial, val: &[bool]) -> Vec<Step> {
    let (classes, rc) = (&t.classes, &t.ref_classes);
    let n = rc.len();
    let plain = |op| Step { op, high: false, other: PVal::Und };
    let mut out = Vec::new();
    for r in 0..n {
        out.push(plain(ConcreteOp::Null(r)));
        for class in classes.subclasses(rc[r]) {
            for high in [false, true] {
                out.push(Step { op: ConcreteOp::New { r, class }, high, other: PVal::Und });
            }
        }
        for s in 0..n {
            if classes.is_subclass(rc[s], rc[r]) {
                out.push(plain(ConcreteOp::Copy { r, s }));
            }
        }
        for field in classes.ref_fields(rc[r]) {
            let FieldTy::Ref(ft) = classes.fields[field].ty else { continue };
            for d in 0..n {
                if classes.is_subclass(ft, rc[d]) {
                    out.push(plain(ConcreteOp::Load { r: d, s: r, field }));
                }
                if classes.is_subclass(rc[d], ft) {
                    for high in [false, true] {
                        if high || !t.level(val, d) {
                            out.push(Step { op: ConcreteOp::StoreRef { r, field, s: d }, high, other: PVal::Und });
                        }
                    }
                }
            }
        }
        for field in classes.prim_fields(rc[r]) {
            let v = rng.gen_range(0..3);
            out.push(Step { op: ConcreteOp::StorePrim { r, field, value: PVal::Int(v) }, high: false, other: PVal::Int(v) });
            let w = (v + rng.gen_range(1..3)) % 3;
            out.push(Step { op: ConcreteOp::StorePrim { r, field, value: PVal::Int(v) }, high: true, other: PVal::Int(w) });
        }
    }
    out
}

fn abstract_op(op: ConcreteOp, high: bool) -> HeapOp {
    let l = Bdd::from_bool(high);
    match op {
        ConcreteOp::Null(r) => HeapOp::Null(r),
        ConcreteOp::New { r, .. } => HeapOp::New { r, l },
        ConcreteOp::Copy { r, s } => HeapOp::Copy { r, s },
        ConcreteOp::Load { r, s, .. } => HeapOp::Load { r, s },
        ConcreteOp::StoreRef { r, s, .. } => HeapOp::StoreRef { r, s, l },
        ConcreteOp::StorePrim { r, .. } => HeapOp::StorePrim { r, l },
    }
}

#[derive(Clone)]
struct State {
    h1: ConcreteHeap,
    h2: ConcreteHeap,
    val: Vec<bool>,
}

/// Applies one step to both heaps and the abstract state; returns whether a
/// concrete relation went uncovered.
fn step(t: &mut Trial, st: &mut State, s: Step, real: bool) -> bool {
    let assign = t.transformer(abstract_op(s.op, s.high), real).clone();
    st.val = assign.apply_to(&t.mgr, &st.val);
    st.h1.apply(&t.classes, s.op).expect("well-typed step");
    let op2 = match s.op {
        ConcreteOp::StorePrim { r, field, .. } => ConcreteOp::StorePrim { r, field, value: s.other },
        op => op,
    };
    st.h2.apply(&t.classes, op2).expect("well-typed step");
    !sample::uncovered(&t.sh, &st.val, &st.h1).is_empty() || !sample::uncovered(&t.sh, &st.val, &st.h2).is_empty()
}

fn separated(t: &Trial, st: &State, matching: Matching) -> Option<Difference> {
    let low = sample::low_refs(&t.sh, &st.val);
    if indistinguishable(&st.h1, &st.h2, &t.classes, &low, matching) {
        None
    } else {
        Some(difference(&st.h1, &st.h2, &t.classes, &low).unwrap_or(Difference::HighToLowEdge))
    }
}

/// Runs `steps` from the trial's initial state; returns the first
/// difference to appear.
fn replay(t: &mut Trial, steps: &[Step], matching: Matching, real: bool) -> Option<Difference> {
    let mut st = State { h1: t.h1.clone(), h2: t.h2.clone(), val: t.val.clone() };
    for &s in steps {
        step(t, &mut st, s, real);
        if let Some(d) = separated(t, &st, matching) {
            return Some(d);
        }
    }
    None
}

/// Drops steps one at a time while the same kind of difference appears.
fn minimize(t: &mut Trial, mut steps: Vec<Step>, kind: Difference, matching: Matching) -> Vec<Step> {
    let mut i = 0;
    while i < steps.len() {
        let mut shorter = steps.clone();
        shorter.remove(i);
        if replay(t, &shorter, matching, false) == Some(kind) {
            steps = shorter;
        } else {
            i += 1;
        }
    }
    steps
}

fn render(t: &Trial, steps: &[Step]) -> (String, String) {
    let c = &t.classes;
    let x = |r: RefId| format!("x{r}");
    let fname = |f: usize| c.fields[f].name.clone();
    let mut params: Vec<String> = t.ref_classes.iter().enumerate().map(|(r, &k)| format!("{} {}", c.name(k), x(r))).collect();
    params.push("int h".into());
    let body: Vec<String> = steps
        .iter()
        .map(|st| match st.op {
            ConcreteOp::Null(r) => format!("{} = null;", x(r)),
            ConcreteOp::New { r, class } => format!("{} = new {};", x(r), c.name(class)),
            ConcreteOp::Copy { r, s } => format!("{} = {};", x(r), x(s)),
            ConcreteOp::Load { r, s, field } => format!("{} = {}.{};", x(r), x(s), fname(field)),
            ConcreteOp::StoreRef { r, field, s } => {
                let lv = if st.high { " // high" } else { "" };
                format!("{}.{} = {};{lv}", x(r), fname(field), x(s))
            }
            ConcreteOp::StorePrim { r, field, value } => {
                let rhs = if st.high { "h".to_string() } else { value.to_string() };
                format!("{}.{} = {rhs};", x(r), fname(field))
            }
        })
        .collect();
    let classes = t.src.split(" method main").next().unwrap_or_default();
    let program = format!("{classes} method repro({}) {{ {} }}", params.join(", "), body.join(" "));
    let mut facts: Vec<String> = (0..t.ref_classes.len())
        .map(|r| format!("reach({})={}", x(r), if t.level(&t.val, r) { "high" } else { "low" }))
        .collect();
    for (k, v) in t.sh.rel_vars(H) {
        if t.val[v.index()] {
            facts.push(t.sh.instance().key_name(k));
        }
    }
    (program, facts.join(" & "))
}

fn setup<R: Rng>(rng: &mut R, family: &HeapFamily, cfg: &AbstractionConfig, fallback: &mut usize) -> Trial {
    let src = sample::class_table_source(rng);
    let classes = hg_sir::load(&src).expect("generated class table").classes;
    let n = rng.gen_range(1..=cfg.max_refs);
    let ref_classes: Vec<ClassId> = (0..n).map(|_| rng.gen_range(0..classes.len())).collect();
    let h1 = sample::heap(rng, &classes, &ref_classes);
    let mut mgr = Manager::new();
    let inst = sample::instance(family.clone(), &classes, &ref_classes);
    let sh = SymbolicHeap::new(&mut mgr, inst, 1).with_mutant(cfg.mutant);
    let first = sample::covering_state(rng, &mgr, &sh, &[&h1], 0.1);
    let mut h2 = sample::perturb_high(rng, &classes, &h1, &sample::low_refs(&sh, &first));
    let mut val = first.clone();
    for (k, v) in sh.rel_vars(H) {
        val[v.index()] |= sample::holds(&h2, k);
    }
    sample::close_levels(&sh, &mut val);
    let low = sample::low_refs(&sh, &val);
    if !indistinguishable(&h1, &h2, &classes, &low, cfg.matching) || !sample::uncovered(&sh, &val, &h2).is_empty() {
        *fallback += 1;
        h2 = h1.clone();
        val = first;
    }
    Trial { src, classes, ref_classes, h1, h2, mgr, sh, val, cache: BTreeMap::new() }
}

/// Samples abstract states with two concrete heaps they abstract and that
/// are indistinguishable under them, runs a random prefix of operations,
/// then tries every operation. Reports the first pair of distinguishable
/// heaps per trial, minimized.
pub fn check_secure_abstraction(family: HeapFamily, cfg: AbstractionConfig) -> AbstractionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = AbstractionReport { domain: family.name, mutant: cfg.mutant, trials: cfg.trials, seed: cfg.seed, ..Default::default() };
    for trial in 0..cfg.trials {
        let mut t = setup(&mut rng, &family, &cfg, &mut report.fallback);
        let mut st = State { h1: t.h1.clone(), h2: t.h2.clone(), val: t.val.clone() };
        let mut prefix = Vec::new();
        let mut found = None;
        for _ in 0..rng.gen_range(0..=cfg.max_prefix) {
            let s = *all_steps(&mut rng, &t, &st.val).choose(&mut rng).expect("null is always possible");
            prefix.push(s);
            report.checks += 1;
            report.uncovered += step(&mut t, &mut st, s, false) as usize;
            if let Some(d) = separated(&t, &st, cfg.matching) {
                found = Some((prefix.clone(), d));
                break;
            }
        }
        if found.is_none() {
            for s in all_steps(&mut rng, &t, &st.val) {
                let mut next = st.clone();
                report.checks += 1;
                report.uncovered += step(&mut t, &mut next, s, false) as usize;
                if let Some(d) = separated(&t, &next, cfg.matching) {
                    let mut steps = prefix.clone();
                    steps.push(s);
                    found = Some((steps, d));
                    break;
                }
            }
        }
        if let Some((steps, kind)) = found {
            let steps = minimize(&mut t, steps, kind, cfg.matching);
            let mutant_only = cfg.mutant != Mutant::None && replay(&mut t, &steps, cfg.matching, true).is_none();
            let (program, context) = render(&t, &steps);
            report.violations.push(AbstractionViolation { trial, kind, mutant_only, steps: steps.len(), program, context });
        }
    }
    report
}

/// Where abstract states stopped over-approximating the concrete heap.
#[derive(Clone, Debug, Default)]
pub struct CoversReport {
    pub domain: &'static str,
    pub trials: usize,
    pub steps: usize,
    /// Steps after which some concrete relation was missing from the
    /// abstract state although none was before, by operation kind.
    pub fresh_gaps: BTreeMap<&'static str, usize>,
    /// First such step per operation kind, as a program.
    pub examples: BTreeMap<&'static str, String>,
}

impl CoversReport {
    pub fn gaps(&self) -> usize {
        self.fresh_gaps.values().sum()
    }
}

fn op_kind(op: ConcreteOp) -> &'static str {
    match op {
        ConcreteOp::Null(_) => "null",
        ConcreteOp::New { .. } => "new",
        ConcreteOp::Copy { .. } => "copy",
        ConcreteOp::Load { .. } => "load",
        ConcreteOp::StoreRef { .. } => "store-ref",
        ConcreteOp::StorePrim { .. } => "store-prim",
    }
}

/// Runs random operation sequences of at most `max_steps` concretely and
/// abstractly in lockstep and records every step after which a concrete
/// relation is no longer covered by the abstract state.
pub fn check_covers(family: HeapFamily, trials: usize, max_steps: usize, seed: u64) -> CoversReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = AbstractionConfig { seed, ..Default::default() };
    let mut report = CoversReport { domain: family.name, trials, ..Default::default() };
    let mut fallback = 0;
    for _ in 0..trials {
        let mut t = setup(&mut rng, &family, &cfg, &mut fallback);
        let mut st = State { h1: t.h1.clone(), h2: t.h1.clone(), val: t.val.clone() };
        let mut done = Vec::new();
        for _ in 0..rng.gen_range(1..=max_steps) {
            let s = *all_steps(&mut rng, &t, &st.val).choose(&mut rng).expect("null is always possible");
            let before = sample::uncovered(&t.sh, &st.val, &st.h1).is_empty();
            step(&mut t, &mut st, Step { other: s.op_value(), ..s }, false);
            done.push(s);
            report.steps += 1;
            if before && !sample::uncovered(&t.sh, &st.val, &st.h1).is_empty() {
                let kind = op_kind(s.op);
                *report.fresh_gaps.entry(kind).or_default() += 1;
                report.examples.entry(kind).or_insert_with(|| render(&t, &done).0);
            }
        }
    }
    report
}

impl Step {
    /// The value the first heap receives.
    fn op_value(&self) -> PVal {
        match self.op {
            ConcreteOp::StorePrim { value, .. } => value,
            _ => self.other,
        }
    }
}
