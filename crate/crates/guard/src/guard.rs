use std::time::Instant;

use hg_heap::{ClassHierarchy, HeapDomainInstance, HeapError, HeapFamily};
use hg_predicate::{Bdd, Manager, Var};
use hg_scfg::{encode_method, EncodeError, EncodeOptions, Encoding, SummaryTable};
use hg_sir::{ClassTable, TypedMethod};
use thiserror::Error;

use crate::coreach::{coreach, Interrupt, Limits, StateSet};

#[derive(Debug, Error)]
pub enum GuardError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Heap(#[from] HeapError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GuardClass {
    SecureAlways,
    InsecureAlways,
    Conditional,
}

impl GuardClass {
    pub fn name(self) -> &'static str {
        match self {
            GuardClass::SecureAlways => "secure-always",
            GuardClass::InsecureAlways => "insecure-always",
            GuardClass::Conditional => "conditional",
        }
    }
}

pub fn classify(g: Bdd) -> GuardClass {
    if g == Bdd::TRUE {
        GuardClass::SecureAlways
    } else if g == Bdd::FALSE {
        GuardClass::InsecureAlways
    } else {
        GuardClass::Conditional
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GuardStats {
    pub locations: usize,
    pub statebits: usize,
    pub iterations: usize,
    pub millis: u128,
}

/// A polymorphic guard over calling-context facts.
#[derive(Clone, Debug)]
pub struct Guard {
    pub method: String,
    pub domain: &'static str,
    pub formula: Bdd,
    /// Variables the guard may mention.
    pub context: Vec<Var>,
    pub stats: GuardStats,
    /// Set when a resource cap stopped the fixed point; the formula is then ff.
    pub interrupted: Option<Interrupt>,
}

impl Guard {
    pub fn class(&self) -> GuardClass {
        classify(self.formula)
    }
}

/// Bad states: `B0(ℓ) = ¬φ(ℓ)`.
pub fn bad_states(mgr: &mut Manager, e: &Encoding) -> StateSet {
    e.invariant.iter().map(|&i| mgr.not(i)).collect()
}

/// Guard of an already encoded method: `¬B∞(ℓ0)` cofactored by `X0`.
pub fn guard_of(mgr: &mut Manager, e: &Encoding, m: &TypedMethod, domain: &'static str, limits: Limits) -> Guard {
    let start = Instant::now();
    let b0 = bad_states(mgr, e);
    let mut stats = GuardStats {
        locations: e.scfg.locations.len(),
        statebits: e.scfg.state_vars.len(),
        ..Default::default()
    };
    let (formula, interrupted) = match coreach(mgr, &e.scfg, &b0, limits) {
        Ok(c) => {
            stats.iterations = c.iterations;
            let safe = mgr.not(c.sets[e.scfg.initial]);
            (mgr.cofactor(safe, e.scfg.x0).expect("initial predicate is a cube"), None)
        }
        Err(i) => (Bdd::FALSE, Some(i)),
    };
    stats.millis = start.elapsed().as_millis();
    Guard {
        method: m.name.clone(),
        domain,
        formula,
        context: e.vars.context_vars(m),
        stats,
        interrupted,
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AnalysisOptions {
    pub encode: EncodeOptions,
    pub limits: Limits,
}

/// Encodes `m` over `family` and infers its guard.
pub fn synthesize_guard(
    mgr: &mut Manager,
    classes: &ClassTable,
    m: &TypedMethod,
    family: HeapFamily,
    stubs: &SummaryTable,
    opts: AnalysisOptions,
) -> Result<(Guard, Encoding), GuardError> {
    let h = ClassHierarchy::new(classes);
    let domain = family.name;
    let inst = HeapDomainInstance::for_method(family, m, &h)?;
    let e = encode_method(mgr, classes, m, inst, stubs, opts.encode)?;
    let g = guard_of(mgr, &e, m, domain, opts.limits);
    Ok((g, e))
}
