//! Backward reachability over an SCFG.

use std::collections::{BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use hg_predicate::{Bdd, Manager};
use hg_scfg::Scfg;

/// A predicate over state variables per location index.
pub type StateSet = Vec<Bdd>;

/// Resource caps for one fixed-point computation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Limits {
    pub timeout: Option<Duration>,
    /// Upper bound on live diagram nodes in the manager.
    pub node_cap: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interrupt {
    Timeout,
    NodeCap,
}

impl std::fmt::Display for Interrupt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Interrupt::Timeout => f.write_str("timeout"),
            Interrupt::NodeCap => f.write_str("node cap"),
        }
    }
}

/// Predecessor states of `b` through the transitions leaving `loc`:
/// `∃I. ⋁ g ∧ b(target)[T]`.
pub fn pre_at(mgr: &mut Manager, s: &Scfg, b: &[Bdd], loc: usize) -> Bdd {
    let inputs = mgr.var_set(&s.input_vars);
    let mut acc = Bdd::FALSE;
    for t in &s.delta[loc] {
        let post = b[t.target];
        if post == Bdd::FALSE {
            continue;
        }
        let sub = mgr.substitute(post, &t.assign);
        let step = mgr.and_exists_set(t.guard, sub, inputs);
        acc = mgr.or(acc, step);
    }
    acc
}

pub fn preimage(mgr: &mut Manager, s: &Scfg, b: &[Bdd]) -> StateSet {
    (0..s.locations.len()).map(|l| pre_at(mgr, s, b, l)).collect()
}

/// `B_{i+1} = B0 ∪ pre(B_i)` for `i < n`; element `i` of the result is `B_i`.
pub fn kleene_iterates(mgr: &mut Manager, s: &Scfg, b0: &[Bdd], n: usize) -> Vec<StateSet> {
    let mut out = vec![b0.to_vec()];
    for _ in 0..n {
        let pre = preimage(mgr, s, out.last().unwrap());
        let next: StateSet = b0.iter().zip(pre).map(|(&a, p)| mgr.or(a, p)).collect();
        out.push(next);
    }
    out
}

#[derive(Clone, Debug)]
pub struct Coreach {
    pub sets: StateSet,
    /// Number of location updates performed.
    pub iterations: usize,
}

/// Least fixed point of `λB. B0 ∪ pre(B)` by chaotic iteration over a
/// worklist of locations whose successors changed.
pub fn coreach(mgr: &mut Manager, s: &Scfg, b0: &[Bdd], limits: Limits) -> Result<Coreach, Interrupt> {
    let start = Instant::now();
    let n = s.locations.len();
    let mut preds: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (l, ts) in s.delta.iter().enumerate() {
        for t in ts {
            preds[t.target].insert(l);
        }
    }
    let mut b = b0.to_vec();
    let mut queued = vec![false; n];
    let mut work = VecDeque::new();
    for l in (0..n).filter(|&l| b0[l] != Bdd::FALSE) {
        for &p in &preds[l] {
            if !queued[p] {
                queued[p] = true;
                work.push_back(p);
            }
        }
    }
    let mut iterations = 0;
    while let Some(l) = work.pop_front() {
        queued[l] = false;
        iterations += 1;
        if let Some(t) = limits.timeout {
            if start.elapsed() > t {
                return Err(Interrupt::Timeout);
            }
        }
        if let Some(cap) = limits.node_cap {
            if mgr.node_count() > cap {
                return Err(Interrupt::NodeCap);
            }
        }
        let pre = pre_at(mgr, s, &b, l);
        let next = mgr.or(b[l], pre);
        if next != b[l] {
            b[l] = next;
            for &p in &preds[l] {
                if !queued[p] {
                    queued[p] = true;
                    work.push_back(p);
                }
            }
        }
    }
    Ok(Coreach { sets: b, iterations })
}
