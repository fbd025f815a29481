//! Abstract heaps as BDD state variables, and their predicate transformers.
//!
//! Levels are Booleans with `true` standing for ⊤, so ⊔ is `or` and
//! `x ⊑ y` is `x ⇒ y`.

use std::collections::BTreeMap;

use hg_predicate::{AssignmentSet, Bdd, Manager, Var};
use hg_sir::typed::RefId;

use crate::domain::{HeapDomainInstance, RelKey, Slot};
use crate::hierarchy::Relation;
use crate::HeapError;

/// Index of the working heap copy.
pub const H: usize = 0;
/// Index of the placeholder copy used during upgrade analyses.
pub const H_PRIME: usize = 1;

/// Deliberately corrupted transformers, used as controls by the checkers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mutant {
    #[default]
    None,
    /// `UpdHpRel(r=s)` and `UpdHpRel(r=s.f)` omit the `d ↪* r` updates.
    DropFieldAlias,
    /// `UpdHpLev` ignores `s ↪* r`.
    LevSkipFieldAlias,
    /// `UpdHpLev` ignores `s ∼ r` for `s ≠ r`.
    LevSkipAlias,
    /// `(r=s)` leaves `r⃗` unchanged.
    CopySkipLevel,
}

impl Mutant {
    pub const ALL: [Mutant; 4] = [
        Mutant::DropFieldAlias,
        Mutant::LevSkipFieldAlias,
        Mutant::LevSkipAlias,
        Mutant::CopySkipLevel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutant::None => "none",
            Mutant::DropFieldAlias => "drop-fieldalias",
            Mutant::LevSkipFieldAlias => "lev-skip-fieldalias",
            Mutant::LevSkipAlias => "lev-skip-alias",
            Mutant::CopySkipLevel => "copy-skip-level",
        }
    }
}

/// Relation updates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelUpdate {
    /// `r = _`: `r` now names a fresh object or null.
    Erase(RefId),
    /// `r = s`
    Copy { r: RefId, s: RefId },
    /// `r = s.f`
    Load { r: RefId, s: RefId },
    /// `r.f = s`
    Store { r: RefId, s: RefId },
}

/// Reference assignments and object mutations. `l` is the level
/// of the information flowing into the mutated or allocated object.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeapOp {
    Null(RefId),
    Copy { r: RefId, s: RefId },
    Load { r: RefId, s: RefId },
    New { r: RefId, l: Bdd },
    StorePrim { r: RefId, l: Bdd },
    StoreRef { r: RefId, s: RefId, l: Bdd },
}

/// State variables of one or more abstract heap copies over a domain
/// instance.
#[derive(Clone, Debug)]
pub struct SymbolicHeap {
    inst: HeapDomainInstance,
    levels: Vec<Vec<Var>>,
    rels: Vec<BTreeMap<RelKey, Var>>,
    mutant: Mutant,
}

fn suffix(copy: usize) -> String {
    "'".repeat(copy)
}

impl SymbolicHeap {
    pub fn new(mgr: &mut Manager, inst: HeapDomainInstance, copies: usize) -> Self {
        Self::allocate(mgr, inst, copies, |_, _| {})
    }

    /// Allocates `r⃗` for every copy right after calling `before_ref(r)`, so
    /// callers can interleave their own per-reference variables. Relation
    /// variables follow, grouped by reference pair with copies adjacent.
    pub fn allocate(
        mgr: &mut Manager,
        inst: HeapDomainInstance,
        copies: usize,
        mut before_ref: impl FnMut(&mut Manager, RefId),
    ) -> Self {
        let mut levels = vec![Vec::with_capacity(inst.len()); copies];
        for r in 0..inst.len() {
            before_ref(mgr, r);
            for (c, lv) in levels.iter_mut().enumerate() {
                lv.push(mgr.new_var(format!("reach({}){}", inst.ref_name(r), suffix(c))));
            }
        }
        let mut keys = inst.v_r();
        keys.sort_by_key(|k| (k.r.min(k.s), k.r.max(k.s), k.rel, k.r));
        let mut rels = vec![BTreeMap::new(); copies];
        for k in keys {
            let (a, b) = (inst.ref_name(k.r), inst.ref_name(k.s));
            let base = match k.rel {
                Relation::Alias => format!("alias({a},{b})"),
                Relation::Reach => format!("freach({a},{b})"),
            };
            for (c, map) in rels.iter_mut().enumerate() {
                map.insert(k, mgr.new_var(format!("{base}{}", suffix(c))));
            }
        }
        SymbolicHeap { inst, levels, rels, mutant: Mutant::None }
    }

    pub fn with_mutant(mut self, m: Mutant) -> Self {
        self.mutant = m;
        self
    }

    pub fn mutant(&self) -> Mutant {
        self.mutant
    }

    pub fn instance(&self) -> &HeapDomainInstance {
        &self.inst
    }

    pub fn copies(&self) -> usize {
        self.levels.len()
    }

    pub fn level_var(&self, copy: usize, r: RefId) -> Var {
        self.levels[copy][r]
    }

    pub fn level(&self, mgr: &mut Manager, copy: usize, r: RefId) -> Bdd {
        mgr.var(self.levels[copy][r])
    }

    pub fn rel_var(&self, copy: usize, key: RelKey) -> Option<Var> {
        self.rels[copy].get(&RelKey::new(key.rel, key.r, key.s)).copied()
    }

    /// All variables of one copy: levels then relations.
    pub fn vars(&self, copy: usize) -> Vec<Var> {
        self.levels[copy]
            .iter()
            .copied()
            .chain(self.rels[copy].values().copied())
            .collect()
    }

    pub fn rel_vars(&self, copy: usize) -> impl Iterator<Item = (RelKey, Var)> + '_ {
        self.rels[copy].iter().map(|(k, v)| (*k, *v))
    }

    /// `r rel s` in the given copy: its variable, or the pre-analysis constant.
    pub fn rel(&self, mgr: &mut Manager, copy: usize, key: RelKey) -> Bdd {
        match self.inst.slot(key) {
            Slot::Var => mgr.var(self.rel_var(copy, key).expect("allocated")),
            Slot::Const(b) => Bdd::from_bool(b),
        }
    }

    pub fn alias(&self, mgr: &mut Manager, copy: usize, r: RefId, s: RefId) -> Bdd {
        self.rel(mgr, copy, RelKey::alias(r, s))
    }

    pub fn reach(&self, mgr: &mut Manager, copy: usize, r: RefId, s: RefId) -> Bdd {
        self.rel(mgr, copy, RelKey::reach(r, s))
    }

    fn set_rel(&self, out: &mut AssignmentSet, mgr: &mut Manager, copy: usize, key: RelKey, rhs: Bdd) {
        if let Some(v) = self.rel_var(copy, key) {
            out.join_into(mgr, v, rhs);
        }
    }

    fn check(&self, refs: &[RefId]) -> Result<(), HeapError> {
        refs.iter().try_for_each(|&r| self.inst.check_ref(r))
    }

    /// `UpdHpRel` on one copy. Targets that are constants in this
    /// domain are dropped. For `d = r` the right-hand sides describe the new
    /// object itself: `r ↪* r` becomes `s ↪* s` after `r = s`, and `tt` after
    /// `r = s.f` (nothing tracked bounds cycles through `s.f`).
    pub fn upd_hp_rel(&self, mgr: &mut Manager, copy: usize, up: RelUpdate) -> Result<AssignmentSet, HeapError> {
        let n = self.inst.len();
        let mut out = AssignmentSet::new();
        let drop_d_r = self.mutant == Mutant::DropFieldAlias;
        match up {
            RelUpdate::Erase(r) => {
                self.check(&[r])?;
                for d in 0..n {
                    self.set_rel(&mut out, mgr, copy, RelKey::alias(d, r), Bdd::FALSE);
                    self.set_rel(&mut out, mgr, copy, RelKey::reach(r, d), Bdd::FALSE);
                    self.set_rel(&mut out, mgr, copy, RelKey::reach(d, r), Bdd::FALSE);
                }
            }
            RelUpdate::Copy { r, s } => {
                self.check(&[r, s])?;
                if r == s {
                    return Ok(out);
                }
                for d in (0..n).filter(|&d| d != r) {
                    let ds = self.alias(mgr, copy, d, s);
                    self.set_rel(&mut out, mgr, copy, RelKey::alias(d, r), ds);
                    let sd = self.reach(mgr, copy, s, d);
                    self.set_rel(&mut out, mgr, copy, RelKey::reach(r, d), sd);
                    if !drop_d_r {
                        let d_s = self.reach(mgr, copy, d, s);
                        self.set_rel(&mut out, mgr, copy, RelKey::reach(d, r), d_s);
                    }
                }
                let ss = self.reach(mgr, copy, s, s);
                self.set_rel(&mut out, mgr, copy, RelKey::reach(r, r), ss);
            }
            RelUpdate::Load { r, s } => {
                self.check(&[r, s])?;
                for d in (0..n).filter(|&d| d != r) {
                    let sd = self.reach(mgr, copy, s, d);
                    self.set_rel(&mut out, mgr, copy, RelKey::alias(d, r), sd);
                    self.set_rel(&mut out, mgr, copy, RelKey::reach(r, d), sd);
                    if !drop_d_r {
                        let ds = self.alias(mgr, copy, d, s);
                        let d_s = self.reach(mgr, copy, d, s);
                        let rhs = mgr.or(ds, d_s);
                        self.set_rel(&mut out, mgr, copy, RelKey::reach(d, r), rhs);
                    }
                }
                self.set_rel(&mut out, mgr, copy, RelKey::reach(r, r), Bdd::TRUE);
            }
            RelUpdate::Store { r, s } => {
                self.check(&[r, s])?;
                let keys: Vec<RelKey> = self.rels[copy].keys().copied().filter(|k| k.rel == Relation::Reach).collect();
                for k in keys {
                    let (a, b) = (k.r, k.s);
                    let old = self.reach(mgr, copy, a, b);
                    let ar = self.alias(mgr, copy, a, r);
                    let a_r = self.reach(mgr, copy, a, r);
                    let bs = self.alias(mgr, copy, b, s);
                    let s_b = self.reach(mgr, copy, s, b);
                    let left = mgr.or(ar, a_r);
                    let right = mgr.or(bs, s_b);
                    let new = mgr.and(left, right);
                    let rhs = mgr.or(old, new);
                    self.set_rel(&mut out, mgr, copy, k, rhs);
                }
            }
        }
        Ok(out)
    }

    /// Condition under which raising `r`'s objects also raises `s⃗`.
    fn shares(&self, mgr: &mut Manager, copy: usize, s: RefId, r: RefId) -> Bdd {
        let alias = if s != r && self.mutant == Mutant::LevSkipAlias {
            Bdd::FALSE
        } else {
            self.alias(mgr, copy, s, r)
        };
        let reach = if self.mutant == Mutant::LevSkipFieldAlias {
            Bdd::FALSE
        } else {
            self.reach(mgr, copy, s, r)
        };
        mgr.or(alias, reach)
    }

    /// `UpdHpLev(r, l)`: `s⃗ := s⃗ ⊔ (s ∼ r ∨ s ↪* r ? l : ⊥)` for every `s`.
    pub fn upd_hp_lev(&self, mgr: &mut Manager, copy: usize, r: RefId, l: Bdd) -> Result<AssignmentSet, HeapError> {
        self.check(&[r])?;
        let mut out = AssignmentSet::new();
        for s in 0..self.inst.len() {
            let cond = self.shares(mgr, copy, s, r);
            let raise = mgr.and(cond, l);
            let old = self.level(mgr, copy, s);
            let rhs = mgr.or(old, raise);
            out.set(self.levels[copy][s], rhs);
        }
        Ok(out)
    }

    /// Generic transformers.
    pub fn transformer(&self, mgr: &mut Manager, copy: usize, op: HeapOp) -> Result<AssignmentSet, HeapError> {
        let lev = |r: RefId| self.levels[copy][r];
        Ok(match op {
            HeapOp::Null(r) => {
                let rel = self.upd_hp_rel(mgr, copy, RelUpdate::Erase(r))?;
                rel.merge(mgr, &AssignmentSet::single(lev(r), Bdd::FALSE))
            }
            HeapOp::Copy { r, s } => {
                let rel = self.upd_hp_rel(mgr, copy, RelUpdate::Copy { r, s })?;
                if self.mutant == Mutant::CopySkipLevel {
                    rel
                } else {
                    let sl = self.level(mgr, copy, s);
                    rel.merge(mgr, &AssignmentSet::single(lev(r), sl))
                }
            }
            HeapOp::Load { r, s } => {
                let rel = self.upd_hp_rel(mgr, copy, RelUpdate::Load { r, s })?;
                let sl = self.level(mgr, copy, s);
                rel.merge(mgr, &AssignmentSet::single(lev(r), sl))
            }
            HeapOp::New { r, l } => {
                let rel = self.upd_hp_rel(mgr, copy, RelUpdate::Erase(r))?;
                rel.merge(mgr, &AssignmentSet::single(lev(r), l))
            }
            HeapOp::StorePrim { r, l } => self.upd_hp_lev(mgr, copy, r, l)?,
            HeapOp::StoreRef { r, s, l } => {
                let rel = self.upd_hp_rel(mgr, copy, RelUpdate::Store { r, s })?;
                let lv = self.upd_hp_lev(mgr, copy, r, l)?;
                rel.merge(mgr, &lv)
            }
        })
    }

    /// `(null R′)`: relation variables touching `R′` are false and every
    /// `r⃗` with `r ∈ R′` is ⊥.
    pub fn null_refs_pred(&self, mgr: &mut Manager, copy: usize, nulls: &[RefId]) -> Result<Bdd, HeapError> {
        self.check(nulls)?;
        let mut lits = Vec::new();
        for (k, v) in self.rel_vars(copy) {
            if nulls.iter().any(|&r| k.touches(r)) {
                lits.push((v, false));
            }
        }
        lits.extend(nulls.iter().map(|&r| (self.levels[copy][r], false)));
        lits.sort();
        lits.dedup();
        Ok(mgr.cube(&lits))
    }

    /// `[to := from]` for every variable of the copy.
    pub fn copy_heap(&self, mgr: &mut Manager, to: usize, from: usize) -> AssignmentSet {
        let mut out = AssignmentSet::new();
        for (t, f) in self.vars(to).into_iter().zip(self.vars(from)) {
            out.set(t, mgr.var(f));
        }
        out
    }

    /// `BulkUpgr_{to ← from} = CopyRels ⊔̇ RstrLev`.
    pub fn bulk_upgrade(&self, mgr: &mut Manager, to: usize, from: usize) -> AssignmentSet {
        let mut out = AssignmentSet::new();
        let keys: Vec<(RelKey, Var)> = self.rel_vars(to).collect();
        for (k, v) in keys {
            let src = mgr.var(self.rels[from][&k]);
            out.set(v, src);
        }
        let n = self.inst.len();
        for s in 0..n {
            let mut acc = self.level(mgr, to, s);
            for r in 0..n {
                let cond = self.shares(mgr, from, s, r);
                let rl = self.level(mgr, from, r);
                let t = mgr.and(cond, rl);
                acc = mgr.or(acc, t);
            }
            out.join_into(mgr, self.levels[to][s], acc);
        }
        out
    }

    /// `φ∼`: aliasing references carry identical levels.
    pub fn phi_alias(&self, mgr: &mut Manager, copy: usize) -> Bdd {
        let n = self.inst.len();
        let mut acc = Bdd::TRUE;
        for r in 0..n {
            for s in r + 1..n {
                let rel = self.alias(mgr, copy, r, s);
                let (lr, ls) = (self.level(mgr, copy, r), self.level(mgr, copy, s));
                let eq = mgr.equiv(lr, ls);
                let c = mgr.implies(rel, eq);
                acc = mgr.and(acc, c);
            }
        }
        acc
    }

    /// `φ↪*⊒`: `r ↪* s` implies `s⃗ ⊑ r⃗`.
    pub fn phi_reach(&self, mgr: &mut Manager, copy: usize) -> Bdd {
        let n = self.inst.len();
        let mut acc = Bdd::TRUE;
        for r in 0..n {
            for s in 0..n {
                let rel = self.reach(mgr, copy, r, s);
                let (lr, ls) = (self.level(mgr, copy, r), self.level(mgr, copy, s));
                let le = mgr.implies(ls, lr);
                let c = mgr.implies(rel, le);
                acc = mgr.and(acc, c);
            }
        }
        acc
    }
}
