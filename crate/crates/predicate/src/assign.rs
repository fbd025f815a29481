//! Simultaneous guarded assignments over decision-diagram variables.

use std::collections::BTreeMap;

use crate::bdd::{Bdd, Manager, Var};

/// Map from state variable to its new value. Variables not present keep
/// their value, so the empty set is the identity update.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AssignmentSet {
    map: BTreeMap<Var, Bdd>,
}

impl AssignmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(v: Var, rhs: Bdd) -> Self {
        let mut a = Self::new();
        a.set(v, rhs);
        a
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, v: Var) -> Option<Bdd> {
        self.map.get(&v).copied()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.map.contains_key(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Bdd)> + '_ {
        self.map.iter().map(|(&v, &b)| (v, b))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.map.keys().copied()
    }

    /// Overwrites any previous right-hand side for `v`.
    pub fn set(&mut self, v: Var, rhs: Bdd) {
        self.map.insert(v, rhs);
    }

    pub fn remove(&mut self, v: Var) -> Option<Bdd> {
        self.map.remove(&v)
    }

    /// Adds `v := rhs`, joining with an existing right-hand side.
    pub fn join_into(&mut self, mgr: &mut Manager, v: Var, rhs: Bdd) {
        let merged = match self.map.get(&v) {
            Some(&old) => mgr.or(old, rhs),
            None => rhs,
        };
        self.map.insert(v, merged);
    }

    /// `self ⊔̇ other`: union, with doubly assigned variables joined.
    pub fn merge(&self, mgr: &mut Manager, other: &AssignmentSet) -> AssignmentSet {
        let mut out = self.clone();
        for (v, rhs) in other.iter() {
            out.join_into(mgr, v, rhs);
        }
        out
    }

    /// Dense substitution table for [`Manager::compose`].
    pub fn table(&self, nvars: usize) -> Vec<Option<Bdd>> {
        let mut t = vec![None; nvars];
        for (v, rhs) in self.iter() {
            t[v.index()] = Some(rhs);
        }
        t
    }

    /// Evaluates every right-hand side on `val`, yielding the post-state.
    pub fn apply_to(&self, mgr: &Manager, val: &[bool]) -> Vec<bool> {
        let mut out = val.to_vec();
        for (v, rhs) in self.iter() {
            out[v.index()] = mgr.eval(rhs, |u| val[u.index()]);
        }
        out
    }
}

impl Manager {
    /// `f` with every assigned variable replaced by its right-hand side.
    pub fn substitute(&mut self, f: Bdd, a: &AssignmentSet) -> Bdd {
        if a.is_empty() || f.is_const() {
            return f;
        }
        let table = a.table(self.num_vars());
        self.compose(f, &table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_joins_doubly_assigned() {
        let mut m = Manager::new();
        let a = m.new_var("a");
        let b = m.new_var("b");
        let mut left = AssignmentSet::new();
        left.set(a, Bdd::TRUE);
        left.set(b, Bdd::FALSE);
        let right = AssignmentSet::single(b, Bdd::TRUE);
        let merged = left.merge(&mut m, &right);
        assert_eq!(merged.get(a), Some(Bdd::TRUE));
        assert_eq!(merged.get(b), Some(Bdd::TRUE));
        assert_eq!(left.merge(&mut m, &AssignmentSet::new()), left);
    }

    #[test]
    fn level_merge_is_join() {
        let mut m = Manager::new();
        let pc = m.new_var("pc");
        let i = m.new_var("i");
        let r = m.new_var("r");
        let pcb = m.var(pc);
        let ib = m.var(i);
        let merged = AssignmentSet::single(r, pcb).merge(&mut m, &AssignmentSet::single(r, ib));
        let rhs = merged.get(r).unwrap();
        for bits in 0..4u32 {
            let vals = [bits & 1 == 1, bits & 2 == 2, false];
            let got = m.eval(rhs, |v| vals[v.index()]);
            assert_eq!(got, vals[0] || vals[1]);
        }
    }

    #[test]
    fn substitute_identity_and_single() {
        let mut m = Manager::new();
        let v = m.new_var("v");
        let e = m.new_var("e");
        let pc = m.new_var("pc");
        let vb = m.var(v);
        assert_eq!(m.substitute(vb, &AssignmentSet::new()), vb);
        let eb = m.var(e);
        let pcb = m.var(pc);
        let rhs = m.or(eb, pcb);
        assert_eq!(m.substitute(vb, &AssignmentSet::single(v, rhs)), rhs);
    }
}
