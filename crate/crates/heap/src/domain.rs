//! Relation families and their instantiation over a method's references.

use std::collections::BTreeMap;
use std::fmt;

use hg_sir::typed::{RefId, TypedMethod};
use hg_sir::ClassId;

use crate::hierarchy::{ClassHierarchy, Relation, ThreeVal};
use crate::HeapError;

/// Which relations are tracked by variables (`sensitive`) and which only
/// through pre-analysis constants (`insensitive`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeapFamily {
    pub name: &'static str,
    pub sensitive: Vec<Relation>,
    pub insensitive: Vec<Relation>,
}

impl HeapFamily {
    pub fn deep() -> Self {
        HeapFamily {
            name: "deep",
            sensitive: vec![Relation::Alias, Relation::Reach],
            insensitive: vec![],
        }
    }

    pub fn shal() -> Self {
        HeapFamily {
            name: "shal",
            sensitive: vec![Relation::Alias],
            insensitive: vec![Relation::Reach],
        }
    }

    pub fn dumb() -> Self {
        HeapFamily {
            name: "dumb",
            sensitive: vec![],
            insensitive: vec![Relation::Alias, Relation::Reach],
        }
    }

    pub fn all() -> [HeapFamily; 3] {
        [Self::deep(), Self::shal(), Self::dumb()]
    }

    pub fn by_name(name: &str) -> Result<Self, HeapError> {
        match name {
            "deep" => Ok(Self::deep()),
            "shal" => Ok(Self::shal()),
            "dumb" => Ok(Self::dumb()),
            other => Err(HeapError::UnknownDomain(other.to_string())),
        }
    }

    pub fn is_sensitive(&self, rel: Relation) -> bool {
        self.sensitive.contains(&rel)
    }
}

/// One relation instance `r rel s`. Alias keys are stored with `r <= s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelKey {
    pub rel: Relation,
    pub r: RefId,
    pub s: RefId,
}

impl RelKey {
    pub fn new(rel: Relation, r: RefId, s: RefId) -> Self {
        if rel == Relation::Alias && s < r {
            RelKey { rel, r: s, s: r }
        } else {
            RelKey { rel, r, s }
        }
    }

    pub fn alias(r: RefId, s: RefId) -> Self {
        Self::new(Relation::Alias, r, s)
    }

    pub fn reach(r: RefId, s: RefId) -> Self {
        Self::new(Relation::Reach, r, s)
    }

    pub fn touches(&self, x: RefId) -> bool {
        self.r == x || self.s == x
    }
}

/// How a relation instance is represented in the abstract heap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Var,
    Const(bool),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefDecl {
    pub name: String,
    pub class: ClassId,
}

/// A family instantiated over an ordered reference set.
#[derive(Clone, Debug)]
pub struct HeapDomainInstance {
    family: HeapFamily,
    refs: Vec<RefDecl>,
    slots: BTreeMap<RelKey, Slot>,
}

impl HeapDomainInstance {
    pub fn instantiate(
        family: HeapFamily,
        refs: Vec<RefDecl>,
        hierarchy: &ClassHierarchy,
    ) -> Result<Self, HeapError> {
        let mut slots = BTreeMap::new();
        for key in all_keys(refs.len()) {
            let (tr, ts) = (refs[key.r].class, refs[key.s].class);
            let answer = hierarchy.can_relate(tr, ts, key.rel, key.r == key.s)?;
            let slot = match (family.is_sensitive(key.rel), answer) {
                (_, ThreeVal::No) => Slot::Const(false),
                (true, ThreeVal::Maybe) => Slot::Var,
                (_, _) => Slot::Const(true),
            };
            slots.insert(key, slot);
        }
        Ok(HeapDomainInstance { family, refs, slots })
    }

    /// Instance over the references of `m`, parameters first.
    pub fn for_method(
        family: HeapFamily,
        m: &TypedMethod,
        hierarchy: &ClassHierarchy,
    ) -> Result<Self, HeapError> {
        let refs = m
            .refs
            .iter()
            .map(|v| RefDecl { name: v.name.clone(), class: v.class })
            .collect();
        Self::instantiate(family, refs, hierarchy)
    }

    pub fn family(&self) -> &HeapFamily {
        &self.family
    }

    pub fn refs(&self) -> &[RefDecl] {
        &self.refs
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    pub fn ref_name(&self, r: RefId) -> &str {
        &self.refs[r].name
    }

    pub fn slot(&self, key: RelKey) -> Slot {
        self.slots[&RelKey::new(key.rel, key.r, key.s)]
    }

    pub fn slots(&self) -> impl Iterator<Item = (RelKey, Slot)> + '_ {
        self.slots.iter().map(|(k, s)| (*k, *s))
    }

    fn with_slot(&self, want: Slot) -> Vec<RelKey> {
        self.slots().filter(|&(_, s)| s == want).map(|(k, _)| k).collect()
    }

    /// Relation instances represented by variables.
    pub fn v_r(&self) -> Vec<RelKey> {
        self.with_slot(Slot::Var)
    }

    pub fn v_ff(&self) -> Vec<RelKey> {
        self.with_slot(Slot::Const(false))
    }

    pub fn v_tt(&self) -> Vec<RelKey> {
        self.with_slot(Slot::Const(true))
    }

    pub fn key_name(&self, key: RelKey) -> String {
        format!("{}{}{}", self.ref_name(key.r), key.rel.symbol(), self.ref_name(key.s))
    }

    pub fn check_ref(&self, r: RefId) -> Result<(), HeapError> {
        if r < self.refs.len() {
            Ok(())
        } else {
            Err(HeapError::UnknownRef(r))
        }
    }
}

impl fmt::Display for HeapDomainInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |keys: Vec<RelKey>| keys.into_iter().map(|k| self.key_name(k)).collect::<Vec<_>>().join(", ");
        writeln!(f, "domain {}", self.family.name)?;
        writeln!(f, "  V_R  = {{{}}}", show(self.v_r()))?;
        writeln!(f, "  V_ff = {{{}}}", show(self.v_ff()))?;
        write!(f, "  V_tt = {{{}}}", show(self.v_tt()))
    }
}

/// Unordered alias pairs (reflexive included) then ordered reach pairs.
pub fn all_keys(n: usize) -> impl Iterator<Item = RelKey> {
    let alias = (0..n).flat_map(move |r| (r..n).map(move |s| RelKey::alias(r, s)));
    let reach = (0..n).flat_map(move |r| (0..n).map(move |s| RelKey::reach(r, s)));
    alias.chain(reach)
}
