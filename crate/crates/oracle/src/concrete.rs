//! Concrete heaps: references point into an arena of objects, so `∼` is
//! the partition induced by the reference map and `→f` is a per-object edge.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use hg_sir::typed::RefId;
use hg_sir::{ClassId, ClassTable, FieldId};
use thiserror::Error;

pub type ObjId = usize;

/// Value of a primitive field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PVal {
    Int(i64),
    Bool(bool),
    /// Field of a freshly allocated object.
    Default,
    /// Field of null or of an object the model does not track.
    Und,
}

impl fmt::Display for PVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PVal::Int(i) => write!(f, "{i}"),
            PVal::Bool(b) => write!(f, "{b}"),
            PVal::Default => f.write_str("default"),
            PVal::Und => f.write_str("und"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Object {
    pub class: ClassId,
    /// Stands for `null`: reading or writing through it traps when
    /// interpreting a program.
    pub null: bool,
    pub prims: BTreeMap<FieldId, PVal>,
    pub edges: BTreeMap<FieldId, ObjId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcreteHeap {
    pub objects: Vec<Object>,
    /// Object named by each reference.
    pub refs: Vec<ObjId>,
    /// Declared class of each reference; null takes this class.
    pub statics: Vec<ClassId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConcreteError {
    #[error("field {field} is not defined on class {class}")]
    NoField { class: String, field: FieldId },
    #[error("unknown reference {0}")]
    UnknownRef(RefId),
}

/// Heap operations of the concrete domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConcreteOp {
    Null(RefId),
    New { r: RefId, class: ClassId },
    Copy { r: RefId, s: RefId },
    Load { r: RefId, s: RefId, field: FieldId },
    StoreRef { r: RefId, field: FieldId, s: RefId },
    StorePrim { r: RefId, field: FieldId, value: PVal },
}

impl ConcreteHeap {
    /// Every reference null, each in its own singleton class.
    pub fn new(classes: &ClassTable, ref_classes: &[ClassId]) -> Self {
        let mut h = ConcreteHeap { objects: Vec::new(), refs: Vec::new(), statics: ref_classes.to_vec() };
        for &c in ref_classes {
            let o = h.alloc(classes, c, true, PVal::Und);
            h.refs.push(o);
        }
        h
    }

    pub fn alloc(&mut self, classes: &ClassTable, class: ClassId, null: bool, fill: PVal) -> ObjId {
        let prims = classes.prim_fields(class).into_iter().map(|f| (f, fill)).collect();
        self.objects.push(Object { class, null, prims, edges: BTreeMap::new() });
        self.objects.len() - 1
    }

    pub fn obj(&self, r: RefId) -> &Object {
        &self.objects[self.refs[r]]
    }

    pub fn alias(&self, r: RefId, s: RefId) -> bool {
        self.refs[r] == self.refs[s]
    }

    /// `r →f s`
    pub fn field_alias(&self, r: RefId, field: FieldId, s: RefId) -> bool {
        self.obj(r).edges.get(&field) == Some(&self.refs[s])
    }

    /// Objects reachable from `o` through one or more edges.
    pub fn reachable_from(&self, o: ObjId) -> BTreeSet<ObjId> {
        let mut seen = BTreeSet::new();
        let mut q: VecDeque<ObjId> = self.objects[o].edges.values().copied().collect();
        while let Some(x) = q.pop_front() {
            if seen.insert(x) {
                q.extend(self.objects[x].edges.values().copied());
            }
        }
        seen
    }

    /// `r ↪* s`: the object of `s` is reachable from that of `r` by at least
    /// one field step.
    pub fn reach(&self, r: RefId, s: RefId) -> bool {
        self.reachable_from(self.refs[r]).contains(&self.refs[s])
    }

    fn check_field(&self, classes: &ClassTable, o: ObjId, field: FieldId) -> Result<(), ConcreteError> {
        let c = self.objects[o].class;
        if classes.all_fields(c).contains(&field) {
            Ok(())
        } else {
            Err(ConcreteError::NoField { class: classes.name(c).to_string(), field })
        }
    }

    /// Applies `op` in place.
    pub fn apply(&mut self, classes: &ClassTable, op: ConcreteOp) -> Result<(), ConcreteError> {
        let n = self.refs.len();
        let check = |r: RefId| if r < n { Ok(()) } else { Err(ConcreteError::UnknownRef(r)) };
        match op {
            ConcreteOp::Null(r) => {
                check(r)?;
                self.refs[r] = self.alloc(classes, self.statics[r], true, PVal::Und);
            }
            ConcreteOp::New { r, class } => {
                check(r)?;
                self.refs[r] = self.alloc(classes, class, false, PVal::Default);
            }
            ConcreteOp::Copy { r, s } => {
                check(r)?;
                check(s)?;
                self.refs[r] = self.refs[s];
            }
            ConcreteOp::Load { r, s, field } => {
                check(r)?;
                check(s)?;
                let src = self.refs[s];
                self.check_field(classes, src, field)?;
                self.refs[r] = match self.objects[src].edges.get(&field) {
                    Some(&t) => t,
                    None => self.alloc(classes, self.statics[r], true, PVal::Und),
                };
            }
            ConcreteOp::StoreRef { r, field, s } => {
                check(r)?;
                check(s)?;
                let dst = self.refs[r];
                self.check_field(classes, dst, field)?;
                let target = self.refs[s];
                if self.objects[target].null {
                    self.objects[dst].edges.remove(&field);
                } else {
                    self.objects[dst].edges.insert(field, target);
                }
            }
            ConcreteOp::StorePrim { r, field, value } => {
                check(r)?;
                let dst = self.refs[r];
                self.check_field(classes, dst, field)?;
                self.objects[dst].prims.insert(field, value);
            }
        }
        Ok(())
    }

    /// Value of `s.f_p`.
    pub fn read(&self, s: RefId, field: FieldId) -> PVal {
        self.obj(s).prims.get(&field).copied().unwrap_or(PVal::Und)
    }

    /// `∼` is an equivalence by construction; checks that every edge and
    /// reference points at an allocated object and that edges only leave
    /// through fields of the source object's class.
    pub fn well_formed(&self, classes: &ClassTable) -> bool {
        self.refs.iter().all(|&o| o < self.objects.len())
            && self.objects.iter().all(|o| {
                let fields = classes.ref_fields(o.class);
                o.edges.iter().all(|(f, &t)| fields.contains(f) && t < self.objects.len())
            })
    }
}

pub fn concrete_apply(h: &ConcreteHeap, classes: &ClassTable, op: ConcreteOp) -> Result<ConcreteHeap, ConcreteError> {
    let mut out = h.clone();
    out.apply(classes, op)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    Alias,
    Field(FieldId),
}

/// Labelled graph over named references.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RefGraph {
    pub nodes: BTreeSet<RefId>,
    pub edges: BTreeSet<(RefId, EdgeLabel, RefId)>,
}

/// Reference graph over `R′ = {r | low[r]}`: edges of `∼` and `→f` with at
/// least one endpoint in `R′`.
pub fn low_reference_graph(h: &ConcreteHeap, classes: &ClassTable, low: &[bool]) -> RefGraph {
    let n = h.refs.len();
    let mut g = RefGraph { nodes: (0..n).filter(|&r| low[r]).collect(), ..Default::default() };
    for r in 0..n {
        for s in 0..n {
            if !(low[r] || low[s]) {
                continue;
            }
            if h.alias(r, s) {
                g.edges.insert((r, EdgeLabel::Alias, s));
            }
            for f in classes.ref_fields(h.obj(r).class) {
                if h.field_alias(r, f, s) {
                    g.edges.insert((r, EdgeLabel::Field(f), s));
                }
            }
        }
    }
    g
}

/// Node maps tried when comparing graphs: identity only, or every
/// permutation of `R` fixing the set of low references.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Matching {
    #[default]
    Identity,
    Isomorphism,
}

fn low_prims_agree(h1: &ConcreteHeap, h2: &ConcreteHeap, low: &[bool]) -> bool {
    (0..h1.refs.len()).filter(|&r| low[r]).all(|r| h1.obj(r).prims == h2.obj(r).prims)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Low graphs match and low references agree on every primitive field.
pub fn indistinguishable(h1: &ConcreteHeap, h2: &ConcreteHeap, classes: &ClassTable, low: &[bool], how: Matching) -> bool {
    if !low_prims_agree(h1, h2, low) {
        return false;
    }
    let g1 = low_reference_graph(h1, classes, low);
    let g2 = low_reference_graph(h2, classes, low);
    match how {
        Matching::Identity => g1 == g2,
        Matching::Isomorphism => permutations(h1.refs.len()).into_iter().any(|pi| {
            (0..pi.len()).all(|r| low[r] == low[pi[r]])
                && g1.edges.len() == g2.edges.len()
                && g1.edges.iter().all(|&(a, l, b)| g2.edges.contains(&(pi[a], l, pi[b])))
        }),
    }
}

/// What separates two heaps that are not indistinguishable, most visible
/// first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Difference {
    /// A low reference's primitive fields differ.
    LowPrim,
    /// A `→f` edge leaving a low reference differs.
    LowEdge,
    /// A `∼` edge touching a low reference differs.
    Alias,
    /// Only `→f` edges from high references into low ones differ; no low
    /// sink can read these.
    HighToLowEdge,
}

impl Difference {
    pub fn name(self) -> &'static str {
        match self {
            Difference::LowPrim => "low-prim",
            Difference::LowEdge => "low-edge",
            Difference::Alias => "alias",
            Difference::HighToLowEdge => "high-to-low-edge",
        }
    }

    /// Differences a low output or a later low read can expose.
    pub fn observable(self) -> bool {
        self != Difference::HighToLowEdge
    }
}

/// The most visible difference under identity matching, if any.
pub fn difference(h1: &ConcreteHeap, h2: &ConcreteHeap, classes: &ClassTable, low: &[bool]) -> Option<Difference> {
    if !low_prims_agree(h1, h2, low) {
        return Some(Difference::LowPrim);
    }
    let g1 = low_reference_graph(h1, classes, low);
    let g2 = low_reference_graph(h2, classes, low);
    g1.edges
        .symmetric_difference(&g2.edges)
        .map(|&(r, l, _)| match l {
            EdgeLabel::Alias => Difference::Alias,
            EdgeLabel::Field(_) if low[r] => Difference::LowEdge,
            EdgeLabel::Field(_) => Difference::HighToLowEdge,
        })
        .min()
}
