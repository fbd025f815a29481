//! Random class tables, heaps and abstract states for the checkers.

use hg_heap::{all_keys, HeapDomainInstance, RelKey, Relation, Slot, SymbolicHeap, H};
use hg_predicate::Manager;
use hg_sir::typed::{FieldTy, RefId};
use hg_sir::{ClassId, ClassTable};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::concrete::{ConcreteHeap, ObjId, PVal};

/// Source of a random class table with at most three classes, each with one
/// `int` field and at most two reference fields.
pub fn class_table_source<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(1..=3);
    let names = ["C0", "C1", "C2"];
    let mut out = String::new();
    for (i, name) in names.iter().enumerate().take(n) {
        out.push_str("class ");
        out.push_str(name);
        if i > 0 && rng.gen_bool(0.3) {
            out.push_str(&format!(" extends {}", names[rng.gen_range(0..i)]));
        }
        out.push_str(&format!(" {{ int p{i};"));
        for k in 0..rng.gen_range(0..=2) {
            out.push_str(&format!(" {} f{i}{k};", names[rng.gen_range(0..n)]));
        }
        out.push_str(" } ");
    }
    out.push_str("method main() { local int z; z = 0; }");
    out
}

pub fn class_table<R: Rng>(rng: &mut R) -> ClassTable {
    hg_sir::load(&class_table_source(rng)).expect("generated class table").classes
}

/// A random heap over references of static classes `ref_classes`: a pool of
/// objects with random edges and `int` fields, and each reference either
/// null or naming a pool object whose class fits its static type.
pub fn heap<R: Rng>(rng: &mut R, classes: &ClassTable, ref_classes: &[ClassId]) -> ConcreteHeap {
    let mut h = ConcreteHeap::new(classes, ref_classes);
    if ref_classes.is_empty() {
        return h;
    }
    let pool = rng.gen_range(1..=ref_classes.len() + 1);
    let mut objs: Vec<ObjId> = Vec::new();
    for _ in 0..pool {
        let c = rng.gen_range(0..classes.len());
        objs.push(h.alloc(classes, c, false, PVal::Int(0)));
    }
    for &o in &objs {
        let c = h.objects[o].class;
        for f in classes.ref_fields(c) {
            let FieldTy::Ref(t) = classes.fields[f].ty else { continue };
            let fits: Vec<ObjId> = objs.iter().copied().filter(|&x| classes.is_subclass(h.objects[x].class, t)).collect();
            if let Some(&x) = fits.choose(rng) {
                if rng.gen_bool(0.6) {
                    h.objects[o].edges.insert(f, x);
                }
            }
        }
        for f in classes.prim_fields(c) {
            h.objects[o].prims.insert(f, PVal::Int(rng.gen_range(0..3)));
        }
    }
    for (r, &c) in ref_classes.iter().enumerate() {
        if rng.gen_bool(0.15) {
            continue;
        }
        let fits: Vec<ObjId> = objs.iter().copied().filter(|&x| classes.is_subclass(h.objects[x].class, c)).collect();
        h.refs[r] = match fits.choose(rng) {
            Some(&x) if rng.gen_bool(0.8) => x,
            _ => {
                let sub = classes.subclasses(c);
                let k = *sub.choose(rng).expect("a class is its own subclass");
                let o = h.alloc(classes, k, false, PVal::Int(rng.gen_range(0..3)));
                objs.push(o);
                o
            }
        };
    }
    h
}

/// Objects reachable, reflexively, from the objects named by low references.
pub fn low_region(h: &ConcreteHeap, low: &[bool]) -> Vec<bool> {
    let mut mark = vec![false; h.objects.len()];
    for r in (0..h.refs.len()).filter(|&r| low[r]) {
        let o = h.refs[r];
        mark[o] = true;
        for x in h.reachable_from(o) {
            mark[x] = true;
        }
    }
    mark
}

/// Copy of `h` whose objects outside the low region get fresh primitive
/// values and, for edges staying inside the high region, fresh targets.
pub fn perturb_high<R: Rng>(rng: &mut R, classes: &ClassTable, h: &ConcreteHeap, low: &[bool]) -> ConcreteHeap {
    let region = low_region(h, low);
    let mut out = h.clone();
    let high: Vec<ObjId> = (0..h.objects.len()).filter(|&o| !region[o] && !h.objects[o].null).collect();
    for &o in &high {
        let c = out.objects[o].class;
        for f in classes.prim_fields(c) {
            if matches!(out.objects[o].prims.get(&f), Some(PVal::Int(_))) {
                out.objects[o].prims.insert(f, PVal::Int(rng.gen_range(0..3)));
            }
        }
        for f in classes.ref_fields(c) {
            if out.objects[o].edges.get(&f).is_some_and(|&t| region[t]) {
                continue;
            }
            let FieldTy::Ref(t) = classes.fields[f].ty else { continue };
            let fits: Vec<ObjId> = high.iter().copied().filter(|&x| classes.is_subclass(out.objects[x].class, t)).collect();
            match fits.choose(rng) {
                Some(&x) if rng.gen_bool(0.6) => {
                    out.objects[o].edges.insert(f, x);
                }
                _ => {
                    out.objects[o].edges.remove(&f);
                }
            }
        }
    }
    out
}

/// Whether `key` holds in `h`.
pub fn holds(h: &ConcreteHeap, key: RelKey) -> bool {
    match key.rel {
        Relation::Alias => h.alias(key.r, key.s),
        Relation::Reach => h.reach(key.r, key.s),
    }
}

/// Abstract relation value of `key` in a valuation, constants included.
pub fn abstract_rel(sh: &SymbolicHeap, val: &[bool], key: RelKey) -> bool {
    match sh.instance().slot(key) {
        Slot::Var => val[sh.rel_var(H, key).expect("allocated").index()],
        Slot::Const(b) => b,
    }
}

/// Raises levels until `φ∼` and `φ↪*⊒` hold for the relation values of
/// `val`.
pub fn close_levels(sh: &SymbolicHeap, val: &mut [bool]) {
    let n = sh.instance().len();
    loop {
        let mut changed = false;
        for key in all_keys(n) {
            if !abstract_rel(sh, val, key) {
                continue;
            }
            let (lr, ls) = (sh.level_var(H, key.r).index(), sh.level_var(H, key.s).index());
            let raise = |val: &mut [bool], v: usize| {
                let was = val[v];
                val[v] = true;
                !was
            };
            match key.rel {
                Relation::Alias => {
                    if val[lr] != val[ls] {
                        changed |= raise(val, lr) | raise(val, ls);
                    }
                }
                Relation::Reach => {
                    if val[ls] && !val[lr] {
                        changed |= raise(val, lr);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// An abstract state covering every heap in `hs`: relation variables hold
/// where some heap has the relation, plus random spurious facts with
/// probability `extra`; levels are random, then closed.
pub fn covering_state<R: Rng>(rng: &mut R, mgr: &Manager, sh: &SymbolicHeap, hs: &[&ConcreteHeap], extra: f64) -> Vec<bool> {
    let mut val = vec![false; mgr.num_vars()];
    for (key, v) in sh.rel_vars(H) {
        val[v.index()] = hs.iter().any(|h| holds(h, key)) || rng.gen_bool(extra);
    }
    for r in 0..sh.instance().len() {
        val[sh.level_var(H, r).index()] = rng.gen_bool(0.5);
    }
    close_levels(sh, &mut val);
    val
}

/// `low[r]` iff `r⃗` is ⊥ in `val`.
pub fn low_refs(sh: &SymbolicHeap, val: &[bool]) -> Vec<bool> {
    (0..sh.instance().len()).map(|r| !val[sh.level_var(H, r).index()]).collect()
}

/// Relations of `h` that the abstract state misses: a variable that is
/// false or a constant that is `ff`.
pub fn uncovered(sh: &SymbolicHeap, val: &[bool], h: &ConcreteHeap) -> Vec<RelKey> {
    all_keys(sh.instance().len()).filter(|&k| holds(h, k) && !abstract_rel(sh, val, k)).collect()
}

/// Instance over references with the given static classes, named `x0..`.
pub fn instance(
    family: hg_heap::HeapFamily,
    classes: &ClassTable,
    ref_classes: &[ClassId],
) -> HeapDomainInstance {
    let refs = ref_classes
        .iter()
        .enumerate()
        .map(|(i, &class)| hg_heap::RefDecl { name: format!("x{i}"), class })
        .collect();
    HeapDomainInstance::instantiate(family, refs, &hg_heap::ClassHierarchy::new(classes)).expect("known classes")
}

/// References of the given static classes that a value of class `c` may be
/// assigned to.
pub fn assignable(classes: &ClassTable, ref_classes: &[ClassId], c: ClassId) -> Vec<RefId> {
    (0..ref_classes.len()).filter(|&r| classes.is_subclass(c, ref_classes[r])).collect()
}
