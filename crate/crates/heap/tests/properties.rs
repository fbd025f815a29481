//! Structural properties of instances and transformers over random class
//! tables and reference sets.

use std::collections::BTreeSet;

use hg_heap::*;
use hg_predicate::{Bdd, Manager};
use proptest::prelude::*;

/// Source for up to three classes, each optionally extending an earlier one,
/// with up to two reference fields of arbitrary class.
fn class_source() -> impl Strategy<Value = (String, usize)> {
    (1usize..=3)
        .prop_flat_map(|n| {
            let parents = prop::collection::vec(prop::option::of(0usize..3), n);
            let fields = prop::collection::vec(prop::collection::vec(0usize..3, 0..=2), n);
            (Just(n), parents, fields)
        })
        .prop_map(|(n, parents, fields)| {
            let mut src = String::new();
            for c in 0..n {
                src.push_str(&format!("class C{c}"));
                if let Some(p) = parents[c].filter(|&p| p < c) {
                    src.push_str(&format!(" extends C{p}"));
                }
                src.push_str(" { int p; ");
                for (j, t) in fields[c].iter().enumerate() {
                    src.push_str(&format!("C{} c{c}f{j}; ", t % n));
                }
                src.push_str("}\n");
            }
            (src, n)
        })
}

fn setup() -> impl Strategy<Value = (ClassHierarchy, Vec<RefDecl>)> {
    class_source().prop_flat_map(|(src, n)| {
        let table = hg_sir::load(&format!("{src}method m(int v) {{ output low(v); }}"))
            .unwrap()
            .classes;
        let h = ClassHierarchy::new(&table);
        prop::collection::vec(0..n, 1..=4).prop_map(move |classes| {
            let refs = classes
                .iter()
                .enumerate()
                .map(|(i, &c)| RefDecl { name: format!("x{i}"), class: c })
                .collect();
            (h.clone(), refs)
        })
    })
}

fn ops(n: usize) -> Vec<HeapOp> {
    let mut v = Vec::new();
    for r in 0..n {
        v.push(HeapOp::Null(r));
        v.push(HeapOp::New { r, l: Bdd::TRUE });
        v.push(HeapOp::StorePrim { r, l: Bdd::TRUE });
        for s in 0..n {
            v.push(HeapOp::Copy { r, s });
            v.push(HeapOp::Load { r, s });
            v.push(HeapOp::StoreRef { r, s, l: Bdd::TRUE });
        }
    }
    v
}

proptest! {
    #[test]
    fn three_sets_partition_all_relation_instances((h, refs) in setup()) {
        let n = refs.len();
        for fam in HeapFamily::all() {
            let inst = HeapDomainInstance::instantiate(fam.clone(), refs.clone(), &h).unwrap();
            let (vr, ff, tt) = (inst.v_r(), inst.v_ff(), inst.v_tt());
            let all: BTreeSet<RelKey> = vr.iter().chain(&ff).chain(&tt).copied().collect();
            prop_assert_eq!(all.len(), vr.len() + ff.len() + tt.len());
            prop_assert_eq!(all, all_keys(n).collect::<BTreeSet<_>>());
            for k in &vr {
                prop_assert!(fam.is_sensitive(k.rel));
            }
            for r in 0..n {
                prop_assert!(tt.contains(&RelKey::alias(r, r)));
            }
        }
    }

    #[test]
    fn flow_sensitivity_only_adds_variables((h, refs) in setup()) {
        let deep = HeapDomainInstance::instantiate(HeapFamily::deep(), refs.clone(), &h).unwrap();
        let shal = HeapDomainInstance::instantiate(HeapFamily::shal(), refs.clone(), &h).unwrap();
        let dumb = HeapDomainInstance::instantiate(HeapFamily::dumb(), refs, &h).unwrap();
        prop_assert_eq!(deep.v_ff(), shal.v_ff());
        prop_assert_eq!(shal.v_ff(), dumb.v_ff());
        let d: BTreeSet<_> = deep.v_r().into_iter().collect();
        prop_assert!(shal.v_r().iter().all(|k| d.contains(k)));
    }

    #[test]
    fn transformers_touch_only_their_copy((h, refs) in setup()) {
        for fam in HeapFamily::all() {
            let inst = HeapDomainInstance::instantiate(fam, refs.clone(), &h).unwrap();
            let mut mgr = Manager::new();
            let heap = SymbolicHeap::new(&mut mgr, inst, 2);
            for copy in [H, H_PRIME] {
                let own: BTreeSet<_> = heap.vars(copy).into_iter().collect();
                for op in ops(refs.len()) {
                    let t = heap.transformer(&mut mgr, copy, op).unwrap();
                    for v in t.vars() {
                        prop_assert!(own.contains(&v), "{:?} assigns {}", op, mgr.var_name(v));
                    }
                }
                let up = heap.bulk_upgrade(&mut mgr, copy, 1 - copy);
                prop_assert!(up.vars().all(|v| own.contains(&v)));
            }
        }
    }

    #[test]
    fn mutations_never_lower_levels((h, refs) in setup(), raise in any::<bool>()) {
        let inst = HeapDomainInstance::instantiate(HeapFamily::deep(), refs.clone(), &h).unwrap();
        let mut mgr = Manager::new();
        let lv = mgr.new_var("l");
        let heap = SymbolicHeap::new(&mut mgr, inst, 2);
        let l = if raise { mgr.var(lv) } else { Bdd::FALSE };
        let n = refs.len();
        for r in 0..n {
            let mut muts = vec![HeapOp::StorePrim { r, l }];
            muts.extend((0..n).map(|s| HeapOp::StoreRef { r, s, l }));
            for op in muts {
                let t = heap.transformer(&mut mgr, H, op).unwrap();
                for s in 0..n {
                    let old = heap.level(&mut mgr, H, s);
                    let new = t.get(heap.level_var(H, s)).unwrap();
                    prop_assert!(mgr.entails(old, new));
                }
            }
        }
        let up = heap.bulk_upgrade(&mut mgr, H, H_PRIME);
        for s in 0..n {
            let old = heap.level(&mut mgr, H, s);
            prop_assert!(mgr.entails(old, up.get(heap.level_var(H, s)).unwrap()));
        }
    }

    #[test]
    fn null_refs_zeroes_everything_touching_the_set((h, refs) in setup(), mask in 0u8..16) {
        let inst = HeapDomainInstance::instantiate(HeapFamily::deep(), refs.clone(), &h).unwrap();
        let mut mgr = Manager::new();
        let heap = SymbolicHeap::new(&mut mgr, inst, 1);
        let nulls: Vec<usize> = (0..refs.len()).filter(|r| mask & (1 << r) != 0).collect();
        let p = heap.null_refs_pred(&mut mgr, H, &nulls).unwrap();
        let cube = mgr.as_cube(p).unwrap();
        for (k, v) in heap.rel_vars(H) {
            let touched = nulls.iter().any(|&r| k.touches(r));
            prop_assert_eq!(cube.contains(&(v, false)), touched);
        }
        for r in 0..refs.len() {
            prop_assert_eq!(cube.contains(&(heap.level_var(H, r), false)), nulls.contains(&r));
        }
    }
}
