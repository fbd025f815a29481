use hg_oracle::concrete::*;
use hg_oracle::sample;
use hg_sir::ClassTable;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const AB: &str = "class A { int fi; } class B { A fa; } method main() { local int z; z = 0; }";

fn classes() -> ClassTable {
    hg_sir::load(AB).unwrap().classes
}

fn ids(c: &ClassTable) -> (usize, usize, usize, usize) {
    let (a, b) = (c.lookup("A").unwrap(), c.lookup("B").unwrap());
    let fi = c.prim_fields(a)[0];
    let fa = c.ref_fields(b)[0];
    (a, b, fi, fa)
}

#[test]
fn null_drops_aliasing_and_fields_become_und() {
    let c = classes();
    let (a, _, fi, _) = ids(&c);
    let mut h = ConcreteHeap::new(&c, &[a, a]);
    h.apply(&c, ConcreteOp::New { r: 0, class: a }).unwrap();
    h.apply(&c, ConcreteOp::Copy { r: 1, s: 0 }).unwrap();
    assert!(h.alias(0, 1));
    h.apply(&c, ConcreteOp::Null(1)).unwrap();
    assert!(!h.alias(0, 1));
    assert_eq!(h.read(1, fi), PVal::Und);
}

#[test]
fn stores_are_seen_through_aliases() {
    let c = classes();
    let (a, _, fi, _) = ids(&c);
    let mut h = ConcreteHeap::new(&c, &[a, a]);
    h.apply(&c, ConcreteOp::New { r: 0, class: a }).unwrap();
    h.apply(&c, ConcreteOp::Copy { r: 1, s: 0 }).unwrap();
    h.apply(&c, ConcreteOp::StorePrim { r: 0, field: fi, value: PVal::Int(5) }).unwrap();
    assert_eq!(h.read(1, fi), PVal::Int(5));
}

#[test]
fn fresh_objects_read_default() {
    let c = classes();
    let (a, _, fi, _) = ids(&c);
    let h = concrete_apply(&ConcreteHeap::new(&c, &[a]), &c, ConcreteOp::New { r: 0, class: a }).unwrap();
    assert_eq!(h.read(0, fi), PVal::Default);
}

#[test]
fn loads_follow_edges_and_missing_edges_give_null() {
    let c = classes();
    let (a, b, _, fa) = ids(&c);
    let mut h = ConcreteHeap::new(&c, &[a, b, a]);
    h.apply(&c, ConcreteOp::New { r: 0, class: a }).unwrap();
    h.apply(&c, ConcreteOp::New { r: 1, class: b }).unwrap();
    h.apply(&c, ConcreteOp::Load { r: 2, s: 1, field: fa }).unwrap();
    assert!(h.obj(2).null);
    h.apply(&c, ConcreteOp::StoreRef { r: 1, field: fa, s: 0 }).unwrap();
    assert!(h.field_alias(1, fa, 0) && h.reach(1, 0) && !h.reach(0, 1));
    h.apply(&c, ConcreteOp::Load { r: 2, s: 1, field: fa }).unwrap();
    assert!(h.alias(2, 0));
}

#[test]
fn undefined_fields_are_rejected() {
    let c = classes();
    let (a, _, _, fa) = ids(&c);
    let h = ConcreteHeap::new(&c, &[a, a]);
    let err = concrete_apply(&h, &c, ConcreteOp::StoreRef { r: 0, field: fa, s: 1 }).unwrap_err();
    assert!(matches!(err, ConcreteError::NoField { .. }));
}

#[test]
fn low_graph_of_a_single_alias_pair() {
    let c = classes();
    let (a, b, _, _) = ids(&c);
    let mut h = ConcreteHeap::new(&c, &[a, b, a]);
    h.apply(&c, ConcreteOp::New { r: 0, class: a }).unwrap();
    h.apply(&c, ConcreteOp::Copy { r: 2, s: 0 }).unwrap();
    let g = low_reference_graph(&h, &c, &[true, true, true]);
    let alias: Vec<_> = g.edges.iter().filter(|e| e.0 != e.2).collect();
    assert_eq!(alias, vec![&(0, EdgeLabel::Alias, 2), &(2, EdgeLabel::Alias, 0)]);
    assert!((0..3).all(|r| g.edges.contains(&(r, EdgeLabel::Alias, r))));
}

#[test]
fn all_high_graph_is_empty() {
    let c = classes();
    let (a, b, _, _) = ids(&c);
    let h = ConcreteHeap::new(&c, &[a, b]);
    assert_eq!(low_reference_graph(&h, &c, &[false, false]), RefGraph::default());
}

#[test]
fn edges_into_high_references_are_kept() {
    let c = classes();
    let (a, b, _, fa) = ids(&c);
    let mut h = ConcreteHeap::new(&c, &[b, a]);
    h.apply(&c, ConcreteOp::New { r: 0, class: b }).unwrap();
    h.apply(&c, ConcreteOp::New { r: 1, class: a }).unwrap();
    h.apply(&c, ConcreteOp::StoreRef { r: 0, field: fa, s: 1 }).unwrap();
    let g = low_reference_graph(&h, &c, &[true, false]);
    assert!(g.edges.contains(&(0, EdgeLabel::Field(fa), 1)));
}

#[test]
fn only_low_fields_matter() {
    let c = classes();
    let (a, _, fi, _) = ids(&c);
    let mut h1 = ConcreteHeap::new(&c, &[a, a]);
    h1.apply(&c, ConcreteOp::New { r: 0, class: a }).unwrap();
    h1.apply(&c, ConcreteOp::New { r: 1, class: a }).unwrap();
    let h2 = concrete_apply(&h1, &c, ConcreteOp::StorePrim { r: 1, field: fi, value: PVal::Int(9) }).unwrap();
    let low = [true, false];
    assert!(indistinguishable(&h1, &h1, &c, &low, Matching::Identity));
    assert!(indistinguishable(&h1, &h2, &c, &low, Matching::Identity));
    assert!(!indistinguishable(&h1, &h2, &c, &[true, true], Matching::Identity));
    assert_eq!(difference(&h1, &h2, &c, &[true, true]), Some(Difference::LowPrim));
}

fn random_op<R: Rng>(rng: &mut R, c: &ClassTable, h: &ConcreteHeap) -> ConcreteOp {
    let n = h.refs.len();
    let (r, s) = (rng.gen_range(0..n), rng.gen_range(0..n));
    let (rc, sc) = (h.statics[r], h.statics[s]);
    let field_into = |owner, target| {
        c.ref_fields(owner).into_iter().find(|&f| matches!(c.fields[f].ty, hg_sir::typed::FieldTy::Ref(t) if c.is_subclass(target, t)))
    };
    let field_from = |owner, dest| {
        c.ref_fields(owner).into_iter().find(|&f| matches!(c.fields[f].ty, hg_sir::typed::FieldTy::Ref(t) if c.is_subclass(t, dest)))
    };
    match rng.gen_range(0..6) {
        0 => ConcreteOp::Null(r),
        1 if c.is_subclass(sc, rc) => ConcreteOp::Copy { r, s },
        2 if !h.obj(s).null => match field_from(h.obj(s).class, rc) {
            Some(field) => ConcreteOp::Load { r, s, field },
            None => ConcreteOp::New { r, class: rc },
        },
        3 if !h.obj(r).null => match field_into(h.obj(r).class, h.obj(s).class) {
            Some(field) => ConcreteOp::StoreRef { r, field, s },
            None => ConcreteOp::New { r, class: rc },
        },
        4 if !h.obj(r).null && !c.prim_fields(h.obj(r).class).is_empty() => {
            ConcreteOp::StorePrim { r, field: c.prim_fields(h.obj(r).class)[0], value: PVal::Int(rng.gen_range(0..3)) }
        }
        _ => ConcreteOp::New { r, class: rc },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn heaps_stay_well_formed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = sample::class_table(&mut rng);
        let statics: Vec<_> = (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(0..c.len())).collect();
        let mut h = sample::heap(&mut rng, &c, &statics);
        prop_assert!(h.well_formed(&c));
        for _ in 0..10 {
            let op = random_op(&mut rng, &c, &h);
            h.apply(&c, op).unwrap();
            prop_assert!(h.well_formed(&c));
            for r in 0..h.refs.len() {
                prop_assert!(c.is_subclass(h.obj(r).class, h.statics[r]) || h.obj(r).null);
            }
        }
    }

    #[test]
    fn indistinguishability_is_an_equivalence(seed in any::<u64>(), iso in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = sample::class_table(&mut rng);
        let statics: Vec<_> = (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(0..c.len())).collect();
        let low: Vec<bool> = statics.iter().map(|_| rng.gen_bool(0.5)).collect();
        let how = if iso { Matching::Isomorphism } else { Matching::Identity };
        let h1 = sample::heap(&mut rng, &c, &statics);
        let h2 = sample::perturb_high(&mut rng, &c, &h1, &low);
        let h3 = sample::perturb_high(&mut rng, &c, &h2, &low);
        let eq = |x: &ConcreteHeap, y: &ConcreteHeap| indistinguishable(x, y, &c, &low, how);
        prop_assert!(eq(&h1, &h1));
        prop_assert_eq!(eq(&h1, &h2), eq(&h2, &h1));
        if eq(&h1, &h2) && eq(&h2, &h3) {
            prop_assert!(eq(&h1, &h3));
        }
        let other = sample::heap(&mut rng, &c, &statics);
        prop_assert_eq!(eq(&h1, &other), eq(&other, &h1));
        if eq(&h1, &h2) && eq(&h2, &other) {
            prop_assert!(eq(&h1, &other));
        }
    }

    #[test]
    fn identity_matching_implies_isomorphism(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = sample::class_table(&mut rng);
        let statics: Vec<_> = (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(0..c.len())).collect();
        let low: Vec<bool> = statics.iter().map(|_| rng.gen_bool(0.5)).collect();
        let h1 = sample::heap(&mut rng, &c, &statics);
        let h2 = sample::heap(&mut rng, &c, &statics);
        if indistinguishable(&h1, &h2, &c, &low, Matching::Identity) {
            prop_assert!(indistinguishable(&h1, &h2, &c, &low, Matching::Isomorphism));
        }
        prop_assert_eq!(difference(&h1, &h2, &c, &low).is_none(), indistinguishable(&h1, &h2, &c, &low, Matching::Identity));
    }
}
