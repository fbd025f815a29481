//! The randomized and exhaustive checkers against the real domains, their
//! seeded mutants and the inferred guards.

use hg_guard::{synthesize_guard, AnalysisOptions};
use hg_heap::{HeapFamily, Mutant};
use hg_oracle::*;
use hg_predicate::{Bdd, Manager};
use hg_scfg::SummaryTable;

const M: &str = "class A { int fi; } class B { A fa; }
method m(A a, B b, int i) { local B r; r = new B; a.fi = i; r.fa = a; output low(b); }";

const F: &str = "method f(int v) { local int l; if (v > 0) goto L; l = 42; L: output low(l); }";

fn cfg(trials: usize, mutant: Mutant) -> AbstractionConfig {
    AbstractionConfig { trials, mutant, ..Default::default() }
}

#[test]
fn abstraction_keeps_every_observable_difference_out() {
    for fam in HeapFamily::all() {
        let r = check_secure_abstraction(fam, cfg(2000, Mutant::None));
        assert_eq!(r.observable(), 0, "{:?}", r.violations.iter().find(|v| v.kind.observable()));
        // Literal violations only separate heaps by edges from high
        // references into low ones.
        assert!(r.violations.iter().all(|v| v.kind == Difference::HighToLowEdge));
    }
}

#[test]
fn abstraction_catches_the_dropped_field_alias_update() {
    let r = check_secure_abstraction(HeapFamily::deep(), cfg(10_000, Mutant::DropFieldAlias));
    assert!(r.mutant_only() > 0);
    let v = r.violations.iter().find(|v| v.mutant_only).unwrap();
    assert!(v.kind.observable());
    assert!(hg_sir::load(&v.program).is_ok(), "{}", v.program);
}

#[test]
fn abstraction_reports_are_seeded() {
    let a = check_secure_abstraction(HeapFamily::deep(), cfg(300, Mutant::None));
    let b = check_secure_abstraction(HeapFamily::deep(), cfg(300, Mutant::None));
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_json()["seed"], 0);
}

#[test]
fn only_loads_open_coverage_gaps() {
    for fam in HeapFamily::all() {
        let r = check_covers(fam.clone(), 1500, 10, 3);
        assert!(r.fresh_gaps.keys().all(|k| *k == "load"), "{}: {:?}", fam.name, r.fresh_gaps);
        if fam.name != "deep" {
            assert_eq!(r.gaps(), 0);
        }
    }
}

#[test]
fn inductive_violations_are_load_aliasing_or_incoherent() {
    let r = check_inductive(HeapFamily::deep(), 3, Mutant::None);
    assert!(r.states > 0 && r.checks > r.states);
    for e in r.examples.iter().filter(|e| e.coherent) {
        assert_eq!((e.kind, e.predicate), ("load", "phi-alias"), "{e:?}");
    }
}

#[test]
fn a_single_reference_is_inductive() {
    for fam in HeapFamily::all() {
        let r = check_inductive(fam, 1, Mutant::None);
        assert!(r.passed(), "{:?}", r.examples);
    }
}

#[test]
fn inductive_check_catches_level_mutants() {
    for mutant in [Mutant::LevSkipFieldAlias, Mutant::LevSkipAlias, Mutant::CopySkipLevel] {
        let r = check_inductive(HeapFamily::deep(), 3, mutant);
        assert!(r.mutant_only > 0, "{}", mutant.name());
    }
}

fn ni(src: &str, name: &str, fam: HeapFamily, force_true: bool, trials: usize) -> NiReport {
    let p = hg_sir::load(src).unwrap();
    let m = p.method(name).unwrap();
    let mut mgr = Manager::new();
    let (g, e) = synthesize_guard(&mut mgr, &p.classes, m, fam, &SummaryTable::new(), AnalysisOptions::default()).unwrap();
    let guard = if force_true { Bdd::TRUE } else { g.formula };
    check_noninterference(&mut mgr, &e, &p.classes, m, guard, NiConfig { trials, stop_after: 0, budget: 10_000, seed: 5 })
}

#[test]
fn running_example_is_noninterferent_under_its_guards() {
    for fam in HeapFamily::all() {
        let r = ni(M, "m", fam, false, 200);
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.checked > 50);
    }
}

#[test]
fn forcing_the_guard_to_true_exposes_the_implicit_flow() {
    let r = ni(F, "f", HeapFamily::deep(), true, 200);
    let v = r.violations.first().expect("a leak");
    let mut outs = [v.low1.clone(), v.low2.clone()];
    outs.sort();
    assert_eq!(outs, [vec!["0".to_string()], vec!["42".to_string()]]);
    assert!(ni(F, "f", HeapFamily::deep(), false, 200).passed());
}

#[test]
fn methods_without_inputs_pass_vacuously() {
    let r = ni("method c() { local int k; k = 3; output low(k); }", "c", HeapFamily::deep(), true, 50);
    assert!(r.passed());
    assert_eq!(r.checked, 50);
}

#[test]
fn generated_corpus_is_noninterferent() {
    let p = hg_sir::load(&corpus::corpus(1, 15)).unwrap();
    for m in &p.methods {
        let mut mgr = Manager::new();
        let (g, e) =
            synthesize_guard(&mut mgr, &p.classes, m, HeapFamily::deep(), &SummaryTable::new(), AnalysisOptions::default()).unwrap();
        let r = check_noninterference(&mut mgr, &e, &p.classes, m, g.formula, NiConfig { trials: 300, ..Default::default() });
        assert!(r.passed(), "{}: {:?}", m.name, r.violations);
    }
}
