//! Comparing guards inferred in different managers, where the same calling
//! context fact carries the same variable name.

use std::collections::BTreeMap;

use hg_predicate::{Bdd, Manager, Var};

/// Copies of `fs` in one fresh manager, variables merged by name.
pub fn align(fs: &[(&Manager, Bdd)]) -> (Manager, Vec<Bdd>) {
    let mut names: BTreeMap<String, Var> = BTreeMap::new();
    let mut out = Manager::new();
    for (src, f) in fs {
        for v in src.support(*f) {
            let name = src.var_name(v).to_string();
            if !names.contains_key(&name) {
                let x = out.new_var(name.clone());
                names.insert(name, x);
            }
        }
    }
    let copies = fs
        .iter()
        .map(|(src, f)| out.transfer(src, *f, &|v| names[src.var_name(v)]))
        .collect();
    (out, copies)
}

/// `a ⇒ b`, matching variables by name.
pub fn entails_by_name(a: (&Manager, Bdd), b: (&Manager, Bdd)) -> bool {
    let (mut mgr, fs) = align(&[a, b]);
    mgr.entails(fs[0], fs[1])
}
