//! Class-hierarchy pre-analysis behind `CanRelate`.

use hg_sir::typed::{ClassTable, FieldTy};
use hg_sir::ClassId;

use crate::HeapError;

/// Heap-related relation symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `r ∼ s`: both name the same object.
    Alias,
    /// `r ↪* s`: some reference field of an object reachable from `r`
    /// (through at least one field) aliases `s`.
    Reach,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Alias => "∼",
            Relation::Reach => "↪*",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ThreeVal {
    Yes,
    No,
    Maybe,
}

/// Subtyping and field reachability between classes, precomputed as dense
/// matrices.
#[derive(Clone, Debug)]
pub struct ClassHierarchy {
    names: Vec<String>,
    /// `sub[a][b]` iff `a ⊑ b`.
    sub: Vec<Vec<bool>>,
    /// `reach[c][d]` iff an object of static type `c` may reach an object of
    /// dynamic class `d` through one or more reference fields.
    reach: Vec<Vec<bool>>,
}

impl ClassHierarchy {
    pub fn new(table: &ClassTable) -> Self {
        let n = table.len();
        let sub: Vec<Vec<bool>> = (0..n)
            .map(|a| (0..n).map(|b| table.is_subclass(a, b)).collect())
            .collect();
        let mut reach = vec![vec![false; n]; n];
        for c in 0..n {
            for dynamic in (0..n).filter(|&k| sub[k][c]) {
                for f in table.ref_fields(dynamic) {
                    if let FieldTy::Ref(t) = table.fields[f].ty {
                        for d in (0..n).filter(|&d| sub[d][t]) {
                            reach[c][d] = true;
                        }
                    }
                }
            }
        }
        // One step from c reaches every subclass target; close transitively.
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        ClassHierarchy {
            names: (0..n).map(|c| table.name(c).to_string()).collect(),
            sub,
            reach,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, c: ClassId) -> &str {
        &self.names[c]
    }

    pub fn lookup(&self, name: &str) -> Option<ClassId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn is_subclass(&self, a: ClassId, b: ClassId) -> bool {
        self.sub[a][b]
    }

    /// Objects of static type `from` may reach an object of class `to`.
    pub fn reaches(&self, from: ClassId, to: ClassId) -> bool {
        self.reach[from][to]
    }

    fn check(&self, c: ClassId) -> Result<(), HeapError> {
        if c < self.names.len() {
            Ok(())
        } else {
            Err(HeapError::UnknownType(c))
        }
    }

    /// Three-valued answer to "can `r rel s` hold" for references of
    /// declared types `t_r` and `t_s`.
    pub fn can_relate(
        &self,
        t_r: ClassId,
        t_s: ClassId,
        rel: Relation,
        same_var: bool,
    ) -> Result<ThreeVal, HeapError> {
        self.check(t_r)?;
        self.check(t_s)?;
        Ok(match rel {
            Relation::Alias if same_var => ThreeVal::Yes,
            Relation::Alias if self.sub[t_r][t_s] || self.sub[t_s][t_r] => ThreeVal::Maybe,
            Relation::Alias => ThreeVal::No,
            Relation::Reach => {
                let n = self.names.len();
                if (0..n).any(|d| self.sub[d][t_s] && self.reach[t_r][d]) {
                    ThreeVal::Maybe
                } else {
                    ThreeVal::No
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hierarchy(src: &str) -> ClassHierarchy {
        let p = hg_sir::load(src).unwrap();
        ClassHierarchy::new(&p.classes)
    }

    #[test]
    fn figure_one_classes() {
        let h = hierarchy("class A { int fi; } class B { A fa; } method m(int v) { output low(v); }");
        let (a, b) = (h.lookup("A").unwrap(), h.lookup("B").unwrap());
        assert_eq!(h.can_relate(a, b, Relation::Alias, false), Ok(ThreeVal::No));
        assert_eq!(h.can_relate(b, a, Relation::Reach, false), Ok(ThreeVal::Maybe));
        assert_eq!(h.can_relate(b, b, Relation::Alias, true), Ok(ThreeVal::Yes));
        assert_eq!(h.can_relate(a, a, Relation::Reach, true), Ok(ThreeVal::No));
        assert_eq!(h.can_relate(b, b, Relation::Reach, false), Ok(ThreeVal::No));
        assert_eq!(h.can_relate(a, 7, Relation::Alias, false), Err(HeapError::UnknownType(7)));
    }

    #[test]
    fn subclass_fields_and_field_types_widen_reach() {
        // C's field is typed A, but a D (subclass of A) stored there has a C field.
        let h = hierarchy(
            "class A { int x; } class D extends A { C back; } class C { A f; } class E { int y; }
             method m(int v) { output low(v); }",
        );
        let [a, d, c, e] = ["A", "D", "C", "E"].map(|n| h.lookup(n).unwrap());
        assert!(h.reaches(c, d));
        assert!(h.reaches(c, c));
        assert!(h.reaches(a, c), "an A may be a D at run time");
        assert!(!h.reaches(e, a));
        assert_eq!(h.can_relate(c, c, Relation::Reach, true), Ok(ThreeVal::Maybe));
        assert_eq!(h.can_relate(a, d, Relation::Alias, false), Ok(ThreeVal::Maybe));
        assert_eq!(h.can_relate(e, a, Relation::Alias, false), Ok(ThreeVal::No));
    }
}
