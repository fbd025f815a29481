//! Name resolution and type checking into an index-based representation.

use std::collections::HashMap;

use crate::ast::{self, BinOp, Level, Pos, PrimTy, Rhs, StmtKind, Ty, UnOp};
use crate::error::SirError;

pub type ClassId = usize;
pub type FieldId = usize;
pub type PrimId = usize;
pub type RefId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldTy {
    Prim(PrimTy),
    Ref(ClassId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldInfo {
    pub name: String,
    pub owner: ClassId,
    pub ty: FieldTy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassInfo {
    pub name: String,
    pub parent: Option<ClassId>,
    /// Fields declared directly on this class.
    pub own_fields: Vec<FieldId>,
}

/// Resolved class hierarchy with globally numbered fields.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassTable {
    pub classes: Vec<ClassInfo>,
    pub fields: Vec<FieldInfo>,
    by_name: HashMap<String, ClassId>,
}

impl ClassTable {
    pub fn lookup(&self, name: &str) -> Option<ClassId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, c: ClassId) -> &str {
        &self.classes[c].name
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// `sub` equals `sup` or inherits from it.
    pub fn is_subclass(&self, sub: ClassId, sup: ClassId) -> bool {
        let mut cur = Some(sub);
        while let Some(c) = cur {
            if c == sup {
                return true;
            }
            cur = self.classes[c].parent;
        }
        false
    }

    /// Either class is assignable to the other.
    pub fn related(&self, a: ClassId, b: ClassId) -> bool {
        self.is_subclass(a, b) || self.is_subclass(b, a)
    }

    /// All subclasses of `c`, itself included, in id order.
    pub fn subclasses(&self, c: ClassId) -> Vec<ClassId> {
        (0..self.classes.len()).filter(|&d| self.is_subclass(d, c)).collect()
    }

    /// Fields visible on `c`: inherited ones first.
    pub fn all_fields(&self, c: ClassId) -> Vec<FieldId> {
        let mut chain = Vec::new();
        let mut cur = Some(c);
        while let Some(k) = cur {
            chain.push(k);
            cur = self.classes[k].parent;
        }
        chain
            .iter()
            .rev()
            .flat_map(|&k| self.classes[k].own_fields.iter().copied())
            .collect()
    }

    pub fn field(&self, c: ClassId, name: &str) -> Option<FieldId> {
        self.all_fields(c)
            .into_iter()
            .rev()
            .find(|&f| self.fields[f].name == name)
    }

    pub fn ref_fields(&self, c: ClassId) -> Vec<FieldId> {
        self.all_fields(c)
            .into_iter()
            .filter(|&f| matches!(self.fields[f].ty, FieldTy::Ref(_)))
            .collect()
    }

    pub fn prim_fields(&self, c: ClassId) -> Vec<FieldId> {
        self.all_fields(c)
            .into_iter()
            .filter(|&f| matches!(self.fields[f].ty, FieldTy::Prim(_)))
            .collect()
    }

    /// Builds and validates a table from declarations.
    pub fn build(decls: &[ast::ClassDecl]) -> Result<ClassTable, SirError> {
        let mut t = ClassTable::default();
        for d in decls {
            if t.by_name.contains_key(&d.name) {
                return Err(SirError::Duplicate {
                    pos: d.pos,
                    name: d.name.clone(),
                });
            }
            t.by_name.insert(d.name.clone(), t.classes.len());
            t.classes.push(ClassInfo {
                name: d.name.clone(),
                parent: None,
                own_fields: Vec::new(),
            });
        }
        let resolve = |t: &ClassTable, n: &str, pos: Pos| {
            t.lookup(n).ok_or_else(|| SirError::UnknownClass { pos, name: n.to_string() })
        };
        for (id, d) in decls.iter().enumerate() {
            if let Some(p) = &d.parent {
                t.classes[id].parent = Some(resolve(&t, p, d.pos)?);
            }
        }
        for (id, d) in decls.iter().enumerate() {
            let mut cur = t.classes[id].parent;
            let mut steps = 0;
            while let Some(c) = cur {
                steps += 1;
                if c == id || steps > decls.len() {
                    return Err(SirError::HierarchyCycle {
                        pos: d.pos,
                        name: d.name.clone(),
                    });
                }
                cur = t.classes[c].parent;
            }
        }
        for (id, d) in decls.iter().enumerate() {
            let mut names = std::collections::HashSet::new();
            let decl_fields = d
                .prim_fields
                .iter()
                .map(|(n, p)| (n, Ok(FieldTy::Prim(*p))))
                .chain(d.ref_fields.iter().map(|(n, c)| (n, resolve(&t, c, d.pos).map(FieldTy::Ref))));
            let mut fresh = Vec::new();
            for (n, ty) in decl_fields {
                if !names.insert(n.clone()) {
                    return Err(SirError::Duplicate {
                        pos: d.pos,
                        name: format!("{}.{n}", d.name),
                    });
                }
                fresh.push((n.clone(), ty?));
            }
            for (name, ty) in fresh {
                let fid = t.fields.len();
                t.fields.push(FieldInfo { name, owner: id, ty });
                t.classes[id].own_fields.push(fid);
            }
        }
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimVar {
    pub name: String,
    pub ty: PrimTy,
    pub is_param: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefVar {
    pub name: String,
    pub class: ClassId,
    pub is_param: bool,
}

/// A primitive or reference variable of a method.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRef {
    Prim(PrimId),
    Ref(RefId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TExpr {
    Int(i64),
    Bool(bool),
    Prim(PrimId),
    Unary(UnOp, Box<TExpr>),
    Binary(BinOp, Box<TExpr>, Box<TExpr>),
    /// `r == s`, or `r != s` when `negated`.
    RefEq { r: RefId, s: RefId, negated: bool },
}

impl TExpr {
    /// Primitive and reference variables read by the expression.
    pub fn reads(&self, out: &mut Vec<VarRef>) {
        match self {
            TExpr::Int(_) | TExpr::Bool(_) => {}
            TExpr::Prim(v) => out.push(VarRef::Prim(*v)),
            TExpr::Unary(_, e) => e.reads(out),
            TExpr::Binary(_, a, b) => {
                a.reads(out);
                b.reads(out);
            }
            TExpr::RefEq { r, s, .. } => {
                out.push(VarRef::Ref(*r));
                out.push(VarRef::Ref(*s));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TStmt {
    /// `v = e`
    Assign { v: PrimId, e: TExpr },
    /// `v = r.f`
    LoadPrim { v: PrimId, r: RefId, field: FieldId },
    /// `r.f = e`
    StorePrim { r: RefId, field: FieldId, e: TExpr },
    /// `r = s`
    Copy { r: RefId, s: RefId },
    /// `r = s.f`
    LoadRef { r: RefId, s: RefId, field: FieldId },
    /// `r.f = s`
    StoreRef { r: RefId, field: FieldId, s: RefId },
    New { r: RefId, class: ClassId },
    Null { r: RefId },
    Call { recv: RefId, method: String, args: Vec<VarRef> },
    Goto { target: usize },
    If { cond: TExpr, target: usize },
    Output { level: Level, var: VarRef },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedMethod {
    pub name: String,
    pub prims: Vec<PrimVar>,
    pub refs: Vec<RefVar>,
    /// Formal parameters in declaration order.
    pub params: Vec<VarRef>,
    pub body: Vec<TStmt>,
    pub labels: Vec<Option<String>>,
    pub positions: Vec<Pos>,
}

impl TypedMethod {
    pub fn var_name(&self, v: VarRef) -> &str {
        match v {
            VarRef::Prim(p) => &self.prims[p].name,
            VarRef::Ref(r) => &self.refs[r].name,
        }
    }

    pub fn lookup(&self, name: &str) -> Option<VarRef> {
        if let Some(p) = self.prims.iter().position(|v| v.name == name) {
            return Some(VarRef::Prim(p));
        }
        self.refs.iter().position(|v| v.name == name).map(VarRef::Ref)
    }

    pub fn local_refs(&self) -> Vec<RefId> {
        (0..self.refs.len()).filter(|&r| !self.refs[r].is_param).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedProgram {
    pub classes: ClassTable,
    pub methods: Vec<TypedMethod>,
}

impl TypedProgram {
    pub fn method(&self, name: &str) -> Option<&TypedMethod> {
        self.methods.iter().find(|m| m.name == name)
    }
}

/// Resolves names and checks operand kinds and types.
pub fn typecheck(p: &ast::Program) -> Result<TypedProgram, SirError> {
    let classes = ClassTable::build(&p.classes)?;
    let mut seen = std::collections::HashSet::new();
    let mut methods = Vec::new();
    for m in &p.methods {
        if !seen.insert(m.name.clone()) {
            return Err(SirError::Duplicate {
                pos: m.pos,
                name: m.name.clone(),
            });
        }
        methods.push(check_method(&classes, m)?);
    }
    Ok(TypedProgram { classes, methods })
}

struct Scope<'a> {
    classes: &'a ClassTable,
    prims: Vec<PrimVar>,
    refs: Vec<RefVar>,
    names: HashMap<String, VarRef>,
}

impl Scope<'_> {
    fn var(&self, name: &str, pos: Pos) -> Result<VarRef, SirError> {
        self.names
            .get(name)
            .copied()
            .ok_or_else(|| SirError::Unbound { pos, name: name.to_string() })
    }

    fn prim(&self, name: &str, pos: Pos) -> Result<PrimId, SirError> {
        match self.var(name, pos)? {
            VarRef::Prim(p) => Ok(p),
            VarRef::Ref(_) => Err(SirError::KindMismatch {
                pos,
                msg: format!("`{name}` is a reference where a primitive is required"),
            }),
        }
    }

    fn reference(&self, name: &str, pos: Pos) -> Result<RefId, SirError> {
        match self.var(name, pos)? {
            VarRef::Ref(r) => Ok(r),
            VarRef::Prim(_) => Err(SirError::KindMismatch {
                pos,
                msg: format!("`{name}` is a primitive where a reference is required"),
            }),
        }
    }

    fn field(&self, r: RefId, name: &str, pos: Pos) -> Result<FieldId, SirError> {
        let c = self.refs[r].class;
        self.classes.field(c, name).ok_or_else(|| SirError::FieldNotFound {
            pos,
            class: self.classes.name(c).to_string(),
            field: name.to_string(),
        })
    }

    fn expr(&self, e: &ast::Expr, pos: Pos) -> Result<(TExpr, PrimTy), SirError> {
        use ast::Expr as E;
        let mismatch = |msg: String| SirError::TypeMismatch { pos, msg };
        Ok(match e {
            E::Int(n) => (TExpr::Int(*n), PrimTy::Int),
            E::Bool(b) => (TExpr::Bool(*b), PrimTy::Bool),
            E::Var(v) => {
                let p = self.prim(v, pos)?;
                (TExpr::Prim(p), self.prims[p].ty)
            }
            E::Unary(op, a) => {
                let (a, t) = self.expr(a, pos)?;
                let want = match op {
                    UnOp::Neg => PrimTy::Int,
                    UnOp::Not => PrimTy::Bool,
                };
                if t != want {
                    return Err(mismatch(format!("operand of unary operator must be {want}")));
                }
                (TExpr::Unary(*op, Box::new(a)), want)
            }
            E::Binary(op @ (BinOp::Eq | BinOp::Ne), a, b)
                if self.is_ref_var(a) || self.is_ref_var(b) =>
            {
                let (E::Var(x), E::Var(y)) = (&**a, &**b) else {
                    return Err(SirError::KindMismatch {
                        pos,
                        msg: "reference comparison needs two reference variables".into(),
                    });
                };
                let r = self.reference(x, pos)?;
                let s = self.reference(y, pos)?;
                (
                    TExpr::RefEq {
                        r,
                        s,
                        negated: *op == BinOp::Ne,
                    },
                    PrimTy::Bool,
                )
            }
            E::Binary(op, a, b) => {
                let (a, ta) = self.expr(a, pos)?;
                let (b, tb) = self.expr(b, pos)?;
                let out = match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        if ta != PrimTy::Int || tb != PrimTy::Int {
                            return Err(mismatch(format!("`{}` needs int operands", op.symbol())));
                        }
                        PrimTy::Int
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        if ta != PrimTy::Int || tb != PrimTy::Int {
                            return Err(mismatch(format!("`{}` needs int operands", op.symbol())));
                        }
                        PrimTy::Bool
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if ta != tb {
                            return Err(mismatch(format!("`{}` compares {ta} with {tb}", op.symbol())));
                        }
                        PrimTy::Bool
                    }
                    BinOp::And | BinOp::Or => {
                        if ta != PrimTy::Bool || tb != PrimTy::Bool {
                            return Err(mismatch(format!("`{}` needs bool operands", op.symbol())));
                        }
                        PrimTy::Bool
                    }
                };
                (TExpr::Binary(*op, Box::new(a), Box::new(b)), out)
            }
        })
    }

    fn is_ref_var(&self, e: &ast::Expr) -> bool {
        matches!(e, ast::Expr::Var(v) if matches!(self.names.get(v), Some(VarRef::Ref(_))))
    }

    fn assignable(&self, from: ClassId, to: ClassId, pos: Pos) -> Result<(), SirError> {
        if self.classes.is_subclass(from, to) {
            Ok(())
        } else {
            Err(SirError::TypeMismatch {
                pos,
                msg: format!(
                    "`{}` is not assignable to `{}`",
                    self.classes.name(from),
                    self.classes.name(to)
                ),
            })
        }
    }
}

fn check_method(classes: &ClassTable, m: &ast::Method) -> Result<TypedMethod, SirError> {
    let mut sc = Scope {
        classes,
        prims: Vec::new(),
        refs: Vec::new(),
        names: HashMap::new(),
    };
    let mut params = Vec::new();
    let decls = m.params.iter().map(|d| (d, true)).chain(m.locals.iter().map(|d| (d, false)));
    for ((name, ty), is_param) in decls {
        if sc.names.contains_key(name) {
            return Err(SirError::Duplicate {
                pos: m.pos,
                name: name.clone(),
            });
        }
        let v = match ty {
            Ty::Prim(p) => {
                sc.prims.push(PrimVar {
                    name: name.clone(),
                    ty: *p,
                    is_param,
                });
                VarRef::Prim(sc.prims.len() - 1)
            }
            Ty::Class(c) => {
                let class = classes.lookup(c).ok_or_else(|| SirError::UnknownClass {
                    pos: m.pos,
                    name: c.clone(),
                })?;
                sc.refs.push(RefVar {
                    name: name.clone(),
                    class,
                    is_param,
                });
                VarRef::Ref(sc.refs.len() - 1)
            }
        };
        sc.names.insert(name.clone(), v);
        if is_param {
            params.push(v);
        }
    }
    let label_index: HashMap<&str, usize> = m
        .body
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.label.as_deref().map(|l| (l, i)))
        .collect();
    let target = |l: &str, pos: Pos| {
        label_index
            .get(l)
            .copied()
            .ok_or_else(|| SirError::UnresolvedLabel { pos, label: l.to_string() })
    };
    let mut body = Vec::new();
    for s in &m.body {
        let pos = s.pos;
        let t = match &s.kind {
            StmtKind::Assign { lhs, rhs } => match sc.var(lhs, pos)? {
                VarRef::Prim(v) => match rhs {
                    Rhs::Expr(e) => {
                        let (e, t) = sc.expr(e, pos)?;
                        if t != sc.prims[v].ty {
                            return Err(SirError::TypeMismatch {
                                pos,
                                msg: format!("assigning {t} to {} `{lhs}`", sc.prims[v].ty),
                            });
                        }
                        TStmt::Assign { v, e }
                    }
                    Rhs::Field(obj, f) => {
                        let r = sc.reference(obj, pos)?;
                        let field = sc.field(r, f, pos)?;
                        match classes.fields[field].ty {
                            FieldTy::Prim(t) if t == sc.prims[v].ty => {}
                            FieldTy::Prim(t) => {
                                return Err(SirError::TypeMismatch {
                                    pos,
                                    msg: format!("field `{f}` is {t}"),
                                })
                            }
                            FieldTy::Ref(_) => {
                                return Err(SirError::KindMismatch {
                                    pos,
                                    msg: format!("field `{f}` is a reference, `{lhs}` is primitive"),
                                })
                            }
                        }
                        TStmt::LoadPrim { v, r, field }
                    }
                    Rhs::New(_) | Rhs::Null => {
                        return Err(SirError::KindMismatch {
                            pos,
                            msg: format!("`{lhs}` is primitive"),
                        })
                    }
                },
                VarRef::Ref(r) => match rhs {
                    Rhs::Expr(ast::Expr::Var(s)) => {
                        let s = sc.reference(s, pos)?;
                        sc.assignable(sc.refs[s].class, sc.refs[r].class, pos)?;
                        TStmt::Copy { r, s }
                    }
                    Rhs::Expr(_) => {
                        return Err(SirError::KindMismatch {
                            pos,
                            msg: format!("`{lhs}` is a reference, right-hand side is primitive"),
                        })
                    }
                    Rhs::Field(obj, f) => {
                        let s = sc.reference(obj, pos)?;
                        let field = sc.field(s, f, pos)?;
                        match classes.fields[field].ty {
                            FieldTy::Ref(c) => sc.assignable(c, sc.refs[r].class, pos)?,
                            FieldTy::Prim(_) => {
                                return Err(SirError::KindMismatch {
                                    pos,
                                    msg: format!("field `{f}` is primitive, `{lhs}` is a reference"),
                                })
                            }
                        }
                        TStmt::LoadRef { r, s, field }
                    }
                    Rhs::New(c) => {
                        let class = classes.lookup(c).ok_or_else(|| SirError::UnknownClass {
                            pos,
                            name: c.clone(),
                        })?;
                        sc.assignable(class, sc.refs[r].class, pos)?;
                        TStmt::New { r, class }
                    }
                    Rhs::Null => TStmt::Null { r },
                },
            },
            StmtKind::Store { obj, field: f, value } => {
                let r = sc.reference(obj, pos)?;
                let field = sc.field(r, f, pos)?;
                match classes.fields[field].ty.clone() {
                    FieldTy::Prim(ft) => {
                        let (e, t) = sc.expr(value, pos)?;
                        if t != ft {
                            return Err(SirError::TypeMismatch {
                                pos,
                                msg: format!("storing {t} into {ft} field `{f}`"),
                            });
                        }
                        TStmt::StorePrim { r, field, e }
                    }
                    FieldTy::Ref(fc) => {
                        let ast::Expr::Var(s) = value else {
                            return Err(SirError::KindMismatch {
                                pos,
                                msg: format!("field `{f}` needs a reference variable"),
                            });
                        };
                        let s = sc.reference(s, pos)?;
                        sc.assignable(sc.refs[s].class, fc, pos)?;
                        TStmt::StoreRef { r, field, s }
                    }
                }
            }
            StmtKind::Call { recv, method, args } => {
                let recv = sc.reference(recv, pos)?;
                let args = args.iter().map(|a| sc.var(a, pos)).collect::<Result<_, _>>()?;
                TStmt::Call {
                    recv,
                    method: method.clone(),
                    args,
                }
            }
            StmtKind::Goto(l) => TStmt::Goto { target: target(l, pos)? },
            StmtKind::If(e, l) => {
                let (cond, t) = sc.expr(e, pos)?;
                if t != PrimTy::Bool {
                    return Err(SirError::TypeMismatch {
                        pos,
                        msg: "branch condition must be bool".into(),
                    });
                }
                TStmt::If {
                    cond,
                    target: target(l, pos)?,
                }
            }
            StmtKind::Output(level, x) => TStmt::Output {
                level: *level,
                var: sc.var(x, pos)?,
            },
        };
        body.push(t);
    }
    Ok(TypedMethod {
        name: m.name.clone(),
        prims: sc.prims,
        refs: sc.refs,
        params,
        body,
        labels: m.body.iter().map(|s| s.label.clone()).collect(),
        positions: m.body.iter().map(|s| s.pos).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;

    fn check(src: &str) -> Result<TypedProgram, SirError> {
        typecheck(&parse_program(src).unwrap())
    }

    #[test]
    fn running_example_types() {
        let p = check(
            "class A { int fi; } class B { A fa; }
             method m(A a, B b, int i) { local B r; r = new B; a.fi = i; r.fa = a; output low(b); }",
        )
        .unwrap();
        let m = &p.methods[0];
        let a = p.classes.lookup("A").unwrap();
        let b = p.classes.lookup("B").unwrap();
        assert_eq!(m.refs.iter().map(|r| (r.name.as_str(), r.class)).collect::<Vec<_>>(), vec![("a", a), ("b", b), ("r", b)]);
        assert_eq!(m.prims[0].name, "i");
        assert_eq!(m.prims[0].ty, PrimTy::Int);
        assert_eq!(m.params, vec![VarRef::Ref(0), VarRef::Ref(1), VarRef::Prim(0)]);
        assert!(matches!(m.body[2], TStmt::StoreRef { r: 2, s: 0, .. }));
    }

    #[test]
    fn missing_field() {
        let e = check("class A { int fi; } method g(A a) { a.fa = a; }").unwrap_err();
        assert!(matches!(e, SirError::FieldNotFound { .. }));
    }

    #[test]
    fn reference_into_primitive() {
        let e = check("class A { } method g(A r, int v) { v = r; }").unwrap_err();
        assert!(matches!(e, SirError::KindMismatch { .. }));
    }

    #[test]
    fn unbound_and_bool_condition() {
        assert!(matches!(check("method g() { x = 1; }").unwrap_err(), SirError::Unbound { .. }));
        assert!(matches!(
            check("method g(int x) { L: if (x) goto L; }").unwrap_err(),
            SirError::TypeMismatch { .. }
        ));
    }

    #[test]
    fn reference_comparison_and_inheritance() {
        let p = check(
            "class A { int fi; } class C extends A { A next; }
             method g(A a, C c, bool t) { t = a == c; a = c; c.fi = 3; a = c.next; }",
        )
        .unwrap();
        let m = &p.methods[0];
        assert!(matches!(m.body[0], TStmt::Assign { e: TExpr::RefEq { r: 0, s: 1, negated: false }, .. }));
        let e = check("class A { } class C extends A { } method g(A a, C c) { c = a; }").unwrap_err();
        assert!(matches!(e, SirError::TypeMismatch { .. }));
    }

    #[test]
    fn hierarchy_cycle_is_rejected() {
        let e = check("class A extends B { } class B extends A { } method g() { goto L; L: goto L; }");
        assert!(matches!(e.unwrap_err(), SirError::HierarchyCycle { .. }));
    }
}
