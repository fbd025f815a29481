//! Nominal-mode interpreter over concrete heaps.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use hg_sir::ast::{BinOp, Level, PrimTy, UnOp};
use hg_sir::typed::{FieldTy, TExpr, TStmt, VarRef};
use hg_sir::{ClassTable, TypedMethod};

use crate::concrete::{ConcreteHeap, ConcreteOp, ObjId, PVal};

/// Program state: next statement, primitive variables and the heap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgState {
    pub location: usize,
    pub prims: Vec<PVal>,
    pub heap: ConcreteHeap,
}

impl ProgState {
    /// Every reference null, every primitive zero or false.
    pub fn new(classes: &ClassTable, m: &TypedMethod) -> Self {
        let statics: Vec<_> = m.refs.iter().map(|r| r.class).collect();
        ProgState {
            location: 0,
            prims: m.prims.iter().map(|p| zero(p.ty)).collect(),
            heap: ConcreteHeap::new(classes, &statics),
        }
    }
}

fn zero(ty: PrimTy) -> PVal {
    match ty {
        PrimTy::Int => PVal::Int(0),
        PrimTy::Bool => PVal::Bool(false),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Halted,
    BudgetExhausted,
    /// Null dereference, read of `und`, division by zero or a call.
    Trapped(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub level: Level,
    pub payload: String,
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.payload)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub observations: Vec<Observation>,
    pub status: Status,
    pub steps: usize,
}

impl Trace {
    pub fn low(&self) -> Vec<&str> {
        self.observations.iter().filter(|o| o.level == Level::Low).map(|o| o.payload.as_str()).collect()
    }
}

/// Low observations agree, up to a prefix when a run did not halt.
pub fn low_equivalent(a: &Trace, b: &Trace) -> bool {
    let (x, y) = (a.low(), b.low());
    let n = x.len().min(y.len());
    if x[..n] != y[..n] {
        return false;
    }
    x.len() == y.len() || (x.len() < y.len() && a.status != Status::Halted) || (y.len() < x.len() && b.status != Status::Halted)
}

struct Trap(String);

fn read(v: PVal, ty: PrimTy) -> Result<PVal, Trap> {
    match v {
        PVal::Und => Err(Trap("read of und".into())),
        PVal::Default => Ok(zero(ty)),
        v => Ok(v),
    }
}

fn as_int(v: PVal) -> Result<i64, Trap> {
    match v {
        PVal::Int(i) => Ok(i),
        other => Err(Trap(format!("expected int, got {other}"))),
    }
}

fn as_bool(v: PVal) -> Result<bool, Trap> {
    match v {
        PVal::Bool(b) => Ok(b),
        other => Err(Trap(format!("expected bool, got {other}"))),
    }
}

fn eval(m: &TypedMethod, st: &ProgState, e: &TExpr) -> Result<PVal, Trap> {
    Ok(match e {
        TExpr::Int(i) => PVal::Int(*i),
        TExpr::Bool(b) => PVal::Bool(*b),
        TExpr::Prim(v) => read(st.prims[*v], m.prims[*v].ty)?,
        TExpr::Unary(UnOp::Neg, a) => PVal::Int(as_int(eval(m, st, a)?)?.wrapping_neg()),
        TExpr::Unary(UnOp::Not, a) => PVal::Bool(!as_bool(eval(m, st, a)?)?),
        TExpr::Binary(op, a, b) => {
            let (x, y) = (eval(m, st, a)?, eval(m, st, b)?);
            match op {
                BinOp::And => PVal::Bool(as_bool(x)? && as_bool(y)?),
                BinOp::Or => PVal::Bool(as_bool(x)? || as_bool(y)?),
                BinOp::Eq => PVal::Bool(x == y),
                BinOp::Ne => PVal::Bool(x != y),
                _ => {
                    let (i, j) = (as_int(x)?, as_int(y)?);
                    match op {
                        BinOp::Add => PVal::Int(i.wrapping_add(j)),
                        BinOp::Sub => PVal::Int(i.wrapping_sub(j)),
                        BinOp::Mul => PVal::Int(i.wrapping_mul(j)),
                        BinOp::Div if j == 0 => return Err(Trap("division by zero".into())),
                        BinOp::Div => PVal::Int(i.wrapping_div(j)),
                        BinOp::Lt => PVal::Bool(i < j),
                        BinOp::Le => PVal::Bool(i <= j),
                        BinOp::Gt => PVal::Bool(i > j),
                        BinOp::Ge => PVal::Bool(i >= j),
                        _ => unreachable!("boolean operators handled above"),
                    }
                }
            }
        }
        TExpr::RefEq { r, s, negated } => {
            let h = &st.heap;
            let same = h.alias(*r, *s) || (h.obj(*r).null && h.obj(*s).null);
            PVal::Bool(same != *negated)
        }
    })
}

fn deref(st: &ProgState, r: usize) -> Result<(), Trap> {
    if st.heap.obj(r).null {
        Err(Trap("null dereference".into()))
    } else {
        Ok(())
    }
}

/// Canonical text of the sub-heap reachable from `o`: objects numbered in
/// breadth-first order, expanded up to `depth` field steps.
pub fn sub_heap(classes: &ClassTable, h: &ConcreteHeap, o: ObjId, depth: usize) -> String {
    if h.objects[o].null {
        return "null".into();
    }
    let mut ids: BTreeMap<ObjId, usize> = BTreeMap::from([(o, 0)]);
    let mut q = VecDeque::from([(o, 0usize)]);
    let mut parts = Vec::new();
    while let Some((x, d)) = q.pop_front() {
        let obj = &h.objects[x];
        let mut fields = Vec::new();
        for (&f, &v) in &obj.prims {
            let v = match (v, &classes.fields[f].ty) {
                (PVal::Default, FieldTy::Prim(ty)) => zero(*ty),
                (v, _) => v,
            };
            fields.push(format!("{}={v}", classes.fields[f].name));
        }
        if d < depth {
            for (&f, &t) in &obj.edges {
                let next = ids.len();
                let id = *ids.entry(t).or_insert_with(|| {
                    q.push_back((t, d + 1));
                    next
                });
                fields.push(format!("{}->#{id}", classes.fields[f].name));
            }
        }
        parts.push(format!("#{}:{}{{{}}}", ids[&x], classes.name(obj.class), fields.join(",")));
    }
    parts.join(" ")
}

fn exec(classes: &ClassTable, m: &TypedMethod, st: &mut ProgState, out: &mut Vec<Observation>) -> Result<(), Trap> {
    let s = &m.body[st.location];
    let mut next = st.location + 1;
    let op = |op: ConcreteOp, st: &mut ProgState| st.heap.apply(classes, op).map_err(|e| Trap(e.to_string()));
    match s {
        TStmt::Assign { v, e } => st.prims[*v] = eval(m, st, e)?,
        TStmt::LoadPrim { v, r, field } => {
            deref(st, *r)?;
            st.prims[*v] = read(st.heap.read(*r, *field), m.prims[*v].ty)?;
        }
        TStmt::StorePrim { r, field, e } => {
            deref(st, *r)?;
            let value = eval(m, st, e)?;
            op(ConcreteOp::StorePrim { r: *r, field: *field, value }, st)?;
        }
        TStmt::Copy { r, s } => op(ConcreteOp::Copy { r: *r, s: *s }, st)?,
        TStmt::LoadRef { r, s, field } => {
            deref(st, *s)?;
            op(ConcreteOp::Load { r: *r, s: *s, field: *field }, st)?;
        }
        TStmt::StoreRef { r, field, s } => {
            deref(st, *r)?;
            op(ConcreteOp::StoreRef { r: *r, field: *field, s: *s }, st)?;
        }
        TStmt::New { r, class } => op(ConcreteOp::New { r: *r, class: *class }, st)?,
        TStmt::Null { r } => op(ConcreteOp::Null(*r), st)?,
        TStmt::Call { method, .. } => return Err(Trap(format!("call to {method} is not interpreted"))),
        TStmt::Goto { target } => next = *target,
        TStmt::If { cond, target } => {
            if as_bool(eval(m, st, cond)?)? {
                next = *target;
            }
        }
        TStmt::Output { level, var } => {
            let payload = match *var {
                VarRef::Prim(p) => read(st.prims[p], m.prims[p].ty)?.to_string(),
                VarRef::Ref(r) => sub_heap(classes, &st.heap, st.heap.refs[r], m.refs.len()),
            };
            out.push(Observation { level: *level, payload });
        }
    }
    st.location = next;
    Ok(())
}

/// Runs `m` from `init` for at most `budget` statements.
pub fn run_concrete(classes: &ClassTable, m: &TypedMethod, init: ProgState, budget: usize) -> Trace {
    let mut st = init;
    let mut observations = Vec::new();
    let mut steps = 0;
    let status = loop {
        if st.location >= m.body.len() {
            break Status::Halted;
        }
        if steps == budget {
            break Status::BudgetExhausted;
        }
        steps += 1;
        if let Err(Trap(why)) = exec(classes, m, &mut st, &mut observations) {
            break Status::Trapped(why);
        }
    };
    Trace { observations, status, steps }
}
