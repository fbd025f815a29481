//! Translation of a typed method into a symbolic control-flow graph and
//! its safety invariant.

use std::fmt;

use hg_heap::{HeapDomainInstance, HeapError, HeapOp, Mutant, RelKey, SymbolicHeap, H, H_PRIME};
use hg_predicate::{AssignmentSet, Bdd, EnumVar, Manager, Var};
use hg_sir::ast::Level;
use hg_sir::typed::{ClassTable, RefId, TExpr, TStmt, TypedMethod, VarRef};
use hg_sir::{build_cfg, compute_cdrs, postdominator_tree, CdrTable, Cfg, SirError, P_BOTTOM};
use thiserror::Error;

use crate::stubs::{EffectTarget, Formula, Summary, SummaryTable};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error(transparent)]
    Sir(#[from] SirError),
    #[error(transparent)]
    Heap(#[from] HeapError),
    #[error("method `{method}`: no summary for `{class}.{callee}` with {arity} argument(s)")]
    MissingSummary {
        method: String,
        class: String,
        callee: String,
        arity: usize,
    },
}

/// A semantic location: a CFG node, before (`njb`) or after (`nb`) its
/// junction bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Location {
    pub node: usize,
    pub past_junction: bool,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.past_junction {
            write!(f, "ℓ{}.nb", self.node)
        } else {
            write!(f, "ℓ{}", self.node)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub guard: Bdd,
    pub assign: AssignmentSet,
    pub target: usize,
}

/// Deterministic, reactive symbolic control-flow graph.
#[derive(Clone, Debug)]
pub struct Scfg {
    pub locations: Vec<Location>,
    /// Outgoing transitions per location index.
    pub delta: Vec<Vec<Transition>>,
    pub initial: usize,
    /// Initial-state predicate.
    pub x0: Bdd,
    pub state_vars: Vec<Var>,
    pub input_vars: Vec<Var>,
}

impl Scfg {
    pub fn location_index(&self, loc: Location) -> Option<usize> {
        self.locations.iter().position(|&l| l == loc)
    }

    /// The location at which statement `node` executes.
    pub fn statement_location(&self, node: usize) -> usize {
        let after = Location { node, past_junction: true };
        self.location_index(after)
            .or_else(|| self.location_index(Location { node, past_junction: false }))
            .expect("node has a location")
    }

    pub fn transition_count(&self) -> usize {
        self.delta.iter().map(Vec::len).sum()
    }
}

/// State variables of one method's encoding.
#[derive(Clone, Debug)]
pub struct StateVars {
    /// Υ: upgrade-analysis mode.
    pub mode: Var,
    /// Region currently under a high condition; value 0 is P_⊥.
    pub hr: EnumVar,
    pub pc: Var,
    pub omega: Var,
    /// v̄ per primitive variable.
    pub prim_lev: Vec<Var>,
    /// r̄ per reference variable.
    pub ref_lev: Vec<Var>,
    /// r⃗ and relations for the working copy `H` and the placeholder `H_PRIME`.
    pub heap: SymbolicHeap,
}

impl StateVars {
    pub fn level_var(&self, v: VarRef) -> Var {
        match v {
            VarRef::Prim(p) => self.prim_lev[p],
            VarRef::Ref(r) => self.ref_lev[r],
        }
    }

    /// Every state variable, in allocation order.
    pub fn all_state(&self) -> Vec<Var> {
        let mut v = vec![self.mode];
        v.extend(self.hr.bits.iter().copied());
        v.push(self.pc);
        v.extend(self.prim_lev.iter().copied());
        v.extend(self.ref_lev.iter().copied());
        v.extend(self.heap.vars(H));
        v.extend(self.heap.vars(H_PRIME));
        v.sort();
        v
    }

    /// Calling-context facts: pc, argument levels, argument `r⃗`, and
    /// relation variables between arguments.
    pub fn context_vars(&self, m: &TypedMethod) -> Vec<Var> {
        let mut v = vec![self.pc];
        for &p in &m.params {
            v.push(self.level_var(p));
            if let VarRef::Ref(r) = p {
                v.push(self.heap.level_var(H, r));
            }
        }
        for (k, var) in self.heap.rel_vars(H) {
            if m.refs[k.r].is_param && m.refs[k.s].is_param {
                v.push(var);
            }
        }
        v.sort();
        v
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EncodeOptions {
    /// Havoc missing summaries instead of failing.
    pub assume_worst: bool,
    pub mutant: Mutant,
}

/// Result of [`encode_method`].
#[derive(Clone, Debug)]
pub struct Encoding {
    pub method: String,
    pub scfg: Scfg,
    /// Safety predicate per location index.
    pub invariant: Vec<Bdd>,
    pub vars: StateVars,
    pub cfg: Cfg,
    pub cdrs: CdrTable,
    pub warnings: Vec<String>,
}

/// Allocates state variables in the order Υ, hr, pc, ω, then per variable
/// (parameters in declaration order, then locals), relations last.
fn allocate(mgr: &mut Manager, m: &TypedMethod, inst: HeapDomainInstance, regions: usize, mutant: Mutant) -> StateVars {
    let mode = mgr.new_var("mode");
    let hr = mgr.new_enum("hr", regions as u32 + 1);
    let pc = mgr.new_var("pc");
    let omega = mgr.new_var("omega");

    let mut order: Vec<VarRef> = m.params.clone();
    order.extend((0..m.prims.len()).filter(|&p| !m.prims[p].is_param).map(VarRef::Prim));
    order.extend(m.local_refs().into_iter().map(VarRef::Ref));

    let mut prim_lev: Vec<Option<Var>> = vec![None; m.prims.len()];
    let mut ref_lev: Vec<Option<Var>> = vec![None; m.refs.len()];
    let mut next = 0usize;
    let heap = SymbolicHeap::allocate(mgr, inst, 2, |mgr, r| {
        while next < order.len() {
            let v = order[next];
            next += 1;
            match v {
                VarRef::Prim(p) => prim_lev[p] = Some(mgr.new_var(format!("lev({})", m.prims[p].name))),
                VarRef::Ref(q) => {
                    ref_lev[q] = Some(mgr.new_var(format!("lev({})", m.refs[q].name)));
                    if q == r {
                        break;
                    }
                }
            }
        }
    });
    for &v in &order[next..] {
        if let VarRef::Prim(p) = v {
            prim_lev[p] = Some(mgr.new_var(format!("lev({})", m.prims[p].name)));
        }
    }
    StateVars {
        mode,
        hr,
        pc,
        omega,
        prim_lev: prim_lev.into_iter().map(|v| v.expect("allocated")).collect(),
        ref_lev: ref_lev.into_iter().map(|v| v.expect("allocated")).collect(),
        heap: heap.with_mutant(mutant),
    }
}

struct Enc<'a> {
    mgr: &'a mut Manager,
    m: &'a TypedMethod,
    classes: &'a ClassTable,
    stubs: &'a SummaryTable,
    opts: EncodeOptions,
    v: StateVars,
    warnings: Vec<String>,
}

impl<'a> Enc<'a> {
    fn var(&mut self, v: Var) -> Bdd {
        self.mgr.var(v)
    }

    fn mode(&mut self) -> Bdd {
        self.mgr.var(self.v.mode)
    }

    fn pc(&mut self) -> Bdd {
        self.mgr.var(self.v.pc)
    }

    /// ē: join of the levels of variables read by `e`.
    fn expr_level(&mut self, e: &TExpr) -> Bdd {
        let mut reads = Vec::new();
        e.reads(&mut reads);
        let levels: Vec<Bdd> = reads.into_iter().map(|x| self.mgr.var(self.v.level_var(x))).collect();
        self.mgr.or_all(levels)
    }

    /// `x̄ :=Υ l`, i.e. `x̄ := (Υ ? x̄ : l) ⊔ pc`.
    fn assign_level(&mut self, x: Var, l: Bdd) -> AssignmentSet {
        let (mode, xb, pc) = (self.mode(), self.var(x), self.pc());
        let pick = self.mgr.ite(mode, xb, l);
        AssignmentSet::single(x, self.mgr.or(pick, pc))
    }

    /// `[l]_Υ = (Υ ? ⊥ : l) ⊔ pc`.
    fn upgraded(&mut self, l: Bdd) -> Bdd {
        let (mode, pc) = (self.mode(), self.pc());
        let nm = self.mgr.not(mode);
        let pick = self.mgr.and(nm, l);
        self.mgr.or(pick, pc)
    }

    fn heap_op(&mut self, op: HeapOp) -> Result<AssignmentSet, EncodeError> {
        Ok(self.v.heap.transformer(self.mgr, H, op)?)
    }

    fn reach(&mut self, r: RefId) -> Bdd {
        self.v.heap.level(self.mgr, H, r)
    }

    fn assign(&mut self, stmt: &TStmt) -> Result<AssignmentSet, EncodeError> {
        let lev = |e: &Self, v: VarRef| e.v.level_var(v);
        Ok(match stmt {
            TStmt::Assign { v, e } => {
                let l = self.expr_level(e);
                self.assign_level(lev(self, VarRef::Prim(*v)), l)
            }
            TStmt::LoadPrim { v, r, .. } => {
                let rb = self.var(lev(self, VarRef::Ref(*r)));
                let rr = self.reach(*r);
                let l = self.mgr.or(rb, rr);
                self.assign_level(lev(self, VarRef::Prim(*v)), l)
            }
            TStmt::LoadRef { r, s, .. } => {
                let sb = self.var(lev(self, VarRef::Ref(*s)));
                let sr = self.reach(*s);
                let l = self.mgr.or(sb, sr);
                let a = self.assign_level(lev(self, VarRef::Ref(*r)), l);
                let h = self.heap_op(HeapOp::Load { r: *r, s: *s })?;
                a.merge(self.mgr, &h)
            }
            TStmt::Copy { r, s } => {
                let sb = self.var(lev(self, VarRef::Ref(*s)));
                let a = self.assign_level(lev(self, VarRef::Ref(*r)), sb);
                let h = self.heap_op(HeapOp::Copy { r: *r, s: *s })?;
                a.merge(self.mgr, &h)
            }
            TStmt::New { r, .. } => {
                let a = self.assign_level(lev(self, VarRef::Ref(*r)), Bdd::FALSE);
                let pc = self.pc();
                let h = self.heap_op(HeapOp::New { r: *r, l: pc })?;
                a.merge(self.mgr, &h)
            }
            TStmt::Null { r } => {
                let a = self.assign_level(lev(self, VarRef::Ref(*r)), Bdd::FALSE);
                let h = self.heap_op(HeapOp::Null(*r))?;
                a.merge(self.mgr, &h)
            }
            TStmt::StorePrim { r, e, .. } => {
                let el = self.expr_level(e);
                let l = self.upgraded(el);
                self.heap_op(HeapOp::StorePrim { r: *r, l })?
            }
            TStmt::StoreRef { r, s, .. } => {
                let sb = self.var(lev(self, VarRef::Ref(*s)));
                let sr = self.reach(*s);
                let j = self.mgr.or(sb, sr);
                let l = self.upgraded(j);
                self.heap_op(HeapOp::StoreRef { r: *r, s: *s, l })?
            }
            other => unreachable!("not an assignment: {other:?}"),
        })
    }

    fn formula(&mut self, f: &Formula, bind: &dyn Fn(&str) -> VarRef, pc: Bdd) -> Bdd {
        let rf = |x: &str| match bind(x) {
            VarRef::Ref(r) => r,
            VarRef::Prim(_) => unreachable!("validated as a reference formal"),
        };
        match f {
            Formula::Const(b) => Bdd::from_bool(*b),
            Formula::Pc => pc,
            Formula::Lev(x) => self.mgr.var(self.v.level_var(bind(x))),
            Formula::Reach(x) => self.reach(rf(x)),
            Formula::Alias(x, y) => self.v.heap.alias(self.mgr, H, rf(x), rf(y)),
            Formula::FReach(x, y) => self.v.heap.reach(self.mgr, H, rf(x), rf(y)),
            Formula::Not(a) => {
                let a = self.formula(a, bind, pc);
                self.mgr.not(a)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Eq(a, b) => {
                let x = self.formula(a, bind, pc);
                let y = self.formula(b, bind, pc);
                match f {
                    Formula::And(..) => self.mgr.and(x, y),
                    Formula::Or(..) => self.mgr.or(x, y),
                    _ => self.mgr.equiv(x, y),
                }
            }
            Formula::Ite(c, a, b) => {
                let c = self.formula(c, bind, pc);
                let a = self.formula(a, bind, pc);
                let b = self.formula(b, bind, pc);
                self.mgr.ite(c, a, b)
            }
        }
    }

    /// Summaries that may run for `recv.method(args)`: the receiver's class
    /// and each subclass, each resolved to its own entry or its nearest
    /// ancestor's.
    fn dispatch(&self, recv: RefId, method: &str, kinds: &[bool]) -> Option<Vec<&'a Summary>> {
        let stubs: &'a SummaryTable = self.stubs;
        let t = self.m.refs[recv].class;
        let mut out: Vec<&'a Summary> = Vec::new();
        for c in self.classes.subclasses(t) {
            let mut cur = Some(c);
            let found = loop {
                match cur {
                    None => break None,
                    Some(k) => {
                        if let Some(s) = stubs.lookup(self.classes.name(k), method, kinds) {
                            break Some(s);
                        }
                        cur = self.classes.classes[k].parent;
                    }
                }
            };
            let s = found?;
            if !out.iter().any(|o| o.key == s.key) {
                out.push(s);
            }
        }
        Some(out)
    }

    /// Effect and guard of a call, already substituted with `pc ↦ pc ⊔ r̄`.
    fn call(&mut self, recv: RefId, method: &str, args: &[VarRef]) -> Result<(AssignmentSet, Bdd), EncodeError> {
        let kinds: Vec<bool> = args.iter().map(|a| matches!(a, VarRef::Ref(_))).collect();
        let rb = self.var(self.v.ref_lev[recv]);
        let pc0 = self.pc();
        let pc = self.mgr.or(pc0, rb);
        let Some(targets) = self.dispatch(recv, method, &kinds) else {
            if !self.opts.assume_worst {
                return Err(EncodeError::MissingSummary {
                    method: self.m.name.clone(),
                    class: self.classes.name(self.m.refs[recv].class).to_string(),
                    callee: method.to_string(),
                    arity: args.len(),
                });
            }
            self.warnings.push(format!(
                "{}: no summary for {}.{}; assuming the worst",
                self.m.name,
                self.classes.name(self.m.refs[recv].class),
                method
            ));
            return Ok((self.worst_effect(recv, args)?, Bdd::TRUE));
        };
        let mut effect = AssignmentSet::new();
        let mut guard = Bdd::TRUE;
        for s in targets {
            let formals: Vec<String> = s.formals().iter().map(|(n, _)| n.to_string()).collect();
            let actuals: Vec<VarRef> = std::iter::once(VarRef::Ref(recv)).chain(args.iter().copied()).collect();
            let bind = move |x: &str| actuals[formals.iter().position(|f| f == x).expect("validated formal")];
            let g = self.formula(&s.guard, &bind, pc);
            guard = self.mgr.and(guard, g);
            for (target, rhs) in &s.effect {
                let val = self.formula(rhs, &bind, pc);
                let piece = match target {
                    EffectTarget::Reach(x) => {
                        let VarRef::Ref(r) = bind(x) else { unreachable!() };
                        self.v.heap.upd_hp_lev(self.mgr, H, r, val)?
                    }
                    EffectTarget::FReach(x, y) => {
                        let (VarRef::Ref(a), VarRef::Ref(b)) = (bind(x), bind(y)) else { unreachable!() };
                        match self.v.heap.rel_var(H, RelKey::reach(a, b)) {
                            Some(v) => AssignmentSet::single(v, val),
                            None => AssignmentSet::new(),
                        }
                    }
                };
                effect = effect.merge(self.mgr, &piece);
            }
        }
        Ok((effect, guard))
    }

    /// Every object reachable from a reference argument becomes ⊤ and may
    /// now reach every other argument.
    fn worst_effect(&mut self, recv: RefId, args: &[VarRef]) -> Result<AssignmentSet, EncodeError> {
        let mut refs = vec![recv];
        refs.extend(args.iter().filter_map(|a| match a {
            VarRef::Ref(r) => Some(*r),
            VarRef::Prim(_) => None,
        }));
        let mut out = AssignmentSet::new();
        for &r in &refs {
            let up = self.v.heap.upd_hp_lev(self.mgr, H, r, Bdd::TRUE)?;
            out = out.merge(self.mgr, &up);
        }
        for &a in &refs {
            for &b in &refs {
                if let Some(v) = self.v.heap.rel_var(H, RelKey::reach(a, b)) {
                    out.join_into(self.mgr, v, Bdd::TRUE);
                }
            }
        }
        Ok(out)
    }

    fn hr_assign(&self, k: usize) -> AssignmentSet {
        let mut a = AssignmentSet::new();
        for (v, b) in self.mgr.enum_binding(&self.v.hr, k as u32) {
            a.set(v, Bdd::from_bool(b));
        }
        a
    }

    fn sink(&mut self, level: Level, x: VarRef) -> Bdd {
        if level == Level::High {
            return Bdd::TRUE;
        }
        let mut parts = vec![self.var(self.v.level_var(x)), self.pc()];
        if let VarRef::Ref(r) = x {
            parts.push(self.reach(r));
        }
        let leak = self.mgr.or_all(parts);
        self.mgr.not(leak)
    }
}

/// Encodes `m` over the heap domain `inst`.
pub fn encode_method(
    mgr: &mut Manager,
    classes: &ClassTable,
    m: &TypedMethod,
    inst: HeapDomainInstance,
    stubs: &SummaryTable,
    opts: EncodeOptions,
) -> Result<Encoding, EncodeError> {
    let cfg = build_cfg(m);
    let pdt = postdominator_tree(&cfg);
    let cdrs = compute_cdrs(&m.name, &cfg, &pdt)?;
    let vars = allocate(mgr, m, inst, cdrs.len(), opts.mutant);
    let mut enc = Enc {
        mgr,
        m,
        classes,
        stubs,
        opts,
        v: vars,
        warnings: cfg.warnings.clone(),
    };

    let exit = cfg.exit();
    let mut locations = Vec::new();
    for node in 0..=exit {
        locations.push(Location { node, past_junction: false });
        if cdrs.is_junction(node) {
            locations.push(Location { node, past_junction: true });
        }
    }
    let idx = |node: usize, past: bool| {
        locations
            .iter()
            .position(|&l| l == Location { node, past_junction: past })
            .expect("location exists")
    };
    let entry = |node: usize| idx(node, false);
    let mut delta: Vec<Vec<Transition>> = vec![Vec::new(); locations.len()];
    let mut invariant = vec![Bdd::TRUE; locations.len()];

    for (li, loc) in locations.iter().enumerate() {
        let node = loc.node;
        if cdrs.is_junction(node) && !loc.past_junction {
            let after = idx(node, true);
            let regions = cdrs.junction_of(node).to_vec();
            let in_j = enc.mgr.enum_in(&enc.v.hr, &regions.iter().map(|&r| r as u32).collect::<Vec<_>>());
            let not_j = enc.mgr.not(in_j);
            delta[li].push(Transition { guard: not_j, assign: AssignmentSet::new(), target: after });
            let mode = enc.mode();
            let nmode = enc.mgr.not(mode);
            for &rho in &regions {
                let is_rho = enc.mgr.enum_eq(&enc.v.hr, rho as u32);
                let guard = enc.mgr.and(nmode, is_rho);
                let save = enc.v.heap.copy_heap(enc.mgr, H_PRIME, H);
                let restore = enc.v.heap.copy_heap(enc.mgr, H, H_PRIME);
                let mut assign = save.merge(enc.mgr, &restore);
                assign.set(enc.v.mode, Bdd::TRUE);
                let target = entry(cdrs.region(rho).branch);
                delta[li].push(Transition { guard, assign, target });
            }
            let guard = enc.mgr.and(mode, in_j);
            let mut end = enc.hr_assign(P_BOTTOM);
            end.set(enc.v.mode, Bdd::FALSE);
            end.set(enc.v.pc, Bdd::FALSE);
            let bulk = enc.v.heap.bulk_upgrade(enc.mgr, H, H_PRIME);
            let assign = end.merge(enc.mgr, &bulk);
            delta[li].push(Transition { guard, assign, target: after });
            continue;
        }
        if node == exit {
            delta[li].push(Transition { guard: Bdd::TRUE, assign: AssignmentSet::new(), target: li });
            continue;
        }
        let stmt = &m.body[node];
        let next = entry(node + 1);
        match stmt {
            TStmt::Goto { target } => {
                delta[li].push(Transition { guard: Bdd::TRUE, assign: AssignmentSet::new(), target: entry(*target) });
            }
            TStmt::Output { level, var } => {
                invariant[li] = enc.sink(*level, *var);
                delta[li].push(Transition { guard: Bdd::TRUE, assign: AssignmentSet::new(), target: next });
            }
            TStmt::Call { recv, method, args } => {
                let (effect, guard) = enc.call(*recv, method, args)?;
                invariant[li] = guard;
                delta[li].push(Transition { guard: Bdd::TRUE, assign: effect, target: next });
            }
            TStmt::If { cond, target } => {
                let rho = cdrs.cdr_of[&node];
                let el = enc.expr_level(cond);
                let (mode, pc) = (enc.mode(), enc.pc());
                let omega = enc.mgr.var(enc.v.omega);
                let nmode = enc.mgr.not(mode);
                let npc = enc.mgr.not(pc);
                let high = enc.mgr.and(el, npc);
                let low = enc.mgr.not(high);
                let enter = enc.mgr.and(nmode, high);
                let nominal_low = enc.mgr.and(nmode, low);
                let stay = enc.mgr.or(nominal_low, mode);
                let mut brch = enc.hr_assign(rho);
                brch.set(enc.v.pc, Bdd::TRUE);
                let save = enc.v.heap.copy_heap(enc.mgr, H_PRIME, H);
                let brch = brch.merge(enc.mgr, &save);
                let nomega = enc.mgr.not(omega);
                for (w, dest) in [(omega, entry(*target)), (nomega, next)] {
                    let g1 = enc.mgr.and(w, enter);
                    delta[li].push(Transition { guard: g1, assign: brch.clone(), target: dest });
                    let g2 = enc.mgr.and(w, stay);
                    delta[li].push(Transition { guard: g2, assign: AssignmentSet::new(), target: dest });
                }
            }
            _ => {
                let assign = enc.assign(stmt)?;
                delta[li].push(Transition { guard: Bdd::TRUE, assign, target: next });
            }
        }
    }

    // X0: nominal mode, no high region, locals null and low, h′ cleared.
    let mut lits = vec![(enc.v.mode, false)];
    lits.extend(enc.mgr.enum_binding(&enc.v.hr, P_BOTTOM as u32));
    for (p, pv) in m.prims.iter().enumerate() {
        if !pv.is_param {
            lits.push((enc.v.prim_lev[p], false));
        }
    }
    let locals = m.local_refs();
    for &r in &locals {
        lits.push((enc.v.ref_lev[r], false));
    }
    lits.extend(enc.v.heap.vars(H_PRIME).into_iter().map(|v| (v, false)));
    lits.sort();
    lits.dedup();
    let fixed = enc.mgr.cube(&lits);
    let nulls = enc.v.heap.null_refs_pred(enc.mgr, H, &locals)?;
    let x0 = enc.mgr.and(fixed, nulls);

    let state_vars = enc.v.all_state();
    let scfg = Scfg {
        initial: entry(0),
        locations,
        delta,
        x0,
        state_vars,
        input_vars: vec![enc.v.omega],
    };
    Ok(Encoding {
        method: m.name.clone(),
        scfg,
        invariant,
        vars: enc.v,
        cfg,
        cdrs,
        warnings: enc.warnings,
    })
}
