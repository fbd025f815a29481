//! Hash-consed reduced ordered binary decision diagrams.
//!
//! Every diagram lives in a [`Manager`]; a [`Bdd`] is a plain index into its
//! node table, so two handles from the same manager are semantically equal
//! exactly when they are equal as integers.

use rustc_hash::FxHashMap;

/// Handle to a node in a [`Manager`].
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Bdd(u32);

impl Bdd {
    pub const FALSE: Bdd = Bdd(0);
    pub const TRUE: Bdd = Bdd(1);

    pub fn from_bool(b: bool) -> Bdd {
        if b {
            Bdd::TRUE
        } else {
            Bdd::FALSE
        }
    }

    pub fn is_true(self) -> bool {
        self == Bdd::TRUE
    }

    pub fn is_false(self) -> bool {
        self == Bdd::FALSE
    }

    pub fn is_const(self) -> bool {
        self.0 < 2
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

/// A Boolean decision variable. Its index is its position in the order.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A conjunction of literals, sorted by variable.
pub type Cube = Vec<(Var, bool)>;

/// Outcome of [`Manager::classify`].
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Classification {
    Tautology,
    Unsatisfiable,
    Contingent,
}

/// Finite-domain variable encoded in binary over consecutive Boolean bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumVar {
    pub name: String,
    pub card: u32,
    /// Most significant bit first.
    pub bits: Vec<Var>,
}

#[derive(Clone, Copy)]
struct Node {
    var: u32,
    lo: Bdd,
    hi: Bdd,
}

const TERMINAL: u32 = u32::MAX;

#[derive(Copy, Clone, PartialEq, Eq, Hash)]
enum BinOp {
    And,
    Or,
    Xor,
}

/// Owner of all nodes, operation caches, and the variable registry.
pub struct Manager {
    nodes: Vec<Node>,
    unique: FxHashMap<(u32, Bdd, Bdd), Bdd>,
    binop: FxHashMap<(BinOp, Bdd, Bdd), Bdd>,
    ite: FxHashMap<(Bdd, Bdd, Bdd), Bdd>,
    quant: FxHashMap<(Bdd, Bdd), Bdd>,
    relprod: FxHashMap<(Bdd, Bdd, Bdd), Bdd>,
    names: Vec<String>,
    enums: Vec<EnumVar>,
    cache_limit: usize,
}

impl Default for Manager {
    fn default() -> Self {
        Self::new()
    }
}

impl Manager {
    pub fn new() -> Manager {
        let term = Node {
            var: TERMINAL,
            lo: Bdd::FALSE,
            hi: Bdd::FALSE,
        };
        Manager {
            nodes: vec![term, term],
            unique: FxHashMap::default(),
            binop: FxHashMap::default(),
            ite: FxHashMap::default(),
            quant: FxHashMap::default(),
            relprod: FxHashMap::default(),
            names: Vec::new(),
            enums: Vec::new(),
            cache_limit: 1 << 22,
        }
    }

    // ---- registry ---------------------------------------------------------

    /// Appends a Boolean variable at the bottom of the current order.
    pub fn new_var(&mut self, name: impl Into<String>) -> Var {
        let v = Var(self.names.len() as u32);
        self.names.push(name.into());
        v
    }

    /// Appends a finite-domain variable with values `0..card`.
    pub fn new_enum(&mut self, name: impl Into<String>, card: u32) -> EnumVar {
        assert!(card >= 1, "enum cardinality must be positive");
        let name = name.into();
        let width = enum_width(card);
        let bits = (0..width)
            .map(|i| self.new_var(format!("{name}#{i}")))
            .collect();
        let e = EnumVar { name, card, bits };
        self.enums.push(e.clone());
        e
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var_name(&self, v: Var) -> &str {
        &self.names[v.index()]
    }

    pub fn find_var(&self, name: &str) -> Option<Var> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Var(i as u32))
    }

    pub fn enums(&self) -> &[EnumVar] {
        &self.enums
    }

    // ---- node table -------------------------------------------------------

    /// Total number of allocated nodes, terminals included.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn clear_caches(&mut self) {
        self.binop.clear();
        self.ite.clear();
        self.quant.clear();
        self.relprod.clear();
    }

    fn trim_caches(&mut self) {
        let total = self.binop.len() + self.ite.len() + self.quant.len() + self.relprod.len();
        if total > self.cache_limit {
            self.clear_caches();
        }
    }

    fn mk(&mut self, var: u32, lo: Bdd, hi: Bdd) -> Bdd {
        if lo == hi {
            return lo;
        }
        if let Some(&b) = self.unique.get(&(var, lo, hi)) {
            return b;
        }
        let b = Bdd(self.nodes.len() as u32);
        self.nodes.push(Node { var, lo, hi });
        self.unique.insert((var, lo, hi), b);
        b
    }

    fn top(&self, f: Bdd) -> u32 {
        self.nodes[f.0 as usize].var
    }

    /// Top variable of a non-terminal diagram.
    pub fn top_var(&self, f: Bdd) -> Option<Var> {
        let v = self.top(f);
        (v != TERMINAL).then_some(Var(v))
    }

    /// Low and high children of a non-terminal diagram.
    pub fn children(&self, f: Bdd) -> (Bdd, Bdd) {
        let n = self.nodes[f.0 as usize];
        (n.lo, n.hi)
    }

    /// Rebuilds `f` of manager `src` here, renaming each variable by `map`.
    pub fn transfer(&mut self, src: &Manager, f: Bdd, map: &dyn Fn(Var) -> Var) -> Bdd {
        let mut memo: FxHashMap<Bdd, Bdd> = FxHashMap::default();
        self.transfer_rec(src, f, map, &mut memo)
    }

    fn transfer_rec(&mut self, src: &Manager, f: Bdd, map: &dyn Fn(Var) -> Var, memo: &mut FxHashMap<Bdd, Bdd>) -> Bdd {
        let Some(v) = src.top_var(f) else { return f };
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let (lo, hi) = src.children(f);
        let lo = self.transfer_rec(src, lo, map, memo);
        let hi = self.transfer_rec(src, hi, map, memo);
        let x = self.var(map(v));
        let r = self.ite(x, hi, lo);
        memo.insert(f, r);
        r
    }

    fn cof(&self, f: Bdd, var: u32) -> (Bdd, Bdd) {
        let n = self.nodes[f.0 as usize];
        if n.var == var {
            (n.lo, n.hi)
        } else {
            (f, f)
        }
    }

    // ---- constructors -----------------------------------------------------

    pub fn var(&mut self, v: Var) -> Bdd {
        assert!(v.index() < self.names.len(), "unknown variable {v:?}");
        self.mk(v.0, Bdd::FALSE, Bdd::TRUE)
    }

    pub fn nvar(&mut self, v: Var) -> Bdd {
        assert!(v.index() < self.names.len(), "unknown variable {v:?}");
        self.mk(v.0, Bdd::TRUE, Bdd::FALSE)
    }

    pub fn lit(&mut self, v: Var, positive: bool) -> Bdd {
        if positive {
            self.var(v)
        } else {
            self.nvar(v)
        }
    }

    /// Conjunction of the given literals.
    pub fn cube(&mut self, lits: &[(Var, bool)]) -> Bdd {
        let mut sorted = lits.to_vec();
        sorted.sort();
        let mut acc = Bdd::TRUE;
        for &(v, pos) in sorted.iter().rev() {
            acc = if pos {
                self.mk(v.0, Bdd::FALSE, acc)
            } else {
                self.mk(v.0, acc, Bdd::FALSE)
            };
        }
        acc
    }

    /// Positive cube over `vars`, the quantification set format.
    pub fn var_set(&mut self, vars: &[Var]) -> Bdd {
        let lits: Vec<_> = vars.iter().map(|&v| (v, true)).collect();
        self.cube(&lits)
    }

    // ---- connectives ------------------------------------------------------

    pub fn not(&mut self, f: Bdd) -> Bdd {
        self.apply(BinOp::Xor, f, Bdd::TRUE)
    }

    pub fn and(&mut self, f: Bdd, g: Bdd) -> Bdd {
        self.apply(BinOp::And, f, g)
    }

    pub fn or(&mut self, f: Bdd, g: Bdd) -> Bdd {
        self.apply(BinOp::Or, f, g)
    }

    pub fn xor(&mut self, f: Bdd, g: Bdd) -> Bdd {
        self.apply(BinOp::Xor, f, g)
    }

    pub fn implies(&mut self, f: Bdd, g: Bdd) -> Bdd {
        let nf = self.not(f);
        self.or(nf, g)
    }

    pub fn equiv(&mut self, f: Bdd, g: Bdd) -> Bdd {
        let x = self.xor(f, g);
        self.not(x)
    }

    pub fn and_all(&mut self, fs: impl IntoIterator<Item = Bdd>) -> Bdd {
        let mut acc = Bdd::TRUE;
        for f in fs {
            acc = self.and(acc, f);
            if acc.is_false() {
                break;
            }
        }
        acc
    }

    pub fn or_all(&mut self, fs: impl IntoIterator<Item = Bdd>) -> Bdd {
        let mut acc = Bdd::FALSE;
        for f in fs {
            acc = self.or(acc, f);
            if acc.is_true() {
                break;
            }
        }
        acc
    }

    /// `f ⇒ g` holds for every valuation.
    pub fn entails(&mut self, f: Bdd, g: Bdd) -> bool {
        self.implies(f, g).is_true()
    }

    fn apply(&mut self, op: BinOp, f: Bdd, g: Bdd) -> Bdd {
        match op {
            BinOp::And => {
                if f.is_false() || g.is_false() {
                    return Bdd::FALSE;
                }
                if f.is_true() || f == g {
                    return g;
                }
                if g.is_true() {
                    return f;
                }
            }
            BinOp::Or => {
                if f.is_true() || g.is_true() {
                    return Bdd::TRUE;
                }
                if f.is_false() || f == g {
                    return g;
                }
                if g.is_false() {
                    return f;
                }
            }
            BinOp::Xor => {
                if f == g {
                    return Bdd::FALSE;
                }
                if f.is_false() {
                    return g;
                }
                if g.is_false() {
                    return f;
                }
                if f.is_true() && g.is_true() {
                    return Bdd::FALSE;
                }
            }
        }
        let (f, g) = if f <= g { (f, g) } else { (g, f) };
        if let Some(&r) = self.binop.get(&(op, f, g)) {
            return r;
        }
        let v = self.top(f).min(self.top(g));
        let (f0, f1) = self.cof(f, v);
        let (g0, g1) = self.cof(g, v);
        let lo = self.apply(op, f0, g0);
        let hi = self.apply(op, f1, g1);
        let r = self.mk(v, lo, hi);
        self.trim_caches();
        self.binop.insert((op, f, g), r);
        r
    }

    /// `if f then g else h`.
    pub fn ite(&mut self, f: Bdd, g: Bdd, h: Bdd) -> Bdd {
        if f.is_true() {
            return g;
        }
        if f.is_false() {
            return h;
        }
        if g == h {
            return g;
        }
        if g.is_true() && h.is_false() {
            return f;
        }
        if g.is_false() && h.is_true() {
            return self.not(f);
        }
        if g.is_true() {
            return self.or(f, h);
        }
        if h.is_false() {
            return self.and(f, g);
        }
        if let Some(&r) = self.ite.get(&(f, g, h)) {
            return r;
        }
        let v = self.top(f).min(self.top(g)).min(self.top(h));
        let (f0, f1) = self.cof(f, v);
        let (g0, g1) = self.cof(g, v);
        let (h0, h1) = self.cof(h, v);
        let lo = self.ite(f0, g0, h0);
        let hi = self.ite(f1, g1, h1);
        let r = self.mk(v, lo, hi);
        self.trim_caches();
        self.ite.insert((f, g, h), r);
        r
    }

    // ---- quantification ---------------------------------------------------

    /// `∃ vars. f`, with `vars` given as a positive cube from [`Manager::var_set`].
    pub fn exists_set(&mut self, f: Bdd, vars: Bdd) -> Bdd {
        if f.is_const() || vars.is_true() {
            return f;
        }
        let fv = self.top(f);
        let mut vs = vars;
        while !vs.is_true() && self.top(vs) < fv {
            vs = self.nodes[vs.0 as usize].hi;
        }
        if vs.is_true() {
            return f;
        }
        if let Some(&r) = self.quant.get(&(f, vs)) {
            return r;
        }
        let n = self.nodes[f.0 as usize];
        let r = if self.top(vs) == fv {
            let rest = self.nodes[vs.0 as usize].hi;
            let lo = self.exists_set(n.lo, rest);
            if lo.is_true() {
                Bdd::TRUE
            } else {
                let hi = self.exists_set(n.hi, rest);
                self.or(lo, hi)
            }
        } else {
            let lo = self.exists_set(n.lo, vs);
            let hi = self.exists_set(n.hi, vs);
            self.mk(fv, lo, hi)
        };
        self.trim_caches();
        self.quant.insert((f, vs), r);
        r
    }

    pub fn exists(&mut self, f: Bdd, vars: &[Var]) -> Bdd {
        let set = self.var_set(vars);
        self.exists_set(f, set)
    }

    pub fn forall(&mut self, f: Bdd, vars: &[Var]) -> Bdd {
        let nf = self.not(f);
        let e = self.exists(nf, vars);
        self.not(e)
    }

    /// `∃ vars. f ∧ g` without building the conjunction first.
    pub fn and_exists_set(&mut self, f: Bdd, g: Bdd, vars: Bdd) -> Bdd {
        if f.is_false() || g.is_false() {
            return Bdd::FALSE;
        }
        if f.is_true() {
            return self.exists_set(g, vars);
        }
        if g.is_true() || f == g {
            return self.exists_set(f, vars);
        }
        let (f, g) = if f <= g { (f, g) } else { (g, f) };
        let v = self.top(f).min(self.top(g));
        let mut vs = vars;
        while !vs.is_true() && self.top(vs) < v {
            vs = self.nodes[vs.0 as usize].hi;
        }
        if vs.is_true() {
            return self.and(f, g);
        }
        if let Some(&r) = self.relprod.get(&(f, g, vs)) {
            return r;
        }
        let (f0, f1) = self.cof(f, v);
        let (g0, g1) = self.cof(g, v);
        let r = if self.top(vs) == v {
            let rest = self.nodes[vs.0 as usize].hi;
            let lo = self.and_exists_set(f0, g0, rest);
            if lo.is_true() {
                Bdd::TRUE
            } else {
                let hi = self.and_exists_set(f1, g1, rest);
                self.or(lo, hi)
            }
        } else {
            let lo = self.and_exists_set(f0, g0, vs);
            let hi = self.and_exists_set(f1, g1, vs);
            self.mk(v, lo, hi)
        };
        self.trim_caches();
        self.relprod.insert((f, g, vs), r);
        r
    }

    // ---- substitution and cofactors ---------------------------------------

    /// Simultaneous substitution: every variable `v` with `map[v] = Some(g)`
    /// is replaced by `g`, all evaluated against the original valuation.
    pub fn compose(&mut self, f: Bdd, map: &[Option<Bdd>]) -> Bdd {
        let Some(maxv) = map.iter().rposition(|m| m.is_some()) else {
            return f;
        };
        let mut memo = FxHashMap::default();
        self.compose_rec(f, map, maxv as u32, &mut memo)
    }

    fn compose_rec(
        &mut self,
        f: Bdd,
        map: &[Option<Bdd>],
        maxv: u32,
        memo: &mut FxHashMap<Bdd, Bdd>,
    ) -> Bdd {
        if f.is_const() {
            return f;
        }
        let n = self.nodes[f.0 as usize];
        if n.var > maxv {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let lo = self.compose_rec(n.lo, map, maxv, memo);
        let hi = self.compose_rec(n.hi, map, maxv, memo);
        let r = match map.get(n.var as usize).copied().flatten() {
            Some(g) => self.ite(g, hi, lo),
            None => {
                let x = self.mk(n.var, Bdd::FALSE, Bdd::TRUE);
                self.ite(x, hi, lo)
            }
        };
        memo.insert(f, r);
        r
    }

    /// Partial evaluation of `f` under the literal bindings.
    pub fn restrict(&mut self, f: Bdd, binding: &[(Var, bool)]) -> Bdd {
        if binding.is_empty() {
            return f;
        }
        let mut table: Vec<Option<bool>> = vec![None; self.names.len()];
        for &(v, b) in binding {
            table[v.index()] = Some(b);
        }
        let mut memo = FxHashMap::default();
        self.restrict_rec(f, &table, &mut memo)
    }

    fn restrict_rec(
        &mut self,
        f: Bdd,
        table: &[Option<bool>],
        memo: &mut FxHashMap<Bdd, Bdd>,
    ) -> Bdd {
        if f.is_const() {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let n = self.nodes[f.0 as usize];
        let r = match table[n.var as usize] {
            Some(false) => self.restrict_rec(n.lo, table, memo),
            Some(true) => self.restrict_rec(n.hi, table, memo),
            None => {
                let lo = self.restrict_rec(n.lo, table, memo);
                let hi = self.restrict_rec(n.hi, table, memo);
                self.mk(n.var, lo, hi)
            }
        };
        memo.insert(f, r);
        r
    }

    /// Reads a conjunction of literals back out of `g`; `None` unless `g` is
    /// a non-false cube.
    pub fn as_cube(&self, g: Bdd) -> Option<Cube> {
        if g.is_false() {
            return None;
        }
        let mut out = Vec::new();
        let mut cur = g;
        while !cur.is_true() {
            let n = self.nodes[cur.0 as usize];
            if n.lo.is_false() {
                out.push((Var(n.var), true));
                cur = n.hi;
            } else if n.hi.is_false() {
                out.push((Var(n.var), false));
                cur = n.lo;
            } else {
                return None;
            }
        }
        Some(out)
    }

    /// Cofactor of `f` by the cube `g`: the result agrees with `f` wherever
    /// `g` holds and mentions no variable bound by `g`.
    pub fn cofactor(&mut self, f: Bdd, g: Bdd) -> Result<Bdd, NotACube> {
        let cube = self.as_cube(g).ok_or(NotACube)?;
        Ok(self.restrict(f, &cube))
    }

    // ---- inspection -------------------------------------------------------

    pub fn classify(&self, f: Bdd) -> Classification {
        if f.is_true() {
            Classification::Tautology
        } else if f.is_false() {
            Classification::Unsatisfiable
        } else {
            Classification::Contingent
        }
    }

    pub fn eval(&self, f: Bdd, val: impl Fn(Var) -> bool) -> bool {
        let mut cur = f;
        while !cur.is_const() {
            let n = self.nodes[cur.0 as usize];
            cur = if val(Var(n.var)) { n.hi } else { n.lo };
        }
        cur.is_true()
    }

    /// Variables `f` depends on, in order.
    pub fn support(&self, f: Bdd) -> Vec<Var> {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut vars = std::collections::BTreeSet::new();
        let mut stack = vec![f];
        while let Some(g) = stack.pop() {
            if g.is_const() || !seen.insert(g) {
                continue;
            }
            let n = self.nodes[g.0 as usize];
            vars.insert(Var(n.var));
            stack.push(n.lo);
            stack.push(n.hi);
        }
        vars.into_iter().collect()
    }

    /// Number of internal nodes reachable from `f`.
    pub fn size(&self, f: Bdd) -> usize {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut stack = vec![f];
        while let Some(g) = stack.pop() {
            if g.is_const() || !seen.insert(g) {
                continue;
            }
            let n = self.nodes[g.0 as usize];
            stack.push(n.lo);
            stack.push(n.hi);
        }
        seen.len()
    }

    /// Some satisfying partial assignment, or `None` for false.
    pub fn sat_one(&self, f: Bdd) -> Option<Cube> {
        if f.is_false() {
            return None;
        }
        let mut out = Vec::new();
        let mut cur = f;
        while !cur.is_true() {
            let n = self.nodes[cur.0 as usize];
            if n.lo.is_false() {
                out.push((Var(n.var), true));
                cur = n.hi;
            } else {
                out.push((Var(n.var), false));
                cur = n.lo;
            }
        }
        Some(out)
    }

    /// Irredundant sum-of-products cover of `f` (Minato-Morreale).
    pub fn isop(&mut self, f: Bdd) -> Vec<Cube> {
        let mut memo = FxHashMap::default();
        let (_, cubes) = self.isop_rec(f, f, &mut memo);
        let mut cubes = cubes;
        for c in &mut cubes {
            c.sort();
        }
        cubes.sort();
        cubes
    }

    fn isop_rec(
        &mut self,
        lower: Bdd,
        upper: Bdd,
        memo: &mut FxHashMap<(Bdd, Bdd), (Bdd, Vec<Cube>)>,
    ) -> (Bdd, Vec<Cube>) {
        if lower.is_false() {
            return (Bdd::FALSE, Vec::new());
        }
        if upper.is_true() {
            return (Bdd::TRUE, vec![Vec::new()]);
        }
        if let Some(r) = memo.get(&(lower, upper)) {
            return r.clone();
        }
        let v = self.top(lower).min(self.top(upper));
        let (l0, l1) = self.cof(lower, v);
        let (u0, u1) = self.cof(upper, v);
        let nu1 = self.not(u1);
        let nu0 = self.not(u0);
        let a0 = self.and(l0, nu1);
        let (r0, c0) = self.isop_rec(a0, u0, memo);
        let a1 = self.and(l1, nu0);
        let (r1, c1) = self.isop_rec(a1, u1, memo);
        let nr0 = self.not(r0);
        let nr1 = self.not(r1);
        let d0 = self.and(l0, nr0);
        let d1 = self.and(l1, nr1);
        let ld = self.or(d0, d1);
        let ud = self.and(u0, u1);
        let (rd, cd) = self.isop_rec(ld, ud, memo);
        let x = self.mk(v, Bdd::FALSE, Bdd::TRUE);
        let nx = self.mk(v, Bdd::TRUE, Bdd::FALSE);
        let t0 = self.and(nx, r0);
        let t1 = self.and(x, r1);
        let t = self.or(t0, t1);
        let r = self.or(t, rd);
        let mut cubes = Vec::with_capacity(c0.len() + c1.len() + cd.len());
        for mut c in c0 {
            c.push((Var(v), false));
            cubes.push(c);
        }
        for mut c in c1 {
            c.push((Var(v), true));
            cubes.push(c);
        }
        cubes.extend(cd);
        memo.insert((lower, upper), (r, cubes.clone()));
        (r, cubes)
    }

    /// Stable sum-of-products text using registered variable names.
    pub fn to_sop(&mut self, f: Bdd) -> String {
        if f.is_true() {
            return "true".into();
        }
        if f.is_false() {
            return "false".into();
        }
        let cubes = self.isop(f);
        cubes
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&(v, pos)| {
                        if pos {
                            self.names[v.index()].clone()
                        } else {
                            format!("!{}", self.names[v.index()])
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" & ")
            })
            .collect::<Vec<_>>()
            .join(" | ")
    }

    // ---- finite-domain helpers --------------------------------------------

    /// `e = k`.
    pub fn enum_eq(&mut self, e: &EnumVar, k: u32) -> Bdd {
        assert!(k < e.card, "value {k} out of range for {}", e.name);
        let lits = enum_bits(e, k);
        self.cube(&lits)
    }

    /// `e ∈ ks`.
    pub fn enum_in(&mut self, e: &EnumVar, ks: &[u32]) -> Bdd {
        let mut acc = Bdd::FALSE;
        for &k in ks {
            let c = self.enum_eq(e, k);
            acc = self.or(acc, c);
        }
        acc
    }

    /// Bit literals encoding `e = k`.
    pub fn enum_binding(&self, e: &EnumVar, k: u32) -> Cube {
        enum_bits(e, k)
    }
}

/// Returned by [`Manager::cofactor`] when the second argument is not a cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotACube;

impl std::fmt::Display for NotACube {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("cofactor argument is not a conjunction of literals")
    }
}

impl std::error::Error for NotACube {}

fn enum_width(card: u32) -> usize {
    let mut w = 1;
    while (1u64 << w) < card as u64 {
        w += 1;
    }
    w
}

fn enum_bits(e: &EnumVar, k: u32) -> Cube {
    let w = e.bits.len();
    e.bits
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, (k >> (w - 1 - i)) & 1 == 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(m: &mut Manager, n: usize) -> Vec<Var> {
        (0..n).map(|i| m.new_var(format!("x{i}"))).collect()
    }

    #[test]
    fn ite_identity_and_join_with_bottom() {
        let mut m = Manager::new();
        let v = vars(&mut m, 2);
        let a = m.var(v[0]);
        let b = m.var(v[1]);
        assert_eq!(m.ite(Bdd::TRUE, a, b), a);
        assert_eq!(m.or(a, Bdd::FALSE), a);
    }

    #[test]
    fn conditional_level_is_low_iff_not_both() {
        // (if x then i else bottom) = bottom  is  !(x & i)
        let mut m = Manager::new();
        let v = vars(&mut m, 2);
        let x = m.var(v[0]);
        let i = m.var(v[1]);
        let cond = m.ite(x, i, Bdd::FALSE);
        let low = m.not(cond);
        let both = m.and(x, i);
        let expect = m.not(both);
        assert_eq!(low, expect);
    }

    #[test]
    fn exists_drops_input() {
        let mut m = Manager::new();
        let v = vars(&mut m, 3);
        let w = m.var(v[0]);
        let a = m.var(v[1]);
        let b = m.var(v[2]);
        let g = m.and(w, a);
        assert_eq!(m.exists(g, &[v[0]]), a);
        let nw = m.not(w);
        let t = m.and(nw, b);
        let f = m.or(g, t);
        let ab = m.or(a, b);
        assert_eq!(m.exists(f, &[v[0]]), ab);
        assert_eq!(m.exists(Bdd::FALSE, &[v[0]]), Bdd::FALSE);
    }

    #[test]
    fn and_exists_matches_two_step() {
        let mut m = Manager::new();
        let v = vars(&mut m, 4);
        let x: Vec<Bdd> = v.iter().map(|&u| m.var(u)).collect();
        let f = m.xor(x[0], x[2]);
        let g0 = m.or(x[1], x[3]);
        let g = m.and(g0, x[0]);
        let set = m.var_set(&[v[0], v[3]]);
        let direct = m.and_exists_set(f, g, set);
        let conj = m.and(f, g);
        let two = m.exists_set(conj, set);
        assert_eq!(direct, two);
    }

    #[test]
    fn swap_is_simultaneous() {
        let mut m = Manager::new();
        let v = vars(&mut m, 2);
        let h = m.var(v[0]);
        let hp = m.var(v[1]);
        let nhp = m.not(hp);
        let f = m.and(h, nhp);
        let mut map = vec![None; 2];
        map[0] = Some(hp);
        map[1] = Some(h);
        let g = m.compose(f, &map);
        let nh = m.not(h);
        let expect = m.and(hp, nh);
        assert_eq!(g, expect);
    }

    #[test]
    fn cofactor_by_cube() {
        let mut m = Manager::new();
        let v = vars(&mut m, 2);
        let a = m.var(v[0]);
        let b = m.var(v[1]);
        let f = m.and(a, b);
        assert_eq!(m.cofactor(f, b), Ok(a));
        assert_eq!(m.cofactor(f, Bdd::TRUE), Ok(f));
        let ab = m.or(a, b);
        assert_eq!(m.cofactor(f, ab), Err(NotACube));
    }

    #[test]
    fn classify_constants() {
        let mut m = Manager::new();
        let v = vars(&mut m, 1);
        let a = m.var(v[0]);
        assert_eq!(m.classify(Bdd::TRUE), Classification::Tautology);
        assert_eq!(m.classify(Bdd::FALSE), Classification::Unsatisfiable);
        assert_eq!(m.classify(a), Classification::Contingent);
    }

    #[test]
    fn isop_finds_prime_cubes() {
        let mut m = Manager::new();
        let v = vars(&mut m, 2);
        let a = m.var(v[0]);
        let b = m.var(v[1]);
        let ab = m.and(a, b);
        let f = m.not(ab);
        let cubes = m.isop(f);
        assert_eq!(cubes, vec![vec![(v[0], false)], vec![(v[1], false)]]);
        assert_eq!(m.to_sop(f), "!x0 | !x1");
    }

    #[test]
    fn enum_encoding_roundtrip() {
        let mut m = Manager::new();
        let e = m.new_enum("hr", 3);
        assert_eq!(e.bits.len(), 2);
        let eqs: Vec<Bdd> = (0..3).map(|k| m.enum_eq(&e, k)).collect();
        for i in 0..3 {
            for j in 0..3 {
                let both = m.and(eqs[i], eqs[j]);
                assert_eq!(both.is_false(), i != j);
            }
        }
        let some = m.enum_in(&e, &[0, 2]);
        let expect = m.or(eqs[0], eqs[2]);
        assert_eq!(some, expect);
    }

    #[test]
    fn transfer_renames_across_managers() {
        let mut src = Manager::new();
        let v = vars(&mut src, 3);
        let (a, c) = (src.var(v[0]), src.var(v[2]));
        let f = src.xor(a, c);
        let mut dst = Manager::new();
        let w = vars(&mut dst, 3);
        // Reverse the order so the rebuilt diagram needs reordering.
        let g = dst.transfer(&src, f, &|x| w[2 - x.index()]);
        let (x0, x2) = (dst.var(w[0]), dst.var(w[2]));
        assert_eq!(g, dst.xor(x2, x0));
        assert_eq!(dst.transfer(&src, Bdd::TRUE, &|x| x), Bdd::TRUE);
    }
}
