//! Control-flow graph, postdominators and control-dependence regions.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::{dominators, tarjan_scc};
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::SirError;
use crate::typed::{TStmt, TypedMethod};

/// Region id reserved for "no region".
pub const P_BOTTOM: usize = 0;

/// Statement-level CFG. Nodes `0..len` are statements, `len` is the exit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    pub len: usize,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    branches: Vec<bool>,
    /// Sources of edges to the exit added so every node can reach it.
    pub virtual_edges: Vec<usize>,
    pub warnings: Vec<String>,
}

impl Cfg {
    pub fn exit(&self) -> usize {
        self.len
    }

    pub fn entry(&self) -> usize {
        0
    }

    pub fn node_count(&self) -> usize {
        self.len + 1
    }

    /// Real successors; a branch lists its taken target first.
    pub fn succ(&self, n: usize) -> &[usize] {
        &self.succ[n]
    }

    pub fn pred(&self, n: usize) -> &[usize] {
        &self.pred[n]
    }

    pub fn is_branch(&self, n: usize) -> bool {
        n < self.len && self.branches[n]
    }

    /// Builds the graph from explicit successor lists, for tests and tools.
    pub fn from_successors(succ: Vec<Vec<usize>>, branches: Vec<bool>) -> Cfg {
        let len = succ.len();
        let mut all = succ;
        all.push(Vec::new());
        let mut pred = vec![Vec::new(); len + 1];
        for (n, ss) in all.iter().enumerate() {
            for &s in ss {
                if !pred[s].contains(&n) {
                    pred[s].push(n);
                }
            }
        }
        let mut g = Cfg {
            len,
            succ: all,
            pred,
            branches,
            virtual_edges: Vec::new(),
            warnings: Vec::new(),
        };
        g.add_virtual_exits();
        g.warn_unreachable();
        g
    }

    fn reaches_exit(&self) -> Vec<bool> {
        let mut ok = vec![false; self.node_count()];
        let mut stack = vec![self.exit()];
        ok[self.exit()] = true;
        while let Some(n) = stack.pop() {
            for &p in &self.pred[n] {
                if !ok[p] {
                    ok[p] = true;
                    stack.push(p);
                }
            }
            if n == self.exit() {
                for &v in &self.virtual_edges {
                    if !ok[v] {
                        ok[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        ok
    }

    fn add_virtual_exits(&mut self) {
        loop {
            let ok = self.reaches_exit();
            let stuck: Vec<usize> = (0..self.len).filter(|&n| !ok[n]).collect();
            if stuck.is_empty() {
                return;
            }
            let mut g = DiGraph::<(), ()>::new();
            let idx: BTreeMap<usize, NodeIndex> = stuck.iter().map(|&n| (n, g.add_node(()))).collect();
            for &n in &stuck {
                for s in &self.succ[n] {
                    if let Some(&t) = idx.get(s) {
                        g.add_edge(idx[&n], t, ());
                    }
                }
            }
            let back: BTreeMap<NodeIndex, usize> = idx.iter().map(|(&n, &i)| (i, n)).collect();
            // Every successor of a stuck node is stuck too, so some component
            // has no edges leaving it.
            let mut bottoms: Vec<usize> = tarjan_scc(&g)
                .into_iter()
                .filter(|comp| {
                    let set: BTreeSet<NodeIndex> = comp.iter().copied().collect();
                    comp.iter().all(|&c| g.neighbors(c).all(|t| set.contains(&t)))
                })
                .map(|comp| comp.iter().map(|c| back[c]).min().expect("non-empty component"))
                .collect();
            bottoms.sort_unstable();
            for n in bottoms {
                self.warnings.push(format!(
                    "statement {n} cannot reach the method exit; treating it as exiting for postdominance"
                ));
                self.virtual_edges.push(n);
            }
        }
    }

    fn warn_unreachable(&mut self) {
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for &s in &self.succ[n] {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        for n in 0..self.len {
            if !seen[n] {
                self.warnings.push(format!("statement {n} is unreachable"));
            }
        }
    }

    /// Nodes reachable from the entry over real edges.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for &s in &self.succ[n] {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        seen
    }
}

/// Wires statements to their successors and the exit.
pub fn build_cfg(m: &TypedMethod) -> Cfg {
    let len = m.body.len();
    let mut succ = Vec::with_capacity(len);
    let mut branches = Vec::with_capacity(len);
    for (i, s) in m.body.iter().enumerate() {
        match s {
            TStmt::Goto { target } => {
                succ.push(vec![*target]);
                branches.push(false);
            }
            TStmt::If { target, .. } => {
                succ.push(vec![*target, i + 1]);
                branches.push(true);
            }
            _ => {
                succ.push(vec![i + 1]);
                branches.push(false);
            }
        }
    }
    Cfg::from_successors(succ, branches)
}

/// Immediate postdominators; the exit is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PostDomTree {
    ipdom: Vec<Option<usize>>,
}

impl PostDomTree {
    pub fn ipdom(&self, n: usize) -> Option<usize> {
        self.ipdom[n]
    }

    /// `a` postdominates `b` (reflexively).
    pub fn postdominates(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(b);
        while let Some(c) = cur {
            if c == a {
                return true;
            }
            cur = self.ipdom[c];
        }
        false
    }
}

pub fn postdominator_tree(g: &Cfg) -> PostDomTree {
    let mut rev = DiGraph::<(), ()>::new();
    let nodes: Vec<NodeIndex> = (0..g.node_count()).map(|_| rev.add_node(())).collect();
    for n in 0..g.node_count() {
        for &s in g.succ(n) {
            rev.add_edge(nodes[s], nodes[n], ());
        }
    }
    for &v in &g.virtual_edges {
        rev.add_edge(nodes[g.exit()], nodes[v], ());
    }
    let doms = dominators::simple_fast(&rev, nodes[g.exit()]);
    let ipdom = (0..g.node_count())
        .map(|n| doms.immediate_dominator(nodes[n]).map(|d| d.index()))
        .collect();
    PostDomTree { ipdom }
}

/// A control-dependence region: the statements a branch decides between
/// before control rejoins at the junction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    /// 1-based; [`P_BOTTOM`] is never used by a region.
    pub id: usize,
    pub branch: usize,
    pub junction: usize,
    pub nodes: BTreeSet<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CdrTable {
    pub regions: Vec<Region>,
    pub junc_inv: BTreeMap<usize, Vec<usize>>,
    pub cdr_of: BTreeMap<usize, usize>,
}

impl CdrTable {
    pub fn region(&self, id: usize) -> &Region {
        &self.regions[id - 1]
    }

    pub fn is_junction(&self, n: usize) -> bool {
        self.junc_inv.contains_key(&n)
    }

    /// Regions whose junction is `n`.
    pub fn junction_of(&self, n: usize) -> &[usize] {
        self.junc_inv.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }
}

/// One region per branch, with the branch's immediate postdominator as its
/// junction. Rejects irreducible flow graphs.
pub fn compute_cdrs(method: &str, g: &Cfg, t: &PostDomTree) -> Result<CdrTable, SirError> {
    check_reducible(method, g)?;
    let mut table = CdrTable::default();
    for b in 0..g.len {
        if !g.is_branch(b) {
            continue;
        }
        let junction = t.ipdom(b).expect("branch has a postdominator");
        let mut nodes = BTreeSet::new();
        let mut stack: Vec<usize> = g.succ(b).iter().copied().filter(|&s| s != junction).collect();
        while let Some(n) = stack.pop() {
            if !nodes.insert(n) {
                continue;
            }
            for &s in g.succ(n) {
                if s != junction && !nodes.contains(&s) {
                    stack.push(s);
                }
            }
        }
        for &n in &nodes {
            if !t.postdominates(junction, n) {
                return Err(SirError::Irreducible {
                    method: method.to_string(),
                    node: n,
                });
            }
        }
        let id = table.regions.len() + 1;
        table.regions.push(Region {
            id,
            branch: b,
            junction,
            nodes,
        });
        table.junc_inv.entry(junction).or_default().push(id);
        table.cdr_of.insert(b, id);
    }
    Ok(table)
}

/// Every retreating edge of a depth-first walk must target a dominator of
/// its source.
fn check_reducible(method: &str, g: &Cfg) -> Result<(), SirError> {
    let mut fwd = DiGraph::<(), ()>::new();
    let nodes: Vec<NodeIndex> = (0..g.node_count()).map(|_| fwd.add_node(())).collect();
    for n in 0..g.node_count() {
        for &s in g.succ(n) {
            fwd.add_edge(nodes[n], nodes[s], ());
        }
    }
    let doms = dominators::simple_fast(&fwd, nodes[0]);
    let dominates = |a: usize, b: usize| {
        doms.dominators(nodes[b])
            .map(|mut it| it.any(|d| d.index() == a))
            .unwrap_or(false)
    };
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; g.node_count()];
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    state[0] = 1;
    while let Some(&mut (n, ref mut k)) = stack.last_mut() {
        if *k < g.succ(n).len() {
            let s = g.succ(n)[*k];
            *k += 1;
            match state[s] {
                0 => {
                    state[s] = 1;
                    stack.push((s, 0));
                }
                1 => {
                    if !dominates(s, n) {
                        return Err(SirError::Irreducible {
                            method: method.to_string(),
                            node: s,
                        });
                    }
                }
                _ => {}
            }
        } else {
            state[n] = 2;
            stack.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;
    use crate::typed::typecheck;

    fn method(src: &str) -> TypedMethod {
        typecheck(&parse_program(src).unwrap()).unwrap().methods.remove(0)
    }

    const F: &str = "method f(int v) { local int l; if (v > 0) goto L; l = 42; L: output low(l); }";

    #[test]
    fn linear_chain() {
        let m = method(
            "class A { int fi; } class B { A fa; }
             method m(A a, B b, int i) { local B r; r = new B; a.fi = i; r.fa = a; output low(b); }",
        );
        let g = build_cfg(&m);
        assert_eq!(g.node_count(), 5);
        for n in 0..4 {
            assert_eq!(g.succ(n), &[n + 1]);
        }
        let t = postdominator_tree(&g);
        for n in 0..4 {
            assert_eq!(t.ipdom(n), Some(n + 1));
        }
        assert!(compute_cdrs("m", &g, &t).unwrap().is_empty());
    }

    #[test]
    fn self_loop_gets_virtual_exit() {
        let m = method("method s() { L: goto L; }");
        let g = build_cfg(&m);
        assert_eq!(g.succ(0), &[0]);
        assert_eq!(g.virtual_edges, vec![0]);
        assert_eq!(g.warnings.len(), 1);
        let t = postdominator_tree(&g);
        assert_eq!(t.ipdom(0), Some(1));
    }

    #[test]
    fn diamond_region() {
        let m = method(F);
        let g = build_cfg(&m);
        assert_eq!(g.succ(0), &[2, 1]);
        let t = postdominator_tree(&g);
        assert!(t.postdominates(2, 0) && t.postdominates(2, 1));
        let c = compute_cdrs("f", &g, &t).unwrap();
        assert_eq!(c.len(), 1);
        let r = c.region(1);
        assert_eq!((r.branch, r.junction), (0, 2));
        assert_eq!(r.nodes, BTreeSet::from([1]));
        assert_eq!(c.junction_of(2), &[1]);
    }

    #[test]
    fn sequential_branches_are_disjoint() {
        let m = method(
            "method g(int a, int b) { local int x; if (a > 0) goto L1; x = 1; L1: if (b > 0) goto L2; x = 2; L2: output low(x); }",
        );
        let g = build_cfg(&m);
        let t = postdominator_tree(&g);
        let c = compute_cdrs("g", &g, &t).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.region(1).junction, 2);
        assert_eq!(c.region(2).junction, 4);
        assert!(c.region(1).nodes.is_disjoint(&c.region(2).nodes));
    }

    #[test]
    fn irreducible_mesh_is_rejected() {
        let m = method(
            "method i(bool c, bool d) { local int x; if (c) goto A; B: x = 1; A: x = 2; if (d) goto B; output low(x); }",
        );
        let g = build_cfg(&m);
        let t = postdominator_tree(&g);
        assert!(matches!(compute_cdrs("i", &g, &t), Err(SirError::Irreducible { .. })));
    }

    #[test]
    fn loop_region_contains_its_branch() {
        let m = method("method w(int n) { local int x; L: x = x + 1; if (x < n) goto L; output low(x); }");
        let g = build_cfg(&m);
        let t = postdominator_tree(&g);
        let c = compute_cdrs("w", &g, &t).unwrap();
        let r = c.region(1);
        assert_eq!(r.junction, 2);
        assert_eq!(r.nodes, BTreeSet::from([0, 1]));
    }
}
