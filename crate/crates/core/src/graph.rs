//! Directed, possibly cyclic causal graphs with observed and unobserved nodes.
//!
//! Separation is decided by enumerating simple paths, so it stays meaningful
//! on cyclic graphs. The enumeration is exponential; graphs larger than the
//! path cap (12 nodes by default) are refused rather than silently truncated.

use std::collections::HashMap;
use std::fmt;

use crate::error::{invalid, Error, Result};

pub const DEFAULT_PATH_CAP: usize = 12;
pub const MAX_NODES: usize = 64;

/// A set of node indices, stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn from_bits(bits: u64) -> Self {
        NodeSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn single(i: usize) -> Self {
        NodeSet(1 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn with(self, i: usize) -> Self {
        NodeSet(self.0 | 1 << i)
    }

    pub fn union(self, other: NodeSet) -> Self {
        NodeSet(self.0 | other.0)
    }

    pub fn intersect(self, other: NodeSet) -> Self {
        NodeSet(self.0 & other.0)
    }

    pub fn minus(self, other: NodeSet) -> Self {
        NodeSet(self.0 & !other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_disjoint(self, other: NodeSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    /// All subsets of `self`, the empty set first and `self` last.
    pub fn subsets(self) -> impl Iterator<Item = NodeSet> {
        let full = self.0;
        let mut cur = Some(0u64);
        std::iter::from_fn(move || {
            let s = cur?;
            cur = if s == full { None } else { Some((s.wrapping_sub(full)) & full) };
            Some(NodeSet(s))
        })
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = NodeSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeInfo {
    pub name: String,
    pub observed: bool,
}

/// Direction in which a path traverses an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// The edge points along the path: `u -> v`.
    Forward,
    /// The edge points against the path: `u <- v`.
    Backward,
}

/// A simple path. `steps[i]` describes the edge between `nodes[i]` and `nodes[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone)]
pub struct CausalGraph {
    nodes: Vec<NodeInfo>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    path_cap: usize,
}

impl Default for CausalGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for CausalGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.parents == other.parents
    }
}

impl CausalGraph {
    pub fn new() -> Self {
        CausalGraph {
            nodes: Vec::new(),
            index: HashMap::new(),
            parents: Vec::new(),
            children: Vec::new(),
            path_cap: DEFAULT_PATH_CAP,
        }
    }

    /// Builds a graph from `(name, observed)` pairs and `(from, to)` edges.
    pub fn from_parts(nodes: &[(&str, bool)], edges: &[(&str, &str)]) -> Result<Self> {
        let mut g = CausalGraph::new();
        for &(name, observed) in nodes {
            g.add_node(name, observed)?;
        }
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, name: &str, observed: bool) -> Result<usize> {
        if name.is_empty() || name.chars().any(|c| c.is_whitespace()) {
            return invalid(format!("bad node name `{name}`"));
        }
        if self.index.contains_key(name) {
            return invalid(format!("duplicate node `{name}`"));
        }
        if self.nodes.len() == MAX_NODES {
            return Err(Error::Resource(format!("more than {MAX_NODES} nodes")));
        }
        let i = self.nodes.len();
        self.nodes.push(NodeInfo { name: name.to_string(), observed });
        self.index.insert(name.to_string(), i);
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        Ok(i)
    }

    pub fn add_edge(&mut self, from: &str, to: &str) -> Result<()> {
        let (a, b) = (self.id(from)?, self.id(to)?);
        self.add_edge_ids(a, b)
    }

    pub fn add_edge_ids(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return invalid(format!("self-loop on `{}`", self.nodes[a].name));
        }
        if !self.children[a].contains(&b) {
            insert_sorted(&mut self.children[a], b);
            insert_sorted(&mut self.parents[b], a);
        }
        Ok(())
    }

    pub fn set_path_cap(&mut self, cap: usize) {
        self.path_cap = cap;
    }

    pub fn path_cap(&self) -> usize {
        self.path_cap
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &NodeInfo {
        &self.nodes[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i].name
    }

    pub fn nodes(&self) -> &[NodeInfo] {
        &self.nodes
    }

    pub fn id(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn set(&self, names: &[&str]) -> Result<NodeSet> {
        names.iter().map(|n| self.id(n)).collect()
    }

    pub fn names(&self, set: NodeSet) -> Vec<String> {
        set.iter().map(|i| self.nodes[i].name.clone()).collect()
    }

    /// Concatenated names, e.g. `BL` for `{B, L}`; `∅` for the empty set.
    pub fn label(&self, set: NodeSet) -> String {
        if set.is_empty() {
            return "∅".to_string();
        }
        let names = self.names(set);
        if names.iter().all(|n| n.chars().count() == 1) {
            names.concat()
        } else {
            names.join(",")
        }
    }

    pub fn is_observed(&self, i: usize) -> bool {
        self.nodes[i].observed
    }

    pub fn all(&self) -> NodeSet {
        (0..self.len()).collect()
    }

    pub fn observed(&self) -> NodeSet {
        (0..self.len()).filter(|&i| self.nodes[i].observed).collect()
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len()).flat_map(|a| self.children[a].iter().map(move |&b| (a, b))).collect()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.children[a].contains(&b)
    }

    pub fn is_parentless(&self, i: usize) -> bool {
        self.parents[i].is_empty()
    }

    /// Nodes reachable from `i` along at least one edge.
    pub fn descendants(&self, i: usize) -> NodeSet {
        self.reach(NodeSet::single(i), &self.children, false)
    }

    /// Nodes from which `i` is reachable along at least one edge.
    pub fn ancestors(&self, i: usize) -> NodeSet {
        self.reach(NodeSet::single(i), &self.parents, false)
    }

    /// `set` together with all of its ancestors.
    pub fn ancestral_closure(&self, set: NodeSet) -> NodeSet {
        self.reach(set, &self.parents, true)
    }

    fn reach(&self, start: NodeSet, adj: &[Vec<usize>], include_start: bool) -> NodeSet {
        let mut seen = NodeSet::EMPTY;
        let mut stack: Vec<usize> = start.iter().collect();
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen.contains(w) {
                    seen.insert(w);
                    stack.push(w);
                }
            }
        }
        if include_start {
            seen.union(start)
        } else {
            seen
        }
    }

    pub fn has_directed_path(&self, a: usize, b: usize) -> bool {
        self.descendants(a).contains(b)
    }

    pub fn has_cycle(&self) -> bool {
        (0..self.len()).any(|i| self.descendants(i).contains(i))
    }

    /// Strongly connected components in a topological order of the condensation.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let desc: Vec<NodeSet> = (0..n).map(|i| self.descendants(i).with(i)).collect();
        let mut assigned = NodeSet::EMPTY;
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            if assigned.contains(i) {
                continue;
            }
            let comp: Vec<usize> = (0..n).filter(|&j| desc[i].contains(j) && desc[j].contains(i)).collect();
            for &j in &comp {
                assigned.insert(j);
            }
            comps.push(comp);
        }
        // Kahn's algorithm over the condensation, smallest component first.
        let of: Vec<usize> = {
            let mut of = vec![0; n];
            for (c, comp) in comps.iter().enumerate() {
                for &j in comp {
                    of[j] = c;
                }
            }
            of
        };
        let m = comps.len();
        let mut indeg = vec![0usize; m];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (a, b) in self.edges() {
            let (ca, cb) = (of[a], of[b]);
            if ca != cb && !succ[ca].contains(&cb) {
                succ[ca].push(cb);
                indeg[cb] += 1;
            }
        }
        let mut ready: Vec<usize> = (0..m).filter(|&c| indeg[c] == 0).collect();
        let mut order = Vec::with_capacity(m);
        while let Some(pos) = ready.iter().enumerate().min_by_key(|(_, &c)| comps[c][0]).map(|(p, _)| p) {
            let c = ready.swap_remove(pos);
            order.push(c);
            for &d in &succ[c] {
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    ready.push(d);
                }
            }
        }
        order.into_iter().map(|c| comps[c].clone()).collect()
    }

    /// The graph with every edge into `set` removed.
    pub fn do_graph(&self, set: NodeSet) -> Result<CausalGraph> {
        for i in set.iter() {
            if i >= self.len() {
                return invalid(format!("node index {i} out of range"));
            }
            if !self.nodes[i].observed {
                return invalid(format!("cannot intervene on unobserved node `{}`", self.nodes[i].name));
            }
        }
        let mut g = self.clone();
        for b in set.iter() {
            for a in std::mem::take(&mut g.parents[b]) {
                g.children[a].retain(|&c| c != b);
            }
        }
        Ok(g)
    }

    fn check_cap(&self) -> Result<()> {
        if self.len() > self.path_cap {
            return Err(Error::Resource(format!(
                "path enumeration over {} nodes exceeds the cap of {}",
                self.len(),
                self.path_cap
            )));
        }
        Ok(())
    }

    /// Whether `path` is blocked by the conditioning set `z`.
    pub fn is_blocked(&self, path: &Path, z: NodeSet) -> Result<bool> {
        let (Some(&first), Some(&last)) = (path.nodes.first(), path.nodes.last()) else {
            return invalid("empty path");
        };
        if path.steps.len() + 1 != path.nodes.len() {
            return invalid("path steps do not match its nodes");
        }
        if z.contains(first) || z.contains(last) {
            return invalid("conditioning set contains a path endpoint");
        }
        for (k, w) in path.nodes.windows(2).enumerate() {
            let ok = match path.steps[k] {
                Step::Forward => self.has_edge(w[0], w[1]),
                Step::Backward => self.has_edge(w[1], w[0]),
            };
            if !ok {
                return invalid("path uses an edge not in the graph");
            }
        }
        let active = self.ancestral_closure(z);
        Ok((1..path.nodes.len().saturating_sub(1)).any(|k| {
            blocks(path.nodes[k], path.steps[k - 1], path.steps[k], z, active)
        }))
    }

    /// Every simple path between `a` and `b`, in a deterministic order.
    pub fn simple_paths(&self, a: usize, b: usize) -> Result<Vec<Path>> {
        self.check_cap()?;
        let mut out = Vec::new();
        let mut nodes = vec![a];
        let mut steps = Vec::new();
        self.collect_paths(b, NodeSet::single(a), &mut nodes, &mut steps, &mut out);
        Ok(out)
    }

    fn collect_paths(&self, b: usize, seen: NodeSet, nodes: &mut Vec<usize>, steps: &mut Vec<Step>, out: &mut Vec<Path>) {
        let cur = *nodes.last().unwrap();
        if cur == b && nodes.len() > 1 {
            out.push(Path { nodes: nodes.clone(), steps: steps.clone() });
            return;
        }
        for (next, step) in self.neighbours(cur) {
            if seen.contains(next) {
                continue;
            }
            nodes.push(next);
            steps.push(step);
            self.collect_paths(b, seen.with(next), nodes, steps, out);
            nodes.pop();
            steps.pop();
        }
    }

    fn neighbours(&self, v: usize) -> impl Iterator<Item = (usize, Step)> + '_ {
        self.children[v]
            .iter()
            .map(|&c| (c, Step::Forward))
            .chain(self.parents[v].iter().map(|&p| (p, Step::Backward)))
    }

    /// Whether every path between `x` and `y` is blocked by `z`.
    pub fn d_separated(&self, x: NodeSet, y: NodeSet, z: NodeSet) -> Result<bool> {
        if !x.is_disjoint(y) || !x.is_disjoint(z) || !y.is_disjoint(z) {
            return invalid("separation sets must be pairwise disjoint");
        }
        if !x.union(y).union(z).is_subset(self.all()) {
            return invalid("separation set refers to a node outside the graph");
        }
        self.check_cap()?;
        let active = self.ancestral_closure(z);
        for a in x.iter() {
            if self.connects(a, None, NodeSet::single(a), y, z, active) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn connects(&self, cur: usize, came: Option<Step>, seen: NodeSet, y: NodeSet, z: NodeSet, active: NodeSet) -> bool {
        for (next, step) in self.neighbours(cur) {
            if seen.contains(next) {
                continue;
            }
            if let Some(prev) = came {
                if blocks(cur, prev, step, z, active) {
                    continue;
                }
            }
            if y.contains(next) {
                return true;
            }
            if self.connects(next, Some(step), seen.with(next), y, z, active) {
                return true;
            }
        }
        false
    }
}

/// Whether interior node `w`, entered by `prev` and left by `next`, blocks a path.
/// `active` holds `z` together with its ancestors, i.e. the nodes with a descendant-or-self in `z`.
fn blocks(w: usize, prev: Step, next: Step, z: NodeSet, active: NodeSet) -> bool {
    let collider = prev == Step::Forward && next == Step::Backward;
    if collider {
        !active.contains(w)
    } else {
        z.contains(w)
    }
}

fn insert_sorted(v: &mut Vec<usize>, x: usize) {
    let pos = v.partition_point(|&y| y < x);
    v.insert(pos, x);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1a() -> CausalGraph {
        CausalGraph::from_parts(
            &[("A", true), ("B", true), ("L", false), ("X", true), ("Y", true)],
            &[("L", "X"), ("L", "Y"), ("A", "X"), ("B", "Y")],
        )
        .unwrap()
    }

    #[test]
    fn parents_are_sorted_by_index() {
        let g = fig1a();
        let x = g.id("X").unwrap();
        assert_eq!(g.names(g.parents(x).iter().copied().collect()), vec!["A", "L"]);
    }

    #[test]
    fn common_cause_graph_separations() {
        let g = fig1a();
        let s = |n: &[&str]| g.set(n).unwrap();
        assert!(g.d_separated(s(&["A"]), s(&["Y"]), NodeSet::EMPTY).unwrap());
        assert!(!g.d_separated(s(&["X"]), s(&["Y"]), NodeSet::EMPTY).unwrap());
        assert!(g.d_separated(s(&["X"]), s(&["Y"]), s(&["L"])).unwrap());
        // conditioning on the collider X opens A - X - L - Y
        assert!(!g.d_separated(s(&["A"]), s(&["Y"]), s(&["X"])).unwrap());
    }

    #[test]
    fn chain_and_collider() {
        let chain = CausalGraph::from_parts(&[("X", true), ("W", true), ("Y", true)], &[("X", "W"), ("W", "Y")]).unwrap();
        let s = |g: &CausalGraph, n: &[&str]| g.set(n).unwrap();
        assert!(!chain.d_separated(s(&chain, &["X"]), s(&chain, &["Y"]), NodeSet::EMPTY).unwrap());
        assert!(chain.d_separated(s(&chain, &["X"]), s(&chain, &["Y"]), s(&chain, &["W"])).unwrap());

        let coll = CausalGraph::from_parts(
            &[("X", true), ("W", true), ("Y", true), ("D", true)],
            &[("X", "W"), ("Y", "W"), ("W", "D")],
        )
        .unwrap();
        assert!(coll.d_separated(s(&coll, &["X"]), s(&coll, &["Y"]), NodeSet::EMPTY).unwrap());
        assert!(!coll.d_separated(s(&coll, &["X"]), s(&coll, &["Y"]), s(&coll, &["W"])).unwrap());
        assert!(!coll.d_separated(s(&coll, &["X"]), s(&coll, &["Y"]), s(&coll, &["D"])).unwrap());
    }

    #[test]
    fn do_graph_cuts_incoming_edges() {
        let g = CausalGraph::from_parts(&[("S", true), ("D", true), ("R", true)], &[("S", "D"), ("D", "R"), ("S", "R")])
            .unwrap();
        let h = g.do_graph(g.set(&["D"]).unwrap()).unwrap();
        let names: Vec<(String, String)> =
            h.edges().into_iter().map(|(a, b)| (h.name(a).to_string(), h.name(b).to_string())).collect();
        assert_eq!(names, vec![("S".into(), "R".into()), ("D".into(), "R".into())]);

        let cyc = CausalGraph::from_parts(&[("X", true), ("Y", true)], &[("X", "Y"), ("Y", "X")]).unwrap();
        let h = cyc.do_graph(cyc.set(&["X"]).unwrap()).unwrap();
        assert_eq!(h.edges(), vec![(0, 1)]);
        assert!(!h.has_cycle());
    }

    #[test]
    fn do_graph_rejects_hidden_nodes() {
        let g = fig1a();
        assert!(matches!(g.do_graph(g.set(&["L"]).unwrap()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn self_loops_and_unknown_names() {
        let mut g = CausalGraph::new();
        g.add_node("X", true).unwrap();
        assert!(g.add_edge("X", "X").is_err());
        assert!(matches!(g.add_edge("X", "Q"), Err(Error::UnknownNode(_))));
        assert!(g.add_node("X", true).is_err());
    }

    #[test]
    fn overlapping_sets_are_rejected() {
        let g = fig1a();
        let a = g.set(&["A"]).unwrap();
        assert!(g.d_separated(a, a, NodeSet::EMPTY).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let mut g = fig1a();
        g.set_path_cap(3);
        let s = |n: &[&str]| g.set(n).unwrap();
        assert!(matches!(g.d_separated(s(&["A"]), s(&["Y"]), NodeSet::EMPTY), Err(Error::Resource(_))));
    }

    #[test]
    fn paths_in_two_cycle_use_both_edges() {
        let g = CausalGraph::from_parts(&[("X", true), ("Y", true)], &[("X", "Y"), ("Y", "X")]).unwrap();
        let p = g.simple_paths(0, 1).unwrap();
        assert_eq!(p.len(), 2);
        assert!(!g.is_blocked(&p[0], NodeSet::EMPTY).unwrap());
    }

    #[test]
    fn is_blocked_rejects_endpoint_in_z() {
        let g = fig1a();
        let p = &g.simple_paths(g.id("A").unwrap(), g.id("Y").unwrap()).unwrap()[0];
        assert!(g.is_blocked(p, NodeSet::single(g.id("A").unwrap())).is_err());
        assert!(g.is_blocked(p, NodeSet::EMPTY).unwrap());
    }

    #[test]
    fn sccs_are_topological() {
        let g = CausalGraph::from_parts(
            &[("A", true), ("X", true), ("Y", true), ("Z", true)],
            &[("A", "X"), ("X", "Y"), ("Y", "X"), ("Y", "Z")],
        )
        .unwrap();
        assert_eq!(g.sccs(), vec![vec![0], vec![1, 2], vec![3]]);
    }

    #[test]
    fn subsets_enumerates_powerset() {
        let s: NodeSet = [1, 3, 4].into_iter().collect();
        let all: Vec<NodeSet> = s.subsets().collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], NodeSet::EMPTY);
        assert_eq!(*all.last().unwrap(), s);
    }
}
