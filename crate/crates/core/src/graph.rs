// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Simple undirected graphs with a canonical oriented-edge ordering, plus the
//! structural decompositions the spectral code relies on: 1-shell layers and
//! the 2-core, fundamental cycles, bipartiteness and the NB period.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::ops::Range;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("self-loop at node {node}")]
    SelfLoop { node: i64 },
    #[error("duplicate edge {u}-{v}")]
    DuplicateEdge { u: i64, v: i64 },
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("graph needs at least 2 nodes, found {nodes}")]
    TooFewNodes { nodes: usize },
    #[error("unknown node {node}")]
    UnknownNode { node: usize },
    #[error("graph has minimum degree {min_degree}; minimum degree 2 is required")]
    NotMinDegreeTwo { min_degree: usize },
    #[error("graph is a tree")]
    Tree,
    #[error("graph is the cycle graph C{length}; its NB period is {length}")]
    CycleGraph { length: usize },
}

/// One oriented edge `source -> target` and its position in the canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct OrientedEdge {
    pub source: usize,
    pub target: usize,
    pub index: usize,
}

impl fmt::Display for OrientedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.source, self.target)
    }
}

/// Immutable simple connected graph on nodes `0..n`.
///
/// Oriented edges are all ordered pairs `(u, v)` with `u ~ v`, sorted
/// lexicographically. Because neighbor lists are sorted, the out-edges of a
/// node form a contiguous block of indices starting at `offsets[u]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<i64>,
    adj: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    sources: Vec<usize>,
    targets: Vec<usize>,
    reverse: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph on nodes `0..=max id` from undirected pairs.
    pub fn from_edges(edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        let labels = (0..n as i64).collect();
        Self::with_labels(n, edges, labels)
    }

    fn with_labels(n: usize, edges: &[(usize, usize)], labels: Vec<i64>) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewNodes { nodes: n });
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop { node: labels[u] });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge { u: labels[u], v: labels[w[0]] });
            }
        }
        let components = count_components(&adj);
        if components != 1 {
            return Err(GraphError::Disconnected { components });
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut sources = Vec::new();
        let mut targets = Vec::new();
        offsets.push(0);
        for (u, list) in adj.iter().enumerate() {
            for &v in list {
                sources.push(u);
                targets.push(v);
            }
            offsets.push(sources.len());
        }
        let mut g = Graph {
            labels,
            adj,
            offsets,
            sources,
            targets,
            reverse: Vec::new(),
            edges: Vec::new(),
        };
        g.reverse = (0..g.sources.len())
            .map(|e| g.edge_index(g.targets[e], g.sources[e]).expect("symmetric adjacency"))
            .collect();
        g.edges = (0..g.sources.len())
            .filter(|&e| g.sources[e] < g.targets[e])
            .map(|e| (g.sources[e], g.targets[e]))
            .collect();
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Number of oriented edges, `2m`.
    pub fn dim(&self) -> usize {
        self.sources.len()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn is_md2(&self) -> bool {
        self.min_degree() >= 2
    }

    pub fn is_tree(&self) -> bool {
        self.m() + 1 == self.n()
    }

    /// True when the graph is a single cycle `C_n`.
    pub fn is_cycle(&self) -> bool {
        self.adj.iter().all(|a| a.len() == 2)
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Undirected edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Original integer label of each node, before densification.
    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn source(&self, e: usize) -> usize {
        self.sources[e]
    }

    pub fn target(&self, e: usize) -> usize {
        self.targets[e]
    }

    /// Index of the reversal of oriented edge `e`.
    pub fn reverse(&self, e: usize) -> usize {
        self.reverse[e]
    }

    pub fn oriented(&self, e: usize) -> OrientedEdge {
        OrientedEdge { source: self.sources[e], target: self.targets[e], index: e }
    }

    pub fn oriented_edges(&self) -> impl Iterator<Item = OrientedEdge> + '_ {
        (0..self.dim()).map(|e| self.oriented(e))
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let pos = self.adj.get(u)?.binary_search(&v).ok()?;
        Some(self.offsets[u] + pos)
    }

    /// Indices of the oriented edges leaving `u`.
    pub fn out_edges(&self, u: usize) -> Range<usize> {
        self.offsets[u]..self.offsets[u + 1]
    }

    /// Indices of the oriented edges entering `u`, ordered by source.
    pub fn in_edges(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_edges(u).map(move |e| self.reverse[e])
    }

    /// Subgraph induced by `nodes`, relabelled to `0..nodes.len()` in the
    /// given order. Returns the graph and the map from new ids to old ids.
    pub fn induced(&self, nodes: &[usize]) -> Result<(Graph, Vec<usize>), GraphError> {
        let mut position = vec![usize::MAX; self.n()];
        for (i, &u) in nodes.iter().enumerate() {
            if u >= self.n() {
                return Err(GraphError::UnknownNode { node: u });
            }
            position[u] = i;
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(u, v)| position[u] != usize::MAX && position[v] != usize::MAX)
            .map(|&(u, v)| (position[u], position[v]))
            .collect();
        let labels = nodes.iter().map(|&u| self.labels[u]).collect();
        let g = Graph::with_labels(nodes.len(), &edges, labels)?;
        Ok((g, nodes.to_vec()))
    }

    /// The graph with one extra node `n` joined to every node in `neighbors`.
    pub fn with_new_node(&self, neighbors: &[usize]) -> Result<Graph, GraphError> {
        let c = self.n();
        let mut edges = self.edges.clone();
        for &u in neighbors {
            if u >= c {
                return Err(GraphError::UnknownNode { node: u });
            }
            edges.push((u, c));
        }
        let mut labels = self.labels.clone();
        labels.push(labels.iter().copied().max().unwrap_or(-1) + 1);
        Graph::with_labels(c + 1, &edges, labels)
    }
}

fn count_components(adj: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut components = 0;
    for start in 0..adj.len() {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    components
}

/// Parses a whitespace-separated edge list. Lines starting with `#` and blank
/// lines are ignored. Arbitrary integer labels are densified in ascending
/// order, so a file already using `0..n` keeps its ids.
pub fn load_graph(text: &str) -> Result<Graph, GraphError> {
    let mut raw = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(GraphError::Parse {
                line: lineno + 1,
                message: format!("expected two node ids, found {} fields", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<i64>().map_err(|_| GraphError::Parse {
                line: lineno + 1,
                message: format!("invalid node id {s:?}"),
            })
        };
        let (u, v) = (parse(fields[0])?, parse(fields[1])?);
        if u == v {
            return Err(GraphError::SelfLoop { node: u });
        }
        raw.push((u, v));
    }
    let mut ids = BTreeMap::new();
    for &(u, v) in &raw {
        ids.insert(u, 0);
        ids.insert(v, 0);
    }
    for (i, id) in ids.values_mut().enumerate() {
        *id = i;
    }
    let labels: Vec<i64> = ids.keys().copied().collect();
    let edges: Vec<(usize, usize)> = raw.iter().map(|(u, v)| (ids[u], ids[v])).collect();
    Graph::with_labels(labels.len(), &edges, labels)
}

/// An undirected 1-shell edge removed while peeling `node`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LayerEdge {
    /// Endpoint that belongs to this layer.
    pub node: usize,
    /// Endpoint in a later layer, the 2-core, or (for the last layer of a
    /// tree) the same layer.
    pub other: usize,
    /// Oriented index of `other -> node`, which points toward the leaves.
    pub outward: usize,
    pub same_layer: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Layer {
    pub nodes: Vec<usize>,
    pub edges: Vec<LayerEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShellDecomposition {
    pub layers: Vec<Layer>,
    pub two_core_nodes: Vec<usize>,
    pub s1: usize,
    pub n1: usize,
}

impl ShellDecomposition {
    pub fn one_shell_nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self.layers.iter().flat_map(|l| l.nodes.iter().copied()).collect();
        nodes.sort_unstable();
        nodes
    }

    /// Layer (1-based) of every node, 0 for 2-core nodes.
    pub fn layer_of(&self, n: usize) -> Vec<usize> {
        let mut out = vec![0; n];
        for (i, layer) in self.layers.iter().enumerate() {
            for &u in &layer.nodes {
                out[u] = i + 1;
            }
        }
        out
    }

    pub fn two_core_is_empty(&self) -> bool {
        self.two_core_nodes.is_empty()
    }
}

/// Iterated removal of nodes with remaining degree at most 1.
pub fn shell_decomposition(g: &Graph) -> ShellDecomposition {
    let n = g.n();
    let mut degree = g.degrees();
    let mut removed = vec![false; n];
    let mut layer_id = vec![0usize; n];
    let mut current: Vec<usize> = (0..n).filter(|&u| degree[u] <= 1).collect();
    let mut layers = Vec::new();

    while !current.is_empty() {
        let depth = layers.len() + 1;
        for &u in &current {
            layer_id[u] = depth;
        }
        let mut edges = Vec::new();
        for &u in &current {
            for &w in g.neighbors(u) {
                if removed[w] {
                    continue;
                }
                let same_layer = layer_id[w] == depth;
                if same_layer && w < u {
                    continue;
                }
                let outward = g.edge_index(w, u).expect("edge exists");
                edges.push(LayerEdge { node: u, other: w, outward, same_layer });
            }
        }
        let mut next = Vec::new();
        for &u in &current {
            removed[u] = true;
        }
        for &u in &current {
            for &w in g.neighbors(u) {
                if !removed[w] {
                    degree[w] -= 1;
                    if degree[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        layers.push(Layer { nodes: current, edges });
        current = next;
    }

    let two_core_nodes: Vec<usize> = (0..n).filter(|&u| !removed[u]).collect();
    ShellDecomposition {
        s1: n - two_core_nodes.len(),
        n1: (0..n).filter(|&u| g.degree(u) == 1).count(),
        layers,
        two_core_nodes,
    }
}

/// The 2-core as a standalone graph plus the map from its ids to `g`'s ids.
/// `None` for trees.
pub fn two_core(g: &Graph) -> Option<(Graph, Vec<usize>)> {
    let shell = shell_decomposition(g);
    if shell.two_core_nodes.is_empty() {
        return None;
    }
    Some(g.induced(&shell.two_core_nodes).expect("2-core of a connected graph is connected"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FundamentalCycle {
    /// The non-tree edge `(u, v)`, `u < v`, traversed as `u -> v`.
    pub closing_edge: (usize, usize),
    /// Nodes in traversal order, starting `u, v, ...`; the cycle closes back to `u`.
    pub nodes: Vec<usize>,
}

impl FundamentalCycle {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.nodes.len() % 2 == 0
    }

    /// Consecutive `(from, to)` pairs around the cycle.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let r = self.nodes.len();
        (0..r).map(move |i| (self.nodes[i], self.nodes[(i + 1) % r]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleBasis {
    pub spanning_tree: Vec<(usize, usize)>,
    pub fundamental_cycles: Vec<FundamentalCycle>,
}

/// Fundamental cycles of the BFS spanning tree rooted at node 0.
pub fn cycle_basis(g: &Graph) -> CycleBasis {
    let n = g.n();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut spanning_tree = Vec::with_capacity(n - 1);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                parent[v] = u;
                depth[v] = depth[u] + 1;
                spanning_tree.push((u.min(v), u.max(v)));
                queue.push_back(v);
            }
        }
    }
    spanning_tree.sort_unstable();

    let is_tree_edge = |u: usize, v: usize| parent[u] == v || parent[v] == u;
    let fundamental_cycles = g
        .edges()
        .iter()
        .filter(|&&(u, v)| !is_tree_edge(u, v))
        .map(|&(u, v)| {
            let (mut a, mut b) = (u, v);
            let mut up_u = vec![u];
            let mut up_v = vec![v];
            while a != b {
                if depth[a] >= depth[b] {
                    a = parent[a];
                    up_u.push(a);
                } else {
                    b = parent[b];
                    up_v.push(b);
                }
            }
            // both lists end at the common ancestor
            let mut nodes = vec![u];
            nodes.extend_from_slice(&up_v);
            nodes.extend(up_u[1..up_u.len() - 1].iter().rev());
            FundamentalCycle { closing_edge: (u, v), nodes }
        })
        .collect();
    CycleBasis { spanning_tree, fundamental_cycles }
}

/// BFS 2-colouring; `None` if an odd cycle exists.
pub fn bipartition(g: &Graph) -> Option<Vec<u8>> {
    let mut color = vec![u8::MAX; g.n()];
    color[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if color[v] == u8::MAX {
                color[v] = 1 - color[u];
                queue.push_back(v);
            } else if color[v] == color[u] {
                return None;
            }
        }
    }
    Some(color)
}

pub fn is_bipartite(g: &Graph) -> bool {
    bipartition(g).is_some()
}

/// Period of the NB operator: the gcd of all NB-cycle lengths, computed as the
/// period of the digraph whose arcs are non-backtracking extensions.
pub fn nb_period(g: &Graph) -> Result<usize, GraphError> {
    if g.is_tree() {
        return Err(GraphError::Tree);
    }
    if !g.is_md2() {
        return Err(GraphError::NotMinDegreeTwo { min_degree: g.min_degree() });
    }
    if g.is_cycle() {
        return Err(GraphError::CycleGraph { length: g.n() });
    }
    let dim = g.dim();
    let mut level = vec![usize::MAX; dim];
    level[0] = 0;
    let mut queue = VecDeque::from([0]);
    let mut period = 0usize;
    while let Some(e) = queue.pop_front() {
        let (i, j) = (g.source(e), g.target(e));
        for f in g.out_edges(j) {
            if g.target(f) == i {
                continue;
            }
            if level[f] == usize::MAX {
                level[f] = level[e] + 1;
                queue.push_back(f);
            } else {
                let gap = (level[e] + 1).abs_diff(level[f]);
                period = period.gcd(&gap);
            }
        }
    }
    Ok(period)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(edges).unwrap()
    }

    #[test]
    fn single_edge() {
        let p2 = load_graph("0 1").unwrap();
        assert_eq!((p2.n(), p2.m()), (2, 1));
        let oriented: Vec<_> = p2.oriented_edges().map(|e| (e.source, e.target)).collect();
        assert_eq!(oriented, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn triangle_order_is_lexicographic() {
        let c3 = load_graph("0 1\n1 2\n0 2").unwrap();
        let oriented: Vec<_> = c3.oriented_edges().map(|e| (e.source, e.target)).collect();
        assert_eq!(oriented, vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]);
        for e in 0..c3.dim() {
            assert_eq!(c3.reverse(c3.reverse(e)), e);
            assert_eq!(c3.source(c3.reverse(e)), c3.target(e));
        }
    }

    #[test]
    fn loader_diagnostics_are_distinct() {
        assert_eq!(load_graph("0 1\n0 1"), Err(GraphError::DuplicateEdge { u: 0, v: 1 }));
        assert_eq!(load_graph("0 1\n1 0"), Err(GraphError::DuplicateEdge { u: 0, v: 1 }));
        assert_eq!(load_graph("0 0"), Err(GraphError::SelfLoop { node: 0 }));
        assert_eq!(load_graph("0 1\n2 3"), Err(GraphError::Disconnected { components: 2 }));
        assert_eq!(load_graph("# nothing\n"), Err(GraphError::TooFewNodes { nodes: 0 }));
        assert!(matches!(load_graph("0 x"), Err(GraphError::Parse { line: 1, .. })));
        assert!(matches!(load_graph("0 1 2"), Err(GraphError::Parse { line: 1, .. })));
    }

    #[test]
    fn loader_densifies_labels() {
        let g = load_graph("# comment\n\n10 -3\n-3 42\n").unwrap();
        assert_eq!(g.labels(), &[-3, 10, 42]);
        assert_eq!(g.edges(), &[(0, 1), (0, 2)]);
    }

    #[test]
    fn path_layers() {
        let shell = shell_decomposition(&g(&[(0, 1), (1, 2)]));
        assert_eq!(shell.layers.len(), 2);
        assert_eq!(shell.layers[0].nodes, vec![0, 2]);
        assert_eq!(shell.layers[1].nodes, vec![1]);
        assert!(shell.layers[1].edges.is_empty());
        assert!(shell.two_core_nodes.is_empty());
        assert_eq!((shell.s1, shell.n1), (3, 2));
    }

    #[test]
    fn paw_layers() {
        let paw = g(&[(0, 1), (1, 2), (1, 3), (2, 3)]);
        let shell = shell_decomposition(&paw);
        assert_eq!(shell.layers.len(), 1);
        assert_eq!(shell.layers[0].nodes, vec![0]);
        assert_eq!(shell.two_core_nodes, vec![1, 2, 3]);
        assert_eq!((shell.s1, shell.n1), (1, 1));
        let e = shell.layers[0].edges[0];
        assert_eq!((paw.source(e.outward), paw.target(e.outward)), (1, 0));
    }

    #[test]
    fn star_centre_is_its_own_layer() {
        let shell = shell_decomposition(&g(&[(0, 1), (0, 2), (0, 3)]));
        assert_eq!(shell.layers.len(), 2);
        assert_eq!(shell.layers[1].nodes, vec![0]);
    }

    #[test]
    fn p2_edge_is_recorded_once() {
        let shell = shell_decomposition(&g(&[(0, 1)]));
        assert_eq!(shell.layers.len(), 1);
        assert_eq!(shell.layers[0].edges.len(), 1);
        assert!(shell.layers[0].edges[0].same_layer);
    }

    #[test]
    fn cycle_basis_examples() {
        let c4 = cycle_basis(&g(&[(0, 1), (1, 2), (2, 3), (0, 3)]));
        assert_eq!(c4.fundamental_cycles.len(), 1);
        assert_eq!(c4.fundamental_cycles[0].len(), 4);
        assert!(c4.fundamental_cycles[0].is_even());

        let bowtie = cycle_basis(&g(&[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)]));
        assert_eq!(bowtie.fundamental_cycles.len(), 2);
        assert!(bowtie.fundamental_cycles.iter().all(|c| c.len() == 3 && !c.is_even()));

        let k4 = g(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let basis = cycle_basis(&k4);
        // non-tree edges enumerated directly: BFS from 0 uses 0-1, 0-2, 0-3
        let non_tree: Vec<_> = k4.edges().iter().filter(|&&(u, _)| u != 0).collect();
        assert_eq!(basis.fundamental_cycles.len(), non_tree.len());
        assert_eq!(basis.fundamental_cycles.len(), 3);
    }

    #[test]
    fn cycle_nodes_are_adjacent_in_order() {
        let k4 = g(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        for c in cycle_basis(&k4).fundamental_cycles {
            assert_eq!((c.nodes[0], c.nodes[1]), c.closing_edge);
            assert!(c.arcs().all(|(a, b)| k4.has_edge(a, b)));
        }
    }

    #[test]
    fn bipartite_examples() {
        assert!(is_bipartite(&g(&[(0, 1), (1, 2), (2, 3), (0, 3)])));
        assert!(!is_bipartite(&g(&[(0, 1), (1, 2), (0, 2)])));
    }

    /// gcd of all `p ≤ 2·dim` with `trace(B^p) > 0`, from exact powers.
    fn trace_period(g: &Graph) -> usize {
        let b = crate::nb::NbOperator::build(g).to_int_matrix();
        let mut power = b.clone();
        let mut period = 0usize;
        for p in 1..=2 * g.dim() {
            if (0..g.dim()).any(|i| power.get(i, i) > 0) {
                period = period.gcd(&p);
            }
            power = power.checked_mul(&b).unwrap();
            // keep entries bounded; only positivity matters
            power = crate::exact::IntMatrix::from_fn(g.dim(), g.dim(), |i, j| power.get(i, j).min(1));
        }
        period
    }

    #[test]
    fn period_examples() {
        let k4 = g(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(nb_period(&k4), Ok(1));
        let k33: Vec<_> = (0..3).flat_map(|i| (3..6).map(move |j| (i, j))).collect();
        assert_eq!(nb_period(&g(&k33)), Ok(2));
        // every closed NB-walk on the bowtie is a sequence of triangle laps
        let bowtie = g(&[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)]);
        assert_eq!(nb_period(&bowtie), Ok(3));
        assert_eq!(nb_period(&bowtie).unwrap(), trace_period(&bowtie));
        assert_eq!(nb_period(&g(&[(0, 1), (1, 2)])), Err(GraphError::Tree));
        assert_eq!(nb_period(&g(&[(0, 1), (1, 2), (0, 2)])), Err(GraphError::CycleGraph { length: 3 }));
    }

    #[test]
    fn theta_graph_with_period_three() {
        // three paths of lengths 3, 6, 9 between nodes 0 and 1: every cycle length is a multiple of 3
        let mut edges = Vec::new();
        let mut next = 2;
        for len in [3usize, 6, 9] {
            let mut prev = 0;
            for _ in 0..len - 1 {
                edges.push((prev, next));
                prev = next;
                next += 1;
            }
            edges.push((prev, 1));
        }
        let theta = g(&edges);
        assert!(!is_bipartite(&theta));
        assert_eq!(nb_period(&theta), Ok(3));
    }

    #[test]
    fn new_node_and_induced() {
        let c4 = g(&[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let gc = c4.with_new_node(&[0, 2]).unwrap();
        assert_eq!((gc.n(), gc.m()), (5, 6));
        assert!(gc.has_edge(0, 4) && gc.has_edge(2, 4));
        let (sub, map) = gc.induced(&[0, 1, 2, 3]).unwrap();
        assert_eq!(sub, c4);
        assert_eq!(map, vec![0, 1, 2, 3]);
        assert!(c4.with_new_node(&[7]).is_err());
    }
}
