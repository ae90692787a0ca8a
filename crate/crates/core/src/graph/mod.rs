//! Finite simple graphs with edges as first-class objects.
//!
//! `G↾M` and `G\M` take an [`ObjectSet`], which may hold both vertices and
//! edge objects, so that removing "the edges in M" means removing edge
//! objects rather than edges incident to vertices of `M`.

mod bonds;
mod cycles;
mod flow;
mod io;

pub use bonds::{
    check_prop_bond, cut_to_bonds, enumerate_bonds, is_bond, is_cut, odd_cut_witness, BondEnumeration,
    OddCutMode, PropBondVerdict, EXHAUSTIVE_COMPONENT_LIMIT,
};
pub use cycles::{cycle_double_cover_search, simple_cycles, veblen_decomposition, Cycle, DoubleCover, Veblen};
pub use flow::{edge_connectivity, edge_disjoint_paths};
pub use io::{to_dot, GraphFile};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = u32;
pub type EdgeSet = BTreeSet<Edge>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("loop at vertex {0}")]
    Loop(Vertex),
    #[error("edge {0} listed more than once")]
    MultiEdge(Edge),
    #[error("edge {0} has an endpoint that is not a vertex")]
    MissingEndpoint(Edge),
    #[error("vertex {0} is not in the graph")]
    NoSuchVertex(Vertex),
    #[error("edge {0} is not in the graph")]
    NoSuchEdge(Edge),
    #[error("the edge set is not a cut")]
    NotACut,
    #[error("the edge set is not a bond of the given graph")]
    NotABond,
    #[error("not a subgraph of the host")]
    NotASubgraph,
    #[error("the parts do not partition the host's edges: {0}")]
    NotADecomposition(String),
    #[error("source and target coincide")]
    SameEndpoints,
    #[error("requested {requested} edge-disjoint paths but the edge connectivity is {available}")]
    TooManyPaths { requested: usize, available: usize },
    #[error("component with {0} vertices exceeds the exhaustive limit of {1}")]
    GateExceeded(usize, usize),
    #[error("graph has a bridge {0}; it has no cycle double cover")]
    HasBridge(Edge),
    #[error("graph has {0} edges, above the search limit of {1}")]
    TooLarge(usize, usize),
    #[error("malformed graph input: {0}")]
    Parse(String),
}

/// An unordered pair `{a, b}` with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[Vertex; 2]", into = "[Vertex; 2]")]
pub struct Edge(Vertex, Vertex);

impl Edge {
    pub fn new(a: Vertex, b: Vertex) -> Option<Edge> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Edge(a, b)),
            std::cmp::Ordering::Greater => Some(Edge(b, a)),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// Panics on `a == b`; for literals in tests and generators.
    pub fn of(a: Vertex, b: Vertex) -> Edge {
        Edge::new(a, b).expect("edge endpoints must differ")
    }

    pub fn lo(self) -> Vertex {
        self.0
    }

    pub fn hi(self) -> Vertex {
        self.1
    }

    pub fn ends(self) -> (Vertex, Vertex) {
        (self.0, self.1)
    }

    pub fn has(self, v: Vertex) -> bool {
        self.0 == v || self.1 == v
    }

    pub fn other(self, v: Vertex) -> Vertex {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

impl TryFrom<[Vertex; 2]> for Edge {
    type Error = GraphError;

    fn try_from(p: [Vertex; 2]) -> Result<Self, GraphError> {
        Edge::new(p[0], p[1]).ok_or(GraphError::Loop(p[0]))
    }
}

impl From<Edge> for [Vertex; 2] {
    fn from(e: Edge) -> Self {
        [e.0, e.1]
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// Vertices and edge objects, the two kinds of object a closure set can
/// contain as far as a graph is concerned.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSet {
    pub vertices: BTreeSet<Vertex>,
    pub edges: EdgeSet,
}

impl ObjectSet {
    pub fn of_graph(g: &Graph) -> Self {
        ObjectSet {
            vertices: g.vertices.iter().copied().collect(),
            edges: g.edges.iter().copied().collect(),
        }
    }

    pub fn is_subset(&self, other: &ObjectSet) -> bool {
        self.vertices.is_subset(&other.vertices) && self.edges.is_subset(&other.edges)
    }

    pub fn len(&self) -> usize {
        self.vertices.len() + self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// For every edge of `g`: the edge object is present iff both endpoints are.
    pub fn is_coherent_for(&self, g: &Graph) -> bool {
        g.edges.iter().all(|e| {
            let both = self.vertices.contains(&e.lo()) && self.vertices.contains(&e.hi());
            both == self.edges.contains(e)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestrictMode {
    /// Keep edges with both endpoints in `M`.
    Endpoints,
    /// Additionally require the edge object itself to be in `M`.
    EdgeAware,
}

/// A finite simple graph. Vertices and edges are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Graph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(vertices: impl IntoIterator<Item = Vertex>, edges: impl IntoIterator<Item = Edge>) -> Result<Self, GraphError> {
        let mut vertices: Vec<Vertex> = vertices.into_iter().collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::MultiEdge(w[0]));
        }
        for &e in &edges {
            if vertices.binary_search(&e.0).is_err() || vertices.binary_search(&e.1).is_err() {
                return Err(GraphError::MissingEndpoint(e));
            }
        }
        Ok(Graph { vertices, edges })
    }

    /// Vertices `0..n` and the given pairs.
    pub fn from_pairs(n: u32, pairs: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        let edges = pairs
            .iter()
            .map(|&(a, b)| Edge::new(a, b).ok_or(GraphError::Loop(a)))
            .collect::<Result<Vec<_>, _>>()?;
        Graph::new(0..n, edges)
    }

    /// Internal constructor for already-valid subsets of a valid graph.
    fn from_sorted(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Self {
        Graph { vertices, edges }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_set(&self) -> EdgeSet {
        self.edges.iter().copied().collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_vertex(&self, v: Vertex) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub(crate) fn index_of(&self, v: Vertex) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    /// Neighbour lists by vertex index: `(neighbour index, edge index)`, sorted.
    pub(crate) fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            let a = self.index_of(e.0).expect("endpoint");
            let b = self.index_of(e.1).expect("endpoint");
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.edges.iter().filter(|e| e.has(v)).count()
    }

    pub fn degrees(&self) -> BTreeMap<Vertex, usize> {
        let mut d: BTreeMap<Vertex, usize> = self.vertices.iter().map(|&v| (v, 0)).collect();
        for e in &self.edges {
            *d.get_mut(&e.0).expect("endpoint") += 1;
            *d.get_mut(&e.1).expect("endpoint") += 1;
        }
        d
    }

    /// Component label per vertex index, labels numbered in order of the
    /// smallest vertex, skipping edges for which `skip` returns true.
    pub(crate) fn component_labels_skipping(&self, skip: impl Fn(usize) -> bool) -> (Vec<usize>, usize) {
        let n = self.vertices.len();
        let mut uf = UnionFind::new(n);
        for (i, e) in self.edges.iter().enumerate() {
            if !skip(i) {
                uf.union(self.index_of(e.0).expect("endpoint"), self.index_of(e.1).expect("endpoint"));
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut root_label = BTreeMap::new();
        for (v, slot) in label.iter_mut().enumerate() {
            let r = uf.find(v);
            let next = root_label.len();
            *slot = *root_label.entry(r).or_insert(next);
        }
        let count = root_label.len();
        (label, count)
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let (label, count) = self.component_labels_skipping(|_| false);
        let mut comps = vec![Vec::new(); count];
        for (i, &l) in label.iter().enumerate() {
            comps[l].push(self.vertices[i]);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// `G[A]`: the subgraph induced on `A ∩ V(G)`.
    pub fn induced(&self, a: &BTreeSet<Vertex>) -> Graph {
        let vertices = self.vertices.iter().copied().filter(|v| a.contains(v)).collect();
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|e| a.contains(&e.0) && a.contains(&e.1))
            .collect();
        Graph::from_sorted(vertices, edges)
    }

    pub fn without_edges(&self, f: &EdgeSet) -> Graph {
        Graph::from_sorted(
            self.vertices.clone(),
            self.edges.iter().copied().filter(|e| !f.contains(e)).collect(),
        )
    }

    /// Same vertex set, only the given edges (which must belong to `self`).
    pub fn spanning(&self, edges: &EdgeSet) -> Result<Graph, GraphError> {
        if let Some(e) = edges.iter().find(|e| !self.has_edge(**e)) {
            return Err(GraphError::NoSuchEdge(*e));
        }
        Ok(Graph::from_sorted(self.vertices.clone(), edges.iter().copied().collect()))
    }

    /// The subgraph formed by the given edges and their endpoints.
    pub fn edge_induced(&self, edges: &EdgeSet) -> Result<Graph, GraphError> {
        if let Some(e) = edges.iter().find(|e| !self.has_edge(**e)) {
            return Err(GraphError::NoSuchEdge(*e));
        }
        let vertices: BTreeSet<Vertex> = edges.iter().flat_map(|e| [e.0, e.1]).collect();
        Ok(Graph::from_sorted(vertices.into_iter().collect(), edges.iter().copied().collect()))
    }

    pub fn is_subgraph_of(&self, host: &Graph) -> bool {
        self.vertices.iter().all(|&v| host.has_vertex(v)) && self.edges.iter().all(|&e| host.has_edge(e))
    }

    pub fn is_cycle(&self) -> bool {
        self.edge_count() >= 3
            && self.is_connected()
            && self.degrees().values().all(|&d| d == 2)
    }
}

/// `G↾M = ⟨V(G) ∩ M, E(G) ∩ [M]²⟩`.
pub fn restrict(g: &Graph, m: &ObjectSet, mode: RestrictMode) -> Graph {
    let vertices = g.vertices.iter().copied().filter(|v| m.vertices.contains(v)).collect();
    let edges = g
        .edges
        .iter()
        .copied()
        .filter(|e| {
            m.vertices.contains(&e.0)
                && m.vertices.contains(&e.1)
                && (mode == RestrictMode::Endpoints || m.edges.contains(e))
        })
        .collect();
    Graph::from_sorted(vertices, edges)
}

/// `G\M = ⟨V(G), E(G) ∖ M⟩`: removes the edge objects that belong to `M`.
pub fn delete_edges(g: &Graph, m: &ObjectSet) -> Graph {
    g.without_edges(&m.edges)
}

/// The cut `E(G) ∩ [A, Ā]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CutWitness {
    pub side: BTreeSet<Vertex>,
    pub edges: EdgeSet,
}

pub fn cut_of(g: &Graph, a: &BTreeSet<Vertex>) -> CutWitness {
    let side: BTreeSet<Vertex> = a.iter().copied().filter(|&v| g.has_vertex(v)).collect();
    let edges = g
        .edges
        .iter()
        .copied()
        .filter(|e| side.contains(&e.0) != side.contains(&e.1))
        .collect();
    CutWitness { side, edges }
}

/// A family of subgraphs whose edge sets partition the host's edges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Decomposition {
    pub parts: Vec<Graph>,
}

impl Decomposition {
    /// Each part is the edge-induced subgraph of its edge set.
    pub fn from_edge_sets(host: &Graph, sets: &[EdgeSet]) -> Result<Self, GraphError> {
        let parts = sets.iter().map(|s| host.edge_induced(s)).collect::<Result<_, _>>()?;
        Ok(Decomposition { parts })
    }

    pub fn edge_sets(&self) -> Vec<EdgeSet> {
        self.parts.iter().map(Graph::edge_set).collect()
    }

    /// Checks the 1-cover condition against `host`.
    pub fn validate(&self, host: &Graph) -> Result<(), GraphError> {
        let mut seen = EdgeSet::new();
        for (i, p) in self.parts.iter().enumerate() {
            if !p.is_subgraph_of(host) {
                return Err(GraphError::NotADecomposition(format!("part {i} is not a subgraph of the host")));
            }
            for &e in p.edges() {
                if !seen.insert(e) {
                    return Err(GraphError::NotADecomposition(format!("edge {e} appears in more than one part")));
                }
            }
        }
        if let Some(e) = host.edges().iter().find(|e| !seen.contains(e)) {
            return Err(GraphError::NotADecomposition(format!("edge {e} is not covered")));
        }
        Ok(())
    }
}

/// Linear-time bridge finding by DFS low-links. Returned in edge order.
pub fn bridges(g: &Graph) -> Vec<Edge> {
    let n = g.vertex_count();
    let adj = g.adjacency();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    let mut out = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (vertex, edge used to enter, next neighbour position)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (v, parent_edge, ref mut pos)) = stack.last_mut() {
            if let Some(&(w, ei)) = adj[v].get(*pos) {
                *pos += 1;
                if ei == parent_edge {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, ei, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                    if low[v] > disc[u] {
                        out.push(g.edges()[parent_edge]);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // Smaller root wins so labels stay deterministic.
        let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[drop] = keep;
        true
    }
}

/// Small named graphs used throughout the tests and fixtures.
pub mod named {
    use super::*;

    pub fn cycle(n: u32) -> Graph {
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_pairs(n, &pairs).expect("valid cycle")
    }

    pub fn path(n: u32) -> Graph {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_pairs(n, &pairs).expect("valid path")
    }

    pub fn complete(n: u32) -> Graph {
        let pairs: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Graph::from_pairs(n, &pairs).expect("valid complete graph")
    }

    /// Two triangles sharing vertex 2.
    pub fn bowtie() -> Graph {
        Graph::from_pairs(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]).expect("valid bowtie")
    }
}

#[cfg(test)]
mod tests {
    use super::named::*;
    use super::*;

    fn set(vs: &[Vertex]) -> BTreeSet<Vertex> {
        vs.iter().copied().collect()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(Graph::from_pairs(2, &[(1, 1)]), Err(GraphError::Loop(1)));
        assert_eq!(Graph::from_pairs(2, &[(0, 1), (1, 0)]), Err(GraphError::MultiEdge(Edge::of(0, 1))));
        assert_eq!(Graph::from_pairs(2, &[(0, 5)]), Err(GraphError::MissingEndpoint(Edge::of(0, 5))));
    }

    #[test]
    fn restrict_examples() {
        let g = cycle(3);
        assert_eq!(restrict(&g, &ObjectSet::of_graph(&g), RestrictMode::Endpoints), g);
        let m = ObjectSet { vertices: set(&[0, 1]), edges: EdgeSet::new() };
        let r = restrict(&g, &m, RestrictMode::Endpoints);
        assert_eq!(r.edges(), &[Edge::of(0, 1)]);
        assert_eq!(r.vertices(), &[0, 1]);
        assert!(restrict(&g, &m, RestrictMode::EdgeAware).edges().is_empty());
        assert_eq!(restrict(&g, &ObjectSet::default(), RestrictMode::Endpoints), Graph::default());
    }

    #[test]
    fn delete_examples() {
        let g = cycle(3);
        assert_eq!(delete_edges(&g, &ObjectSet::default()), g);
        let m = ObjectSet { vertices: BTreeSet::new(), edges: [Edge::of(0, 1)].into() };
        let d = delete_edges(&g, &m);
        assert_eq!(d.edges(), &[Edge::of(0, 2), Edge::of(1, 2)]);
        assert_eq!(d.vertices(), g.vertices());
        let all = delete_edges(&g, &ObjectSet::of_graph(&g));
        assert_eq!(all.edge_count(), 0);
        assert_eq!(all.vertex_count(), 3);
    }

    #[test]
    fn cut_examples() {
        assert!(cut_of(&cycle(4), &BTreeSet::new()).edges.is_empty());
        assert_eq!(cut_of(&cycle(4), &set(&[0, 1])).edges.len(), 2);
        assert_eq!(cut_of(&complete(4), &set(&[2])).edges.len(), 3);
    }

    fn bridges_by_deletion(g: &Graph) -> Vec<Edge> {
        let base = g.components().len();
        g.edges()
            .iter()
            .copied()
            .filter(|&e| g.without_edges(&[e].into()).components().len() > base)
            .collect()
    }

    #[test]
    fn bridge_examples() {
        let tree = Graph::from_pairs(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert_eq!(bridges(&tree), tree.edges().to_vec());
        assert!(bridges(&cycle(4)).is_empty());
        let mut pairs: Vec<_> = bowtie().edges().iter().map(|e| e.ends()).collect();
        pairs.push((4, 5));
        let g = Graph::from_pairs(6, &pairs).unwrap();
        assert_eq!(bridges(&g), vec![Edge::of(4, 5)]);
    }

    #[test]
    fn bridges_agree_with_deletion_on_all_five_vertex_graphs() {
        let all: Vec<(u32, u32)> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
        for mask in 0u32..(1 << all.len()) {
            let pairs: Vec<_> = all.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
            let g = Graph::from_pairs(5, &pairs).unwrap();
            assert_eq!(bridges(&g), bridges_by_deletion(&g), "{pairs:?}");
        }
    }

    #[test]
    fn decomposition_validation() {
        let g = cycle(4);
        let ok = Decomposition::from_edge_sets(
            &g,
            &[[Edge::of(0, 1), Edge::of(1, 2)].into(), [Edge::of(2, 3), Edge::of(0, 3)].into()],
        )
        .unwrap();
        assert!(ok.validate(&g).is_ok());
        let short = Decomposition::from_edge_sets(&g, &[[Edge::of(0, 1)].into()]).unwrap();
        assert!(matches!(short.validate(&g), Err(GraphError::NotADecomposition(_))));
        let dup = Decomposition { parts: vec![g.clone(), g.clone()] };
        assert!(dup.validate(&g).is_err());
    }

    #[test]
    fn coherence() {
        let g = cycle(3);
        let m = ObjectSet { vertices: set(&[0, 1]), edges: [Edge::of(0, 1)].into() };
        assert!(m.is_coherent_for(&g));
        let bad = ObjectSet { vertices: set(&[0]), edges: [Edge::of(0, 1)].into() };
        assert!(!bad.is_coherent_for(&g));
    }
}
