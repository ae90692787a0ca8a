//! Chain slicing `G_α = (G\M_α)↾M_{α+1}`, reflection probes, and
//! κ-bond-faithful decompositions.

mod faithful;
mod probe;

pub use faithful::{
    check_bond_faithful, search_bond_faithful, BondFaithfulReport, MemberBond, NotFound, SearchOutcome,
    EXHAUSTIVE_EDGE_LIMIT,
};
pub use probe::{probe_instance, well_reflecting_probe, InstanceReport, ProbeEntry, ProbeReport, Property, View};

use serde::Serialize;
use thiserror::Error;

use crate::formula::FormulaPack;
use crate::graph::{delete_edges, restrict, EdgeSet, Graph, GraphError, GraphFile, ObjectSet, RestrictMode};
use crate::hull::{chain, Chain, HullError};
use crate::structure::Subset;
use crate::universe::{GraphAmbient, UniverseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("stage {0} does not strictly contain the stage before it")]
    NotIncreasing(usize),
    #[error("kappa must be at least 1")]
    KappaZero,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Hull(#[from] HullError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageReport {
    pub objects: ObjectSet,
    /// Edge objects present exactly when both endpoints are.
    pub coherent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceSet {
    pub host: Graph,
    pub stages: Vec<StageReport>,
    /// Slice `α` is `(G\M_α)↾M_{α+1}`.
    pub slices: Vec<Graph>,
    /// The last stage contains every vertex and edge of the host.
    pub covers: bool,
}

impl SliceSet {
    pub fn all_coherent(&self) -> bool {
        self.stages.iter().all(|s| s.coherent)
    }

    /// When coherence and coverage hold, the slices must partition the host's edges.
    pub fn partition_expected(&self) -> bool {
        self.all_coherent() && self.covers
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SliceSetFile {
    pub host: GraphFile,
    pub stages: Vec<StageReport>,
    pub slices: Vec<GraphFile>,
    pub covers: bool,
    pub partition_expected: bool,
    pub partition: bool,
}

impl From<&SliceSet> for SliceSetFile {
    fn from(s: &SliceSet) -> Self {
        SliceSetFile {
            host: GraphFile::from(&s.host),
            stages: s.stages.clone(),
            slices: s.slices.iter().map(GraphFile::from).collect(),
            covers: s.covers,
            partition_expected: s.partition_expected(),
            partition: slice_partition_check(s),
        }
    }
}

/// Slices of `G` along strictly increasing stages, restricting edge-aware so
/// that a slice keeps an edge only when its object lies in the next stage.
pub fn chain_slices(g: &Graph, stages: &[ObjectSet]) -> Result<SliceSet, DecomposeError> {
    for (i, w) in stages.windows(2).enumerate() {
        if !w[0].is_subset(&w[1]) || w[0] == w[1] {
            return Err(DecomposeError::NotIncreasing(i + 1));
        }
    }
    let slices = stages
        .windows(2)
        .map(|w| restrict(&delete_edges(g, &w[0]), &w[1], RestrictMode::EdgeAware))
        .collect();
    let covers = stages.last().is_some_and(|last| ObjectSet::of_graph(g).is_subset(last));
    Ok(SliceSet {
        host: g.clone(),
        stages: stages
            .iter()
            .map(|m| StageReport { objects: m.clone(), coherent: m.is_coherent_for(g) })
            .collect(),
        slices,
        covers,
    })
}

/// Whether the slices' edge sets are pairwise disjoint and cover the host.
pub fn slice_partition_check(s: &SliceSet) -> bool {
    let mut seen = EdgeSet::new();
    for slice in &s.slices {
        for &e in slice.edges() {
            if !seen.insert(e) {
                return false;
            }
        }
    }
    seen == s.host.edge_set()
}

/// A chain over the graph's ambient structure, from the empty seed up to a
/// stage holding every vertex and edge, with its slices.
#[derive(Debug, Clone)]
pub struct GraphChain {
    pub ambient: GraphAmbient,
    pub chain: Chain,
    pub slices: SliceSet,
}

pub fn graph_chain(g: &Graph, pack: &FormulaPack, budget: u64) -> Result<GraphChain, DecomposeError> {
    let ambient = GraphAmbient::new(g)?;
    let mut ch = chain(
        ambient.structure(),
        pack,
        &Subset::new(),
        &ambient.cover(),
        Some(&ambient.universe),
        budget,
    )?;
    let mut stages: Vec<ObjectSet> = ch.stages.iter().map(|s| ambient.objects_of(&s.hull.carrier)).collect();
    if stages.first().is_some_and(|m| !m.is_empty()) {
        stages.insert(0, ObjectSet::default());
    }
    // Stages agreeing on graph objects differ only in auxiliary sets.
    stages.dedup();
    let slices = chain_slices(g, &stages)?;
    ch.coherent = Some(slices.all_coherent());
    Ok(GraphChain { ambient, chain: ch, slices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::packs;
    use crate::graph::{named, Edge};
    use crate::structure::DEFAULT_BUDGET;
    use std::collections::BTreeSet;

    fn objects(vs: &[u32], es: &[(u32, u32)]) -> ObjectSet {
        ObjectSet {
            vertices: vs.iter().copied().collect(),
            edges: es.iter().map(|&(a, b)| Edge::of(a, b)).collect(),
        }
    }

    #[test]
    fn single_slice_is_the_graph() {
        let g = named::cycle(4);
        let s = chain_slices(&g, &[ObjectSet::default(), ObjectSet::of_graph(&g)]).unwrap();
        assert_eq!(s.slices, vec![g]);
        assert!(s.partition_expected());
        assert!(slice_partition_check(&s));
    }

    #[test]
    fn triangle_two_stages() {
        let g = named::cycle(3);
        let stages = [ObjectSet::default(), objects(&[0, 1], &[(0, 1)]), ObjectSet::of_graph(&g)];
        let s = chain_slices(&g, &stages).unwrap();
        assert_eq!(s.slices[0].edges(), &[Edge::of(0, 1)]);
        assert_eq!(s.slices[1].edges(), &[Edge::of(0, 2), Edge::of(1, 2)]);
        assert!(s.partition_expected());
        assert!(slice_partition_check(&s));
    }

    #[test]
    fn incoherent_stage_is_flagged() {
        let g = named::cycle(3);
        let stages = [ObjectSet::default(), objects(&[0], &[(0, 1)]), ObjectSet::of_graph(&g)];
        let s = chain_slices(&g, &stages).unwrap();
        assert!(!s.all_coherent());
        assert!(!s.partition_expected());
    }

    #[test]
    fn stages_must_increase() {
        let g = named::cycle(3);
        let m = objects(&[0], &[]);
        assert_eq!(chain_slices(&g, &[m.clone(), m]), Err(DecomposeError::NotIncreasing(1)));
    }

    #[test]
    fn chains_over_ambients_partition() {
        for g in [named::cycle(3), named::complete(5), named::bowtie(), named::path(6)] {
            let pack = packs::named("members").unwrap();
            let gc = graph_chain(&g, &pack, DEFAULT_BUDGET).unwrap();
            assert_eq!(gc.chain.coherent, Some(true));
            assert!(gc.slices.covers);
            assert!(slice_partition_check(&gc.slices));
            let vertices: BTreeSet<u32> = gc.slices.stages.last().unwrap().objects.vertices.clone();
            assert_eq!(vertices.len(), g.vertex_count());
        }
    }
}
