use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{cut_of, CutWitness, EdgeSet, Graph, GraphError, UnionFind, Vertex};

/// Largest component scanned bipartition by bipartition.
pub const EXHAUSTIVE_COMPONENT_LIMIT: usize = 20;

/// A nonempty `F ⊆ E(G)` is a bond iff `G\F` has two distinct components
/// `C₁, C₂` with `F = E(G) ∩ [C₁, C₂]`.
pub fn is_bond(g: &Graph, f: &EdgeSet) -> bool {
    if f.is_empty() || f.iter().any(|e| !g.has_edge(*e)) {
        return false;
    }
    let n = g.vertex_count();
    let mut uf = UnionFind::new(n);
    for e in g.edges() {
        if !f.contains(e) {
            uf.union(g.index_of(e.lo()).expect("endpoint"), g.index_of(e.hi()).expect("endpoint"));
        }
    }
    let mut pair: Option<(usize, usize)> = None;
    for e in f {
        let a = uf.find(g.index_of(e.lo()).expect("endpoint"));
        let b = uf.find(g.index_of(e.hi()).expect("endpoint"));
        if a == b {
            return false;
        }
        let p = (a.min(b), a.max(b));
        match pair {
            None => pair = Some(p),
            Some(q) if q != p => return false,
            _ => {}
        }
    }
    // F must also contain every edge of G between the two components, but
    // any such edge is absent from G\F only if it is in F, so this holds.
    true
}

/// Whether `F` equals `E(G) ∩ [A, Ā]` for some vertex set `A`.
pub fn is_cut(g: &Graph, f: &EdgeSet) -> bool {
    cut_side(g, f).is_some()
}

/// A side realizing `F` as a cut, found by 2-colouring the components of
/// `G\F` along the edges of `F`.
fn cut_side(g: &Graph, f: &EdgeSet) -> Option<BTreeSet<Vertex>> {
    if f.iter().any(|e| !g.has_edge(*e)) {
        return None;
    }
    let (label, count) = g.component_labels_skipping(|i| f.contains(&g.edges()[i]));
    let mut quotient = vec![Vec::new(); count];
    for e in f {
        let a = label[g.index_of(e.lo()).expect("endpoint")];
        let b = label[g.index_of(e.hi()).expect("endpoint")];
        if a == b {
            return None;
        }
        quotient[a].push(b);
        quotient[b].push(a);
    }
    let mut colour = vec![None; count];
    for start in 0..count {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(true);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            let here = colour[c].expect("coloured");
            for &d in &quotient[c] {
                match colour[d] {
                    None => {
                        colour[d] = Some(!here);
                        queue.push_back(d);
                    }
                    Some(x) if x == here => return None,
                    _ => {}
                }
            }
        }
    }
    Some(
        g.vertices()
            .iter()
            .enumerate()
            .filter(|(i, _)| colour[label[*i]] == Some(true))
            .map(|(_, &v)| v)
            .collect(),
    )
}

/// Splits a cut into pairwise disjoint bonds.
///
/// With `F = [A, Ā]`, for each component `X` of `G[A]` and each component `Y`
/// of `G - X` inside the same component of `G`, `E[X, Y]` is a bond when
/// nonempty, and these sets partition `F`.
pub fn cut_to_bonds(g: &Graph, f: &EdgeSet) -> Result<Vec<EdgeSet>, GraphError> {
    let a = cut_side(g, f).ok_or(GraphError::NotACut)?;
    let mut bonds = Vec::new();
    for x in g.induced(&a).components() {
        let x: BTreeSet<Vertex> = x.into_iter().collect();
        let rest: BTreeSet<Vertex> = g.vertices().iter().copied().filter(|v| !x.contains(v)).collect();
        for y in g.induced(&rest).components() {
            let y: BTreeSet<Vertex> = y.into_iter().collect();
            let bond: EdgeSet = f
                .iter()
                .copied()
                .filter(|e| (x.contains(&e.lo()) && y.contains(&e.hi())) || (y.contains(&e.lo()) && x.contains(&e.hi())))
                .collect();
            if !bond.is_empty() {
                bonds.push(bond);
            }
        }
    }
    bonds.sort();
    Ok(bonds)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BondEnumeration {
    pub bonds: Vec<EdgeSet>,
    /// True when at least one component was too large to scan and was
    /// sampled instead; the list is then a subset of all bonds.
    pub sampled: bool,
}

/// Component vertices with adjacency as bit masks over local indices.
struct LocalComponent {
    vertices: Vec<Vertex>,
    masks: Vec<u32>,
}

impl LocalComponent {
    fn of(g: &Graph, comp: &[Vertex]) -> Self {
        let local: BTreeMap<Vertex, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut masks = vec![0u32; comp.len()];
        for e in g.edges() {
            if let (Some(&a), Some(&b)) = (local.get(&e.lo()), local.get(&e.hi())) {
                masks[a] |= 1 << b;
                masks[b] |= 1 << a;
            }
        }
        LocalComponent { vertices: comp.to_vec(), masks }
    }

    fn connected(&self, set: u32) -> bool {
        if set == 0 {
            return false;
        }
        let mut seen = set & set.wrapping_neg();
        let mut frontier = seen;
        while frontier != 0 {
            let i = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = self.masks[i] & set & !seen;
            seen |= new;
            frontier |= new;
        }
        seen == set
    }

    fn side(&self, set: u32) -> BTreeSet<Vertex> {
        (0..self.vertices.len()).filter(|i| set >> i & 1 == 1).map(|i| self.vertices[i]).collect()
    }

    fn full(&self) -> u32 {
        if self.vertices.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.vertices.len()) - 1
        }
    }
}

/// All bonds of `G`, each as the crossing set of a bipartition of one
/// component into two connected sides. Components above the exhaustive
/// limit fall back to `samples` random connected bipartitions.
pub fn enumerate_bonds(g: &Graph, max_size: Option<usize>, samples: usize, rng: &mut impl Rng) -> BondEnumeration {
    let mut found = BTreeSet::new();
    let mut sampled = false;
    for comp in g.components() {
        if comp.len() < 2 {
            continue;
        }
        if comp.len() <= EXHAUSTIVE_COMPONENT_LIMIT {
            let local = LocalComponent::of(g, &comp);
            let full = local.full();
            // Vertex 0 always on side A, so each bipartition is seen once.
            for rest in 0..(1u32 << (comp.len() - 1)) {
                let a = 1 | (rest << 1);
                if a == full || !local.connected(a) || !local.connected(full & !a) {
                    continue;
                }
                let cut = cut_of(g, &local.side(a)).edges;
                if max_size.is_none_or(|k| cut.len() <= k) {
                    found.insert(cut);
                }
            }
        } else {
            sampled = true;
            for cut in sample_bonds(g, &comp, samples, rng) {
                if max_size.is_none_or(|k| cut.len() <= k) {
                    found.insert(cut);
                }
            }
        }
    }
    BondEnumeration { bonds: found.into_iter().collect(), sampled }
}

/// Grows a random connected side and keeps it when the complement within
/// the component is connected too.
fn sample_bonds(g: &Graph, comp: &[Vertex], samples: usize, rng: &mut impl Rng) -> Vec<EdgeSet> {
    let members: BTreeSet<Vertex> = comp.iter().copied().collect();
    let sub = g.induced(&members);
    let adj = sub.adjacency();
    let mut out = Vec::new();
    for _ in 0..samples {
        let target = rng.gen_range(1..comp.len());
        let start = rng.gen_range(0..comp.len());
        let mut inside = vec![false; comp.len()];
        inside[start] = true;
        let mut order = vec![start];
        while order.len() < target {
            let mut frontier: Vec<usize> = order
                .iter()
                .flat_map(|&v| adj[v].iter().map(|&(w, _)| w))
                .filter(|&w| !inside[w])
                .collect();
            frontier.sort_unstable();
            frontier.dedup();
            let Some(&next) = frontier.choose(rng) else { break };
            inside[next] = true;
            order.push(next);
        }
        let outside: BTreeSet<Vertex> = (0..comp.len()).filter(|&i| !inside[i]).map(|i| sub.vertices()[i]).collect();
        if sub.induced(&outside).is_connected() {
            let side: BTreeSet<Vertex> = order.iter().map(|&i| sub.vertices()[i]).collect();
            out.push(cut_of(g, &side).edges);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OddCutMode {
    /// Star of the smallest odd-degree vertex.
    Fast,
    /// Scan of every bipartition of every component.
    Exhaustive,
}

pub fn odd_cut_witness(g: &Graph, mode: OddCutMode) -> Result<Option<CutWitness>, GraphError> {
    match mode {
        OddCutMode::Fast => Ok(g
            .degrees()
            .into_iter()
            .find(|&(_, d)| d % 2 == 1)
            .map(|(v, _)| cut_of(g, &BTreeSet::from([v])))),
        OddCutMode::Exhaustive => {
            for comp in g.components() {
                if comp.len() > EXHAUSTIVE_COMPONENT_LIMIT {
                    return Err(GraphError::GateExceeded(comp.len(), EXHAUSTIVE_COMPONENT_LIMIT));
                }
                if comp.len() < 2 {
                    continue;
                }
                let local = LocalComponent::of(g, &comp);
                for rest in 0..(1u32 << (comp.len() - 1)) {
                    let a = 1 | (rest << 1);
                    let crossing: u32 = (0..comp.len())
                        .filter(|i| a >> i & 1 == 1)
                        .map(|i| (local.masks[i] & !a).count_ones())
                        .sum();
                    if crossing % 2 == 1 {
                        return Ok(Some(cut_of(g, &local.side(a))));
                    }
                }
            }
            Ok(None)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PropBondVerdict {
    /// `F` is a bond of the host as well.
    BondInHost,
    /// `F` is not a bond of the host and lies inside one component `D` of `G\F`.
    Conclusion { component: Vec<Vertex> },
    /// `F` is not a bond of the host and straddles components of `G\F`.
    Violation { components: Vec<Vec<Vertex>> },
}

impl PropBondVerdict {
    pub fn is_fatal(&self) -> bool {
        matches!(self, PropBondVerdict::Violation { .. })
    }
}

/// For a bond `F` of a subgraph `H ⊆ G`: either `F` is a bond of `G`, or all
/// of `F`'s endpoints lie in a single component of `G\F`.
pub fn check_prop_bond(g: &Graph, h: &Graph, f: &EdgeSet) -> Result<PropBondVerdict, GraphError> {
    if !h.is_subgraph_of(g) {
        return Err(GraphError::NotASubgraph);
    }
    if !is_bond(h, f) {
        return Err(GraphError::NotABond);
    }
    if is_bond(g, f) {
        return Ok(PropBondVerdict::BondInHost);
    }
    let (label, _) = g.component_labels_skipping(|i| f.contains(&g.edges()[i]));
    let labels: BTreeSet<usize> = f
        .iter()
        .flat_map(|e| [e.lo(), e.hi()])
        .map(|v| label[g.index_of(v).expect("endpoint")])
        .collect();
    let members = |l: usize| -> Vec<Vertex> {
        g.vertices().iter().enumerate().filter(|(i, _)| label[*i] == l).map(|(_, &v)| v).collect()
    };
    if labels.len() == 1 {
        let l = *labels.iter().next().expect("nonempty");
        Ok(PropBondVerdict::Conclusion { component: members(l) })
    } else {
        Ok(PropBondVerdict::Violation { components: labels.into_iter().map(members).collect() })
    }
}

#[cfg(test)]
mod tests {
    use super::super::named::*;
    use super::super::Edge;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn es(pairs: &[(u32, u32)]) -> EdgeSet {
        pairs.iter().map(|&(a, b)| Edge::of(a, b)).collect()
    }

    /// Definitional oracle: nonempty, a cut, and no nonempty proper subset is a cut.
    fn is_bond_by_definition(g: &Graph, f: &EdgeSet) -> bool {
        let n = g.vertex_count();
        let cuts: BTreeSet<EdgeSet> = (0u32..(1 << n))
            .map(|mask| {
                let a: BTreeSet<u32> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| g.vertices()[i]).collect();
                cut_of(g, &a).edges
            })
            .collect();
        !f.is_empty()
            && cuts.contains(f)
            && !cuts.iter().any(|c| !c.is_empty() && c != f && c.is_subset(f))
    }

    #[test]
    fn bond_examples() {
        let tree = Graph::from_pairs(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        for &e in tree.edges() {
            assert!(is_bond(&tree, &[e].into()));
        }
        assert!(is_bond(&cycle(4), &es(&[(0, 1), (2, 3)])));
        assert!(!is_bond(&complete(4), &es(&[(0, 1), (0, 2), (0, 3), (1, 2)])));
        assert!(!is_bond(&cycle(4), &EdgeSet::new()));
    }

    #[test]
    fn bonds_agree_with_definition_on_four_vertex_graphs() {
        let all: Vec<(u32, u32)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
        for gmask in 0u32..(1 << all.len()) {
            let pairs: Vec<_> = all.iter().enumerate().filter(|(i, _)| gmask >> i & 1 == 1).map(|(_, &p)| p).collect();
            let g = Graph::from_pairs(4, &pairs).unwrap();
            for fmask in 0u32..(1 << g.edge_count()) {
                let f: EdgeSet = g.edges().iter().enumerate().filter(|(i, _)| fmask >> i & 1 == 1).map(|(_, &e)| e).collect();
                assert_eq!(is_bond(&g, &f), is_bond_by_definition(&g, &f), "{pairs:?} {f:?}");
            }
        }
    }

    #[test]
    fn cut_to_bonds_examples() {
        let c4 = cycle(4);
        let single = es(&[(0, 1), (0, 3)]);
        assert_eq!(cut_to_bonds(&c4, &single).unwrap(), vec![single]);
        let all = c4.edge_set();
        let bonds = cut_to_bonds(&c4, &all).unwrap();
        assert_eq!(bonds.len(), 2);
        assert!(bonds.iter().all(|b| b.len() == 2 && is_bond(&c4, b)));
        assert_eq!(cut_to_bonds(&c4, &es(&[(0, 1)])), Err(GraphError::NotACut));
        assert_eq!(cut_to_bonds(&cycle(3), &cycle(3).edge_set()), Err(GraphError::NotACut));
    }

    #[test]
    fn cut_to_bonds_partitions_every_cut_of_small_graphs() {
        for g in [complete(5), bowtie(), cycle(6), path(5)] {
            let n = g.vertex_count();
            for mask in 0u32..(1 << n) {
                let a: BTreeSet<u32> = (0..n as u32).filter(|i| mask >> i & 1 == 1).collect();
                let f = cut_of(&g, &a).edges;
                let bonds = cut_to_bonds(&g, &f).unwrap();
                let mut union = EdgeSet::new();
                for b in &bonds {
                    assert!(is_bond(&g, b));
                    assert!(b.iter().all(|e| union.insert(*e)), "overlap");
                }
                assert_eq!(union, f);
            }
        }
    }

    #[test]
    fn enumeration_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = bowtie();
        let listed = enumerate_bonds(&g, None, 0, &mut rng);
        assert!(!listed.sampled);
        let m = g.edge_count();
        let by_def: Vec<EdgeSet> = (1u32..(1 << m))
            .map(|mask| g.edges().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect())
            .filter(|f| is_bond_by_definition(&g, f))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        assert_eq!(listed.bonds, by_def);
        let small = enumerate_bonds(&g, Some(2), 0, &mut rng);
        assert!(small.bonds.iter().all(|b| b.len() <= 2));
        assert_eq!(small.bonds.len(), 6);
    }

    #[test]
    fn sampled_bonds_are_bonds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = cycle(24);
        let listed = enumerate_bonds(&g, None, 50, &mut rng);
        assert!(listed.sampled);
        assert!(!listed.bonds.is_empty());
        assert!(listed.bonds.iter().all(|b| is_bond(&g, b)));
    }

    #[test]
    fn odd_cut_examples() {
        assert_eq!(odd_cut_witness(&cycle(4), OddCutMode::Fast).unwrap(), None);
        assert_eq!(odd_cut_witness(&cycle(4), OddCutMode::Exhaustive).unwrap(), None);
        let k4 = odd_cut_witness(&complete(4), OddCutMode::Fast).unwrap().unwrap();
        assert_eq!(k4.edges.len(), 3);
        assert!(odd_cut_witness(&complete(4), OddCutMode::Exhaustive).unwrap().is_some());
        assert_eq!(odd_cut_witness(&bowtie(), OddCutMode::Exhaustive).unwrap(), None);
        assert!(matches!(
            odd_cut_witness(&cycle(21), OddCutMode::Exhaustive),
            Err(GraphError::GateExceeded(21, _))
        ));
    }

    #[test]
    fn prop_bond_examples() {
        let c4 = cycle(4);
        let f = es(&[(0, 1), (2, 3)]);
        assert_eq!(check_prop_bond(&c4, &c4, &f).unwrap(), PropBondVerdict::BondInHost);
        let chord = Graph::from_pairs(4, &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]).unwrap();
        match check_prop_bond(&chord, &c4, &f).unwrap() {
            PropBondVerdict::Conclusion { component } => assert_eq!(component, vec![0, 1, 2, 3]),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(check_prop_bond(&chord, &c4, &es(&[(0, 1)])), Err(GraphError::NotABond));
        assert_eq!(check_prop_bond(&c4, &chord, &f), Err(GraphError::NotASubgraph));
    }
}
