use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{graph_chain, DecomposeError};
use crate::formula::packs;
use crate::graph::{enumerate_bonds, is_bond, Decomposition, Edge, EdgeSet, Graph, UnionFind};

/// Graphs with at most this many edges get an exhaustive partition search
/// when the heuristic fails, so a miss there is a proof of absence.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 8;

/// Random bipartitions tried per component too large to scan.
const BOND_SAMPLES: usize = 4096;
const LOCAL_SEARCH_ROUNDS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberBond {
    pub member: usize,
    pub bond: EdgeSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BondFaithfulReport {
    pub kappa: usize,
    pub size_ok: bool,
    /// Indices of members with more than `kappa` edges.
    pub oversized: Vec<usize>,
    pub containment_ok: bool,
    /// Host bonds of size at most `kappa` that no single member contains.
    pub split_bonds: Vec<EdgeSet>,
    pub preservation_ok: bool,
    /// Member bonds of size below `kappa` that are not bonds of the host.
    pub foreign_bonds: Vec<MemberBond>,
    /// Some bond list was sampled rather than enumerated.
    pub sampled: bool,
    pub verdict: bool,
}

impl BondFaithfulReport {
    fn violations(&self) -> usize {
        self.oversized.len() + self.split_bonds.len() + self.foreign_bonds.len()
    }
}

fn bond_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0)
}

/// Host-side data reused across many candidate decompositions.
struct Checker<'a> {
    host: &'a Graph,
    kappa: usize,
    small_bonds: Vec<EdgeSet>,
    sampled: bool,
}

impl<'a> Checker<'a> {
    fn new(host: &'a Graph, kappa: usize) -> Self {
        let e = enumerate_bonds(host, Some(kappa), BOND_SAMPLES, &mut bond_rng());
        Checker { host, kappa, small_bonds: e.bonds, sampled: e.sampled }
    }

    fn check(&self, parts: &Decomposition) -> BondFaithfulReport {
        let kappa = self.kappa;
        let oversized: Vec<usize> = (0..parts.parts.len()).filter(|&i| parts.parts[i].edge_count() > kappa).collect();
        let mut owner = BTreeMap::new();
        for (i, p) in parts.parts.iter().enumerate() {
            for &e in p.edges() {
                owner.insert(e, i);
            }
        }
        let split_bonds: Vec<EdgeSet> = self
            .small_bonds
            .iter()
            .filter(|b| {
                let mut owners = b.iter().map(|e| owner[e]);
                let first = owners.next();
                owners.any(|o| Some(o) != first)
            })
            .cloned()
            .collect();
        let mut sampled = self.sampled;
        let mut foreign_bonds = Vec::new();
        if kappa > 1 {
            for (i, p) in parts.parts.iter().enumerate() {
                let e = enumerate_bonds(p, Some(kappa - 1), BOND_SAMPLES, &mut bond_rng());
                sampled |= e.sampled;
                foreign_bonds.extend(
                    e.bonds.into_iter().filter(|b| !is_bond(self.host, b)).map(|bond| MemberBond { member: i, bond }),
                );
            }
        }
        let size_ok = oversized.is_empty();
        let containment_ok = split_bonds.is_empty();
        let preservation_ok = foreign_bonds.is_empty();
        BondFaithfulReport {
            kappa,
            size_ok,
            oversized,
            containment_ok,
            split_bonds,
            preservation_ok,
            foreign_bonds,
            sampled,
            verdict: size_ok && containment_ok && preservation_ok,
        }
    }
}

/// Checks the size clause, that every host bond of at most `kappa` edges
/// lies inside one member, and that every member bond of fewer than
/// `kappa` edges is a host bond.
pub fn check_bond_faithful(g: &Graph, parts: &Decomposition, kappa: usize) -> Result<BondFaithfulReport, DecomposeError> {
    parts.validate(g)?;
    Ok(Checker::new(g, kappa).check(parts))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum NotFound {
    /// The heuristic gave up and the graph is too large, or the budget too
    /// small, for the exhaustive search to settle the question.
    BudgetExhausted { candidates: u64 },
    /// No decomposition exists; `witness` names the obstruction.
    ProvenAbsent { witness: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found { decomposition: Decomposition, report: BondFaithfulReport },
    NotFound(NotFound),
}

/// Searches for a `kappa`-bond-faithful decomposition: slice along a hull
/// chain, recurse on the slices, regroup so that small host bonds stay
/// whole, then repair members whose small bonds are not host bonds.
/// `budget` bounds the chain construction steps and the number of
/// candidate decompositions examined.
pub fn search_bond_faithful(g: &Graph, kappa: usize, budget: u64) -> Result<SearchOutcome, DecomposeError> {
    if kappa == 0 {
        return Err(DecomposeError::KappaZero);
    }
    let checker = Checker::new(g, kappa);
    let found = |sets: Vec<EdgeSet>| -> Result<SearchOutcome, DecomposeError> {
        let decomposition = Decomposition::from_edge_sets(g, &sets)?;
        decomposition.validate(g)?;
        let report = checker.check(&decomposition);
        assert!(report.verdict, "search produced a decomposition the checker rejects");
        Ok(SearchOutcome::Found { decomposition, report })
    };
    if g.edge_count() == 0 {
        return found(Vec::new());
    }
    if g.edge_count() <= kappa {
        let report = checker.check(&Decomposition { parts: vec![g.edge_induced(&g.edge_set())?] });
        if report.verdict {
            return found(vec![g.edge_set()]);
        }
    }

    // Edges sharing a small host bond must share a member.
    let edges = g.edges();
    let index: BTreeMap<Edge, usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut uf = UnionFind::new(edges.len());
    for b in &checker.small_bonds {
        let mut it = b.iter().map(|e| index[e]);
        if let Some(first) = it.next() {
            for other in it {
                uf.union(first, other);
            }
        }
    }
    let mut classes: BTreeMap<usize, EdgeSet> = BTreeMap::new();
    for (i, &e) in edges.iter().enumerate() {
        classes.entry(uf.find(i)).or_default().insert(e);
    }
    let atoms: Vec<EdgeSet> = classes.into_values().collect();
    if let Some(big) = atoms.iter().find(|a| a.len() > kappa) {
        let listed: Vec<String> = big.iter().map(Edge::to_string).collect();
        return Ok(SearchOutcome::NotFound(NotFound::ProvenAbsent {
            witness: format!(
                "edges {{{}}} are linked by host bonds of size at most {kappa} but number {}",
                listed.join(", "),
                big.len()
            ),
        }));
    }

    let mut spent = 0u64;
    let pieces = initial_pieces(g, kappa, budget);
    let mut members = pack_atoms(&atoms, &pieces, kappa);
    let mut report = evaluate(&checker, &atoms, &members, &mut spent);
    for _ in 0..LOCAL_SEARCH_ROUNDS {
        if report.verdict || spent >= budget {
            break;
        }
        match best_move(&checker, &atoms, &members, kappa, report.violations(), &mut spent, budget) {
            Some((next, r)) => {
                members = next;
                report = r;
            }
            None => break,
        }
    }
    if report.verdict {
        return found(member_sets(&atoms, &members));
    }

    if edges.len() <= EXHAUSTIVE_EDGE_LIMIT {
        let mut blocks = Vec::new();
        match exhaustive(&checker, &atoms, kappa, 0, &mut blocks, &mut spent, budget) {
            Exhaustive::Found(m) => return found(member_sets(&atoms, &m)),
            Exhaustive::Absent => {
                return Ok(SearchOutcome::NotFound(NotFound::ProvenAbsent {
                    witness: format!("no grouping of the {} forced edge classes works", atoms.len()),
                }))
            }
            Exhaustive::OutOfBudget => {}
        }
    }
    Ok(SearchOutcome::NotFound(NotFound::BudgetExhausted { candidates: spent }))
}

/// Edge sets of at most `kappa` edges from recursive chain slicing, or
/// consecutive chunks when the graph does not slice.
fn initial_pieces(g: &Graph, kappa: usize, budget: u64) -> Vec<EdgeSet> {
    if g.edge_count() <= kappa {
        return vec![g.edge_set()];
    }
    let pack = packs::named("members").expect("shipped pack");
    if let Ok(gc) = graph_chain(g, &pack, budget) {
        let slices: Vec<&Graph> = gc.slices.slices.iter().filter(|s| s.edge_count() > 0).collect();
        if slices.len() > 1 {
            return slices.into_iter().flat_map(|s| initial_pieces(s, kappa, budget)).collect();
        }
    }
    g.edges().chunks(kappa).map(|c| c.iter().copied().collect()).collect()
}

/// First-fit packing of atoms into members of at most `kappa` edges,
/// visiting atoms in the order the pieces first touch them.
fn pack_atoms(atoms: &[EdgeSet], pieces: &[EdgeSet], kappa: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<(usize, usize)> = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| (pieces.iter().position(|p| !p.is_disjoint(a)).unwrap_or(usize::MAX), i))
        .collect();
    order.sort_unstable();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    let mut last_piece = usize::MAX;
    let mut open = 0;
    for (piece, atom) in order {
        // Atoms from a new piece start after the members of earlier pieces.
        if piece != last_piece {
            open = members.len();
            last_piece = piece;
        }
        let len = atoms[atom].len();
        match (open..members.len()).find(|&m| sizes[m] + len <= kappa) {
            Some(m) => {
                members[m].push(atom);
                sizes[m] += len;
            }
            None => {
                members.push(vec![atom]);
                sizes.push(len);
            }
        }
    }
    members
}

fn member_sets(atoms: &[EdgeSet], members: &[Vec<usize>]) -> Vec<EdgeSet> {
    members
        .iter()
        .map(|m| m.iter().flat_map(|&a| atoms[a].iter().copied()).collect())
        .collect()
}

fn evaluate(checker: &Checker, atoms: &[EdgeSet], members: &[Vec<usize>], spent: &mut u64) -> BondFaithfulReport {
    *spent += 1;
    let parts = member_sets(atoms, members)
        .iter()
        .map(|s| checker.host.edge_induced(s).expect("member edges lie in the host"))
        .collect();
    checker.check(&Decomposition { parts })
}

/// The neighbour with the fewest violations among merges of two members and
/// moves of one atom, if it beats `current`.
fn best_move(
    checker: &Checker,
    atoms: &[EdgeSet],
    members: &[Vec<usize>],
    kappa: usize,
    current: usize,
    spent: &mut u64,
    budget: u64,
) -> Option<(Vec<Vec<usize>>, BondFaithfulReport)> {
    let size = |m: &[usize]| m.iter().map(|&a| atoms[a].len()).sum::<usize>();
    let mut candidates: Vec<Vec<Vec<usize>>> = Vec::new();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if size(&members[i]) + size(&members[j]) <= kappa {
                let mut next = members.to_vec();
                let moved = next.remove(j);
                next[i].extend(moved);
                candidates.push(next);
            }
        }
    }
    for i in 0..members.len() {
        for (k, &atom) in members[i].iter().enumerate() {
            for j in 0..=members.len() {
                if j == i || (j == members.len() && members[i].len() == 1) {
                    continue;
                }
                if j < members.len() && size(&members[j]) + atoms[atom].len() > kappa {
                    continue;
                }
                let mut next = members.to_vec();
                next[i].remove(k);
                if j == members.len() {
                    next.push(vec![atom]);
                } else {
                    next[j].push(atom);
                }
                next.retain(|m| !m.is_empty());
                candidates.push(next);
            }
        }
    }
    let mut best: Option<(Vec<Vec<usize>>, BondFaithfulReport)> = None;
    for next in candidates {
        if *spent >= budget {
            break;
        }
        let r = evaluate(checker, atoms, &next, spent);
        let score = r.violations();
        if score < best.as_ref().map_or(current, |(_, b)| b.violations()) {
            let done = r.verdict;
            best = Some((next, r));
            if done {
                break;
            }
        }
    }
    best
}

enum Exhaustive {
    Found(Vec<Vec<usize>>),
    Absent,
    OutOfBudget,
}

/// Restricted-growth enumeration of groupings of atoms into members of at
/// most `kappa` edges.
fn exhaustive(
    checker: &Checker,
    atoms: &[EdgeSet],
    kappa: usize,
    next: usize,
    blocks: &mut Vec<Vec<usize>>,
    spent: &mut u64,
    budget: u64,
) -> Exhaustive {
    if next == atoms.len() {
        if *spent >= budget {
            return Exhaustive::OutOfBudget;
        }
        return if evaluate(checker, atoms, blocks, spent).verdict {
            Exhaustive::Found(blocks.clone())
        } else {
            Exhaustive::Absent
        };
    }
    let len = atoms[next].len();
    let mut out_of_budget = false;
    for b in 0..=blocks.len() {
        let created = b == blocks.len();
        if !created {
            let used: usize = blocks[b].iter().map(|&a| atoms[a].len()).sum();
            if used + len > kappa {
                continue;
            }
            blocks[b].push(next);
        } else {
            blocks.push(vec![next]);
        }
        let r = exhaustive(checker, atoms, kappa, next + 1, blocks, spent, budget);
        if created {
            blocks.pop();
        } else {
            blocks[b].pop();
        }
        match r {
            Exhaustive::Found(m) => return Exhaustive::Found(m),
            Exhaustive::OutOfBudget => out_of_budget = true,
            Exhaustive::Absent => {}
        }
    }
    if out_of_budget {
        Exhaustive::OutOfBudget
    } else {
        Exhaustive::Absent
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;
    use crate::structure::DEFAULT_BUDGET;

    fn set(pairs: &[(u32, u32)]) -> EdgeSet {
        pairs.iter().map(|&(a, b)| Edge::of(a, b)).collect()
    }

    fn triangles_with_bridge() -> Graph {
        Graph::from_pairs(6, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)]).unwrap()
    }

    #[test]
    fn whole_graph_within_kappa() {
        let g = named::cycle(3);
        let parts = Decomposition::from_edge_sets(&g, &[g.edge_set()]).unwrap();
        let r = check_bond_faithful(&g, &parts, 3).unwrap();
        assert!(r.verdict);
    }

    #[test]
    fn bridge_member_too_large() {
        let g = triangles_with_bridge();
        let parts =
            Decomposition::from_edge_sets(&g, &[set(&[(0, 1), (1, 2), (0, 2), (2, 3)]), set(&[(3, 4), (4, 5), (3, 5)])])
                .unwrap();
        let r = check_bond_faithful(&g, &parts, 1).unwrap();
        assert!(r.containment_ok);
        assert!(!r.size_ok);
        assert_eq!(r.oversized, vec![0, 1]);
        assert!(!r.verdict);
    }

    #[test]
    fn opposite_pairs_of_a_square() {
        let g = named::cycle(4);
        let parts = Decomposition::from_edge_sets(&g, &[set(&[(0, 1), (2, 3)]), set(&[(1, 2), (0, 3)])]).unwrap();
        let r = check_bond_faithful(&g, &parts, 2).unwrap();
        assert!(r.size_ok);
        assert!(!r.preservation_ok);
        assert_eq!(r.foreign_bonds.len(), 4);
        assert!(r.foreign_bonds.iter().all(|f| f.bond.len() == 1));
        // Adjacent pairs are host bonds and the opposite split breaks them.
        assert!(!r.containment_ok);
    }

    #[test]
    fn rejects_non_partitions() {
        let g = named::cycle(3);
        let parts = Decomposition::from_edge_sets(&g, &[set(&[(0, 1)])]).unwrap();
        assert!(check_bond_faithful(&g, &parts, 2).is_err());
    }

    #[test]
    fn search_trivial_cases() {
        let empty = Graph::new([0, 1], []).unwrap();
        match search_bond_faithful(&empty, 1, DEFAULT_BUDGET).unwrap() {
            SearchOutcome::Found { decomposition, .. } => assert!(decomposition.parts.is_empty()),
            other => panic!("{other:?}"),
        }
        let g = named::path(3);
        match search_bond_faithful(&g, 5, DEFAULT_BUDGET).unwrap() {
            SearchOutcome::Found { decomposition, .. } => assert_eq!(decomposition.parts, vec![g]),
            other => panic!("{other:?}"),
        }
        assert_eq!(search_bond_faithful(&named::path(3), 0, 10), Err(DecomposeError::KappaZero));
    }

    #[test]
    fn search_splits_disjoint_triangles() {
        let g = Graph::from_pairs(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        match search_bond_faithful(&g, 3, DEFAULT_BUDGET).unwrap() {
            SearchOutcome::Found { decomposition, report } => {
                assert!(report.verdict);
                let mut sets = decomposition.edge_sets();
                sets.sort();
                assert_eq!(sets, vec![set(&[(0, 1), (1, 2), (0, 2)]), set(&[(3, 4), (4, 5), (3, 5)])]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn square_with_kappa_two_is_impossible() {
        let outcome = search_bond_faithful(&named::cycle(4), 2, DEFAULT_BUDGET).unwrap();
        assert!(matches!(outcome, SearchOutcome::NotFound(NotFound::ProvenAbsent { .. })), "{outcome:?}");
    }

    #[test]
    fn search_results_pass_the_checker() {
        for g in [named::bowtie(), named::complete(4), triangles_with_bridge(), named::path(7), named::cycle(6)] {
            for kappa in 1..=4 {
                if let SearchOutcome::Found { decomposition, .. } = search_bond_faithful(&g, kappa, DEFAULT_BUDGET).unwrap() {
                    assert!(check_bond_faithful(&g, &decomposition, kappa).unwrap().verdict);
                }
            }
        }
    }

    #[test]
    fn bridges_alone_at_kappa_one() {
        // Every bond of size one is a bridge, so singletons always work.
        let g = triangles_with_bridge();
        match search_bond_faithful(&g, 1, DEFAULT_BUDGET).unwrap() {
            SearchOutcome::Found { decomposition, .. } => assert_eq!(decomposition.parts.len(), 7),
            other => panic!("{other:?}"),
        }
    }
}
