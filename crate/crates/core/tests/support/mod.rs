//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use fm_core::formula::{Formula, FormulaPack, Term};
use fm_core::graph::{Edge, EdgeSet, Graph};
use fm_core::structure::FinStructure;

pub const VARS: [&str; 3] = ["x", "y", "z"];

fn atom(rng: &mut impl Rng) -> Formula {
    let a = Term::var(VARS.choose(rng).unwrap());
    let b = Term::var(VARS.choose(rng).unwrap());
    if rng.gen_bool(0.75) {
        Formula::mem(a, b)
    } else {
        Formula::eq(a, b)
    }
}

/// A random core formula with at most `quantifiers` nested quantifiers.
pub fn random_formula(rng: &mut impl Rng, quantifiers: usize, size: usize) -> Formula {
    if size <= 1 {
        return atom(rng);
    }
    match rng.gen_range(0..4) {
        0 => Formula::not(random_formula(rng, quantifiers, size - 1)),
        1 => {
            let left = rng.gen_range(1..size);
            Formula::or(random_formula(rng, quantifiers, left), random_formula(rng, quantifiers, size - left))
        }
        _ if quantifiers > 0 => {
            Formula::exists(VARS.choose(rng).unwrap(), random_formula(rng, quantifiers - 1, size - 1))
        }
        _ => atom(rng),
    }
}

/// `count` distinct formulas of quantifier depth at most `depth`.
pub fn formula_corpus(rng: &mut impl Rng, count: usize, depth: usize) -> Vec<Formula> {
    let mut seen = BTreeSet::new();
    while seen.len() < count {
        let size = rng.gen_range(1..9);
        let f = random_formula(rng, depth, size);
        debug_assert!(f.quantifier_depth() <= depth);
        seen.insert(f);
    }
    seen.into_iter().collect()
}

/// A subformula-closed pack of at most `max` formulas with an existential.
pub fn random_closed_pack(rng: &mut impl Rng, max: usize) -> FormulaPack {
    loop {
        let k = rng.gen_range(1..=2);
        let formulas = (0..k)
            .map(|_| {
                let len = rng.gen_range(2..6);
                random_formula(rng, 2, len)
            })
            .collect();
        let pack = FormulaPack::new("random", formulas).subformula_closure();
        let has_exists = pack.formulas.iter().any(|f| matches!(f, Formula::Exists(..)));
        if pack.len() <= max && has_exists {
            return pack;
        }
    }
}

pub fn random_structure(rng: &mut impl Rng, size: usize) -> FinStructure {
    let density = rng.gen_range(0.1..0.5);
    let pairs: Vec<(usize, usize)> =
        (0..size).flat_map(|a| (0..size).map(move |b| (a, b))).filter(|_| rng.gen_bool(density)).collect();
    FinStructure::new(size, pairs).unwrap()
}

/// Every structure on `0..n` given by a relation bitmask.
pub fn structure_from_mask(n: usize, mask: u32) -> FinStructure {
    let pairs = (0..n * n).filter(|i| mask >> i & 1 == 1).map(|i| (i / n, i % n));
    FinStructure::new(n, pairs).unwrap()
}

/// Extensionality and well-foundedness straight from the definitions.
pub fn extensional_well_founded(n: usize, mask: u32) -> bool {
    let rel = |a: usize, b: usize| mask >> (a * n + b) & 1 == 1;
    let members = |b: usize| -> Vec<bool> { (0..n).map(|a| rel(a, b)).collect() };
    for b in 0..n {
        for c in b + 1..n {
            if members(b) == members(c) {
                return false;
            }
        }
    }
    // Repeatedly strip elements with no remaining members.
    let mut alive = vec![true; n];
    loop {
        let minimal: Vec<usize> =
            (0..n).filter(|&b| alive[b] && (0..n).all(|a| !alive[a] || !rel(a, b))).collect();
        if minimal.is_empty() {
            return alive.iter().all(|a| !a);
        }
        for b in minimal {
            alive[b] = false;
        }
    }
}

/// Random simple graph on `0..n`.
pub fn random_graph(rng: &mut impl Rng, n: u32, p: f64) -> Graph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push(Edge::of(a, b));
            }
        }
    }
    Graph::new(0..n, edges).unwrap()
}

/// Random graph on `0..n` for `n` in `sizes`, with a random edge density.
pub fn small_graph(rng: &mut impl Rng, sizes: std::ops::RangeInclusive<u32>) -> Graph {
    let n = rng.gen_range(sizes);
    let p = rng.gen_range(0.2..0.7);
    random_graph(rng, n, p)
}

/// All unordered pairs of `0..n`, in order.
pub fn all_pairs(n: u32) -> Vec<Edge> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| Edge::of(a, b))).collect()
}

pub fn graph_from_mask(n: u32, pairs: &[Edge], mask: u32) -> Graph {
    Graph::new(0..n, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e)).unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// One representative (the least edge mask) of every isomorphism class of
/// graphs on `n` labelled vertices with at most `max_edges` edges.
pub fn graphs_up_to_iso(n: u32, max_edges: usize) -> Vec<Graph> {
    let pairs = all_pairs(n);
    let index: BTreeMap<Edge, usize> = pairs.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let perms: Vec<Vec<u32>> = permutations(n as usize)
        .into_iter()
        .map(|p| {
            pairs
                .iter()
                .map(|e| index[&Edge::of(p[e.lo() as usize] as u32, p[e.hi() as usize] as u32)] as u32)
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        if mask.count_ones() as usize > max_edges {
            continue;
        }
        let canonical = perms.iter().all(|img| {
            let mut m = 0u32;
            for (i, &j) in img.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    m |= 1 << j;
                }
            }
            m >= mask
        });
        if canonical {
            out.push(graph_from_mask(n, &pairs, mask));
        }
    }
    out
}

/// Cuts of `g` as edge bitmasks over `g.edges()`, one per vertex bipartition.
pub fn all_cut_masks(g: &Graph) -> BTreeSet<u64> {
    let vs = g.vertices();
    assert!(vs.len() <= 20 && g.edge_count() <= 64);
    let pos: BTreeMap<u32, usize> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut cuts = BTreeSet::new();
    for side in 0u32..(1 << vs.len()) {
        let mut m = 0u64;
        for (i, e) in g.edges().iter().enumerate() {
            if (side >> pos[&e.lo()] & 1) != (side >> pos[&e.hi()] & 1) {
                m |= 1 << i;
            }
        }
        cuts.insert(m);
    }
    cuts
}

/// Bonds by definition: nonempty cuts with no nonempty cut strictly inside.
pub fn bond_masks_by_definition(g: &Graph) -> BTreeSet<u64> {
    let cuts = all_cut_masks(g);
    cuts.iter()
        .copied()
        .filter(|&f| f != 0 && !cuts.iter().any(|&c| c != 0 && c != f && c & !f == 0))
        .collect()
}

pub fn mask_of(g: &Graph, f: &EdgeSet) -> u64 {
    g.edges().iter().enumerate().filter(|(_, e)| f.contains(e)).fold(0, |m, (i, _)| m | 1 << i)
}

pub fn set_of(g: &Graph, mask: u64) -> EdgeSet {
    g.edges().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect()
}

/// Bond-faithfulness transcribed from the definition over edge bitmasks.
/// Member bonds are computed once per edge subset, so graphs are limited
/// to a dozen edges.
pub struct FaithfulOracle {
    pub graph: Graph,
    pub host_bonds: BTreeSet<u64>,
    member_bonds: Vec<Vec<u64>>,
}

impl FaithfulOracle {
    pub fn new(g: &Graph) -> Self {
        let m = g.edge_count();
        assert!(m <= 12);
        let member_bonds = (0u64..1 << m)
            .map(|s| {
                let member = g.edge_induced(&set_of(g, s)).unwrap();
                bond_masks_by_definition(&member).into_iter().map(|b| mask_of(g, &set_of(&member, b))).collect()
            })
            .collect();
        FaithfulOracle { graph: g.clone(), host_bonds: bond_masks_by_definition(g), member_bonds }
    }

    /// The size, containment and preservation clauses.
    pub fn judge(&self, parts: &[u64], kappa: usize) -> (bool, bool, bool) {
        let size = parts.iter().all(|p| p.count_ones() as usize <= kappa);
        let contained = self
            .host_bonds
            .iter()
            .filter(|b| b.count_ones() as usize <= kappa)
            .all(|&b| parts.iter().any(|&p| b & !p == 0));
        let preserved = parts.iter().all(|&p| {
            self.member_bonds[p as usize]
                .iter()
                .filter(|b| (b.count_ones() as usize) < kappa)
                .all(|b| self.host_bonds.contains(b))
        });
        (size, contained, preserved)
    }

    pub fn faithful(&self, parts: &[u64], kappa: usize) -> bool {
        self.judge(parts, kappa) == (true, true, true)
    }

    /// Whether any partition of the edges at all is faithful.
    pub fn some_faithful(&self, kappa: usize) -> bool {
        let edges: Vec<u64> = (0..self.graph.edge_count()).map(|i| 1u64 << i).collect();
        set_partitions(&edges, edges.len().max(1))
            .iter()
            .any(|blocks| self.faithful(&blocks.iter().map(|b| b.iter().fold(0, |m, e| m | e)).collect::<Vec<_>>(), kappa))
    }
}

/// Every partition of `items` into at most `max_parts` nonempty blocks.
pub fn set_partitions<T: Clone>(items: &[T], max_parts: usize) -> Vec<Vec<Vec<T>>> {
    fn go<T: Clone>(items: &[T], i: usize, max: usize, blocks: &mut Vec<Vec<T>>, out: &mut Vec<Vec<Vec<T>>>) {
        if i == items.len() {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(items[i].clone());
            go(items, i + 1, max, blocks, out);
            blocks[b].pop();
        }
        if blocks.len() < max {
            blocks.push(vec![items[i].clone()]);
            go(items, i + 1, max, blocks, out);
            blocks.pop();
        }
    }
    let mut out = Vec::new();
    go(items, 0, max_parts, &mut Vec::new(), &mut out);
    out
}
