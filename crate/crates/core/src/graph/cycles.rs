use serde::Serialize;

use super::{bridges, Decomposition, Edge, EdgeSet, Graph, GraphError, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cycle {
    /// Vertices in traversal order, first vertex not repeated at the end.
    pub vertices: Vec<Vertex>,
    pub edges: EdgeSet,
}

impl Cycle {
    fn from_walk(vertices: Vec<Vertex>) -> Self {
        let n = vertices.len();
        let edges = (0..n).map(|i| Edge::of(vertices[i], vertices[(i + 1) % n])).collect();
        Cycle { vertices, edges }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Veblen {
    Cycles { cycles: Vec<Cycle> },
    OddVertex { vertex: Vertex, degree: usize },
}

impl Veblen {
    pub fn into_decomposition(self, host: &Graph) -> Option<Decomposition> {
        match self {
            Veblen::Cycles { cycles } => {
                let sets: Vec<EdgeSet> = cycles.into_iter().map(|c| c.edges).collect();
                Decomposition::from_edge_sets(host, &sets).ok()
            }
            Veblen::OddVertex { .. } => None,
        }
    }
}

/// Peels cycles off an even-degree graph: start at the lowest vertex with
/// unused edges, always leave by the lowest unused edge, and cut out a cycle
/// whenever the walk returns to a vertex already on it.
pub fn veblen_decomposition(g: &Graph) -> Veblen {
    if let Some((vertex, degree)) = g.degrees().into_iter().find(|&(_, d)| d % 2 == 1) {
        return Veblen::OddVertex { vertex, degree };
    }
    let adj = g.adjacency();
    let n = g.vertex_count();
    let mut used = vec![false; g.edge_count()];
    let mut cursor = vec![0usize; n];
    let mut next_edge = |v: usize, used: &mut Vec<bool>| -> Option<usize> {
        while let Some(&(w, ei)) = adj[v].get(cursor[v]) {
            if !used[ei] {
                used[ei] = true;
                return Some(w);
            }
            cursor[v] += 1;
        }
        None
    };
    let mut cycles = Vec::new();
    let mut on_walk = vec![usize::MAX; n];
    for start in 0..n {
        while let Some(mut w) = next_edge(start, &mut used) {
            let mut walk = vec![start];
            on_walk[start] = 0;
            loop {
                if on_walk[w] != usize::MAX {
                    let from = on_walk[w];
                    let cyc: Vec<usize> = walk.drain(from..).collect();
                    for &u in &cyc {
                        on_walk[u] = usize::MAX;
                    }
                    cycles.push(Cycle::from_walk(cyc.iter().map(|&i| g.vertices()[i]).collect()));
                    if walk.is_empty() {
                        break;
                    }
                }
                on_walk[w] = walk.len();
                walk.push(w);
                // Even degrees guarantee a way out of any vertex but the start.
                w = next_edge(w, &mut used).expect("even degree");
            }
        }
    }
    Veblen::Cycles { cycles }
}

/// Every simple cycle of `G`, each listed once, from its lowest vertex.
/// Fails when more than `limit` cycles exist.
pub fn simple_cycles(g: &Graph, limit: usize) -> Result<Vec<Cycle>, GraphError> {
    let adj = g.adjacency();
    let n = g.vertex_count();
    let mut out = Vec::new();
    let mut on_path = vec![false; n];
    for s in 0..n {
        // (vertex, next neighbour position)
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        on_path[s] = true;
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            let Some(&(w, _)) = adj[v].get(*pos) else {
                on_path[v] = false;
                stack.pop();
                continue;
            };
            *pos += 1;
            if w == s && stack.len() >= 3 && stack[1].0 < v {
                if out.len() == limit {
                    return Err(GraphError::TooLarge(out.len() + 1, limit));
                }
                out.push(Cycle::from_walk(stack.iter().map(|&(u, _)| g.vertices()[u]).collect()));
            } else if w > s && !on_path[w] {
                on_path[w] = true;
                stack.push((w, 0));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DoubleCover {
    Found { cycles: Vec<Cycle> },
    ProvenAbsent,
    BudgetExhausted { nodes: u64 },
}

/// Backtracking search for a family of cycles covering each edge exactly
/// twice. The lowest still-uncovered edge is always branched on.
pub fn cycle_double_cover_search(g: &Graph, max_edges: usize, budget: u64) -> Result<DoubleCover, GraphError> {
    if g.edge_count() > max_edges.min(64) {
        return Err(GraphError::TooLarge(g.edge_count(), max_edges.min(64)));
    }
    if let Some(&e) = bridges(g).first() {
        return Err(GraphError::HasBridge(e));
    }
    let cycles = simple_cycles(g, 1 << 20)?;
    let masks: Vec<u64> = cycles
        .iter()
        .map(|c| {
            c.edges
                .iter()
                .map(|e| 1u64 << g.edges().binary_search(e).expect("cycle edge in graph"))
                .fold(0, |a, b| a | b)
        })
        .collect();
    let mut need = vec![2u8; g.edge_count()];
    let mut chosen = Vec::new();
    let mut nodes = 0u64;
    match search(&masks, &mut need, &mut chosen, &mut nodes, budget) {
        Some(true) => Ok(DoubleCover::Found { cycles: chosen.into_iter().map(|i| cycles[i].clone()).collect() }),
        Some(false) => Ok(DoubleCover::ProvenAbsent),
        None => Ok(DoubleCover::BudgetExhausted { nodes }),
    }
}

/// `Some(found)` when the subtree was fully decided, `None` on budget exhaustion.
fn search(masks: &[u64], need: &mut [u8], chosen: &mut Vec<usize>, nodes: &mut u64, budget: u64) -> Option<bool> {
    *nodes += 1;
    if *nodes > budget {
        return None;
    }
    let Some(first) = need.iter().position(|&k| k > 0) else {
        return Some(true);
    };
    let open: u64 = need.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, _)| 1u64 << i).fold(0, |a, b| a | b);
    let fits = |m: u64| m & !open == 0;
    // Every edge still needing cover must lie on some cycle that fits.
    if need.iter().enumerate().any(|(i, &k)| k > 0 && !masks.iter().any(|&m| m >> i & 1 == 1 && fits(m))) {
        return Some(false);
    }
    for (ci, &m) in masks.iter().enumerate() {
        if m >> first & 1 == 0 || !fits(m) {
            continue;
        }
        apply(need, m, false);
        chosen.push(ci);
        let r = search(masks, need, chosen, nodes, budget);
        if r != Some(false) {
            return r;
        }
        chosen.pop();
        apply(need, m, true);
    }
    Some(false)
}

fn apply(need: &mut [u8], mask: u64, undo: bool) {
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        if undo {
            need[i] += 1;
        } else {
            need[i] -= 1;
        }
    }
}
