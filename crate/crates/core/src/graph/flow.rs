use std::collections::VecDeque;

use super::{Graph, GraphError, Vertex};

/// Unit-capacity residual network: each undirected edge becomes two arcs.
struct Network {
    /// Per vertex: arc ids leaving it.
    out: Vec<Vec<usize>>,
    head: Vec<usize>,
    cap: Vec<i32>,
}

impl Network {
    fn of(g: &Graph) -> Self {
        let n = g.vertex_count();
        let mut net = Network { out: vec![Vec::new(); n], head: Vec::new(), cap: Vec::new() };
        for e in g.edges() {
            let a = g.index_of(e.lo()).expect("endpoint");
            let b = g.index_of(e.hi()).expect("endpoint");
            // Arc 2i goes a→b, arc 2i+1 goes b→a; each is the other's reverse.
            net.out[a].push(net.head.len());
            net.head.push(b);
            net.cap.push(1);
            net.out[b].push(net.head.len());
            net.head.push(a);
            net.cap.push(1);
        }
        net
    }

    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut via = vec![usize::MAX; self.out.len()];
        let mut seen = vec![false; self.out.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            if v == t {
                break;
            }
            for &arc in &self.out[v] {
                let w = self.head[arc];
                if self.cap[arc] > 0 && !seen[w] {
                    seen[w] = true;
                    via[w] = arc;
                    queue.push_back(w);
                }
            }
        }
        if !seen[t] {
            return false;
        }
        let mut v = t;
        while v != s {
            let arc = via[v];
            self.cap[arc] -= 1;
            self.cap[arc ^ 1] += 1;
            v = self.head[arc ^ 1];
        }
        true
    }

    fn max_flow(&mut self, s: usize, t: usize, limit: usize) -> usize {
        let mut flow = 0;
        while flow < limit && self.augment(s, t) {
            flow += 1;
        }
        flow
    }
}

fn endpoints(g: &Graph, x: Vertex, y: Vertex) -> Result<(usize, usize), GraphError> {
    let s = g.index_of(x).ok_or(GraphError::NoSuchVertex(x))?;
    let t = g.index_of(y).ok_or(GraphError::NoSuchVertex(y))?;
    if s == t {
        return Err(GraphError::SameEndpoints);
    }
    Ok((s, t))
}

/// `γ_G(x, y)`: the least number of edges separating `x` from `y`.
pub fn edge_connectivity(g: &Graph, x: Vertex, y: Vertex) -> Result<usize, GraphError> {
    let (s, t) = endpoints(g, x, y)?;
    Ok(Network::of(g).max_flow(s, t, usize::MAX))
}

/// `k` pairwise edge-disjoint `x`–`y` paths, as vertex sequences.
pub fn edge_disjoint_paths(g: &Graph, x: Vertex, y: Vertex, k: usize) -> Result<Vec<Vec<Vertex>>, GraphError> {
    let (s, t) = endpoints(g, x, y)?;
    let mut net = Network::of(g);
    let flow = net.max_flow(s, t, k);
    if flow < k {
        let available = flow + net.max_flow(s, t, usize::MAX);
        return Err(GraphError::TooManyPaths { requested: k, available });
    }
    // An edge carries flow a→b when arc 2i is saturated and arc 2i+1 is not.
    let n = g.vertex_count();
    let mut carrying: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..g.edge_count() {
        let (fwd, back) = (2 * i, 2 * i + 1);
        if net.cap[fwd] == 0 && net.cap[back] == 2 {
            carrying[net.head[back]].push(net.head[fwd]);
        } else if net.cap[back] == 0 && net.cap[fwd] == 2 {
            carrying[net.head[fwd]].push(net.head[back]);
        }
    }
    for l in &mut carrying {
        l.sort_unstable_by(|a, b| b.cmp(a));
    }
    let mut paths = Vec::with_capacity(k);
    for _ in 0..k {
        let mut walk = vec![s];
        let mut pos = vec![usize::MAX; n];
        pos[s] = 0;
        let mut v = s;
        while v != t {
            let w = carrying[v].pop().expect("flow conservation");
            if pos[w] != usize::MAX {
                // Erase the loop just closed.
                for u in walk.drain(pos[w] + 1..) {
                    pos[u] = usize::MAX;
                }
            } else {
                pos[w] = walk.len();
                walk.push(w);
            }
            v = w;
        }
        paths.push(walk.into_iter().map(|i| g.vertices()[i]).collect());
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::super::named::*;
    use super::super::{Edge, EdgeSet};
    use super::*;
    use std::collections::BTreeSet;

    /// Smallest edge set whose removal leaves `x` and `y` in different components.
    fn connectivity_by_brute_force(g: &Graph, x: Vertex, y: Vertex) -> usize {
        let m = g.edge_count();
        let mut best = m;
        for mask in 0u32..(1 << m) {
            let size = mask.count_ones() as usize;
            if size >= best {
                continue;
            }
            let f: EdgeSet = g.edges().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            let comps = g.without_edges(&f).components();
            if !comps.iter().any(|c| c.contains(&x) && c.contains(&y)) {
                best = size;
            }
        }
        best
    }

    fn check_paths(g: &Graph, x: Vertex, y: Vertex, paths: &[Vec<Vertex>]) {
        let mut used = BTreeSet::new();
        for p in paths {
            assert_eq!(p.first(), Some(&x));
            assert_eq!(p.last(), Some(&y));
            let distinct: BTreeSet<_> = p.iter().collect();
            assert_eq!(distinct.len(), p.len(), "path repeats a vertex");
            for w in p.windows(2) {
                let e = Edge::of(w[0], w[1]);
                assert!(g.has_edge(e));
                assert!(used.insert(e), "edge {e} reused");
            }
        }
    }

    #[test]
    fn connectivity_examples() {
        let two = Graph::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(edge_connectivity(&two, 0, 3).unwrap(), 0);
        assert_eq!(edge_connectivity(&cycle(4), 0, 1).unwrap(), 2);
        assert_eq!(edge_connectivity(&complete(4), 1, 3).unwrap(), 3);
        assert_eq!(edge_connectivity(&cycle(4), 0, 0), Err(GraphError::SameEndpoints));
        assert_eq!(edge_connectivity(&cycle(4), 0, 9), Err(GraphError::NoSuchVertex(9)));
    }

    #[test]
    fn path_examples() {
        assert!(edge_disjoint_paths(&cycle(4), 0, 1, 0).unwrap().is_empty());
        let arcs = edge_disjoint_paths(&cycle(4), 0, 1, 2).unwrap();
        check_paths(&cycle(4), 0, 1, &arcs);
        let mut lens: Vec<_> = arcs.iter().map(Vec::len).collect();
        lens.sort();
        assert_eq!(lens, vec![2, 4]);
        let k4 = edge_disjoint_paths(&complete(4), 0, 2, 3).unwrap();
        check_paths(&complete(4), 0, 2, &k4);
        assert_eq!(
            edge_disjoint_paths(&cycle(4), 0, 1, 3),
            Err(GraphError::TooManyPaths { requested: 3, available: 2 })
        );
    }

    #[test]
    fn menger_on_small_graphs() {
        for g in [complete(5), bowtie(), cycle(6), path(4), Graph::from_pairs(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (0, 5)]).unwrap()] {
            for &x in g.vertices() {
                for &y in g.vertices() {
                    if x >= y {
                        continue;
                    }
                    let gamma = edge_connectivity(&g, x, y).unwrap();
                    assert_eq!(gamma, connectivity_by_brute_force(&g, x, y));
                    let paths = edge_disjoint_paths(&g, x, y, gamma).unwrap();
                    assert_eq!(paths.len(), gamma);
                    check_paths(&g, x, y, &paths);
                }
            }
        }
    }
}
