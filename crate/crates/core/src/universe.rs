//! Hereditarily finite sets in Ackermann coding and finite ranks `V_n`.
//!
//! Bit `k` of a code is set iff the set with code `k` is a member, so
//! `code({a, b, ...}) = Σ 2^code(member)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph::{Edge, Graph, GraphError, ObjectSet, Vertex};
use crate::structure::{FinStructure, Subset};

/// Widest code accepted, in bits. Members are bit positions, so this also
/// bounds every member's code.
pub const MAX_CODE_BITS: u64 = 1 << 24;

/// Largest rank that can be built; rank 5 additionally needs an opt-in.
pub const MAX_RANK: usize = 5;

/// `|V_n|` for `n = 0..=5`; also the least code outside `V_n`.
pub const RANK_SIZES: [u64; 6] = [0, 1, 2, 4, 16, 65536];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniverseError {
    #[error("rank {0} exceeds the cap of {MAX_RANK}")]
    RankCap(usize),
    #[error("rank 5 has 65536 elements; pass the opt-in flag to build it")]
    RankGate,
    #[error("a member code needs {0} bits, above the limit of {MAX_CODE_BITS}")]
    TooWide(String),
    #[error("encoded object has rank {rank}, not below the limit {limit}")]
    RankOverflow { rank: u64, limit: u64 },
    #[error("{0} is not in the domain of the function")]
    NotInDomain(HfCode),
    #[error("the function takes several values at {0}")]
    NotSingleValued(HfCode),
    #[error("member {0} is not an ordered pair")]
    NotAPair(HfCode),
    #[error("edge {edge} and vertex {vertex} have the same code")]
    VertexEdgeCollision { edge: Edge, vertex: Vertex },
    #[error("code does not decode to a graph: {0}")]
    NotAGraph(String),
    #[error("graph has {0} vertices; the ambient encoding supports at most {1}")]
    TooManyVertices(usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Ackermann code of a hereditarily finite set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HfCode(BigUint);

impl HfCode {
    pub fn empty() -> Self {
        HfCode(BigUint::default())
    }

    pub fn from_u64(c: u64) -> Self {
        HfCode(BigUint::from(c))
    }

    pub fn from_big(c: BigUint) -> Self {
        HfCode(c)
    }

    pub fn as_big(&self) -> &BigUint {
        &self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        u64::try_from(&self.0).ok()
    }

    pub fn is_empty(&self) -> bool {
        self.0.bits() == 0
    }

    pub fn bits(&self) -> u64 {
        self.0.bits()
    }

    /// Member codes in increasing order.
    pub fn member_positions(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for (w, digit) in self.0.iter_u64_digits().enumerate() {
            let mut d = digit;
            while d != 0 {
                out.push(w as u64 * 64 + d.trailing_zeros() as u64);
                d &= d - 1;
            }
        }
        out
    }

    pub fn members(&self) -> Vec<HfCode> {
        self.member_positions().into_iter().map(HfCode::from_u64).collect()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(&self, x: &HfCode) -> bool {
        x.to_u64().is_some_and(|p| self.0.bit(p))
    }

    /// A member's code as a bit position, if it fits.
    fn position(x: &HfCode) -> Result<u64, UniverseError> {
        match x.to_u64() {
            Some(p) if p < MAX_CODE_BITS => Ok(p),
            _ => Err(UniverseError::TooWide(format!("{}+", x.bits().max(64)))),
        }
    }

    pub fn from_members<'a>(members: impl IntoIterator<Item = &'a HfCode>) -> Result<HfCode, UniverseError> {
        let mut c = BigUint::default();
        for m in members {
            c.set_bit(Self::position(m)?, true);
        }
        Ok(HfCode(c))
    }

    pub fn singleton(x: &HfCode) -> Result<HfCode, UniverseError> {
        HfCode::from_members([x])
    }
}

impl fmt::Display for HfCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for HfCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HfCode({})", self.0)
    }
}

impl FromStr for HfCode {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(HfCode(s.parse()?))
    }
}

// Decimal strings in JSON, since codes routinely exceed 64 bits.
impl Serialize for HfCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for HfCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `{x, y}`
pub fn hf_pair(x: &HfCode, y: &HfCode) -> Result<HfCode, UniverseError> {
    HfCode::from_members([x, y])
}

/// `∪z`
pub fn hf_union(z: &HfCode) -> HfCode {
    let mut c = BigUint::default();
    for m in z.members() {
        c |= m.0;
    }
    HfCode(c)
}

/// `x ∪ {x}`
pub fn hf_succ(x: &HfCode) -> Result<HfCode, UniverseError> {
    let mut c = x.0.clone();
    c.set_bit(HfCode::position(x)?, true);
    Ok(HfCode(c))
}

/// Kuratowski pair `⟨a, b⟩ = {{a}, {a, b}}`.
pub fn kuratowski(a: &HfCode, b: &HfCode) -> Result<HfCode, UniverseError> {
    hf_pair(&HfCode::singleton(a)?, &hf_pair(a, b)?)
}

/// Inverse of [`kuratowski`].
pub fn unpair(p: &HfCode) -> Option<(HfCode, HfCode)> {
    let parts = p.members();
    match parts.as_slice() {
        [s] => {
            let m = s.members();
            (m.len() == 1).then(|| (m[0].clone(), m[0].clone()))
        }
        [s, t] => {
            let (sm, tm) = (s.members(), t.members());
            // Codes order {a} below {a, b}.
            if sm.len() == 1 && tm.len() == 2 && tm.contains(&sm[0]) {
                let a = sm[0].clone();
                let b = tm.into_iter().find(|x| *x != a).expect("two members");
                Some((a, b))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// `g(x)` for a set `g` of ordered pairs.
pub fn hf_apply(g: &HfCode, x: &HfCode) -> Result<HfCode, UniverseError> {
    let mut value: Option<HfCode> = None;
    for p in g.members() {
        let (a, b) = unpair(&p).ok_or_else(|| UniverseError::NotAPair(p.clone()))?;
        if a == *x {
            match &value {
                Some(v) if *v != b => return Err(UniverseError::NotSingleValued(x.clone())),
                _ => value = Some(b),
            }
        }
    }
    value.ok_or_else(|| UniverseError::NotInDomain(x.clone()))
}

/// Least `n` with `x ∈ V_{n+1}`, i.e. `rank(S) = 1 + max rank(member)`.
///
/// `V_n` is the initial segment of codes below `RANK_SIZES[n]`, so the
/// largest member always has the largest rank.
pub fn hf_rank(x: &HfCode) -> u64 {
    match x.member_positions().last() {
        None => 0,
        Some(&top) => 1 + rank_u64(top),
    }
}

fn rank_u64(c: u64) -> u64 {
    if c == 0 {
        0
    } else {
        1 + rank_u64(63 - c.leading_zeros() as u64)
    }
}

/// Von Neumann natural `k`.
pub fn von_neumann(k: u32) -> Result<HfCode, UniverseError> {
    let mut x = HfCode::empty();
    for _ in 0..k {
        x = hf_succ(&x)?;
    }
    Ok(x)
}

fn von_neumann_index(x: &HfCode) -> Option<u32> {
    let mut k = 0;
    let mut nu = HfCode::empty();
    while nu.0 <= x.0 {
        if nu == *x {
            return Some(k);
        }
        nu = hf_succ(&nu).ok()?;
        k += 1;
    }
    None
}

/// Set-builder rendering, `∅` for the empty set, truncated past `limit` chars.
pub fn render(x: &HfCode, limit: usize) -> String {
    fn go(c: u64, out: &mut String, limit: usize) {
        if out.len() > limit {
            return;
        }
        if c == 0 {
            out.push('∅');
            return;
        }
        out.push('{');
        let mut first = true;
        let mut d = c;
        while d != 0 {
            if !first {
                out.push_str(", ");
            }
            first = false;
            go(d.trailing_zeros() as u64, out, limit);
            d &= d - 1;
        }
        out.push('}');
    }
    let mut out = String::new();
    if x.is_empty() {
        return "∅".into();
    }
    out.push('{');
    for (i, m) in x.member_positions().into_iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        go(m, &mut out, limit);
        if out.len() > limit {
            out.push('…');
            return out;
        }
    }
    out.push('}');
    out
}

/// A finite set of HF codes viewed as a structure under restricted `∈`.
/// Element identifiers follow code order.
#[derive(Debug, Clone)]
pub struct HfUniverse {
    codes: Vec<HfCode>,
    index: HashMap<HfCode, usize>,
    structure: FinStructure,
}

impl HfUniverse {
    pub fn from_codes(codes: impl IntoIterator<Item = HfCode>) -> Self {
        let set: BTreeSet<HfCode> = codes.into_iter().collect();
        let codes: Vec<HfCode> = set.into_iter().collect();
        let index: HashMap<HfCode, usize> = codes.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let preds = codes
            .iter()
            .map(|c| {
                c.member_positions()
                    .into_iter()
                    .filter_map(|p| index.get(&HfCode::from_u64(p)).copied())
                    .collect()
            })
            .collect();
        HfUniverse { codes, index, structure: FinStructure::from_preds(preds) }
    }

    /// The seeds together with all members of members, recursively.
    pub fn transitive_closure(seeds: impl IntoIterator<Item = HfCode>) -> Self {
        let mut seen: BTreeSet<HfCode> = BTreeSet::new();
        let mut stack: Vec<HfCode> = seeds.into_iter().collect();
        while let Some(c) = stack.pop() {
            if seen.contains(&c) {
                continue;
            }
            stack.extend(c.members().into_iter().filter(|m| !seen.contains(m)));
            seen.insert(c);
        }
        HfUniverse::from_codes(seen)
    }

    pub fn structure(&self) -> &FinStructure {
        &self.structure
    }

    pub fn codes(&self) -> &[HfCode] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn id_of(&self, c: &HfCode) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn code(&self, id: usize) -> &HfCode {
        &self.codes[id]
    }

    /// Code of the set `{code(a) : a ∈ subset}`, when representable.
    pub fn encode_subset(&self, subset: &Subset) -> Result<HfCode, UniverseError> {
        HfCode::from_members(subset.iter().map(|&a| &self.codes[a]))
    }

    pub fn is_transitive(&self) -> bool {
        self.codes
            .iter()
            .all(|c| c.member_positions().into_iter().all(|p| self.index.contains_key(&HfCode::from_u64(p))))
    }

    /// Set notation for small codes, the decimal code otherwise.
    pub fn label(&self, id: usize) -> String {
        let c = &self.codes[id];
        if c.bits() <= 64 {
            render(c, 200)
        } else {
            format!("#{c}")
        }
    }
}

/// `V_n` as a structure.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub rank: usize,
    pub universe: HfUniverse,
}

/// `V_n` for `n ≤ 5`. Identifiers coincide with codes because `V_n` is the
/// initial segment of codes below `|V_n|`; code order is rank order.
pub fn build_hierarchy(n: usize, allow_rank5: bool) -> Result<Hierarchy, UniverseError> {
    if n > MAX_RANK {
        return Err(UniverseError::RankCap(n));
    }
    if n == MAX_RANK && !allow_rank5 {
        return Err(UniverseError::RankGate);
    }
    let size = RANK_SIZES[n] as usize;
    let codes: Vec<HfCode> = (0..size as u64).map(HfCode::from_u64).collect();
    let index = codes.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let preds = (0..size)
        .map(|b| (0..usize::BITS as usize).filter(|&k| b >> k & 1 == 1).collect())
        .collect();
    Ok(Hierarchy { rank: n, universe: HfUniverse { codes, index, structure: FinStructure::from_preds(preds) } })
}

/// A graph as the Kuratowski pair `⟨V, E⟩`, vertices as von Neumann naturals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphCode {
    pub code: HfCode,
    pub vertex_codes: BTreeMap<Vertex, HfCode>,
    pub edge_codes: BTreeMap<Edge, HfCode>,
    pub rank: u64,
}

pub fn encode_graph(g: &Graph, rank_limit: Option<u64>) -> Result<GraphCode, UniverseError> {
    let mut vertex_codes = BTreeMap::new();
    for &v in g.vertices() {
        vertex_codes.insert(v, von_neumann(v)?);
    }
    let by_code: HashMap<&HfCode, Vertex> = vertex_codes.iter().map(|(&v, c)| (c, v)).collect();
    let mut edge_codes = BTreeMap::new();
    for &e in g.edges() {
        let c = hf_pair(&vertex_codes[&e.lo()], &vertex_codes[&e.hi()])?;
        if let Some(&vertex) = by_code.get(&c) {
            return Err(UniverseError::VertexEdgeCollision { edge: e, vertex });
        }
        edge_codes.insert(e, c);
    }
    let vs = HfCode::from_members(vertex_codes.values())?;
    let es = HfCode::from_members(edge_codes.values())?;
    let code = kuratowski(&vs, &es)?;
    let rank = hf_rank(&code);
    if let Some(limit) = rank_limit {
        if rank >= limit {
            return Err(UniverseError::RankOverflow { rank, limit });
        }
    }
    Ok(GraphCode { code, vertex_codes, edge_codes, rank })
}

pub fn decode_graph(code: &HfCode) -> Result<Graph, UniverseError> {
    let bad = |m: &str| UniverseError::NotAGraph(m.to_string());
    let (vs, es) = unpair(code).ok_or_else(|| bad("not an ordered pair"))?;
    let vertices = vs
        .members()
        .iter()
        .map(|v| von_neumann_index(v).ok_or_else(|| bad("a vertex is not a natural number")))
        .collect::<Result<Vec<_>, _>>()?;
    let edges = es
        .members()
        .iter()
        .map(|e| match e.members().as_slice() {
            [a, b] => {
                let a = von_neumann_index(a).ok_or_else(|| bad("an endpoint is not a natural number"))?;
                let b = von_neumann_index(b).ok_or_else(|| bad("an endpoint is not a natural number"))?;
                Ok(Edge::of(a, b))
            }
            _ => Err(bad("an edge is not a two-element set")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Graph::new(vertices, edges)?)
}

/// Vertex count supported by [`GraphAmbient`].
pub const MAX_AMBIENT_VERTICES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphObject {
    Vertex(Vertex),
    Edge(Edge),
}

/// A graph embedded in the hereditarily finite sets so that vertices and
/// edges are distinct sets and no vertex belongs to the closure of another.
///
/// The `i`-th vertex is `{x_{K+i}}` where `x_k` is the set with code `k`;
/// `K` is chosen so that `2^K` exceeds every `K+i`, which keeps vertex codes
/// clear of the closure of all `x_k`. An edge is the two-element set of its
/// endpoints. The ambient structure is the transitive closure of `V ∪ E`;
/// the graph itself and its vertex and edge sets are left out, as their
/// codes are far beyond any usable width.
#[derive(Debug, Clone)]
pub struct GraphAmbient {
    pub graph: Graph,
    pub universe: HfUniverse,
    /// Least `n` with every ambient element in `V_n`.
    pub rank: u64,
    vertex_ids: BTreeMap<Vertex, usize>,
    edge_ids: BTreeMap<Edge, usize>,
    objects: Vec<Option<GraphObject>>,
}

impl GraphAmbient {
    pub fn new(g: &Graph) -> Result<Self, UniverseError> {
        let n = g.vertex_count();
        if n > MAX_AMBIENT_VERTICES {
            return Err(UniverseError::TooManyVertices(n, MAX_AMBIENT_VERTICES));
        }
        let offset = (1u64..).find(|&k| (1u64 << k) > k + n as u64).expect("some offset works");
        let vertex_codes: BTreeMap<Vertex, HfCode> = g
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, HfCode::from_big(BigUint::from(1u8) << (offset + i as u64))))
            .collect();
        let mut edge_codes = BTreeMap::new();
        for &e in g.edges() {
            edge_codes.insert(e, hf_pair(&vertex_codes[&e.lo()], &vertex_codes[&e.hi()])?);
        }
        let universe = HfUniverse::transitive_closure(vertex_codes.values().chain(edge_codes.values()).cloned());
        let mut objects = vec![None; universe.len()];
        let mut vertex_ids = BTreeMap::new();
        for (&v, c) in &vertex_codes {
            let id = universe.id_of(c).expect("seeded");
            objects[id] = Some(GraphObject::Vertex(v));
            vertex_ids.insert(v, id);
        }
        let mut edge_ids = BTreeMap::new();
        for (&e, c) in &edge_codes {
            let id = universe.id_of(c).expect("seeded");
            objects[id] = Some(GraphObject::Edge(e));
            edge_ids.insert(e, id);
        }
        let rank = universe.codes().last().map_or(0, |c| hf_rank(c) + 1);
        Ok(GraphAmbient { graph: g.clone(), universe, rank, vertex_ids, edge_ids, objects })
    }

    pub fn structure(&self) -> &FinStructure {
        self.universe.structure()
    }

    pub fn vertex_id(&self, v: Vertex) -> Option<usize> {
        self.vertex_ids.get(&v).copied()
    }

    pub fn edge_id(&self, e: Edge) -> Option<usize> {
        self.edge_ids.get(&e).copied()
    }

    pub fn object(&self, id: usize) -> Option<GraphObject> {
        self.objects.get(id).copied().flatten()
    }

    /// The graph objects among `m`; other elements are dropped.
    pub fn objects_of(&self, m: &Subset) -> ObjectSet {
        let mut out = ObjectSet::default();
        for &id in m {
            match self.object(id) {
                Some(GraphObject::Vertex(v)) => {
                    out.vertices.insert(v);
                }
                Some(GraphObject::Edge(e)) => {
                    out.edges.insert(e);
                }
                None => {}
            }
        }
        out
    }

    pub fn subset_of(&self, objects: &ObjectSet) -> Subset {
        let vs = objects.vertices.iter().filter_map(|&v| self.vertex_id(v));
        let es = objects.edges.iter().filter_map(|&e| self.edge_id(e));
        vs.chain(es).collect()
    }

    /// Identifiers of `V(G) ∪ E(G)`.
    pub fn cover(&self) -> Subset {
        self.vertex_ids.values().chain(self.edge_ids.values()).copied().collect()
    }

    pub fn label(&self, id: usize) -> String {
        match self.object(id) {
            Some(GraphObject::Vertex(v)) => format!("v{v}"),
            Some(GraphObject::Edge(e)) => format!("e{}_{}", e.lo(), e.hi()),
            None => self.universe.label(id),
        }
    }
}
