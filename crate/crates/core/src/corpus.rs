//! Seeded random graph corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, EdgeSet, Graph};

const REGULAR_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Generator {
    /// Each pair joined independently with probability `p`.
    Gnp { n: u32, p: f64, count: usize },
    /// Uniform-ish `d`-regular graphs from the configuration model.
    Regular { n: u32, d: u32, count: usize },
    /// Symmetric difference of `d` random cycles, so every degree is even.
    UnionOfCycles { n: u32, d: u32, count: usize },
}

impl Generator {
    pub fn count(&self) -> usize {
        match *self {
            Generator::Gnp { count, .. } | Generator::Regular { count, .. } | Generator::UnionOfCycles { count, .. } => count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub generator: Generator,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("edge probability {0} is outside [0, 1]")]
    BadProbability(String),
    #[error("no {d}-regular graph on {n} vertices")]
    NoRegular { n: u32, d: u32 },
    #[error("configuration model gave no simple {d}-regular graph on {n} vertices in {REGULAR_ATTEMPTS} tries")]
    RegularAttempts { n: u32, d: u32 },
    #[error("cycles need at least 3 vertices, got {0}")]
    TooFewForCycles(u32),
}

/// The corpus for a spec; the same spec always yields the same graphs.
pub fn generate(spec: &CorpusSpec) -> Result<Vec<Graph>, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.generator.count()).map(|_| generate_one(&spec.generator, &mut rng)).collect()
}

fn generate_one(generator: &Generator, rng: &mut impl Rng) -> Result<Graph, CorpusError> {
    match *generator {
        Generator::Gnp { n, p, .. } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(CorpusError::BadProbability(p.to_string()));
            }
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(p) {
                        edges.push(Edge::of(a, b));
                    }
                }
            }
            Ok(Graph::new(0..n, edges).expect("simple by construction"))
        }
        Generator::Regular { n, d, .. } => {
            if d >= n.max(1) || (n * d) % 2 == 1 {
                return Err(CorpusError::NoRegular { n, d });
            }
            let mut stubs: Vec<u32> = (0..n).flat_map(|v| std::iter::repeat_n(v, d as usize)).collect();
            'attempt: for _ in 0..REGULAR_ATTEMPTS {
                stubs.shuffle(rng);
                let mut edges = EdgeSet::new();
                for pair in stubs.chunks(2) {
                    match Edge::new(pair[0], pair[1]) {
                        Some(e) if edges.insert(e) => {}
                        _ => continue 'attempt,
                    }
                }
                return Ok(Graph::new(0..n, edges).expect("simple by construction"));
            }
            Err(CorpusError::RegularAttempts { n, d })
        }
        Generator::UnionOfCycles { n, d, .. } => {
            if n < 3 {
                return Err(CorpusError::TooFewForCycles(n));
            }
            let mut edges = EdgeSet::new();
            let mut vertices: Vec<u32> = (0..n).collect();
            for _ in 0..d {
                let len = rng.gen_range(3..=n) as usize;
                vertices.shuffle(rng);
                for i in 0..len {
                    let e = Edge::of(vertices[i], vertices[(i + 1) % len]);
                    if !edges.remove(&e) {
                        edges.insert(e);
                    }
                }
            }
            Ok(Graph::new(0..n, edges).expect("simple by construction"))
        }
    }
}
