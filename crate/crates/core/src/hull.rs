//! Tarski–Vaught witness closure and increasing chains of closed sets.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{Formula, FormulaPack};
use crate::structure::{
    is_sigma_elementary_with_budget, ElementarityFailure, EvalError, Evaluator, FinStructure, Subset, Valuation,
    DEFAULT_BUDGET,
};
use crate::universe::HfUniverse;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HullError {
    #[error("pack `{0}` is not closed under subformulas")]
    NotClosed(String),
    #[error("seed element {0} is outside the structure")]
    SeedOutOfRange(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl HullError {
    pub fn is_budget(&self) -> bool {
        matches!(self, HullError::Eval(EvalError::BudgetExceeded(_)))
    }
}

/// One witness added beyond the seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    /// Index of the existential formula in the pack.
    pub formula: usize,
    pub valuation: Valuation,
    pub witness: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hull {
    /// The requested seed together with the pack's constants.
    pub seed: Subset,
    pub carrier: Subset,
    pub trace: Vec<TraceStep>,
    pub passes: usize,
    pub steps: u64,
}

struct Obligation<'p> {
    index: usize,
    var: &'p str,
    body: &'p Formula,
    free: Vec<String>,
}

fn obligations(pack: &FormulaPack) -> Vec<Obligation<'_>> {
    pack.formulas
        .iter()
        .enumerate()
        .filter_map(|(index, f)| match f {
            Formula::Exists(var, body) => Some(Obligation { index, var, body, free: f.free_vars() }),
            _ => None,
        })
        .collect()
}

/// Least `b` with `N ⊨ ψ[v, x := b]`.
fn least_witness<'p>(
    ev: &mut Evaluator<'_>,
    size: usize,
    ob: &Obligation<'p>,
    env: &mut Vec<(&'p str, usize)>,
) -> Result<Option<usize>, EvalError> {
    for b in 0..size {
        env.push((ob.var, b));
        let hit = ev.eval_env(ob.body, env);
        env.pop();
        if hit? {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

fn check_inputs(n: &FinStructure, pack: &FormulaPack, seed: &Subset) -> Result<Subset, HullError> {
    if !pack.is_subformula_closed() {
        return Err(HullError::NotClosed(pack.name.clone()));
    }
    if let Some(&a) = seed.iter().find(|&&a| a >= n.size()) {
        return Err(HullError::SeedOutOfRange(a));
    }
    let constants = pack.constants();
    if let Some(&c) = constants.iter().find(|&&c| c >= n.size()) {
        return Err(EvalError::DanglingConstant(c).into());
    }
    if pack.formulas.iter().any(Formula::is_relativized_anywhere) {
        return Err(EvalError::Relativized.into());
    }
    Ok(seed.union(&constants).copied().collect())
}

pub fn hull(n: &FinStructure, pack: &FormulaPack, seed: &Subset) -> Result<Hull, HullError> {
    hull_with_budget(n, pack, seed, DEFAULT_BUDGET)
}

/// Least set containing `seed` (and the pack's constants) such that for
/// every existential formula of the pack and every valuation of its free
/// variables into the set, the least witness in `N` belongs to the set.
///
/// Each pass only revisits valuations that use an element added by the
/// previous pass; the others were settled already.
pub fn hull_with_budget(n: &FinStructure, pack: &FormulaPack, seed: &Subset, budget: u64) -> Result<Hull, HullError> {
    let seed = check_inputs(n, pack, seed)?;
    let obs = obligations(pack);
    let mut ev = Evaluator::new(n, budget);
    let mut carrier = seed.clone();
    let mut trace = Vec::new();
    let mut settled: Vec<bool> = vec![false; n.size()];
    let mut passes = 0;
    loop {
        let snapshot: Vec<usize> = carrier.iter().copied().collect();
        let fresh: Vec<bool> = snapshot.iter().map(|&a| !settled[a]).collect();
        let first_pass = passes == 0;
        passes += 1;
        let mut grew = false;
        for ob in &obs {
            let k = ob.free.len();
            if k > 0 && snapshot.is_empty() {
                continue;
            }
            let mut digits = vec![0usize; k];
            loop {
                if first_pass || digits.iter().any(|&d| fresh[d]) {
                    let mut env: Vec<(&str, usize)> =
                        ob.free.iter().zip(&digits).map(|(x, &d)| (x.as_str(), snapshot[d])).collect();
                    if let Some(b) = least_witness(&mut ev, n.size(), ob, &mut env)? {
                        if carrier.insert(b) {
                            grew = true;
                            trace.push(TraceStep {
                                formula: ob.index,
                                valuation: env.iter().map(|&(x, a)| (x.to_string(), a)).collect(),
                                witness: b,
                            });
                        }
                    }
                }
                if !advance(&mut digits, snapshot.len()) {
                    break;
                }
            }
        }
        for &a in &snapshot {
            settled[a] = true;
        }
        if !grew {
            break;
        }
    }
    Ok(Hull { seed, carrier, trace, passes, steps: ev.steps() })
}

/// Next tuple in lexicographic order over `0..base`; false after the last.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HullVerdict {
    pub elementarity: Option<ElementarityFailure>,
    /// Why the trace replay failed, if it did.
    pub replay: Option<String>,
}

impl HullVerdict {
    pub fn ok(&self) -> bool {
        self.elementarity.is_none() && self.replay.is_none()
    }
}

pub fn verify_hull(n: &FinStructure, pack: &FormulaPack, h: &Hull) -> Result<HullVerdict, EvalError> {
    verify_hull_with_budget(n, pack, h, DEFAULT_BUDGET)
}

/// Re-checks a hull by full Σ-elementarity enumeration and by replaying
/// its trace from the seed.
pub fn verify_hull_with_budget(n: &FinStructure, pack: &FormulaPack, h: &Hull, budget: u64) -> Result<HullVerdict, EvalError> {
    let elementarity = is_sigma_elementary_with_budget(&h.carrier, n, pack, budget)?;
    Ok(HullVerdict { elementarity, replay: replay(n, pack, h, budget)? })
}

fn replay(n: &FinStructure, pack: &FormulaPack, h: &Hull, budget: u64) -> Result<Option<String>, EvalError> {
    let obs = obligations(pack);
    let mut ev = Evaluator::new(n, budget);
    let mut current = h.seed.clone();
    for (i, step) in h.trace.iter().enumerate() {
        let Some(ob) = obs.iter().find(|o| o.index == step.formula) else {
            return Ok(Some(format!("step {i}: formula {} is not existential", step.formula)));
        };
        if ob.free.len() != step.valuation.len() || ob.free.iter().any(|x| !step.valuation.contains_key(x)) {
            return Ok(Some(format!("step {i}: valuation does not match the formula's free variables")));
        }
        if let Some((x, _)) = step.valuation.iter().find(|(_, a)| !current.contains(a)) {
            return Ok(Some(format!("step {i}: {x} is valued outside the set built so far")));
        }
        let mut env: Vec<(&str, usize)> = step.valuation.iter().map(|(x, &a)| (x.as_str(), a)).collect();
        match least_witness(&mut ev, n.size(), ob, &mut env)? {
            Some(b) if b == step.witness => {
                current.insert(b);
            }
            other => return Ok(Some(format!("step {i}: least witness is {other:?}, trace says {}", step.witness))),
        }
    }
    if current != h.carrier {
        return Ok(Some("replayed set differs from the carrier".into()));
    }
    Ok(None)
}

/// Whether a stage contains the code of the previous stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SelfEncoding {
    /// The ambient structure is not a set of HF codes.
    NotApplicable,
    /// The previous stage's code is an element; it was added to this stage.
    Included { element: usize },
    /// The code is not representable or not in the ambient universe.
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainStage {
    pub hull: Hull,
    /// Cover element forced into this stage, absent for the first stage.
    pub forced: Option<usize>,
    pub self_encoding: SelfEncoding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chain {
    pub pack: String,
    pub stages: Vec<ChainStage>,
    /// Edge-vertex coherence of every stage, when a graph is attached.
    pub coherent: Option<bool>,
}

impl Chain {
    pub fn carriers(&self) -> Vec<Subset> {
        self.stages.iter().map(|s| s.hull.carrier.clone()).collect()
    }
}

/// `M₀ = hull(seed)`; while `cover ⊄ M_i`, `M_{i+1}` is the hull of `M_i`,
/// the least missing cover element and, when `universe` is given and the
/// code of `M_i` is one of its elements, that element.
pub fn chain(
    n: &FinStructure,
    pack: &FormulaPack,
    seed: &Subset,
    cover: &Subset,
    universe: Option<&HfUniverse>,
    budget: u64,
) -> Result<Chain, HullError> {
    if let Some(&a) = cover.iter().find(|&&a| a >= n.size()) {
        return Err(HullError::SeedOutOfRange(a));
    }
    let first = hull_with_budget(n, pack, seed, budget)?;
    let mut spent = first.steps;
    let mut stages = vec![ChainStage { hull: first, forced: None, self_encoding: SelfEncoding::NotApplicable }];
    loop {
        let prev = &stages.last().expect("nonempty").hull.carrier;
        let Some(&missing) = cover.iter().find(|a| !prev.contains(a)) else { break };
        let mut next_seed: BTreeSet<usize> = prev.clone();
        next_seed.insert(missing);
        let self_encoding = match universe {
            None => SelfEncoding::NotApplicable,
            Some(u) => match u.encode_subset(prev).ok().and_then(|c| u.id_of(&c)) {
                Some(element) => {
                    next_seed.insert(element);
                    SelfEncoding::Included { element }
                }
                None => SelfEncoding::Missing,
            },
        };
        let h = hull_with_budget(n, pack, &next_seed, budget.saturating_sub(spent))?;
        spent += h.steps;
        stages.push(ChainStage { hull: h, forced: Some(missing), self_encoding });
    }
    Ok(Chain { pack: pack.name.clone(), stages, coherent: None })
}
