//! Finite structures `⟨M, E⟩` with one binary relation, and satisfaction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, FormulaPack, Term};

/// A set of element identifiers.
pub type Subset = BTreeSet<usize>;
/// Assignment of elements to variable names.
pub type Valuation = BTreeMap<String, usize>;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Dense incidence rows are kept up to this many elements; larger structures
/// fall back to binary search in the per-element predecessor lists.
const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("element {0} is out of range for a structure of size {1}")]
    OutOfRange(usize, usize),
    #[error("malformed adjacency matrix: {0}")]
    BadMatrix(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("free variable `{0}` has no value")]
    Unbound(String),
    #[error("constant #{0} does not denote an element of the structure")]
    DanglingConstant(usize),
    #[error("element {0} lies outside the distinguished subset")]
    OutsideSubset(usize),
    #[error("valuation assigns element {0}, outside a structure of size {1}")]
    ValuationOutOfRange(usize, usize),
    #[error("relativized quantifier encountered in unrelativized evaluation")]
    Relativized,
    #[error("evaluation budget of {0} steps exceeded")]
    BudgetExceeded(u64),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// A finite structure on the elements `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinStructure {
    size: usize,
    /// `preds[b]` lists, sorted, every `a` with `a E b`.
    preds: Vec<Vec<usize>>,
    dense: Option<Vec<u64>>,
    labels: BTreeMap<usize, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureFile {
    pub size: usize,
    pub pairs: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<usize, String>,
}

impl FinStructure {
    pub fn new(size: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, StructureError> {
        let mut preds = vec![Vec::new(); size];
        for (a, b) in pairs {
            for x in [a, b] {
                if x >= size {
                    return Err(StructureError::OutOfRange(x, size));
                }
            }
            preds[b].push(a);
        }
        Ok(Self::from_preds(preds))
    }

    pub(crate) fn from_preds(mut preds: Vec<Vec<usize>>) -> Self {
        let size = preds.len();
        for p in &mut preds {
            p.sort_unstable();
            p.dedup();
        }
        let dense = (size <= DENSE_LIMIT).then(|| {
            let words = (size * size).div_ceil(64);
            let mut bits = vec![0u64; words];
            for (b, ps) in preds.iter().enumerate() {
                for &a in ps {
                    let i = a * size + b;
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
            bits
        });
        FinStructure {
            size,
            preds,
            dense,
            labels: BTreeMap::new(),
        }
    }

    pub fn empty() -> Self {
        Self::from_preds(Vec::new())
    }

    pub fn with_labels(mut self, labels: BTreeMap<usize, String>) -> Result<Self, StructureError> {
        if let Some(&k) = labels.keys().find(|&&k| k >= self.size) {
            return Err(StructureError::OutOfRange(k, self.size));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> &BTreeMap<usize, String> {
        &self.labels
    }

    pub fn universe(&self) -> Subset {
        (0..self.size).collect()
    }

    /// `a E b`.
    #[inline]
    pub fn related(&self, a: usize, b: usize) -> bool {
        match &self.dense {
            Some(bits) => {
                let i = a * self.size + b;
                bits[i / 64] >> (i % 64) & 1 == 1
            }
            None => self.preds[b].binary_search(&a).is_ok(),
        }
    }

    /// Elements related to `b`, in increasing order.
    pub fn preds(&self, b: usize) -> &[usize] {
        &self.preds[b]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut out: Vec<_> = self
            .preds
            .iter()
            .enumerate()
            .flat_map(|(b, ps)| ps.iter().map(move |&a| (a, b)))
            .collect();
        out.sort_unstable();
        out.into_iter()
    }

    pub fn pair_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    pub fn to_file(&self) -> StructureFile {
        StructureFile {
            size: self.size,
            pairs: self.pairs().map(|(a, b)| [a, b]).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn from_file(file: &StructureFile) -> Result<Self, StructureError> {
        FinStructure::new(file.size, file.pairs.iter().map(|p| (p[0], p[1])))?.with_labels(file.labels.clone())
    }

    /// `n` lines of `n` 0/1 digits; row `a`, column `b` is `a E b`.
    pub fn from_matrix_text(text: &str) -> Result<Self, StructureError> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let n = rows.len();
        let mut pairs = Vec::new();
        for (a, row) in rows.iter().enumerate() {
            let cells: Vec<char> = row.chars().filter(|c| !c.is_whitespace()).collect();
            if cells.len() != n {
                return Err(StructureError::BadMatrix(format!("row {a} has {} cells, expected {n}", cells.len())));
            }
            for (b, c) in cells.into_iter().enumerate() {
                match c {
                    '1' => pairs.push((a, b)),
                    '0' => {}
                    other => return Err(StructureError::BadMatrix(format!("unexpected `{other}` in row {a}"))),
                }
            }
        }
        FinStructure::new(n, pairs)
    }

    pub fn to_matrix_text(&self) -> String {
        let mut s = String::new();
        for a in 0..self.size {
            for b in 0..self.size {
                s.push(if self.related(a, b) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn label(&self, a: usize) -> String {
        self.labels.get(&a).cloned().unwrap_or_else(|| a.to_string())
    }

    pub fn describe(&self) -> String {
        let mut s = format!("structure of size {}:", self.size);
        for (a, b) in self.pairs() {
            let _ = write!(s, " {}E{}", self.label(a), self.label(b));
        }
        s
    }

    /// No two distinct elements have the same predecessors.
    pub fn is_extensional(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.preds.iter().all(|p| seen.insert(p.clone()))
    }

    /// The relation has no cycles (finite well-foundedness).
    pub fn is_well_founded(&self) -> bool {
        // Kahn's algorithm on a -> b edges.
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut succ = vec![Vec::new(); self.size];
        for (b, ps) in self.preds.iter().enumerate() {
            for &a in ps {
                succ[a].push(b);
            }
        }
        let mut stack: Vec<usize> = (0..self.size).filter(|&b| indeg[b] == 0).collect();
        let mut seen = 0;
        while let Some(a) = stack.pop() {
            seen += 1;
            for &b in &succ[a] {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    stack.push(b);
                }
            }
        }
        seen == self.size
    }
}

/// A structure restricted to a subset, with the identifier translation.
#[derive(Debug, Clone)]
pub struct Induced {
    pub structure: FinStructure,
    /// `to_host[i]` is the host identifier of new element `i`.
    pub to_host: Vec<usize>,
    pub from_host: BTreeMap<usize, usize>,
}

impl Induced {
    pub fn translate(&self, v: &Valuation) -> Result<Valuation, EvalError> {
        v.iter()
            .map(|(k, &a)| {
                self.from_host
                    .get(&a)
                    .map(|&i| (k.clone(), i))
                    .ok_or(EvalError::OutsideSubset(a))
            })
            .collect()
    }

    pub fn translate_formula(&self, phi: &Formula) -> Result<Formula, EvalError> {
        if let Some(&c) = phi.constants().iter().find(|c| !self.from_host.contains_key(c)) {
            return Err(EvalError::OutsideSubset(c));
        }
        Ok(phi.map_constants(&|c| self.from_host[&c]))
    }
}

pub fn induced_substructure(n: &FinStructure, m: &Subset) -> Result<Induced, StructureError> {
    if let Some(&bad) = m.iter().find(|&&a| a >= n.size) {
        return Err(StructureError::OutOfRange(bad, n.size));
    }
    let to_host: Vec<usize> = m.iter().copied().collect();
    let from_host: BTreeMap<usize, usize> = to_host.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let preds = to_host
        .iter()
        .map(|&b| n.preds(b).iter().filter_map(|a| from_host.get(a).copied()).collect())
        .collect();
    let labels = to_host
        .iter()
        .enumerate()
        .filter_map(|(i, a)| n.labels.get(a).map(|l| (i, l.clone())))
        .collect();
    let mut structure = FinStructure::from_preds(preds);
    structure.labels = labels;
    Ok(Induced {
        structure,
        to_host,
        from_host,
    })
}

/// Step-counting evaluator. One instance carries a single budget across all
/// the evaluations it performs.
pub struct Evaluator<'s> {
    host: &'s FinStructure,
    subset: Option<Vec<usize>>,
    subset_mask: Option<Vec<bool>>,
    budget: u64,
    steps: u64,
}

impl<'s> Evaluator<'s> {
    pub fn new(host: &'s FinStructure, budget: u64) -> Self {
        Evaluator {
            host,
            subset: None,
            subset_mask: None,
            budget,
            steps: 0,
        }
    }

    /// Evaluator whose bounded quantifiers range over `m`.
    pub fn relativized(host: &'s FinStructure, m: &Subset, budget: u64) -> Result<Self, EvalError> {
        let mut mask = vec![false; host.size];
        for &a in m {
            if a >= host.size {
                return Err(StructureError::OutOfRange(a, host.size).into());
            }
            mask[a] = true;
        }
        Ok(Evaluator {
            host,
            subset: Some(m.iter().copied().collect()),
            subset_mask: Some(mask),
            budget,
            steps: 0,
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn check_inputs(&self, phi: &Formula, v: &Valuation) -> Result<(), EvalError> {
        let n = self.host.size;
        for &a in v.values() {
            if a >= n {
                return Err(EvalError::ValuationOutOfRange(a, n));
            }
            if let Some(mask) = &self.subset_mask {
                if !mask[a] {
                    return Err(EvalError::OutsideSubset(a));
                }
            }
        }
        for c in phi.constants() {
            if c >= n {
                return Err(EvalError::DanglingConstant(c));
            }
            if let Some(mask) = &self.subset_mask {
                if !mask[c] {
                    return Err(EvalError::OutsideSubset(c));
                }
            }
        }
        if let Some(x) = phi.free_vars().into_iter().find(|x| !v.contains_key(x)) {
            return Err(EvalError::Unbound(x));
        }
        if self.subset.is_none() && phi.is_relativized_anywhere() {
            return Err(EvalError::Relativized);
        }
        Ok(())
    }

    pub fn eval(&mut self, phi: &Formula, v: &Valuation) -> Result<bool, EvalError> {
        self.check_inputs(phi, v)?;
        let mut env: Vec<(&str, usize)> = v.iter().map(|(k, &a)| (k.as_str(), a)).collect();
        self.sat(phi, &mut env)
    }

    /// Evaluation without the input checks, for callers that have already
    /// validated the formula/valuation pair.
    pub(crate) fn eval_env<'f>(&mut self, phi: &'f Formula, env: &mut Vec<(&'f str, usize)>) -> Result<bool, EvalError> {
        self.sat(phi, env)
    }

    #[inline]
    fn value(term: &Term, env: &[(&str, usize)]) -> usize {
        match term {
            Term::Const(c) => *c,
            Term::Var(x) => env
                .iter()
                .rev()
                .find(|(k, _)| *k == x)
                .map(|&(_, a)| a)
                .expect("free variables were checked"),
        }
    }

    fn sat<'f>(&mut self, phi: &'f Formula, env: &mut Vec<(&'f str, usize)>) -> Result<bool, EvalError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(EvalError::BudgetExceeded(self.budget));
        }
        match phi {
            Formula::Membership(a, b) => Ok(self.host.related(Self::value(a, env), Self::value(b, env))),
            Formula::Equality(a, b) => Ok(Self::value(a, env) == Self::value(b, env)),
            Formula::Negation(body) => Ok(!self.sat(body, env)?),
            Formula::Disjunction(l, r) => Ok(self.sat(l, env)? || self.sat(r, env)?),
            Formula::Exists(x, body) => {
                for a in 0..self.host.size {
                    env.push((x, a));
                    let hit = self.sat(body, env);
                    env.pop();
                    if hit? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::BoundedExists(x, body) => {
                let len = match &self.subset {
                    Some(range) => range.len(),
                    None => return Err(EvalError::Relativized),
                };
                for i in 0..len {
                    let a = self.subset.as_ref().expect("checked")[i];
                    env.push((x, a));
                    let hit = self.sat(body, env);
                    env.pop();
                    if hit? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

/// `N ⊨ φ[v]`.
pub fn eval(n: &FinStructure, phi: &Formula, v: &Valuation) -> Result<bool, EvalError> {
    Evaluator::new(n, DEFAULT_BUDGET).eval(phi, v)
}

/// Evaluation where bounded quantifiers range over `m` and unbounded ones over
/// all of `n`.
pub fn eval_relativized(n: &FinStructure, m: &Subset, phi: &Formula, v: &Valuation) -> Result<bool, EvalError> {
    Evaluator::relativized(n, m, DEFAULT_BUDGET)?.eval(phi, v)
}

/// Calls `visit` with every valuation of `vars` into `range`, in
/// lexicographic order of the value tuple. Stops early when `visit` returns
/// `Ok(false)`.
pub fn for_each_valuation<E>(
    vars: &[String],
    range: &[usize],
    mut visit: impl FnMut(&Valuation) -> Result<bool, E>,
) -> Result<(), E> {
    if !vars.is_empty() && range.is_empty() {
        return Ok(());
    }
    let mut idx = vec![0usize; vars.len()];
    let mut v: Valuation = vars.iter().map(|x| (x.clone(), range.first().copied().unwrap_or(0))).collect();
    loop {
        if !visit(&v)? {
            return Ok(());
        }
        let mut k = vars.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < range.len() {
                *v.get_mut(&vars[k]).expect("present") = range[idx[k]];
                break;
            }
            idx[k] = 0;
            *v.get_mut(&vars[k]).expect("present") = range[0];
        }
    }
}

/// A failed absoluteness check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbsolutenessFailure {
    pub valuation: Valuation,
    pub in_subset: bool,
    pub in_host: bool,
}

/// Checks `M ≺_φ N`: for every valuation of the free variables into `m`,
/// truth in the induced substructure agrees with truth in `n`.
pub fn is_absolute(m: &Subset, n: &FinStructure, phi: &Formula) -> Result<Option<AbsolutenessFailure>, EvalError> {
    is_absolute_with_budget(m, n, phi, DEFAULT_BUDGET)
}

pub fn is_absolute_with_budget(
    m: &Subset,
    n: &FinStructure,
    phi: &Formula,
    budget: u64,
) -> Result<Option<AbsolutenessFailure>, EvalError> {
    let induced = induced_substructure(n, m)?;
    let inner_phi = induced.translate_formula(phi)?;
    let mut host_eval = Evaluator::new(n, budget);
    let mut sub_eval = Evaluator::new(&induced.structure, budget);
    let vars = phi.free_vars();
    let range: Vec<usize> = m.iter().copied().collect();
    let mut failure = None;
    for_each_valuation::<EvalError>(&vars, &range, |v| {
        let in_host = host_eval.eval(phi, v)?;
        let in_subset = sub_eval.eval(&inner_phi, &induced.translate(v)?)?;
        if in_host != in_subset {
            failure = Some(AbsolutenessFailure {
                valuation: v.clone(),
                in_subset,
                in_host,
            });
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(failure)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementarityFailure {
    pub formula_index: usize,
    pub formula: String,
    #[serde(flatten)]
    pub failure: AbsolutenessFailure,
}

/// Checks `M ≺_Σ N` for the pack; reports the first failing formula in pack
/// order and, within it, the lexicographically first valuation.
pub fn is_sigma_elementary(m: &Subset, n: &FinStructure, pack: &FormulaPack) -> Result<Option<ElementarityFailure>, EvalError> {
    is_sigma_elementary_with_budget(m, n, pack, DEFAULT_BUDGET)
}

pub fn is_sigma_elementary_with_budget(
    m: &Subset,
    n: &FinStructure,
    pack: &FormulaPack,
    budget: u64,
) -> Result<Option<ElementarityFailure>, EvalError> {
    for (i, phi) in pack.formulas.iter().enumerate() {
        if let Some(failure) = is_absolute_with_budget(m, n, phi, budget)? {
            return Ok(Some(ElementarityFailure {
                formula_index: i,
                formula: phi.to_string(),
                failure,
            }));
        }
    }
    Ok(None)
}
