//! Formulas of the one-relation first-order language `{¬, ∨, ∃, =, ∈}`.
//!
//! Everything the parser produces is in the core fragment: conjunction,
//! implication and the universal quantifiers are expanded eagerly, so the
//! satisfaction recursion only ever sees membership, equality, negation,
//! disjunction and existential quantification. `BoundedExists` is the one
//! extra node; it only arises from [`Formula::relativize`].

mod parse;
mod render;

pub use parse::{parse, ParseError};

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A variable name or an element literal of the ambient structure.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Var(String),
    Const(usize),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "node", content = "args", rename_all = "snake_case")]
pub enum Formula {
    Membership(Term, Term),
    Equality(Term, Term),
    Negation(Box<Formula>),
    Disjunction(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    /// Existential quantifier restricted to the distinguished subset.
    BoundedExists(String, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("variable `{0}` is not free in the formula")]
    NotFree(String),
    #[error("formula {0} is not in the core fragment: {1}")]
    NotCore(String, &'static str),
}

// Builders. The sugar connectives expand to the core fragment on construction.
impl Formula {
    pub fn mem(left: Term, right: Term) -> Self {
        Formula::Membership(left, right)
    }

    pub fn eq(left: Term, right: Term) -> Self {
        Formula::Equality(left, right)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(body: Formula) -> Self {
        Formula::Negation(Box::new(body))
    }

    pub fn or(left: Formula, right: Formula) -> Self {
        Formula::Disjunction(Box::new(left), Box::new(right))
    }

    pub fn exists(var: &str, body: Formula) -> Self {
        Formula::Exists(var.to_string(), Box::new(body))
    }

    /// `a ∧ b` as `¬(¬a ∨ ¬b)`.
    pub fn and(left: Formula, right: Formula) -> Self {
        Formula::not(Formula::or(Formula::not(left), Formula::not(right)))
    }

    /// `a → b` as `¬a ∨ b`.
    pub fn implies(left: Formula, right: Formula) -> Self {
        Formula::or(Formula::not(left), right)
    }

    /// `∀x φ` as `¬∃x ¬φ`.
    pub fn forall(var: &str, body: Formula) -> Self {
        Formula::not(Formula::exists(var, Formula::not(body)))
    }

    /// `∃!x φ` as `∃x (φ ∧ ∀y (φ[x:=y] → y = x))` with `y` fresh.
    pub fn exists_unique(var: &str, body: Formula) -> Self {
        let fresh = body.fresh_variable(var);
        let renamed = body.rename_free(var, &fresh);
        let uniqueness = Formula::forall(
            &fresh,
            Formula::implies(renamed, Formula::eq(Term::Var(fresh.clone()), Term::var(var))),
        );
        Formula::exists(var, Formula::and(body, uniqueness))
    }
}

impl Formula {
    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut Vec<String>) {
        let visit_term = |t: &'a Term, bound: &Vec<&'a str>, out: &mut Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(&v.as_str()) && !out.iter().any(|o| o == v) {
                    out.push(v.clone());
                }
            }
        };
        match self {
            Formula::Membership(a, b) | Formula::Equality(a, b) => {
                visit_term(a, bound, out);
                visit_term(b, bound, out);
            }
            Formula::Negation(body) => body.collect_free(bound, out),
            Formula::Disjunction(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            Formula::Exists(v, body) | Formula::BoundedExists(v, body) => {
                bound.push(v);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| match f {
            Formula::Membership(a, b) | Formula::Equality(a, b) => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Exists(v, _) | Formula::BoundedExists(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Element literals mentioned by the formula.
    pub fn constants(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Membership(a, b) | Formula::Equality(a, b) = f {
                for t in [a, b] {
                    if let Term::Const(c) = t {
                        out.insert(*c);
                    }
                }
            }
        });
        out
    }

    /// Pre-order traversal over all subformulas including `self`.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Membership(..) | Formula::Equality(..) => {}
            Formula::Negation(body) | Formula::Exists(_, body) | Formula::BoundedExists(_, body) => {
                body.walk(f)
            }
            Formula::Disjunction(l, r) => {
                l.walk(f);
                r.walk(f);
            }
        }
    }

    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.walk(&mut |f| out.push(f));
        out
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Membership(..) | Formula::Equality(..) => 0,
            Formula::Negation(body) => body.quantifier_depth(),
            Formula::Disjunction(l, r) => l.quantifier_depth().max(r.quantifier_depth()),
            Formula::Exists(_, body) | Formula::BoundedExists(_, body) => 1 + body.quantifier_depth(),
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    pub fn is_relativized_anywhere(&self) -> bool {
        let mut found = false;
        self.walk(&mut |f| found |= matches!(f, Formula::BoundedExists(..)));
        found
    }

    /// Replaces free occurrences of the bound variables with constants.
    ///
    /// Every key of `binding` must be free in `self`.
    pub fn substitute(&self, binding: &BTreeMap<String, usize>) -> Result<Formula, FormulaError> {
        let free = self.free_vars();
        if let Some(k) = binding.keys().find(|k| !free.contains(k)) {
            return Err(FormulaError::NotFree(k.clone()));
        }
        Ok(self.map_free_terms(&mut Vec::new(), &|name| {
            binding.get(name).map(|&c| Term::Const(c))
        }))
    }

    /// Renames free occurrences of `from` to the variable `to`. The caller is
    /// responsible for `to` not being captured.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        self.map_free_terms(&mut Vec::new(), &|name| {
            (name == from).then(|| Term::var(to))
        })
    }

    fn map_free_terms<'a>(
        &'a self,
        bound: &mut Vec<&'a str>,
        replace: &dyn Fn(&str) -> Option<Term>,
    ) -> Formula {
        let map_term = |t: &Term, bound: &Vec<&'a str>| match t {
            Term::Var(v) if !bound.contains(&v.as_str()) => replace(v).unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        };
        match self {
            Formula::Membership(a, b) => Formula::Membership(map_term(a, bound), map_term(b, bound)),
            Formula::Equality(a, b) => Formula::Equality(map_term(a, bound), map_term(b, bound)),
            Formula::Negation(body) => Formula::not(body.map_free_terms(bound, replace)),
            Formula::Disjunction(l, r) => {
                Formula::or(l.map_free_terms(bound, replace), r.map_free_terms(bound, replace))
            }
            Formula::Exists(v, body) | Formula::BoundedExists(v, body) => {
                bound.push(v);
                let inner = Box::new(body.map_free_terms(bound, replace));
                bound.pop();
                match self {
                    Formula::Exists(..) => Formula::Exists(v.clone(), inner),
                    _ => Formula::BoundedExists(v.clone(), inner),
                }
            }
        }
    }

    /// Renumbers every element literal.
    pub fn map_constants(&self, f: &dyn Fn(usize) -> usize) -> Formula {
        let map_term = |t: &Term| match t {
            Term::Const(c) => Term::Const(f(*c)),
            v => v.clone(),
        };
        match self {
            Formula::Membership(a, b) => Formula::Membership(map_term(a), map_term(b)),
            Formula::Equality(a, b) => Formula::Equality(map_term(a), map_term(b)),
            Formula::Negation(body) => Formula::not(body.map_constants(f)),
            Formula::Disjunction(l, r) => Formula::or(l.map_constants(f), r.map_constants(f)),
            Formula::Exists(v, body) => Formula::Exists(v.clone(), Box::new(body.map_constants(f))),
            Formula::BoundedExists(v, body) => Formula::BoundedExists(v.clone(), Box::new(body.map_constants(f))),
        }
    }

    /// `φ ↦ φ^M`: every unbounded quantifier becomes bounded by the
    /// distinguished subset. Idempotent.
    pub fn relativize(&self) -> Formula {
        match self {
            Formula::Membership(..) | Formula::Equality(..) => self.clone(),
            Formula::Negation(body) => Formula::not(body.relativize()),
            Formula::Disjunction(l, r) => Formula::or(l.relativize(), r.relativize()),
            Formula::Exists(v, body) | Formula::BoundedExists(v, body) => {
                Formula::BoundedExists(v.clone(), Box::new(body.relativize()))
            }
        }
    }

    /// A variable name derived from `base` that does not occur in `self`.
    pub fn fresh_variable(&self, base: &str) -> String {
        let used = self.all_vars();
        (1..)
            .map(|i| format!("{base}_{i}"))
            .find(|c| !used.contains(c))
            .expect("unbounded candidate supply")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render::write_formula(f, self)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "#{c}"),
        }
    }
}

/// A finite named family of formulas, the `Σ` of `M ≺_Σ N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaPack {
    pub name: String,
    pub formulas: Vec<Formula>,
    #[serde(default)]
    pub closed_under_subformulas: bool,
}

impl FormulaPack {
    pub fn new(name: &str, formulas: Vec<Formula>) -> Self {
        FormulaPack {
            name: name.to_string(),
            formulas,
            closed_under_subformulas: false,
        }
    }

    pub fn parse(name: &str, sources: &[&str]) -> Result<Self, ParseError> {
        let formulas = sources.iter().map(|s| parse(s)).collect::<Result<_, _>>()?;
        Ok(FormulaPack::new(name, formulas))
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    /// Checks closure directly rather than trusting the flag.
    pub fn is_subformula_closed(&self) -> bool {
        let members: HashSet<&Formula> = self.formulas.iter().collect();
        self.formulas
            .iter()
            .all(|f| f.subformulas().into_iter().all(|s| members.contains(s)))
    }

    /// Every subformula of every member, deduplicated, in pre-order of first
    /// appearance.
    pub fn subformula_closure(&self) -> FormulaPack {
        let mut seen = HashSet::new();
        let mut formulas = Vec::new();
        for f in &self.formulas {
            for s in f.subformulas() {
                if seen.insert(s) {
                    formulas.push(s.clone());
                }
            }
        }
        FormulaPack {
            name: self.name.clone(),
            formulas,
            closed_under_subformulas: true,
        }
    }

    pub fn constants(&self) -> BTreeSet<usize> {
        self.formulas.iter().flat_map(|f| f.constants()).collect()
    }
}

/// Named packs approximating the closure obligations used by the graph
/// arguments. Each is returned already closed under subformulas.
pub mod packs {
    use super::FormulaPack;

    const PAIR_OF_DISTINCT: &str =
        "Ez (~(x = y) & ((x in z) & ((y in z) & Aw ((w in z) -> ((w = x) | (w = y))))))";
    const LEAST_MEMBER: &str = "Ey (y in e)";
    const OTHER_MEMBER: &str = "Ey ((y in e) & ~(y = a))";

    pub const NAMES: &[&str] = &[
        "empty-set",
        "pairing",
        "union",
        "successor",
        "evaluation",
        "members",
        "path",
        "common-neighbour",
    ];

    fn sources(name: &str) -> Option<Vec<&'static str>> {
        Some(match name {
            "empty-set" => vec!["Ex Ay ~(y in x)"],
            "pairing" => vec!["Ez Aw (((w in z) -> ((w = x) | (w = y))) & (((w = x) | (w = y)) -> (w in z)))"],
            "union" => vec![
                "Eu Aw (((w in u) -> Ez ((z in x) & (w in z))) & (Ez ((z in x) & (w in z)) -> (w in u)))",
            ],
            "successor" => vec!["Es Aw (((w in s) -> ((w in x) | (w = x))) & (((w in x) | (w = x)) -> (w in s)))"],
            // b = g(y) when g holds the Kuratowski pair {{y},{y,b}}.
            "evaluation" => vec![
                "Eb Ep ((p in g) & (Es ((s in p) & ((y in s) & Aw ((w in s) -> (w = y)))) & (Et ((t in p) & ((y in t) & ((b in t) & Aw ((w in t) -> ((w = y) | (w = b)))))) & Av ((v in p) -> Aw ((w in v) -> ((w = y) | (w = b)))))))",
            ],
            // Edge-vertex coherence: distinct x, y in M pull in {x, y}; a
            // member set pulls in both of its members.
            "members" => vec![PAIR_OF_DISTINCT, LEAST_MEMBER, OTHER_MEMBER],
            // Each two-element set is built with its members kept distinct, so
            // no subformula forms singletons of the auxiliary sets.
            // Coherence plus a detour: when f holds an edge {b, c}, some m
            // joins b and c by two edges outside f.
            "path" => vec![
                PAIR_OF_DISTINCT,
                LEAST_MEMBER,
                OTHER_MEMBER,
                "Em (Ex ((x in f) & (b in x) & (c in x)) & ~(b = c) & ~(b = m) & ~(m = c) & Ee (~(b = m) & ~(e in f) & (b in e) & (m in e) & Aw ((w in e) -> ((w = b) | (w = m)))) & Ee (~(m = c) & ~(e in f) & (m in e) & (c in e) & Aw ((w in e) -> ((w = m) | (w = c)))))",
            ],
            // Coherence plus a common neighbour of any two distinct b, c.
            "common-neighbour" => vec![
                PAIR_OF_DISTINCT,
                LEAST_MEMBER,
                OTHER_MEMBER,
                "Em (~(b = c) & ~(b = m) & ~(m = c) & Ee (~(b = m) & (b in e) & (m in e) & Aw ((w in e) -> ((w = b) | (w = m)))) & Ee (~(m = c) & (m in e) & (c in e) & Aw ((w in e) -> ((w = m) | (w = c)))))",
            ],
            _ => return None,
        })
    }

    pub fn named(name: &str) -> Option<FormulaPack> {
        let pack = FormulaPack::parse(name, &sources(name)?).expect("shipped packs parse");
        Some(pack.subformula_closure())
    }
}
