//! Δ-systems (sunflowers) found through the trace of a submodel, and free
//! sets for set mappings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Element = u32;
pub type Set = BTreeSet<Element>;

/// Largest family `max_sunflower` scans exhaustively.
pub const MAX_SUNFLOWER_FAMILY: usize = 20;
/// Largest ground set `max_free_set` scans exhaustively.
pub const MAX_FREE_GROUND: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinatoricsError {
    #[error("every member of the family lies in M")]
    AllMembersInM,
    #[error("{what} has {size} items, above the exhaustive limit {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },
    #[error("the mapping is not defined at {0}")]
    NotTotal(Element),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SetFamily {
    pub sets: Vec<Set>,
}

impl SetFamily {
    pub fn new(sets: impl IntoIterator<Item = Set>) -> Self {
        SetFamily { sets: sets.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Index pairs `(i, j)`, `i < j`, of equal members.
    pub fn duplicates(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.sets.len() {
            for j in i + 1..self.sets.len() {
                if self.sets[i] == self.sets[j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn select(&self, indices: &[usize]) -> Vec<&Set> {
        indices.iter().map(|&i| &self.sets[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Kernel {
    pub kernel: Set,
    /// The family has fewer than two members, so the kernel is a convention:
    /// the member itself for one member, empty for none.
    pub degenerate: bool,
}

/// The common pairwise intersection, if every two members meet in the same set.
pub fn is_delta_system<'a>(family: impl IntoIterator<Item = &'a Set>) -> Option<Kernel> {
    let members: Vec<&Set> = family.into_iter().collect();
    match members.as_slice() {
        [] => return Some(Kernel { kernel: Set::new(), degenerate: true }),
        [only] => return Some(Kernel { kernel: (*only).clone(), degenerate: true }),
        _ => {}
    }
    let kernel: Set = members[0].intersection(members[1]).copied().collect();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if !members[i].intersection(members[j]).eq(kernel.iter()) {
                return None;
            }
        }
    }
    Some(Kernel { kernel, degenerate: false })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaSystem {
    /// Family indices, ascending.
    pub members: Vec<usize>,
    pub kernel: Set,
}

impl DeltaSystem {
    /// Whether the selected members form a Δ-system whose kernel is
    /// `self.kernel`; a single member only needs to contain it.
    pub fn is_valid_in(&self, family: &SetFamily) -> bool {
        let sets = family.select(&self.members);
        match is_delta_system(sets.iter().copied()) {
            Some(k) if k.degenerate => self.kernel.is_subset(&k.kernel),
            Some(k) => k.kernel == self.kernel,
            None => false,
        }
    }
}

/// The part of a submodel visible to a family: the ground elements and the
/// members it contains.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TraceModel {
    pub elements: Set,
    pub sets: BTreeSet<Set>,
}

/// Takes the first member `A` outside `M`, sets `D = A ∩ M`, and extends
/// `{A}` by every later-scanned member meeting all chosen ones in exactly `D`.
pub fn trace_kernel_sunflower(family: &SetFamily, m: &TraceModel) -> Result<DeltaSystem, CombinatoricsError> {
    let first = family
        .sets
        .iter()
        .position(|a| !m.sets.contains(a))
        .ok_or(CombinatoricsError::AllMembersInM)?;
    let kernel: Set = family.sets[first].intersection(&m.elements).copied().collect();
    let mut members = vec![first];
    for (i, b) in family.sets.iter().enumerate() {
        if i == first || !kernel.is_subset(b) {
            continue;
        }
        if members.iter().all(|&j| family.sets[j].intersection(b).eq(kernel.iter())) {
            members.push(i);
        }
    }
    members.sort_unstable();
    Ok(DeltaSystem { members, kernel })
}

/// A largest Δ-subfamily, least index set first among ties. With
/// `petals_required`, `None` means no Δ-system has that many members.
pub fn max_sunflower(family: &SetFamily, petals_required: Option<usize>) -> Result<Option<DeltaSystem>, CombinatoricsError> {
    let n = family.len();
    if n > MAX_SUNFLOWER_FAMILY {
        return Err(CombinatoricsError::TooLarge { what: "family", size: n, limit: MAX_SUNFLOWER_FAMILY });
    }
    let mut best: Vec<usize> = Vec::new();
    let mut chosen = Vec::new();
    grow(family, 0, &mut chosen, None, &mut best);
    if petals_required.is_some_and(|k| best.len() < k) {
        return Ok(None);
    }
    let kernel = match best.as_slice() {
        [] => Set::new(),
        [only] => family.sets[*only].clone(),
        [a, b, ..] => family.sets[*a].intersection(&family.sets[*b]).copied().collect(),
    };
    Ok(Some(DeltaSystem { members: best, kernel }))
}

/// Include-first depth-first search, so equal-size systems are met in
/// lexicographic order of their index lists.
fn grow(family: &SetFamily, next: usize, chosen: &mut Vec<usize>, kernel: Option<&Set>, best: &mut Vec<usize>) {
    if chosen.len() > best.len() {
        *best = chosen.clone();
    }
    if next == family.len() || chosen.len() + (family.len() - next) <= best.len() {
        return;
    }
    let b = &family.sets[next];
    let fits = match (chosen.first(), kernel) {
        (None, _) => Some(None),
        (Some(&a), None) => Some(Some(family.sets[a].intersection(b).copied().collect::<Set>())),
        (Some(_), Some(k)) => chosen
            .iter()
            .all(|&j| family.sets[j].intersection(b).eq(k.iter()))
            .then_some(None),
    };
    if let Some(new_kernel) = fits {
        chosen.push(next);
        grow(family, next + 1, chosen, new_kernel.as_ref().or(kernel), best);
        chosen.pop();
    }
    grow(family, next + 1, chosen, kernel, best);
}

pub type SetMapping = BTreeMap<Element, Set>;

/// `Y` is free when no member of `Y` lies in the image of another.
pub fn is_free(y: &Set, f: &SetMapping) -> bool {
    y.iter().all(|x| f.get(x).is_none_or(|img| img.iter().all(|z| z == x || !y.contains(z))))
}

fn check_total(ground: &Set, f: &SetMapping) -> Result<(), CombinatoricsError> {
    match ground.iter().find(|x| !f.contains_key(x)) {
        Some(&x) => Err(CombinatoricsError::NotTotal(x)),
        None => Ok(()),
    }
}

/// Ascending greedy scan keeping `x` when it is outside the images of the
/// kept elements and its own image misses them.
pub fn free_set(ground: &Set, f: &SetMapping) -> Result<Set, CombinatoricsError> {
    check_total(ground, f)?;
    let mut kept = Set::new();
    let mut covered = Set::new();
    for &x in ground {
        let img = &f[&x];
        if !covered.contains(&x) && img.iter().all(|z| *z == x || !kept.contains(z)) {
            kept.insert(x);
            covered.extend(img.iter().copied().filter(|&z| z != x));
        }
    }
    Ok(kept)
}

/// A largest free subset, least in index order among ties.
pub fn max_free_set(ground: &Set, f: &SetMapping) -> Result<Set, CombinatoricsError> {
    check_total(ground, f)?;
    let elems: Vec<Element> = ground.iter().copied().collect();
    if elems.len() > MAX_FREE_GROUND {
        return Err(CombinatoricsError::TooLarge { what: "ground set", size: elems.len(), limit: MAX_FREE_GROUND });
    }
    let pos: BTreeMap<Element, usize> = elems.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut conflict = vec![0u32; elems.len()];
    for (i, x) in elems.iter().enumerate() {
        for z in &f[x] {
            if let Some(&j) = pos.get(z) {
                if i != j {
                    conflict[i] |= 1 << j;
                    conflict[j] |= 1 << i;
                }
            }
        }
    }
    let mut best = 0u32;
    for s in 0..(1u32 << elems.len()) {
        let free = (0..elems.len()).all(|i| s >> i & 1 == 0 || conflict[i] & s == 0);
        // Reversed bits order subsets by their least elements first.
        if free && (s.count_ones() > best.count_ones() || (s.count_ones() == best.count_ones() && s.reverse_bits() > best.reverse_bits())) {
            best = s;
        }
    }
    Ok((0..elems.len()).filter(|i| best >> i & 1 == 1).map(|i| elems[i]).collect())
}
