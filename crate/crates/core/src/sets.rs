//! Plain set systems, the sunflower predicate, and size padding.
//!
//! Atoms are nonnegative integers with no further structure. A family is a
//! *set* of sets: members are pairwise distinct. The sunflower predicate
//! quantifies over unordered pairs of distinct members (the degenerate
//! all-pairs reading would force every member to equal the core), and
//! families of size 0 and 1 count as sunflowers with empty core.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A ground-set atom. Ids are comparable and hashable; nothing else.
pub type Atom = u32;

/// A finite set of atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct FiniteSet(pub BTreeSet<Atom>);

impl FiniteSet {
    pub fn new() -> Self {
        FiniteSet(BTreeSet::new())
    }

    pub fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> Self {
        FiniteSet(atoms.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: Atom) -> bool {
        self.0.contains(&a)
    }

    pub fn iter(&self) -> impl Iterator<Item = Atom> + '_ {
        self.0.iter().copied()
    }

    pub fn intersection(&self, other: &FiniteSet) -> FiniteSet {
        FiniteSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn union(&self, other: &FiniteSet) -> FiniteSet {
        FiniteSet(self.0.union(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &FiniteSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn max_atom(&self) -> Option<Atom> {
        self.0.iter().next_back().copied()
    }
}

impl FromIterator<Atom> for FiniteSet {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        FiniteSet::from_atoms(iter)
    }
}

/// A finite sequence of pairwise distinct finite sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFamily {
    #[serde(rename = "sets")]
    members: Vec<FiniteSet>,
    #[serde(rename = "universe", skip_serializing_if = "Option::is_none", default)]
    universe_hint: Option<Atom>,
}

impl SetFamily {
    /// Builds a family, rejecting duplicate members and atoms at or above the
    /// universe hint.
    pub fn new(members: Vec<FiniteSet>, universe_hint: Option<Atom>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for m in &members {
            if !seen.insert(m.clone()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate member {:?}; a family is a set of sets",
                    m
                )));
            }
            if let Some(u) = universe_hint {
                if let Some(max) = m.max_atom() {
                    if max >= u {
                        return Err(Error::InvalidInput(format!(
                            "atom {} not below universe hint {}",
                            max, u
                        )));
                    }
                }
            }
        }
        Ok(SetFamily {
            members,
            universe_hint,
        })
    }

    pub fn from_sets(members: Vec<FiniteSet>) -> Result<Self> {
        SetFamily::new(members, None)
    }

    pub fn members(&self) -> &[FiniteSet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn universe_hint(&self) -> Option<Atom> {
        self.universe_hint
    }

    /// Union of all members.
    pub fn ground_set(&self) -> FiniteSet {
        let mut out = FiniteSet::new();
        for m in &self.members {
            out = out.union(m);
        }
        out
    }

    /// Validates a deserialized family (serde bypasses `new`).
    pub fn validate(&self) -> Result<()> {
        SetFamily::new(self.members.clone(), self.universe_hint).map(|_| ())
    }
}

/// A core plus member indices certifying a sunflower inside some family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SunflowerWitness {
    pub core: FiniteSet,
    #[serde(rename = "members")]
    pub member_indices: BTreeSet<usize>,
}

impl SunflowerWitness {
    /// Re-checks the witness invariant against the family it points into:
    /// every pairwise intersection of cited members equals the core exactly.
    pub fn verify(&self, family: &SetFamily) -> bool {
        let idx: Vec<usize> = self.member_indices.iter().copied().collect();
        for i in &idx {
            if *i >= family.len() {
                return false;
            }
            if !self.core.is_subset(&family.members()[*i]) {
                return false;
            }
        }
        for (p, i) in idx.iter().enumerate() {
            for j in &idx[p + 1..] {
                let inter = family.members()[*i].intersection(&family.members()[*j]);
                if inter != self.core {
                    return false;
                }
            }
        }
        true
    }
}

/// Common pairwise intersection of all distinct pairs, if one exists.
///
/// Families of size <= 1 return the empty core by convention; size-2 families
/// always return their intersection.
pub fn is_sunflower(family: &SetFamily) -> Option<FiniteSet> {
    let ms = family.members();
    if ms.len() <= 1 {
        return Some(FiniteSet::new());
    }
    let core = ms[0].intersection(&ms[1]);
    for i in 0..ms.len() {
        for j in (i + 1)..ms.len() {
            if ms[i].intersection(&ms[j]) != core {
                return None;
            }
        }
    }
    Some(core)
}

/// Same predicate on a slice of sets (no family validation needed; the
/// distinctness of members is the caller's business).
pub fn is_sunflower_sets(sets: &[&FiniteSet]) -> Option<FiniteSet> {
    if sets.len() <= 1 {
        return Some(FiniteSet::new());
    }
    let core = sets[0].intersection(sets[1]);
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            if sets[i].intersection(sets[j]) != core {
                return None;
            }
        }
    }
    Some(core)
}

/// Pads every member up to size exactly `k` with fresh atoms.
///
/// Fresh atoms are consecutive integers above max(universe hint, all atoms),
/// disjoint from the family union and from each other across members, so
/// every sub-family keeps its sunflower status. Returns the padded family and
/// the index bijection (the identity; members keep their positions).
pub fn pad_family(family: &SetFamily, k: usize) -> Result<(SetFamily, Vec<usize>)> {
    for (i, m) in family.members().iter().enumerate() {
        if m.len() > k {
            return Err(Error::Precondition(format!(
                "member {} has size {} > k = {}",
                i,
                m.len(),
                k
            )));
        }
    }
    let mut fresh = family
        .ground_set()
        .max_atom()
        .map(|a| a + 1)
        .unwrap_or(0)
        .max(family.universe_hint().unwrap_or(0));
    let mut padded = Vec::with_capacity(family.len());
    for m in family.members() {
        let mut elems: BTreeSet<Atom> = m.0.clone();
        while elems.len() < k {
            elems.insert(fresh);
            fresh += 1;
        }
        padded.push(FiniteSet(elems));
    }
    let bijection: Vec<usize> = (0..family.len()).collect();
    Ok((SetFamily::new(padded, None)?, bijection))
}

/// Canonical encoding of a family up to atom relabeling and member order:
/// the minimum, over all member orderings, of the member sequence relabeled
/// by first use. Two families are isomorphic as set systems iff their
/// canonical forms are equal. Factorial in the member count; desk scale only.
pub fn canonical_family(family: &SetFamily) -> Vec<Vec<Atom>> {
    let ms: Vec<Vec<Atom>> = family
        .members()
        .iter()
        .map(|s| s.iter().collect())
        .collect();
    let n = ms.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<Vec<Atom>>> = None;
    permute(&mut order, 0, &mut |perm| {
        let enc = relabel_by_first_use(&ms, perm);
        if best.as_ref().map_or(true, |b| enc < *b) {
            best = Some(enc);
        }
    });
    best.unwrap_or_default()
}

fn relabel_by_first_use(ms: &[Vec<Atom>], order: &[usize]) -> Vec<Vec<Atom>> {
    use std::collections::BTreeMap;
    let mut label: BTreeMap<Atom, Atom> = BTreeMap::new();
    let mut next: Atom = 0;
    let mut out = Vec::with_capacity(order.len());
    for &i in order {
        // Assign fresh labels to this member's unseen atoms in ascending
        // original order, then emit the sorted relabeled vector.
        for &a in &ms[i] {
            label.entry(a).or_insert_with(|| {
                let l = next;
                next += 1;
                l
            });
        }
        let mut v: Vec<Atom> = ms[i].iter().map(|a| label[a]).collect();
        v.sort_unstable();
        out.push(v);
    }
    out
}

fn permute<F: FnMut(&[usize])>(order: &mut Vec<usize>, at: usize, f: &mut F) {
    if at == order.len() {
        f(order);
        return;
    }
    for i in at..order.len() {
        order.swap(at, i);
        permute(order, at + 1, f);
        order.swap(at, i);
    }
}
