//! The constructive sunflower finder and an exact brute-force oracle for
//! small SF values.
//!
//! The finder runs the classical recursion (maximal disjoint subfamily, else
//! recurse on a popular element's link) with backtracking over the element
//! choice, and falls back to a complete core-enumeration search at desk
//! scale so that the non-strict guarantee threshold k!(n-1)^k holds.
//!
//! The exact oracle does an orderly depth-first search for a largest family
//! with no n-sunflower: members are kept strictly increasing in the
//! lexicographic order of their sorted atom vectors, and a member may only
//! introduce fresh atoms as the next consecutive unused ids. Every
//! isomorphism class of families has a representative of that shape (order
//! members greedily by their first-use relabeling), so exhausting the search
//! certifies the value. A family of l sets of size <= k touches at most l*k
//! atoms, which bounds the universe the search ever needs.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{Atom, FiniteSet, SetFamily, SunflowerWitness};

/// Caps for the exact search. All soft: exceeding one yields a bound, not an
/// error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_universe: u32,
    pub max_family: usize,
    pub time_hint: Option<f64>,
}

impl SearchBudget {
    pub fn new(max_universe: u32, max_family: usize, time_hint: Option<f64>) -> Result<Self> {
        if max_universe == 0 || max_family == 0 {
            return Err(Error::Precondition("budget caps must be positive".into()));
        }
        Ok(SearchBudget {
            max_universe,
            max_family,
            time_hint,
        })
    }

    /// A budget large enough to certify SF(n, k) whenever the classical
    /// bound applies: family cap k!(n-1)^k + 1, universe cap (cap * k).
    pub fn for_cell(n: u64, k: u64) -> Result<Self> {
        let bound: u64 = crate::bounds::er_bound(n, k)
            .try_into()
            .map_err(|_| Error::SizeCap(format!("er_bound({}, {}) is not desk scale", n, k)))?;
        let cap = (bound + 1).max(n + 1) as usize;
        if cap > 1 << 20 {
            return Err(Error::SizeCap(format!(
                "default family cap {} for ({}, {}) is not desk scale",
                cap, n, k
            )));
        }
        let universe = (cap as u64 * k.max(1)).min(u32::MAX as u64) as u32;
        SearchBudget::new(universe.max(1), cap, None)
    }
}

/// Outcome of the exact search. `value` is SF(n, k) when `exact`, otherwise
/// the best certified lower bound (largest sunflower-free family found + 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SfAnswer {
    pub n: u64,
    pub k: u64,
    pub value: u64,
    pub exact: bool,
    /// A largest n-sunflower-free family found (value - 1 members when exact).
    pub extremal_witness: Option<SetFamily>,
}

impl SfAnswer {
    pub fn to_certificate(&self) -> SfCertificate {
        SfCertificate {
            n: self.n,
            k: self.k,
            value: self.value,
            extremal: self
                .extremal_witness
                .as_ref()
                .map(|f| f.members().iter().map(|s| s.iter().collect()).collect())
                .unwrap_or_default(),
            status: if self.exact { "exact" } else { "bound" }.to_string(),
        }
    }
}

/// On-disk certificate format for `exact_sf`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SfCertificate {
    pub n: u64,
    pub k: u64,
    pub value: u64,
    pub extremal: Vec<Vec<Atom>>,
    pub status: String,
}

// ---------------------------------------------------------------------------
// Constructive finder
// ---------------------------------------------------------------------------

/// Finds an n-sunflower among members of size <= k, or reports absence.
///
/// Every returned witness is re-verified against the family before being
/// handed out. If |F| >= k!(n-1)^k with distinct members of size exactly k,
/// a witness is guaranteed.
pub fn greedy_sunflower(family: &SetFamily, n: usize, k: usize) -> Option<SunflowerWitness> {
    for m in family.members() {
        if m.len() > k {
            return None; // out of contract; nothing of size <= k to certify
        }
    }
    if n == 0 {
        return Some(SunflowerWitness {
            core: FiniteSet::new(),
            member_indices: BTreeSet::new(),
        });
    }
    let indexed: Vec<(usize, FiniteSet)> = family
        .members()
        .iter()
        .cloned()
        .enumerate()
        .collect();
    let witness = er_recursive(&indexed, n)
        .or_else(|| exhaustive_sunflower(family, n));
    witness.filter(|w| w.verify(family))
}

/// Classical recursion with backtracking over the popular-element choice.
/// Atoms are tried in descending popularity, ties broken by least id, so the
/// first branch is exactly the deterministic counting step of the proof.
fn er_recursive(members: &[(usize, FiniteSet)], n: usize) -> Option<SunflowerWitness> {
    if n == 0 {
        return Some(SunflowerWitness {
            core: FiniteSet::new(),
            member_indices: BTreeSet::new(),
        });
    }
    // Greedy maximal pairwise-disjoint subfamily in member order.
    let mut disjoint: Vec<usize> = Vec::new();
    let mut used = FiniteSet::new();
    for (pos, (_, s)) in members.iter().enumerate() {
        if s.intersection(&used).is_empty() {
            disjoint.push(pos);
            used = used.union(s);
        }
    }
    if disjoint.len() >= n {
        return Some(SunflowerWitness {
            core: FiniteSet::new(),
            member_indices: disjoint[..n].iter().map(|&p| members[p].0).collect(),
        });
    }
    // Popularity census over all atoms.
    let mut counts: std::collections::BTreeMap<Atom, usize> = std::collections::BTreeMap::new();
    for (_, s) in members {
        for a in s.iter() {
            *counts.entry(a).or_insert(0) += 1;
        }
    }
    let mut atoms: Vec<(Atom, usize)> = counts.into_iter().collect();
    // descending count, then ascending id (BTreeMap order is already by id)
    atoms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    for (atom, count) in atoms {
        if count < n {
            break; // the link cannot hold an n-sunflower
        }
        let link: Vec<(usize, FiniteSet)> = members
            .iter()
            .filter(|(_, s)| s.contains(atom))
            .map(|(i, s)| {
                (
                    *i,
                    FiniteSet::from_atoms(s.iter().filter(|&a| a != atom)),
                )
            })
            .collect();
        if let Some(inner) = er_recursive(&link, n) {
            let mut core: BTreeSet<Atom> = inner.core.iter().collect();
            core.insert(atom);
            return Some(SunflowerWitness {
                core: FiniteSet(core),
                member_indices: inner.member_indices,
            });
        }
    }
    None
}

/// Complete finder by core enumeration: an n-sunflower's core (n >= 2) is
/// the intersection of any two of its members, so trying every pairwise
/// intersection as a core and packing disjoint petals over it is exhaustive.
fn exhaustive_sunflower(family: &SetFamily, n: usize) -> Option<SunflowerWitness> {
    let ms = family.members();
    if n <= 1 {
        return (ms.len() >= n).then(|| SunflowerWitness {
            core: FiniteSet::new(),
            member_indices: (0..n).collect(),
        });
    }
    if ms.len() < n {
        return None;
    }
    if n == 2 {
        return Some(SunflowerWitness {
            core: ms[0].intersection(&ms[1]),
            member_indices: [0usize, 1].into_iter().collect(),
        });
    }
    let mut cores: BTreeSet<FiniteSet> = BTreeSet::new();
    for i in 0..ms.len() {
        for j in (i + 1)..ms.len() {
            cores.insert(ms[i].intersection(&ms[j]));
        }
    }
    for core in cores {
        // members over this core whose intersection with the core is exact
        let petals: Vec<(usize, FiniteSet)> = ms
            .iter()
            .enumerate()
            .filter(|(_, m)| core.is_subset(m))
            .map(|(i, m)| {
                (
                    i,
                    FiniteSet::from_atoms(m.iter().filter(|a| !core.contains(*a))),
                )
            })
            .collect();
        if petals.len() < n {
            continue;
        }
        let mut chosen: Vec<usize> = Vec::new();
        if pack_disjoint(&petals, n, 0, &mut FiniteSet::new(), &mut chosen) {
            return Some(SunflowerWitness {
                core,
                member_indices: chosen.into_iter().collect(),
            });
        }
    }
    None
}

/// Backtracking search for `n` pairwise-disjoint petals.
fn pack_disjoint(
    petals: &[(usize, FiniteSet)],
    n: usize,
    from: usize,
    used: &mut FiniteSet,
    chosen: &mut Vec<usize>,
) -> bool {
    if chosen.len() == n {
        return true;
    }
    if petals.len() - from < n - chosen.len() {
        return false;
    }
    for p in from..petals.len() {
        let (idx, petal) = &petals[p];
        if petal.intersection(used).is_empty() {
            let saved = used.clone();
            *used = used.union(petal);
            chosen.push(*idx);
            if pack_disjoint(petals, n, p + 1, used, chosen) {
                return true;
            }
            chosen.pop();
            *used = saved;
        }
    }
    false
}

/// Whether `family` plus the candidate member `cand` contains an n-sunflower
/// through `cand`, assuming `family` itself contains none.
fn creates_sunflower(members: &[FiniteSet], cand: &FiniteSet, n: usize) -> bool {
    if n < 2 {
        return members.len() + 1 >= n.max(1);
    }
    if members.len() + 1 < n {
        return false;
    }
    if n == 2 {
        return !members.is_empty();
    }
    let mut cores: BTreeSet<FiniteSet> = BTreeSet::new();
    for m in members {
        cores.insert(m.intersection(cand));
    }
    for core in cores {
        if !core.is_subset(cand) {
            continue;
        }
        let cand_petal = FiniteSet::from_atoms(cand.iter().filter(|a| !core.contains(*a)));
        let petals: Vec<(usize, FiniteSet)> = members
            .iter()
            .enumerate()
            .filter(|(_, m)| core.is_subset(m))
            .map(|(i, m)| {
                (
                    i,
                    FiniteSet::from_atoms(m.iter().filter(|a| !core.contains(*a))),
                )
            })
            .filter(|(_, p)| p.intersection(&cand_petal).is_empty())
            .collect();
        let mut chosen = Vec::new();
        let mut used = cand_petal;
        if pack_disjoint(&petals, n - 1, 0, &mut used, &mut chosen) {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Exact SF oracle
// ---------------------------------------------------------------------------

struct ExactState {
    n: usize,
    k: usize,
    budget: SearchBudget,
    deadline: Option<Instant>,
    truncated: bool,
    best: Vec<Vec<Atom>>,
}

/// Exact SF(n, k) by exhaustive isomorph-pruned search, n >= 2.
///
/// The value l is exact iff the search proves every l-member family of
/// distinct sets of size <= k contains an n-sunflower and exhibits an
/// (l-1)-member sunflower-free family. Running out of budget is a soft
/// outcome: the answer degrades to a lower bound.
pub fn exact_sf(n: u64, k: u64, budget: &SearchBudget) -> Result<SfAnswer> {
    if n < 2 {
        return Err(Error::Precondition(format!("exact_sf needs n >= 2, got {}", n)));
    }
    let mut state = ExactState {
        n: n as usize,
        k: k as usize,
        budget: budget.clone(),
        deadline: budget
            .time_hint
            .map(|s| Instant::now() + Duration::from_secs_f64(s)),
        truncated: false,
        best: Vec::new(),
    };
    let mut family: Vec<Vec<Atom>> = Vec::new();
    extend(&mut state, &mut family, 0);
    let extremal = SetFamily::from_sets(
        state
            .best
            .iter()
            .map(|v| FiniteSet::from_atoms(v.iter().copied()))
            .collect(),
    )?;
    Ok(SfAnswer {
        n,
        k,
        value: state.best.len() as u64 + 1,
        exact: !state.truncated,
        extremal_witness: Some(extremal),
    })
}

fn extend(state: &mut ExactState, family: &mut Vec<Vec<Atom>>, used_atoms: u32) {
    if family.len() > state.best.len() {
        state.best = family.clone();
    }
    if family.len() >= state.budget.max_family {
        // Cannot tell whether a longer sunflower-free family exists.
        state.truncated = true;
        return;
    }
    if let Some(d) = state.deadline {
        if Instant::now() > d {
            state.truncated = true;
            return;
        }
    }
    let members: Vec<FiniteSet> = family
        .iter()
        .map(|v| FiniteSet::from_atoms(v.iter().copied()))
        .collect();
    let last = family.last().cloned();
    for cand in candidates(state, family, used_atoms) {
        if let Some(prev) = &last {
            if cand <= *prev {
                continue;
            }
        }
        let cand_set = FiniteSet::from_atoms(cand.iter().copied());
        if creates_sunflower(&members, &cand_set, state.n) {
            continue;
        }
        let new_atoms = cand.iter().filter(|&&a| a >= used_atoms).count() as u32;
        family.push(cand);
        extend(state, family, used_atoms + new_atoms);
        family.pop();
    }
}

/// All candidate next members: subsets of size 0..=k of the used atoms plus
/// a block of consecutive fresh atoms (orderly generation). Skipping a
/// candidate because the universe cap ran out marks the search truncated.
fn candidates(state: &mut ExactState, _family: &[Vec<Atom>], used_atoms: u32) -> Vec<Vec<Atom>> {
    let mut out = Vec::new();
    let reach = used_atoms + state.k as u32;
    if reach > state.budget.max_universe {
        state.truncated = true;
    }
    let limit = reach.min(state.budget.max_universe);
    let pool: Vec<Atom> = (0..limit).collect();
    let mut current = Vec::new();
    subsets_up_to(&pool, state.k, 0, &mut current, &mut |s| {
        // fresh atoms must be exactly used_atoms, used_atoms+1, ...
        let fresh: Vec<Atom> = s.iter().copied().filter(|&a| a >= used_atoms).collect();
        for (i, a) in fresh.iter().enumerate() {
            if *a != used_atoms + i as u32 {
                return;
            }
        }
        out.push(s.to_vec());
    });
    out
}

fn subsets_up_to(
    pool: &[Atom],
    k: usize,
    from: usize,
    current: &mut Vec<Atom>,
    f: &mut impl FnMut(&[Atom]),
) {
    f(current);
    if current.len() == k {
        return;
    }
    for i in from..pool.len() {
        current.push(pool[i]);
        subsets_up_to(pool, k, i + 1, current, f);
        current.pop();
    }
}

// ---------------------------------------------------------------------------
// Randomized confirmation harness
// ---------------------------------------------------------------------------

/// Outcome of the randomized check that the finder succeeds at the lemma's
/// threshold. Any failure is an implementation bug and carries the family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub n: u64,
    pub k: u64,
    pub family_size: u64,
    pub count: u64,
    pub successes: u64,
    pub failures: Vec<SetFamily>,
}

/// Generates `count` pseudo-random distinct k-uniform families of size
/// k!(n-1)^k from `seed` and asserts the finder yields a verified
/// n-sunflower in each.
pub fn empirical_sf_check(n: u64, k: u64, count: u64, seed: u64) -> Result<EmpiricalReport> {
    let threshold: u64 = crate::bounds::er_bound(n, k)
        .try_into()
        .map_err(|_| Error::SizeCap(format!("threshold for ({}, {}) is not desk scale", n, k)))?;
    if threshold > 100_000 {
        return Err(Error::SizeCap(format!(
            "threshold {} too large for the randomized harness",
            threshold
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut successes = 0;
    for _ in 0..count {
        let fam = random_uniform_family(&mut rng, threshold as usize, k as usize)?;
        match greedy_sunflower(&fam, n as usize, k as usize) {
            Some(w) if w.verify(&fam) && w.member_indices.len() == n as usize => successes += 1,
            _ => failures.push(fam),
        }
    }
    Ok(EmpiricalReport {
        n,
        k,
        family_size: threshold,
        count,
        successes,
        failures,
    })
}

/// `size` distinct k-subsets drawn uniformly from a universe just large
/// enough (3k, widened if the binomial count falls short).
pub fn random_uniform_family(
    rng: &mut impl Rng,
    size: usize,
    k: usize,
) -> Result<SetFamily> {
    let mut universe = (3 * k).max(k + 1).max(2) as u32;
    while binomial(universe as u64, k as u64) < 2 * size as u64 {
        universe *= 2;
    }
    let mut seen: BTreeSet<FiniteSet> = BTreeSet::new();
    let pool: Vec<Atom> = (0..universe).collect();
    while seen.len() < size {
        let pick: Vec<Atom> = pool.choose_multiple(rng, k).copied().collect();
        seen.insert(FiniteSet::from_atoms(pick));
    }
    SetFamily::from_sets(seen.into_iter().collect())
}

/// Random family of up to `max_members` distinct sets of size <= `max_size`
/// over `universe` atoms. Used by the padding and invariant harnesses.
pub fn random_family(
    rng: &mut impl Rng,
    max_members: usize,
    max_size: usize,
    universe: u32,
) -> SetFamily {
    let target = rng.gen_range(0..=max_members);
    let mut seen: BTreeSet<FiniteSet> = BTreeSet::new();
    let pool: Vec<Atom> = (0..universe).collect();
    for _ in 0..10 * target.max(1) {
        if seen.len() >= target {
            break;
        }
        let sz = rng.gen_range(0..=max_size.min(universe as usize));
        let pick: Vec<Atom> = pool.choose_multiple(rng, sz).copied().collect();
        seen.insert(FiniteSet::from_atoms(pick));
    }
    SetFamily::from_sets(seen.into_iter().collect()).expect("distinct by construction")
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut out: u64 = 1;
    for i in 0..k.min(n - k) {
        out = out.saturating_mul(n - i) / (i + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(sets: &[&[Atom]]) -> SetFamily {
        SetFamily::from_sets(
            sets.iter()
                .map(|s| FiniteSet::from_atoms(s.iter().copied()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn finder_common_element() {
        let f = fam(&[&[1, 2], &[1, 3], &[1, 4]]);
        let w = greedy_sunflower(&f, 3, 2).unwrap();
        assert_eq!(w.core, FiniteSet::from_atoms([1]));
        assert_eq!(w.member_indices.len(), 3);
        assert!(w.verify(&f));
    }

    #[test]
    fn finder_disjoint_family() {
        let f = fam(&[&[1, 2], &[3, 4], &[5, 6]]);
        let w = greedy_sunflower(&f, 3, 2).unwrap();
        assert_eq!(w.core, FiniteSet::new());
        assert!(w.verify(&f));
    }

    #[test]
    fn finder_absent_on_triangle() {
        let f = fam(&[&[1, 2], &[2, 3], &[1, 3]]);
        assert!(greedy_sunflower(&f, 3, 2).is_none());
    }

    #[test]
    fn finder_trivial_sizes() {
        let f = fam(&[&[1, 2]]);
        let w0 = greedy_sunflower(&f, 0, 2).unwrap();
        assert!(w0.member_indices.is_empty());
        let w1 = greedy_sunflower(&f, 1, 2).unwrap();
        assert_eq!(w1.member_indices.len(), 1);
        assert!(greedy_sunflower(&fam(&[]), 1, 2).is_none());
    }

    #[test]
    fn exact_sf_two_is_two() {
        for k in 1..=5u64 {
            let ans = exact_sf(2, k, &SearchBudget::for_cell(2, k).unwrap()).unwrap();
            assert!(ans.exact, "k = {}", k);
            assert_eq!(ans.value, 2, "k = {}", k);
        }
    }

    #[test]
    fn exact_sf_singletons() {
        for n in 2..=6u64 {
            let ans = exact_sf(n, 1, &SearchBudget::new(16, 16, None).unwrap()).unwrap();
            assert!(ans.exact, "n = {}", n);
            assert_eq!(ans.value, n, "n = {}", n);
            let w = ans.extremal_witness.unwrap();
            assert_eq!(w.len() as u64, n - 1);
        }
    }

    #[test]
    fn exact_sf_tiny_budget_reports_bound() {
        let ans = exact_sf(4, 2, &SearchBudget::new(4, 3, None).unwrap()).unwrap();
        assert!(!ans.exact);
        assert!(ans.value >= 4); // 3 sunflower-free members are easy to find
    }

    #[test]
    fn empirical_small_cells() {
        let r = empirical_sf_check(3, 2, 25, 0).unwrap();
        assert_eq!(r.family_size, 8);
        assert_eq!(r.successes, 25);
        assert!(r.failures.is_empty());
        let r = empirical_sf_check(2, 5, 10, 0).unwrap();
        assert_eq!(r.family_size, 120);
        assert_eq!(r.successes, 10);
    }

    #[test]
    fn guarantee_exhaustive_tiny() {
        // all distinct 1-uniform families of size 1!(n-1)^1 = n - 1 over a
        // small universe need not contain an n-sunflower of size n; at n
        // members the finder must always succeed (k = 1 sets are pairwise
        // disjoint or equal). Exhaustive over subsets of 6 singletons.
        let singles: Vec<FiniteSet> = (0..6).map(|a| FiniteSet::from_atoms([a])).collect();
        for n in 2usize..=4 {
            for mask in 0u32..(1 << 6) {
                let chosen: Vec<FiniteSet> = (0..6)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| singles[i].clone())
                    .collect();
                let len = chosen.len();
                let f = SetFamily::from_sets(chosen).unwrap();
                let found = greedy_sunflower(&f, n, 1).is_some();
                assert_eq!(found, len >= n, "n = {}, mask = {:b}", n, mask);
            }
        }
    }
}
