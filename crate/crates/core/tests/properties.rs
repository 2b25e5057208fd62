//! Randomized invariants. Families, structures, and substructures are
//! generated by proptest strategies; each block asserts a law the modules
//! rely on elsewhere.

use std::collections::BTreeSet;

use proptest::prelude::*;
use sunflower_core::{
    bounds::{gamma, gamma_circ, seqsize, BetaFn},
    build_mk_fragment, canonical_family, find_isomorphism, greedy_sunflower, is_sunflower,
    nbeta::{sub_from_base, transfer_sunflower},
    pad_family, FiniteSet, MkFragmentSpec, SetFamily,
};

fn arb_family() -> impl Strategy<Value = SetFamily> {
    // up to 6 distinct members of size <= 3 over 6 atoms
    proptest::collection::btree_set(
        proptest::collection::btree_set(0u32..6, 0..=3),
        0..=6,
    )
    .prop_map(|sets| {
        SetFamily::from_sets(sets.into_iter().map(FiniteSet).collect()).unwrap()
    })
}

proptest! {
    #[test]
    fn sunflower_verdict_is_permutation_invariant(fam in arb_family(), seed in 0u64..1000) {
        let mut order: Vec<usize> = (0..fam.len()).collect();
        // cheap deterministic shuffle
        for i in (1..order.len()).rev() {
            order.swap(i, (seed as usize).wrapping_mul(31).wrapping_add(i) % (i + 1));
        }
        let permuted = SetFamily::from_sets(
            order.iter().map(|&i| fam.members()[i].clone()).collect(),
        ).unwrap();
        prop_assert_eq!(
            is_sunflower(&fam).is_some(),
            is_sunflower(&permuted).is_some()
        );
        prop_assert_eq!(canonical_family(&fam), canonical_family(&permuted));
    }

    #[test]
    fn padding_preserves_sunflower_status(fam in arb_family()) {
        let (padded, index) = pad_family(&fam, 3).unwrap();
        prop_assert_eq!(fam.len(), padded.len());
        for m in padded.members() {
            prop_assert_eq!(m.len(), 3);
        }
        prop_assert_eq!(
            is_sunflower(&fam).is_some(),
            is_sunflower(&padded).is_some()
        );
        // and on the first few sub-pairs
        for i in 0..fam.len() {
            for j in (i + 1)..fam.len() {
                let orig = SetFamily::from_sets(vec![
                    fam.members()[i].clone(),
                    fam.members()[j].clone(),
                ]).unwrap();
                let pad = SetFamily::from_sets(vec![
                    padded.members()[index[i]].clone(),
                    padded.members()[index[j]].clone(),
                ]).unwrap();
                prop_assert_eq!(is_sunflower(&orig).is_some(), is_sunflower(&pad).is_some());
            }
        }
    }

    #[test]
    fn finder_witnesses_always_verify(fam in arb_family(), n in 0usize..5) {
        if let Some(w) = greedy_sunflower(&fam, n, 3) {
            prop_assert!(w.verify(&fam));
            prop_assert_eq!(w.member_indices.len(), n);
        }
    }

    #[test]
    fn finder_finds_what_exhaustion_finds(fam in arb_family(), n in 2usize..4) {
        // brute force: does any n-subfamily have equal pairwise intersections?
        let mut exists = false;
        let members = fam.members();
        let idx: Vec<usize> = (0..members.len()).collect();
        for combo in combinations(&idx, n) {
            let picked: Vec<&FiniteSet> = combo.iter().map(|&i| &members[i]).collect();
            if sunflower_core::sets::is_sunflower_sets(&picked).is_some() {
                exists = true;
                break;
            }
        }
        prop_assert_eq!(greedy_sunflower(&fam, n, 3).is_some(), exists);
    }

    #[test]
    fn closure_laws(k in 1usize..5, copies in 1usize..4, seed in proptest::collection::btree_set(0usize..12, 0..4)) {
        let m = build_mk_fragment(&MkFragmentSpec { k, copies }).unwrap();
        let seed: BTreeSet<usize> = seed.into_iter().filter(|&x| x < m.size()).collect();
        let c = m.closure(&seed).unwrap();
        prop_assert!(seed.is_subset(&c.carrier));                       // extensive
        prop_assert_eq!(&m.closure(&c.carrier).unwrap().carrier, &c.carrier); // idempotent
        prop_assert!(m.is_closed(&c.carrier));
        if let Some(&x) = seed.iter().next() {
            let sub = m.closure(&BTreeSet::from([x])).unwrap();          // monotone
            prop_assert!(sub.carrier.is_subset(&c.carrier));
        }
    }

    #[test]
    fn iso_is_symmetric_on_cycles(k in 1usize..5, a in 0usize..3, b in 0usize..3) {
        let m = build_mk_fragment(&MkFragmentSpec { k, copies: 3 }).unwrap();
        let sa = m.closure(&BTreeSet::from([a * k])).unwrap();
        let sb = m.closure(&BTreeSet::from([b * k])).unwrap();
        let fwd = find_isomorphism(&m, &sa, &m, &sb).unwrap();
        let back = find_isomorphism(&m, &sb, &m, &sa).unwrap();
        prop_assert_eq!(fwd.is_some(), back.is_some());
        prop_assert!(fwd.is_some()); // same cycle length, always isomorphic
    }

    #[test]
    fn gamma_laws(values in proptest::collection::vec(0u64..40, 1..5)) {
        // turn arbitrary deltas into a valid strictly increasing schedule
        let mut acc = 2u64;
        let beta: Vec<u64> = values.iter().map(|d| { acc += d + 1; acc }).collect();
        let beta = BetaFn::new(beta).unwrap();
        let h = beta.horizon();
        let mut prev = 0;
        for m in 1..=h {
            let g = gamma(&beta, m).unwrap();
            prop_assert!(g > prev);                                   // strictly increasing
            prop_assert_eq!(gamma_circ(&beta, g).unwrap(), m);        // inverse on the range
            if g > prev + 1 {
                // interior points round up to m
                prop_assert_eq!(gamma_circ(&beta, prev + 1).unwrap(), m);
            }
            prev = g;
        }
    }

    #[test]
    fn seqsize_recurrence(n in 1u64..9, k in 1u64..9) {
        prop_assert_eq!(
            seqsize(n, k),
            seqsize(n - 1, k - 1) * n
        );
    }

    #[test]
    fn transfer_agrees_with_base_sets(bases in proptest::collection::btree_set(
        proptest::collection::btree_set(0u32..5, 0..=3), 1..=4))
    {
        let beta = BetaFn::new(vec![3, 4, 5]).unwrap();
        let subs: Vec<_> = bases.iter()
            .map(|b| sub_from_base(&beta, &FiniteSet(b.clone())).unwrap())
            .collect();
        let fam = SetFamily::from_sets(bases.iter().cloned().map(FiniteSet).collect()).unwrap();
        let (verdict, core) = transfer_sunflower(&subs).unwrap();
        let set_core = is_sunflower(&fam);
        prop_assert_eq!(verdict, set_core.is_some());
        if let (Some(c), Some(sc)) = (core, set_core) {
            prop_assert_eq!(FiniteSet(c.base.into_iter().collect()), sc);
        }
    }

    #[test]
    fn family_json_round_trip(fam in arb_family()) {
        let js = serde_json::to_string(&fam).unwrap();
        let back: SetFamily = serde_json::from_str(&js).unwrap();
        back.validate().unwrap();
        prop_assert_eq!(back, fam);
    }
}

fn combinations(items: &[usize], n: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    items.iter().copied().combinations(n).collect()
}
