//! Symbolic finite fragments of the rotation-tuple structure: elements are
//! nonrepeating tuples of base atoms with a rotation index, carried on cycles
//! whose length depends on the tuple length through a cycle-length schedule.
//!
//! Generated substructures are determined by their base atom sets, which is
//! what makes sunflower questions about substructures reducible to plain set
//! families.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::alg::{Arity, FinStructure, GenSub, Signature, Table};
use crate::bounds::{gamma, BetaFn};
use crate::error::{Error, Result};
use crate::sets::{is_sunflower_sets, FiniteSet};

pub type BaseAtom = u32;

/// A nonrepeating tuple of base atoms plus a position on its cycle.
/// An element is *distinguished* when `rot == 0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NBetaElement {
    #[serde(rename = "tuple")]
    pub entries: Vec<BaseAtom>,
    pub rot: u64,
}

impl NBetaElement {
    pub fn new(entries: Vec<BaseAtom>, rot: u64, beta: &BetaFn) -> Result<Self> {
        let e = NBetaElement { entries, rot };
        e.validate(beta)?;
        Ok(e)
    }

    pub fn validate(&self, beta: &BetaFn) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::InvalidInput("empty tuple".into()));
        }
        if self.entries.len() > beta.horizon() {
            return Err(Error::HorizonExceeded(format!(
                "tuple of length {} with horizon {}",
                self.entries.len(),
                beta.horizon()
            )));
        }
        let distinct: BTreeSet<_> = self.entries.iter().collect();
        if distinct.len() != self.entries.len() {
            return Err(Error::InvalidInput(format!(
                "repeating tuple {:?}",
                self.entries
            )));
        }
        let cycle = beta.get(self.entries.len())?;
        if self.rot >= cycle {
            return Err(Error::InvalidInput(format!(
                "rotation {} out of range for cycle length {}",
                self.rot, cycle
            )));
        }
        Ok(())
    }

    pub fn is_distinguished(&self) -> bool {
        self.rot == 0
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NBetaSym {
    S,
    C,
    P0,
    P1,
    A,
}

impl NBetaSym {
    pub const UNARY: [NBetaSym; 4] = [NBetaSym::S, NBetaSym::C, NBetaSym::P0, NBetaSym::P1];

    pub fn name(self) -> &'static str {
        match self {
            NBetaSym::S => "s",
            NBetaSym::C => "c",
            NBetaSym::P0 => "p0",
            NBetaSym::P1 => "p1",
            NBetaSym::A => "a",
        }
    }
}

/// Applies one function symbol.
///
/// s steps the rotation; c rewinds to the distinguished element; p0/p1
/// project a distinguished tuple of length >= 2 to its head / tail and fix
/// everything else; a prepends a distinguished singleton to a distinguished
/// tuple it does not occur in, and otherwise returns its first argument.
pub fn nbeta_apply(beta: &BetaFn, sym: NBetaSym, args: &[NBetaElement]) -> Result<NBetaElement> {
    let expect = if sym == NBetaSym::A { 2 } else { 1 };
    if args.len() != expect {
        return Err(Error::Precondition(format!(
            "{} takes {} argument(s), got {}",
            sym.name(),
            expect,
            args.len()
        )));
    }
    for arg in args {
        arg.validate(beta)?;
    }
    let x = &args[0];
    Ok(match sym {
        NBetaSym::S => NBetaElement {
            entries: x.entries.clone(),
            rot: (x.rot + 1) % beta.get(x.len())?,
        },
        NBetaSym::C => NBetaElement {
            entries: x.entries.clone(),
            rot: 0,
        },
        NBetaSym::P0 => {
            if x.is_distinguished() && x.len() >= 2 {
                NBetaElement {
                    entries: vec![x.entries[0]],
                    rot: 0,
                }
            } else {
                x.clone()
            }
        }
        NBetaSym::P1 => {
            if x.is_distinguished() && x.len() >= 2 {
                NBetaElement {
                    entries: x.entries[1..].to_vec(),
                    rot: 0,
                }
            } else {
                x.clone()
            }
        }
        NBetaSym::A => {
            let y = &args[1];
            if x.is_distinguished()
                && y.is_distinguished()
                && x.len() == 1
                && !y.entries.contains(&x.entries[0])
            {
                if y.len() >= beta.horizon() {
                    return Err(Error::HorizonExceeded(format!(
                        "a() would build a tuple of length {} past horizon {}",
                        y.len() + 1,
                        beta.horizon()
                    )));
                }
                let mut entries = Vec::with_capacity(y.len() + 1);
                entries.push(x.entries[0]);
                entries.extend_from_slice(&y.entries);
                NBetaElement { entries, rot: 0 }
            } else {
                x.clone()
            }
        }
    })
}

/// A generated substructure, represented by its base atom set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NBetaSub {
    #[serde(with = "beta_as_values")]
    pub beta: BetaFn,
    #[serde(with = "base_as_sorted_vec")]
    pub base: BTreeSet<BaseAtom>,
}

mod beta_as_values {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(beta: &BetaFn, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde::Serialize::serialize(beta.values(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BetaFn, D::Error> {
        let values: Vec<u64> = serde::Deserialize::deserialize(d)?;
        BetaFn::new(values).map_err(serde::de::Error::custom)
    }
}

mod base_as_sorted_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        base: &BTreeSet<BaseAtom>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&base.iter().copied().collect::<Vec<_>>(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeSet<BaseAtom>, D::Error> {
        let v: Vec<BaseAtom> = serde::Deserialize::deserialize(d)?;
        Ok(v.into_iter().collect())
    }
}

impl NBetaSub {
    pub fn contains(&self, e: &NBetaElement) -> bool {
        e.validate(&self.beta).is_ok() && e.entries.iter().all(|a| self.base.contains(a))
    }

    pub fn intersection(&self, other: &NBetaSub) -> NBetaSub {
        NBetaSub {
            beta: self.beta.clone(),
            base: self.base.intersection(&other.base).copied().collect(),
        }
    }

    /// Every element with entries inside the base, ordered canonically.
    pub fn carrier(&self) -> Result<Vec<NBetaElement>> {
        let atoms: Vec<BaseAtom> = self.base.iter().copied().collect();
        let mut out = Vec::new();
        for k in 1..=atoms.len() {
            let cycle = self.beta.get(k)?;
            for perm in atoms.iter().copied().permutations(k) {
                for rot in 0..cycle {
                    out.push(NBetaElement {
                        entries: perm.clone(),
                        rot,
                    });
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

pub fn sub_from_base(beta: &BetaFn, base: &FiniteSet) -> Result<NBetaSub> {
    if base.len() > beta.horizon() {
        return Err(Error::HorizonExceeded(format!(
            "base of {} atoms with horizon {}",
            base.len(),
            beta.horizon()
        )));
    }
    Ok(NBetaSub {
        beta: beta.clone(),
        base: base.iter().collect(),
    })
}

pub fn base_of(sub: &NBetaSub) -> FiniteSet {
    FiniteSet::from_atoms(sub.base.iter().copied())
}

/// Carrier cardinality of a substructure over a base of `m` atoms.
pub fn nbeta_size(beta: &BetaFn, m: usize) -> Result<u64> {
    gamma(beta, m)
}

/// Fixpoint closure of `seeds` under the five symbols, element by element.
/// Exponential in the base size; meant for cross-checks on small instances.
pub fn function_closure(beta: &BetaFn, seeds: &[NBetaElement]) -> Result<BTreeSet<NBetaElement>> {
    for e in seeds {
        e.validate(beta)?;
    }
    let mut closed: BTreeSet<NBetaElement> = seeds.iter().cloned().collect();
    let mut frontier: Vec<NBetaElement> = closed.iter().cloned().collect();
    while let Some(x) = frontier.pop() {
        let mut produced = Vec::new();
        for sym in NBetaSym::UNARY {
            produced.push(nbeta_apply(beta, sym, std::slice::from_ref(&x))?);
        }
        let present: Vec<NBetaElement> = closed.iter().cloned().collect();
        for y in present {
            produced.push(nbeta_apply(beta, NBetaSym::A, &[x.clone(), y.clone()])?);
            produced.push(nbeta_apply(beta, NBetaSym::A, &[y, x.clone()])?);
        }
        for e in produced {
            if closed.insert(e.clone()) {
                frontier.push(e);
            }
        }
    }
    Ok(closed)
}

/// The substructure generated by `seeds`: its base is the union of all seed
/// tuple entries. On small bases the symbolic answer is cross-checked against
/// the raw fixpoint closure.
pub fn nbeta_closure(beta: &BetaFn, seeds: &[NBetaElement]) -> Result<NBetaSub> {
    let mut base = BTreeSet::new();
    for e in seeds {
        e.validate(beta)?;
        base.extend(e.entries.iter().copied());
    }
    if base.len() > beta.horizon() {
        return Err(Error::HorizonExceeded(format!(
            "closure base of {} atoms with horizon {}",
            base.len(),
            beta.horizon()
        )));
    }
    let sub = NBetaSub {
        beta: beta.clone(),
        base,
    };
    if nbeta_size(beta, sub.base.len())? <= 512 {
        let raw = function_closure(beta, seeds)?;
        let carrier: BTreeSet<NBetaElement> = sub.carrier()?.into_iter().collect();
        assert_eq!(raw, carrier, "symbolic closure disagrees with raw fixpoint");
    }
    Ok(sub)
}

/// Sunflower verdict for a family of substructures, decided on base sets.
/// Returns the core substructure when the family is a sunflower.
pub fn transfer_sunflower(subs: &[NBetaSub]) -> Result<(bool, Option<NBetaSub>)> {
    if subs.is_empty() {
        return Err(Error::Precondition("empty substructure family".into()));
    }
    let beta = &subs[0].beta;
    if subs.iter().any(|s| &s.beta != beta) {
        return Err(Error::Precondition(
            "substructures over different cycle schedules".into(),
        ));
    }
    let bases: Vec<FiniteSet> = subs.iter().map(base_of).collect();
    let refs: Vec<&FiniteSet> = bases.iter().collect();
    match is_sunflower_sets(&refs) {
        Some(core) => Ok((true, Some(sub_from_base(beta, &core)?))),
        None => Ok((false, None)),
    }
}

/// An isomorphism between two substructures, given by its base bijection.
/// Elements map entrywise with the rotation preserved.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsoWitness {
    pub from: usize,
    pub to: usize,
    pub base_map: BTreeMap<BaseAtom, BaseAtom>,
}

impl IsoWitness {
    pub fn apply(&self, e: &NBetaElement) -> NBetaElement {
        NBetaElement {
            entries: e.entries.iter().map(|a| self.base_map[a]).collect(),
            rot: e.rot,
        }
    }
}

/// For a uniform sunflower, one isomorphism per pair that is the identity on
/// the shared carrier: pair off the non-core base atoms in sorted order and
/// fix the core atoms.
pub fn strong_uniformize(subs: &[NBetaSub]) -> Result<Vec<IsoWitness>> {
    let (is_sf, _) = transfer_sunflower(subs)?;
    if !is_sf {
        return Err(Error::Precondition("family is not a sunflower".into()));
    }
    let m = subs[0].base.len();
    if subs.iter().any(|s| s.base.len() != m) {
        return Err(Error::Precondition(
            "family is not uniform: base cardinalities differ".into(),
        ));
    }
    let mut out = Vec::new();
    for i in 0..subs.len() {
        for j in (i + 1)..subs.len() {
            let shared: BTreeSet<BaseAtom> = subs[i]
                .base
                .intersection(&subs[j].base)
                .copied()
                .collect();
            let mut base_map: BTreeMap<BaseAtom, BaseAtom> =
                shared.iter().map(|&a| (a, a)).collect();
            let own_i = subs[i].base.iter().copied().filter(|a| !shared.contains(a));
            let own_j = subs[j].base.iter().copied().filter(|a| !shared.contains(a));
            base_map.extend(own_i.zip(own_j));
            out.push(IsoWitness {
                from: i,
                to: j,
                base_map,
            });
        }
    }
    Ok(out)
}

/// A base-level embedding of one substructure into another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseEmbedding {
    pub map: BTreeMap<BaseAtom, BaseAtom>,
}

impl BaseEmbedding {
    pub fn identity(sub: &NBetaSub) -> Self {
        BaseEmbedding {
            map: sub.base.iter().map(|&a| (a, a)).collect(),
        }
    }

    fn check(&self, from: &NBetaSub, to: &NBetaSub) -> Result<()> {
        if self.map.len() != from.base.len()
            || !self.map.keys().all(|a| from.base.contains(a))
        {
            return Err(Error::Precondition(
                "embedding domain does not match the source base".into(),
            ));
        }
        let image: BTreeSet<BaseAtom> = self.map.values().copied().collect();
        if image.len() != self.map.len() || !image.iter().all(|a| to.base.contains(a)) {
            return Err(Error::Precondition(
                "embedding is not a base injection into the target".into(),
            ));
        }
        Ok(())
    }
}

/// Amalgamates B and C over A so that the two images meet exactly in the
/// image of A. Atoms of C outside A keep their names when free, and are
/// otherwise renamed to fresh atoms above everything in use.
pub fn sap_amalgamate(
    beta: &BetaFn,
    a: &NBetaSub,
    b: &NBetaSub,
    c: &NBetaSub,
    into_b: &BaseEmbedding,
    into_c: &BaseEmbedding,
) -> Result<(NBetaSub, BaseEmbedding, BaseEmbedding)> {
    for s in [a, b, c] {
        if &s.beta != beta {
            return Err(Error::Precondition(
                "substructures over different cycle schedules".into(),
            ));
        }
    }
    into_b.check(a, b)?;
    into_c.check(a, c)?;
    let c_image_of_a: BTreeMap<BaseAtom, BaseAtom> = into_c
        .map
        .iter()
        .map(|(&x, &y)| (y, into_b.map[&x]))
        .collect();
    let mut fresh = [&a.base, &b.base, &c.base]
        .iter()
        .flat_map(|s| s.iter().copied())
        .max()
        .map_or(0, |m| m + 1);
    let mut amalgam_base: BTreeSet<BaseAtom> = b.base.clone();
    let b_to_d = BaseEmbedding::identity(b);
    let mut c_to_d = BaseEmbedding { map: BTreeMap::new() };
    for &z in &c.base {
        let target = if let Some(&w) = c_image_of_a.get(&z) {
            w
        } else if !amalgam_base.contains(&z) {
            z
        } else {
            let w = fresh;
            fresh += 1;
            w
        };
        amalgam_base.insert(target);
        c_to_d.map.insert(z, target);
    }
    if amalgam_base.len() > beta.horizon() {
        return Err(Error::HorizonExceeded(format!(
            "amalgam base of {} atoms with horizon {}",
            amalgam_base.len(),
            beta.horizon()
        )));
    }
    let d = NBetaSub {
        beta: beta.clone(),
        base: amalgam_base,
    };
    b_to_d.check(b, &d)?;
    c_to_d.check(c, &d)?;
    Ok((d, b_to_d, c_to_d))
}

/// The canonical single generator: the full-length tuple over the base in
/// increasing atom order, at rotation 0.
pub fn single_generator(sub: &NBetaSub) -> Result<NBetaElement> {
    if sub.base.is_empty() {
        return Err(Error::Precondition(
            "the empty substructure has no single generator".into(),
        ));
    }
    Ok(NBetaElement {
        entries: sub.base.iter().copied().collect(),
        rot: 0,
    })
}

/// Explicit function tables over the carrier of the substructure on `base`,
/// agreeing with `nbeta_apply` pointwise: s, c, p0, p1 unary and a binary.
pub fn materialize(beta: &BetaFn, base: &FiniteSet) -> Result<FinStructure> {
    let sub = sub_from_base(beta, base)?;
    let size = nbeta_size(beta, base.len())?;
    if size > 5000 {
        return Err(Error::SizeCap(format!(
            "carrier of {} elements is past the materialization cap",
            size
        )));
    }
    let carrier = sub.carrier()?;
    let index: BTreeMap<&NBetaElement, usize> =
        carrier.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let sig = Signature::new(vec![
        ("s".into(), Arity::Unary),
        ("c".into(), Arity::Unary),
        ("p0".into(), Arity::Unary),
        ("p1".into(), Arity::Unary),
        ("a".into(), Arity::Binary),
    ])?;
    let mut tables = Vec::new();
    for sym in NBetaSym::UNARY {
        let mut t = Vec::with_capacity(carrier.len());
        for e in &carrier {
            let out = nbeta_apply(beta, sym, std::slice::from_ref(e))?;
            t.push(index[&out]);
        }
        tables.push(Table::Unary(t));
    }
    let mut t = Vec::with_capacity(carrier.len() * carrier.len());
    for x in &carrier {
        for y in &carrier {
            let out = nbeta_apply(beta, NBetaSym::A, &[x.clone(), y.clone()])?;
            t.push(index[&out]);
        }
    }
    tables.push(Table::Binary(t));
    FinStructure::new(sig, carrier.len(), tables)
}

/// Materialized carrier of a sub-base as a set of indices into the carrier
/// of the ambient materialized structure on `ambient_base`.
pub fn materialized_carrier_of(
    beta: &BetaFn,
    ambient_base: &FiniteSet,
    base: &FiniteSet,
) -> Result<GenSub> {
    if !base.is_subset(ambient_base) {
        return Err(Error::Precondition("base not inside the ambient base".into()));
    }
    let ambient = sub_from_base(beta, ambient_base)?;
    let carrier = ambient.carrier()?;
    let sub = sub_from_base(beta, base)?;
    Ok(GenSub {
        carrier: carrier
            .iter()
            .enumerate()
            .filter(|(_, e)| sub.contains(e))
            .map(|(i, _)| i)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alg::{enumerate_isomorphisms, find_isomorphism, is_strongly_uniform, is_uniform};
    use crate::sets::is_sunflower;
    use crate::sets::SetFamily;

    fn beta34() -> BetaFn {
        BetaFn::new(vec![3, 4]).unwrap()
    }

    fn beta345() -> BetaFn {
        BetaFn::new(vec![3, 4, 5]).unwrap()
    }

    fn el(entries: &[BaseAtom], rot: u64) -> NBetaElement {
        NBetaElement {
            entries: entries.to_vec(),
            rot,
        }
    }

    #[test]
    fn apply_projections() {
        let b = beta34();
        let xy = el(&[7, 9], 0);
        assert_eq!(
            nbeta_apply(&b, NBetaSym::P0, &[xy.clone()]).unwrap(),
            el(&[7], 0)
        );
        assert_eq!(
            nbeta_apply(&b, NBetaSym::P1, &[xy.clone()]).unwrap(),
            el(&[9], 0)
        );
        // non-distinguished and singleton cases are fixed
        let spun = el(&[7, 9], 2);
        assert_eq!(nbeta_apply(&b, NBetaSym::P0, &[spun.clone()]).unwrap(), spun);
        let single = el(&[7], 0);
        assert_eq!(
            nbeta_apply(&b, NBetaSym::P1, &[single.clone()]).unwrap(),
            single
        );
    }

    #[test]
    fn apply_cycle_and_rewind() {
        let b = beta34();
        let mut x = el(&[5], 0);
        for _ in 0..3 {
            x = nbeta_apply(&b, NBetaSym::S, &[x]).unwrap();
        }
        assert_eq!(x, el(&[5], 0));
        let y = el(&[5, 6], 3);
        assert_eq!(nbeta_apply(&b, NBetaSym::C, &[y]).unwrap(), el(&[5, 6], 0));
    }

    #[test]
    fn apply_prepend() {
        let b = beta345();
        let x = el(&[1], 0);
        let y = el(&[2, 3], 0);
        assert_eq!(
            nbeta_apply(&b, NBetaSym::A, &[x.clone(), y]).unwrap(),
            el(&[1, 2, 3], 0)
        );
        // occurs-check: first argument comes back
        let y2 = el(&[1], 0);
        assert_eq!(
            nbeta_apply(&b, NBetaSym::A, &[x.clone(), y2]).unwrap(),
            x
        );
        // non-distinguished second argument: first argument comes back
        let y3 = el(&[2, 3], 1);
        assert_eq!(nbeta_apply(&b, NBetaSym::A, &[x.clone(), y3]).unwrap(), x);
        // past the horizon
        let full = el(&[2, 3, 4], 0);
        assert!(matches!(
            nbeta_apply(&b, NBetaSym::A, &[x, full]),
            Err(Error::HorizonExceeded(_))
        ));
    }

    #[test]
    fn element_validation() {
        let b = beta34();
        assert!(NBetaElement::new(vec![], 0, &b).is_err());
        assert!(NBetaElement::new(vec![1, 1], 0, &b).is_err());
        assert!(NBetaElement::new(vec![1], 3, &b).is_err());
        assert!(NBetaElement::new(vec![1, 2, 3], 0, &b).is_err());
        assert!(NBetaElement::new(vec![1, 2], 3, &b).is_ok());
    }

    #[test]
    fn closure_of_pair_tuple() {
        let b = beta34();
        let sub = nbeta_closure(&b, &[el(&[4, 2], 0)]).unwrap();
        assert_eq!(sub.base, BTreeSet::from([2, 4]));
        assert_eq!(sub.carrier().unwrap().len(), 14);
    }

    #[test]
    fn closure_of_spun_singleton() {
        let b = beta34();
        let sub = nbeta_closure(&b, &[el(&[9], 1)]).unwrap();
        assert_eq!(sub.base, BTreeSet::from([9]));
        assert_eq!(sub.carrier().unwrap().len(), 3);
    }

    #[test]
    fn closure_of_nothing() {
        let b = beta34();
        let sub = nbeta_closure(&b, &[]).unwrap();
        assert!(sub.base.is_empty());
        assert!(sub.carrier().unwrap().is_empty());
    }

    #[test]
    fn size_law() {
        let b = beta345();
        for m in 0..=3usize {
            let base = FiniteSet::from_atoms(0..m as u32);
            let sub = sub_from_base(&b, &base).unwrap();
            assert_eq!(
                sub.carrier().unwrap().len() as u64,
                nbeta_size(&b, m).unwrap()
            );
        }
        assert_eq!(nbeta_size(&beta34(), 2).unwrap(), 14);
    }

    #[test]
    fn base_round_trip_and_horizon() {
        let b = beta34();
        let base = FiniteSet::from_atoms([3, 8]);
        let sub = sub_from_base(&b, &base).unwrap();
        assert_eq!(base_of(&sub), base);
        assert!(matches!(
            sub_from_base(&b, &FiniteSet::from_atoms([1, 2, 3])),
            Err(Error::HorizonExceeded(_))
        ));
    }

    #[test]
    fn transfer_matches_base_family() {
        let b = beta345();
        let subs: Vec<NBetaSub> = [[0u32, 1], [0, 2], [0, 3]]
            .iter()
            .map(|pair| sub_from_base(&b, &FiniteSet::from_atoms(pair.iter().copied())).unwrap())
            .collect();
        let (is_sf, core) = transfer_sunflower(&subs).unwrap();
        assert!(is_sf);
        assert_eq!(core.unwrap().base, BTreeSet::from([0]));

        let tri: Vec<NBetaSub> = [[0u32, 1], [1, 2], [0, 2]]
            .iter()
            .map(|pair| sub_from_base(&b, &FiniteSet::from_atoms(pair.iter().copied())).unwrap())
            .collect();
        let (is_sf, core) = transfer_sunflower(&tri).unwrap();
        assert!(!is_sf);
        assert!(core.is_none());
        // any two members form a sunflower
        assert!(transfer_sunflower(&tri[..2]).unwrap().0);
    }

    /// The base-level verdict agrees with a direct pairwise-intersection
    /// check on materialized carriers.
    #[test]
    fn transfer_matches_carrier_level() {
        let b = beta345();
        let families: Vec<Vec<Vec<u32>>> = vec![
            vec![vec![0, 1], vec![0, 2], vec![0, 3]],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
            vec![vec![0], vec![1], vec![2]],
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 1, 4]],
        ];
        for bases in families {
            let subs: Vec<NBetaSub> = bases
                .iter()
                .map(|v| sub_from_base(&b, &FiniteSet::from_atoms(v.iter().copied())).unwrap())
                .collect();
            let (verdict, _) = transfer_sunflower(&subs).unwrap();
            // direct: all pairwise carrier intersections equal
            let carriers: Vec<BTreeSet<NBetaElement>> = subs
                .iter()
                .map(|s| s.carrier().unwrap().into_iter().collect())
                .collect();
            let mut inters: Vec<BTreeSet<NBetaElement>> = Vec::new();
            for i in 0..carriers.len() {
                for j in (i + 1)..carriers.len() {
                    inters.push(carriers[i].intersection(&carriers[j]).cloned().collect());
                }
            }
            let direct = inters.windows(2).all(|w| w[0] == w[1]);
            assert_eq!(verdict, direct, "bases {:?}", bases);
        }
    }

    #[test]
    fn strong_uniformize_fixes_shared_carrier() {
        let b = beta345();
        let subs: Vec<NBetaSub> = [[0u32, 1], [0, 2], [0, 3]]
            .iter()
            .map(|pair| sub_from_base(&b, &FiniteSet::from_atoms(pair.iter().copied())).unwrap())
            .collect();
        let witnesses = strong_uniformize(&subs).unwrap();
        assert_eq!(witnesses.len(), 3);
        for w in &witnesses {
            let from = &subs[w.from];
            let to = &subs[w.to];
            let shared = from.intersection(to);
            for e in from.carrier().unwrap() {
                let img = w.apply(&e);
                assert!(to.contains(&img));
                if shared.contains(&e) {
                    assert_eq!(img, e);
                }
                // commutes with every unary symbol
                for sym in NBetaSym::UNARY {
                    let lhs = w.apply(&nbeta_apply(&b, sym, std::slice::from_ref(&e)).unwrap());
                    let rhs = nbeta_apply(&b, sym, std::slice::from_ref(&img)).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn strong_uniformize_rejects_non_sunflowers() {
        let b = beta345();
        let tri: Vec<NBetaSub> = [[0u32, 1], [1, 2], [0, 2]]
            .iter()
            .map(|pair| sub_from_base(&b, &FiniteSet::from_atoms(pair.iter().copied())).unwrap())
            .collect();
        assert!(strong_uniformize(&tri).is_err());
        let mixed = vec![
            sub_from_base(&b, &FiniteSet::from_atoms([0])).unwrap(),
            sub_from_base(&b, &FiniteSet::from_atoms([1, 2])).unwrap(),
        ];
        assert!(strong_uniformize(&mixed).is_err());
    }

    #[test]
    fn amalgamation_meets_in_the_shared_part() {
        let b = beta345();
        let a = sub_from_base(&b, &FiniteSet::from_atoms([0])).unwrap();
        let bb = sub_from_base(&b, &FiniteSet::from_atoms([0, 1])).unwrap();
        let cc = sub_from_base(&b, &FiniteSet::from_atoms([0, 2])).unwrap();
        let (d, ib, ic) = sap_amalgamate(
            &b,
            &a,
            &bb,
            &cc,
            &BaseEmbedding::identity(&a),
            &BaseEmbedding::identity(&a),
        )
        .unwrap();
        assert_eq!(d.base, BTreeSet::from([0, 1, 2]));
        let image_b: BTreeSet<BaseAtom> = ib.map.values().copied().collect();
        let image_c: BTreeSet<BaseAtom> = ic.map.values().copied().collect();
        let meet: BTreeSet<BaseAtom> = image_b.intersection(&image_c).copied().collect();
        assert_eq!(meet, BTreeSet::from([0]));
    }

    #[test]
    fn amalgamation_over_empty_base_is_disjoint() {
        let b = beta345();
        let a = sub_from_base(&b, &FiniteSet::new()).unwrap();
        let bb = sub_from_base(&b, &FiniteSet::from_atoms([0])).unwrap();
        let cc = sub_from_base(&b, &FiniteSet::from_atoms([0])).unwrap();
        let empty = BaseEmbedding { map: BTreeMap::new() };
        let (d, ib, ic) = sap_amalgamate(&b, &a, &bb, &cc, &empty, &empty).unwrap();
        let image_b: BTreeSet<BaseAtom> = ib.map.values().copied().collect();
        let image_c: BTreeSet<BaseAtom> = ic.map.values().copied().collect();
        assert!(image_b.is_disjoint(&image_c));
        assert_eq!(d.base.len(), 2);
    }

    #[test]
    fn amalgamation_of_equal_parts_is_identity() {
        let b = beta345();
        let a = sub_from_base(&b, &FiniteSet::from_atoms([4, 7])).unwrap();
        let id = BaseEmbedding::identity(&a);
        let (d, ib, ic) = sap_amalgamate(&b, &a, &a, &a, &id, &id).unwrap();
        assert_eq!(d.base, a.base);
        assert_eq!(ib.map, id.map);
        assert_eq!(ic.map, id.map);
    }

    #[test]
    fn single_generator_recovers_the_substructure() {
        let b = beta34();
        let sub = sub_from_base(&b, &FiniteSet::from_atoms([2, 5])).unwrap();
        let g = single_generator(&sub).unwrap();
        assert_eq!(g, el(&[2, 5], 0));
        let back = nbeta_closure(&b, std::slice::from_ref(&g)).unwrap();
        assert_eq!(back, sub);
        assert_eq!(back.carrier().unwrap().len(), 14);
        let empty = sub_from_base(&b, &FiniteSet::new()).unwrap();
        assert!(single_generator(&empty).is_err());
    }

    /// A nested chain of one-generated substructures never contains a
    /// 3-sunflower: nested cores differ.
    #[test]
    fn nested_chain_has_no_three_sunflower() {
        let b = beta345();
        let chain: Vec<NBetaSub> = (1..=3u32)
            .map(|m| sub_from_base(&b, &FiniteSet::from_atoms(0..m)).unwrap())
            .collect();
        for i in 0..3 {
            for j in (i + 1)..3 {
                for l in (j + 1)..3 {
                    let trio = vec![chain[i].clone(), chain[j].clone(), chain[l].clone()];
                    assert!(!transfer_sunflower(&trio).unwrap().0);
                }
            }
        }
        // while any two chain members do form a sunflower
        assert!(transfer_sunflower(&chain[..2]).unwrap().0);
    }

    #[test]
    fn materialize_singleton_base() {
        let b = beta34();
        let m = materialize(&b, &FiniteSet::from_atoms([0])).unwrap();
        assert_eq!(m.size(), 3);
        // s is a 3-cycle
        let mut x = 0;
        let mut seen = BTreeSet::new();
        for _ in 0..3 {
            seen.insert(x);
            x = m.apply_unary(0, x);
        }
        assert_eq!(x, 0);
        assert_eq!(seen.len(), 3);
        // c is constant, p0 = p1 = id on the distinguished element
        let c0 = m.apply_unary(1, 0);
        assert_eq!(m.apply_unary(1, 1), c0);
        assert_eq!(m.apply_unary(2, c0), c0);
        assert_eq!(m.apply_unary(3, c0), c0);
    }

    #[test]
    fn materialize_empty_base() {
        let b = beta34();
        let m = materialize(&b, &FiniteSet::new()).unwrap();
        assert_eq!(m.size(), 0);
    }

    #[test]
    fn materialized_closure_of_generator_is_everything() {
        let b = beta34();
        let base = FiniteSet::from_atoms([0, 1]);
        let m = materialize(&b, &base).unwrap();
        assert_eq!(m.size(), 14);
        let sub = sub_from_base(&b, &base).unwrap();
        let carrier = sub.carrier().unwrap();
        let gen = single_generator(&sub).unwrap();
        let gi = carrier.iter().position(|e| *e == gen).unwrap();
        let closed = m.closure(&BTreeSet::from([gi])).unwrap();
        assert_eq!(closed.carrier.len(), 14);
    }

    /// Every base bijection extends to exactly one isomorphism of the
    /// materialized substructures.
    #[test]
    fn iso_extension_unique() {
        let b = beta345();
        let ambient = FiniteSet::from_atoms([0, 1, 2]);
        let m = materialize(&b, &ambient).unwrap();
        let sa = materialized_carrier_of(&b, &ambient, &FiniteSet::from_atoms([0, 1])).unwrap();
        let sb = materialized_carrier_of(&b, &ambient, &FiniteSet::from_atoms([1, 2])).unwrap();
        let all = enumerate_isomorphisms(&m, &sa, &m, &sb, &BTreeMap::new(), 0).unwrap();
        // 2 base bijections, one extension each
        assert_eq!(all.len(), 2);
        assert!(find_isomorphism(&m, &sa, &m, &sb).unwrap().is_some());
    }

    /// Equal carrier sizes force equal base sizes, hence isomorphism.
    #[test]
    fn equal_size_implies_isomorphic() {
        let b = beta345();
        let ambient = FiniteSet::from_atoms([0, 1, 2]);
        let m = materialize(&b, &ambient).unwrap();
        let pairs = [[0u32, 1], [0, 2], [1, 2]];
        let subs: Vec<GenSub> = pairs
            .iter()
            .map(|p| {
                materialized_carrier_of(&b, &ambient, &FiniteSet::from_atoms(p.iter().copied()))
                    .unwrap()
            })
            .collect();
        assert!(subs.windows(2).all(|w| w[0].len() == w[1].len()));
        assert!(is_uniform(&m, &subs).unwrap());
    }

    /// A uniform sunflower of materialized substructures passes the
    /// strong-uniformity check at the carrier level.
    #[test]
    fn uniform_sunflowers_are_strongly_uniform_materialized() {
        let b = beta345();
        let ambient = FiniteSet::from_atoms([0, 1, 2]);
        let m = materialize(&b, &ambient).unwrap();
        let subs: Vec<GenSub> = [[0u32, 1], [0, 2]]
            .iter()
            .map(|p| {
                materialized_carrier_of(&b, &ambient, &FiniteSet::from_atoms(p.iter().copied()))
                    .unwrap()
            })
            .collect();
        assert!(is_strongly_uniform(&m, &subs).unwrap());
    }

    #[test]
    fn intersection_commutes_with_bases() {
        let b = beta345();
        let bases = [vec![0u32, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2], vec![]];
        for x in &bases {
            for y in &bases {
                let sx = sub_from_base(&b, &FiniteSet::from_atoms(x.iter().copied())).unwrap();
                let sy = sub_from_base(&b, &FiniteSet::from_atoms(y.iter().copied())).unwrap();
                let cx: BTreeSet<NBetaElement> = sx.carrier().unwrap().into_iter().collect();
                let cy: BTreeSet<NBetaElement> = sy.carrier().unwrap().into_iter().collect();
                let meet: BTreeSet<NBetaElement> = cx.intersection(&cy).cloned().collect();
                let via_base: BTreeSet<NBetaElement> = sx
                    .intersection(&sy)
                    .carrier()
                    .unwrap()
                    .into_iter()
                    .collect();
                assert_eq!(meet, via_base);
            }
        }
    }

    #[test]
    fn sub_json_round_trip() {
        let b = beta34();
        let sub = sub_from_base(&b, &FiniteSet::from_atoms([5, 2])).unwrap();
        let js = serde_json::to_string(&sub).unwrap();
        assert!(js.contains("\"beta\":[3,4]"));
        assert!(js.contains("\"base\":[2,5]"));
        let back: NBetaSub = serde_json::from_str(&js).unwrap();
        assert_eq!(back, sub);
        let e = el(&[2, 5], 3);
        let js = serde_json::to_string(&e).unwrap();
        assert_eq!(js, "{\"tuple\":[2,5],\"rot\":3}");
    }

    /// The base verdict is also consistent with the plain-set machinery used
    /// elsewhere.
    #[test]
    fn transfer_consistent_with_set_family_check() {
        let b = beta345();
        let bases = vec![
            FiniteSet::from_atoms([0, 1]),
            FiniteSet::from_atoms([0, 2]),
            FiniteSet::from_atoms([0, 3]),
        ];
        let subs: Vec<NBetaSub> = bases
            .iter()
            .map(|s| sub_from_base(&b, s).unwrap())
            .collect();
        let family = SetFamily::from_sets(bases).unwrap();
        assert_eq!(
            transfer_sunflower(&subs).unwrap().0,
            is_sunflower(&family).is_some()
        );
    }
}
