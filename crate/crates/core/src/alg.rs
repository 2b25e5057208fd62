//! Finite algebraic structures as explicit function tables, substructure
//! generation by closure, backtracking isomorphism with functional
//! constraint propagation, and the uniformity predicates.
//!
//! Signatures carry only unary and binary function symbols. Structures are
//! immutable after construction and safe to share across threads.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Arity {
    Unary,
    Binary,
}

impl From<Arity> for u8 {
    fn from(a: Arity) -> u8 {
        match a {
            Arity::Unary => 1,
            Arity::Binary => 2,
        }
    }
}

impl TryFrom<u8> for Arity {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Arity::Unary),
            2 => Ok(Arity::Binary),
            other => Err(format!("arity must be 1 or 2, got {}", other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolDecl {
    pub name: String,
    pub arity: Arity,
}

/// A finite sequence of uniquely named function symbols of arity 1 or 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature {
    symbols: Vec<SymbolDecl>,
}

impl Signature {
    pub fn new(symbols: Vec<(String, Arity)>) -> Result<Self> {
        let mut names = BTreeSet::new();
        for (name, _) in &symbols {
            if !names.insert(name.clone()) {
                return Err(Error::InvalidInput(format!("duplicate symbol {}", name)));
            }
        }
        Ok(Signature {
            symbols: symbols
                .into_iter()
                .map(|(name, arity)| SymbolDecl { name, arity })
                .collect(),
        })
    }

    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.symbols
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Table {
    /// element -> element
    Unary(Vec<usize>),
    /// row-major (x * size + y) -> element
    Binary(Vec<usize>),
}

/// A finite algebraic structure: total function tables over {0..size-1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinStructure {
    sig: Signature,
    size: usize,
    tables: Vec<Table>,
}

impl FinStructure {
    pub fn new(sig: Signature, size: usize, tables: Vec<Table>) -> Result<Self> {
        if tables.len() != sig.symbols().len() {
            return Err(Error::InvalidInput(format!(
                "{} tables for {} symbols",
                tables.len(),
                sig.symbols().len()
            )));
        }
        for (decl, table) in sig.symbols().iter().zip(&tables) {
            let (expect, got, vals): (usize, usize, &Vec<usize>) = match (decl.arity, table) {
                (Arity::Unary, Table::Unary(v)) => (size, v.len(), v),
                (Arity::Binary, Table::Binary(v)) => (size * size, v.len(), v),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "table shape mismatch for symbol {}",
                        decl.name
                    )))
                }
            };
            if got != expect {
                return Err(Error::InvalidInput(format!(
                    "table for {} has {} entries, expected {}",
                    decl.name, got, expect
                )));
            }
            if let Some(bad) = vals.iter().find(|&&v| v >= size) {
                return Err(Error::InvalidInput(format!(
                    "table for {} maps outside the universe: {}",
                    decl.name, bad
                )));
            }
        }
        Ok(FinStructure { sig, size, tables })
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn apply_unary(&self, sym: usize, x: usize) -> usize {
        match &self.tables[sym] {
            Table::Unary(v) => v[x],
            Table::Binary(_) => panic!("symbol {} is binary", sym),
        }
    }

    pub fn apply_binary(&self, sym: usize, x: usize, y: usize) -> usize {
        match &self.tables[sym] {
            Table::Binary(v) => v[x * self.size + y],
            Table::Unary(_) => panic!("symbol {} is unary", sym),
        }
    }

    /// Least carrier containing `seed` closed under every symbol.
    pub fn closure(&self, seed: &BTreeSet<usize>) -> Result<GenSub> {
        for &x in seed {
            if x >= self.size {
                return Err(Error::Precondition(format!(
                    "seed element {} outside universe of size {}",
                    x, self.size
                )));
            }
        }
        let mut carrier: BTreeSet<usize> = seed.clone();
        let mut frontier: Vec<usize> = carrier.iter().copied().collect();
        while let Some(x) = frontier.pop() {
            for (i, decl) in self.sig.symbols().iter().enumerate() {
                match decl.arity {
                    Arity::Unary => {
                        let y = self.apply_unary(i, x);
                        if carrier.insert(y) {
                            frontier.push(y);
                        }
                    }
                    Arity::Binary => {
                        // pair x with everything present, both orders
                        let present: Vec<usize> = carrier.iter().copied().collect();
                        for z in present {
                            for y in [self.apply_binary(i, x, z), self.apply_binary(i, z, x)] {
                                if carrier.insert(y) {
                                    frontier.push(y);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(GenSub { carrier })
    }

    pub fn is_closed(&self, carrier: &BTreeSet<usize>) -> bool {
        for &x in carrier {
            for (i, decl) in self.sig.symbols().iter().enumerate() {
                match decl.arity {
                    Arity::Unary => {
                        if !carrier.contains(&self.apply_unary(i, x)) {
                            return false;
                        }
                    }
                    Arity::Binary => {
                        for &y in carrier {
                            if !carrier.contains(&self.apply_binary(i, x, y)) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    /// All distinct closed carriers of size <= k, grown one generator at a
    /// time from the closure of the empty seed. `truncated` reports hitting
    /// the enumeration cap; the listing is never silently incomplete.
    pub fn substructures_up_to(&self, k: usize, cap: usize) -> (Vec<GenSub>, bool) {
        let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        let empty = self
            .closure(&BTreeSet::new())
            .expect("empty seed is valid")
            .carrier;
        let mut truncated = false;
        if empty.len() <= k {
            seen.insert(empty.clone());
            let mut frontier = vec![empty];
            while let Some(s) = frontier.pop() {
                for x in 0..self.size {
                    if s.contains(&x) {
                        continue;
                    }
                    let mut seed = s.clone();
                    seed.insert(x);
                    let grown = self.closure(&seed).expect("in-universe seed").carrier;
                    if grown.len() <= k && !seen.contains(&grown) {
                        if seen.len() >= cap {
                            truncated = true;
                            continue;
                        }
                        seen.insert(grown.clone());
                        frontier.push(grown);
                    }
                }
            }
        }
        (
            seen.into_iter().map(|carrier| GenSub { carrier }).collect(),
            truncated,
        )
    }

    /// The whole universe as a substructure.
    pub fn full_carrier(&self) -> GenSub {
        GenSub {
            carrier: (0..self.size).collect(),
        }
    }

    pub fn to_file_format(&self) -> StructureFile {
        let mut tables = BTreeMap::new();
        for (decl, table) in self.sig.symbols().iter().zip(&self.tables) {
            let json = match table {
                Table::Unary(v) => TableFile::Unary(v.clone()),
                Table::Binary(v) => TableFile::Binary(
                    v.chunks(self.size.max(1)).map(|row| row.to_vec()).collect(),
                ),
            };
            tables.insert(decl.name.clone(), json);
        }
        StructureFile {
            signature: self.sig.clone(),
            size: self.size,
            tables,
        }
    }

    pub fn from_file_format(file: StructureFile) -> Result<Self> {
        let mut tables = Vec::new();
        for decl in file.signature.symbols() {
            let raw = file.tables.get(&decl.name).ok_or_else(|| {
                Error::InvalidInput(format!("missing table for symbol {}", decl.name))
            })?;
            let table = match (decl.arity, raw) {
                (Arity::Unary, TableFile::Unary(v)) => Table::Unary(v.clone()),
                (Arity::Binary, TableFile::Binary(rows)) => {
                    let mut flat = Vec::with_capacity(file.size * file.size);
                    if rows.len() != file.size {
                        return Err(Error::InvalidInput(format!(
                            "binary table for {} has {} rows, expected {}",
                            decl.name,
                            rows.len(),
                            file.size
                        )));
                    }
                    for row in rows {
                        if row.len() != file.size {
                            return Err(Error::InvalidInput(format!(
                                "ragged binary table for {}",
                                decl.name
                            )));
                        }
                        flat.extend_from_slice(row);
                    }
                    Table::Binary(flat)
                }
                // An empty listing deserializes as unary; fix it up.
                (Arity::Binary, TableFile::Unary(v)) if v.is_empty() && file.size == 0 => {
                    Table::Binary(Vec::new())
                }
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "table shape mismatch for symbol {}",
                        decl.name
                    )))
                }
            };
            tables.push(table);
        }
        FinStructure::new(file.signature, file.size, tables)
    }
}

/// On-disk structure format: unary tables flat, binary tables row-major
/// nested arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureFile {
    pub signature: Signature,
    pub size: usize,
    pub tables: BTreeMap<String, TableFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableFile {
    Unary(Vec<usize>),
    Binary(Vec<Vec<usize>>),
}

/// A carrier closed under every function symbol of its parent structure.
/// Ops take the parent explicitly; carriers are plain value types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GenSub {
    pub carrier: BTreeSet<usize>,
}

impl GenSub {
    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn intersection(&self, other: &GenSub) -> GenSub {
        GenSub {
            carrier: self.carrier.intersection(&other.carrier).copied().collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Isomorphism search
// ---------------------------------------------------------------------------

/// A bijection carrier(A) -> carrier(B) commuting with every symbol.
pub type IsoMap = BTreeMap<usize, usize>;

struct IsoSearch<'a> {
    ma: &'a FinStructure,
    mb: &'a FinStructure,
    a_carrier: &'a BTreeSet<usize>,
    b_carrier: &'a BTreeSet<usize>,
    order: Vec<usize>,
    limit: usize,
    found: Vec<IsoMap>,
}

/// Enumerates isomorphisms from (ma, a) to (mb, b) extending `fixed`,
/// stopping after `limit` (0 means unlimited). Images of generators
/// determine images of everything they generate, so each assignment is
/// propagated through the tables before further branching.
pub fn enumerate_isomorphisms(
    ma: &FinStructure,
    a: &GenSub,
    mb: &FinStructure,
    b: &GenSub,
    fixed: &IsoMap,
    limit: usize,
) -> Result<Vec<IsoMap>> {
    if ma.sig() != mb.sig() {
        return Err(Error::Precondition("signature mismatch".into()));
    }
    if a.len() != b.len() {
        return Ok(Vec::new());
    }
    // Branch on strong generators first: elements whose singleton closure
    // (within the carrier) is largest.
    let mut order: Vec<usize> = a.carrier.iter().copied().collect();
    let mut gen_size: BTreeMap<usize, usize> = BTreeMap::new();
    for &x in &a.carrier {
        let c = ma.closure(&BTreeSet::from([x]))?;
        gen_size.insert(x, c.len());
    }
    order.sort_by(|x, y| gen_size[y].cmp(&gen_size[x]).then(x.cmp(y)));

    let mut search = IsoSearch {
        ma,
        mb,
        a_carrier: &a.carrier,
        b_carrier: &b.carrier,
        order,
        limit,
        found: Vec::new(),
    };
    let mut map: IsoMap = BTreeMap::new();
    let mut inverse: IsoMap = BTreeMap::new();
    let mut pairs: Vec<(usize, usize)> = fixed.iter().map(|(&x, &y)| (x, y)).collect();
    let mut ok = true;
    for (x, y) in pairs.drain(..) {
        if !assign(&mut search, &mut map, &mut inverse, x, y) {
            ok = false;
            break;
        }
    }
    if ok {
        backtrack(&mut search, &mut map, &mut inverse);
    }
    Ok(search.found)
}

fn backtrack(search: &mut IsoSearch, map: &mut IsoMap, inverse: &mut IsoMap) {
    if search.limit > 0 && search.found.len() >= search.limit {
        return;
    }
    let next = search.order.iter().copied().find(|x| !map.contains_key(x));
    let x = match next {
        Some(x) => x,
        None => {
            search.found.push(map.clone());
            return;
        }
    };
    let targets: Vec<usize> = search
        .b_carrier
        .iter()
        .copied()
        .filter(|y| !inverse.contains_key(y))
        .collect();
    for y in targets {
        let saved_map = map.clone();
        let saved_inv = inverse.clone();
        if assign(search, map, inverse, x, y) {
            backtrack(search, map, inverse);
            if search.limit > 0 && search.found.len() >= search.limit {
                return;
            }
        }
        *map = saved_map;
        *inverse = saved_inv;
    }
}

/// Adds x -> y and propagates all functional consequences. Returns false on
/// conflict (map left dirty; caller restores).
fn assign(search: &mut IsoSearch, map: &mut IsoMap, inverse: &mut IsoMap, x: usize, y: usize) -> bool {
    let mut queue = vec![(x, y)];
    while let Some((x, y)) = queue.pop() {
        if !search.a_carrier.contains(&x) || !search.b_carrier.contains(&y) {
            return false;
        }
        match (map.get(&x), inverse.get(&y)) {
            (Some(&y0), _) if y0 != y => return false,
            (_, Some(&x0)) if x0 != x => return false,
            (Some(_), _) => continue,
            _ => {}
        }
        map.insert(x, y);
        inverse.insert(y, x);
        for (i, decl) in search.ma.sig().symbols().iter().enumerate() {
            match decl.arity {
                Arity::Unary => {
                    queue.push((search.ma.apply_unary(i, x), search.mb.apply_unary(i, y)));
                }
                Arity::Binary => {
                    let assigned: Vec<(usize, usize)> =
                        map.iter().map(|(&a, &b)| (a, b)).collect();
                    for (ax, by) in assigned {
                        queue.push((
                            search.ma.apply_binary(i, x, ax),
                            search.mb.apply_binary(i, y, by),
                        ));
                        queue.push((
                            search.ma.apply_binary(i, ax, x),
                            search.mb.apply_binary(i, by, y),
                        ));
                    }
                }
            }
        }
    }
    true
}

/// First isomorphism, if any.
pub fn find_isomorphism(
    ma: &FinStructure,
    a: &GenSub,
    mb: &FinStructure,
    b: &GenSub,
) -> Result<Option<IsoMap>> {
    Ok(enumerate_isomorphisms(ma, a, mb, b, &BTreeMap::new(), 1)?.into_iter().next())
}

/// Pairwise isomorphic.
pub fn is_uniform(m: &FinStructure, subs: &[GenSub]) -> Result<bool> {
    for i in 0..subs.len() {
        for j in (i + 1)..subs.len() {
            if find_isomorphism(m, &subs[i], m, &subs[j])?.is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Pairwise isomorphic via maps fixing each carrier intersection pointwise.
pub fn is_strongly_uniform(m: &FinStructure, subs: &[GenSub]) -> Result<bool> {
    for i in 0..subs.len() {
        for j in (i + 1)..subs.len() {
            let fixed: IsoMap = subs[i]
                .carrier
                .intersection(&subs[j].carrier)
                .map(|&x| (x, x))
                .collect();
            if enumerate_isomorphisms(m, &subs[i], m, &subs[j], &fixed, 1)?.is_empty() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Homogeneity fragment check
// ---------------------------------------------------------------------------

/// A finitely checkable necessary condition for ultrahomogeneity: every
/// isomorphism between small substructures of the fragment extends to an
/// automorphism of the fragment. An automorphism of a fragment need not
/// witness one of the infinite structure, so this is one-directional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub substructures: usize,
    pub isomorphisms_checked: usize,
    pub non_extending: Vec<NonExtending>,
    pub truncated: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonExtending {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    pub map: Vec<(usize, usize)>,
}

pub fn extension_check(m: &FinStructure, size_bound: usize, cap: usize) -> Result<ExtensionReport> {
    let (subs, truncated) = m.substructures_up_to(size_bound, cap);
    let full = m.full_carrier();
    let mut checked = 0;
    let mut non_extending = Vec::new();
    for a in &subs {
        for b in &subs {
            let isos = enumerate_isomorphisms(m, a, m, b, &BTreeMap::new(), 0)?;
            for sigma in isos {
                checked += 1;
                let extends =
                    !enumerate_isomorphisms(m, &full, m, &full, &sigma, 1)?.is_empty();
                if !extends {
                    non_extending.push(NonExtending {
                        from: a.carrier.iter().copied().collect(),
                        to: b.carrier.iter().copied().collect(),
                        map: sigma.into_iter().collect(),
                    });
                }
            }
        }
    }
    Ok(ExtensionReport {
        substructures: subs.len(),
        isomorphisms_checked: checked,
        non_extending,
        truncated,
    })
}
