//! Exact numeric machinery: falling factorials, the substructure-size
//! function gamma and its generalized inverse, the classical and structural
//! sunflower bounds, and synthesis of a cycle-length function beta from a
//! target growth function alpha, with a machine-checked certificate.
//!
//! All bound evaluation is exact big-integer arithmetic; gamma itself is kept
//! in u64 with checked operations since it must stay materializable anyway.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of non-repeating sequences of size `k` on `n` elements:
/// the falling factorial n(n-1)...(n-k+1); 1 when k = 0; 0 when k > n.
pub fn seqsize(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut out = BigUint::one();
    for i in 0..k {
        out *= n - i;
    }
    out
}

pub fn factorial(m: u64) -> BigUint {
    seqsize(m, m)
}

fn factorial_u64(m: u64) -> Result<u64> {
    let mut out: u64 = 1;
    for i in 2..=m {
        out = out
            .checked_mul(i)
            .ok_or_else(|| Error::Overflow(format!("{}! exceeds u64", m)))?;
    }
    Ok(out)
}

/// Strictly increasing cycle-length function, indexed from 1 up to a finite
/// horizon. Tuples of length m live on cycles of length beta(m); there is no
/// beta(0) and no empty-tuple element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BetaFn {
    values: Vec<u64>,
}

impl BetaFn {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("beta needs at least one value".into()));
        }
        if values[0] < 3 {
            return Err(Error::InvalidInput(format!(
                "beta(1) = {} < 3",
                values[0]
            )));
        }
        for w in values.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput(format!(
                    "beta must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(BetaFn { values })
    }

    /// Number of defined values; tuples longer than this leave the fragment.
    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    /// beta(m) for 1 <= m <= horizon.
    pub fn get(&self, m: usize) -> Result<u64> {
        if m == 0 || m > self.values.len() {
            return Err(Error::HorizonExceeded(format!(
                "beta({}) outside 1..={}",
                m,
                self.values.len()
            )));
        }
        Ok(self.values[m - 1])
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }
}

/// gamma_beta(m) = sum over k = 1..m of seqsize(m, k) * beta(k): the carrier
/// size of a substructure with m base elements. Strictly increasing in m.
pub fn gamma(beta: &BetaFn, m: usize) -> Result<u64> {
    if m > beta.horizon() {
        return Err(Error::HorizonExceeded(format!(
            "gamma({}) past horizon {}",
            m,
            beta.horizon()
        )));
    }
    let mut total: u64 = 0;
    for k in 1..=m {
        let count = seqsize(m as u64, k as u64);
        let count: u64 = count
            .try_into()
            .map_err(|_| Error::Overflow(format!("seqsize({}, {}) exceeds u64", m, k)))?;
        let term = count
            .checked_mul(beta.get(k)?)
            .ok_or_else(|| Error::Overflow("gamma term exceeds u64".into()))?;
        total = total
            .checked_add(term)
            .ok_or_else(|| Error::Overflow("gamma sum exceeds u64".into()))?;
    }
    Ok(total)
}

/// Least m with gamma(beta, m) >= t; inverse of gamma on its range.
pub fn gamma_circ(beta: &BetaFn, t: u64) -> Result<usize> {
    for m in 0..=beta.horizon() {
        if gamma(beta, m)? >= t {
            return Ok(m);
        }
    }
    Err(Error::HorizonExceeded(format!(
        "gamma never reaches {} within horizon {}",
        t,
        beta.horizon()
    )))
}

/// Erdos-Rado bound k!(n-1)^k.
pub fn er_bound(n: u64, k: u64) -> BigUint {
    factorial(k) * BigUint::from(n.saturating_sub(1)).pow(k as u32)
}

/// Structural bound alpha(k) * (n-1)^alpha(k).
pub fn thm_bound(alpha: &MonotoneMap, n: u64, k: u64) -> Result<BigUint> {
    let a = alpha.eval(k)?;
    if a > 1_000_000 {
        return Err(Error::SizeCap(format!(
            "exponent alpha({}) = {} past the exact-evaluation cap",
            k, a
        )));
    }
    Ok(BigUint::from(a) * BigUint::from(n.saturating_sub(1)).pow(a as u32))
}

/// m!(n-1)^(m!) with m = gamma_circ(beta, k): the bound the construction
/// inherits from the classical lemma for substructures of size at most k.
pub fn derived_sf_bound(beta: &BetaFn, n: u64, k: u64) -> Result<BigUint> {
    let m = gamma_circ(beta, k)?;
    let mfact = factorial_u64(m as u64)?;
    if mfact > 1_000_000 {
        return Err(Error::SizeCap(format!(
            "exponent {}! past the exact-evaluation cap",
            m
        )));
    }
    Ok(BigUint::from(mfact) * BigUint::from(n.saturating_sub(1)).pow(mfact as u32))
}

/// A nondecreasing divergent integer map from a small catalog: closed forms
/// or an explicit value table. Used for the target growth function alpha and
/// probed lazily; divergence past a table's last entry cannot be certified,
/// so probes there fail instead of guessing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaSpec {
    /// alpha(k) = slope * k + offset
    Affine { slope: u64, offset: u64 },
    /// alpha(k) = coeff * k^degree + offset
    Poly { coeff: u64, degree: u32, offset: u64 },
    /// alpha(k) = values[k]; probes past the table are a horizon error.
    Table { values: Vec<u64> },
}

/// A total nondecreasing map with a lazy generalized inverse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneMap {
    spec: AlphaSpec,
}

impl MonotoneMap {
    pub fn new(spec: AlphaSpec) -> Result<Self> {
        match &spec {
            AlphaSpec::Affine { slope, .. } => {
                if *slope == 0 {
                    return Err(Error::InvalidInput(
                        "affine alpha with slope 0 does not diverge".into(),
                    ));
                }
            }
            AlphaSpec::Poly { coeff, degree, .. } => {
                if *coeff == 0 || *degree == 0 {
                    return Err(Error::InvalidInput(
                        "polynomial alpha must have positive coefficient and degree".into(),
                    ));
                }
            }
            AlphaSpec::Table { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidInput("empty alpha table".into()));
                }
                for w in values.windows(2) {
                    if w[1] < w[0] {
                        return Err(Error::InvalidInput(format!(
                            "alpha table decreases: {} then {}",
                            w[0], w[1]
                        )));
                    }
                }
                // A flat tail cannot witness divergence; reject tables whose
                // last entry never improves on the preceding strict rise.
                if values.len() >= 2 && values[values.len() - 1] == values[0] {
                    return Err(Error::InvalidInput(
                        "alpha table is constant; divergence cannot be certified".into(),
                    ));
                }
            }
        }
        Ok(MonotoneMap { spec })
    }

    /// Convenience for the paper-style affine family alpha(k) = k + c.
    pub fn affine(slope: u64, offset: u64) -> Result<Self> {
        MonotoneMap::new(AlphaSpec::Affine { slope, offset })
    }

    pub fn spec(&self) -> &AlphaSpec {
        &self.spec
    }

    pub fn eval(&self, k: u64) -> Result<u64> {
        match &self.spec {
            AlphaSpec::Affine { slope, offset } => slope
                .checked_mul(k)
                .and_then(|v| v.checked_add(*offset))
                .ok_or_else(|| Error::Overflow("alpha(k) exceeds u64".into())),
            AlphaSpec::Poly {
                coeff,
                degree,
                offset,
            } => {
                let mut pow: u64 = 1;
                for _ in 0..*degree {
                    pow = pow
                        .checked_mul(k)
                        .ok_or_else(|| Error::Overflow("k^d exceeds u64".into()))?;
                }
                coeff
                    .checked_mul(pow)
                    .and_then(|v| v.checked_add(*offset))
                    .ok_or_else(|| Error::Overflow("alpha(k) exceeds u64".into()))
            }
            AlphaSpec::Table { values } => values.get(k as usize).copied().ok_or_else(|| {
                Error::HorizonExceeded(format!(
                    "alpha table has {} entries, probed at {}",
                    values.len(),
                    k
                ))
            }),
        }
    }

    /// A short human-readable tag for reports and certificates.
    pub fn describe(&self) -> String {
        match &self.spec {
            AlphaSpec::Affine { slope, offset } => format!("affine:{}k+{}", slope, offset),
            AlphaSpec::Poly {
                coeff,
                degree,
                offset,
            } => format!("poly:{}k^{}+{}", coeff, degree, offset),
            AlphaSpec::Table { values } => format!("table[{} entries]", values.len()),
        }
    }
}

/// alpha_circ(t) = least k with alpha(k) >= t.
pub fn alpha_circ(alpha: &MonotoneMap, t: u64) -> Result<u64> {
    if alpha.eval(0)? >= t {
        return Ok(0);
    }
    // Double to bracket, then binary search; tables fail with a horizon
    // error before this loops forever.
    let mut hi: u64 = 1;
    while alpha.eval(hi)? < t {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::HorizonExceeded("alpha_circ probe exhausted".into()))?;
    }
    let mut lo = hi / 2; // alpha(lo) < t
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if alpha.eval(mid)? >= t {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Machine-checked record that (gamma_circ(beta, k))! <= alpha(k) for every
/// k up to `checked_k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaCertificate {
    pub alpha: String,
    pub beta: Vec<u64>,
    pub horizon: usize,
    pub checked_k: u64,
    pub ok: bool,
}

/// Synthesizes beta from alpha by the greedy rule
/// beta(m) = max(beta(m-1) + 1, alpha_circ((m+1)!), 3 at m = 1),
/// extending until gamma reaches the certification horizon, then emits a
/// certificate verified by the independent checker.
pub fn synth_beta(alpha: &MonotoneMap, h_cert: u64) -> Result<(BetaFn, BetaCertificate)> {
    if alpha.eval(0)? < 3 {
        return Err(Error::Precondition(format!(
            "alpha(0) = {} < 3",
            alpha.eval(0)?
        )));
    }
    let mut values: Vec<u64> = Vec::new();
    loop {
        let m = values.len() + 1;
        let fact = factorial_u64(m as u64 + 1)?;
        let floor = values.last().map(|v| v + 1).unwrap_or(3);
        let v = floor.max(alpha_circ(alpha, fact)?);
        values.push(v);
        let beta = BetaFn::new(values.clone())?;
        if gamma(&beta, beta.horizon())? >= h_cert {
            let cert = check_beta_certificate(alpha, &beta, h_cert)?;
            return Ok((beta, cert));
        }
        if m > 64 {
            return Err(Error::HorizonExceeded(
                "beta synthesis did not reach the certification horizon".into(),
            ));
        }
    }
}

/// Independent certificate checker: recomputes gamma from the beta values
/// alone and verifies (gamma_circ(k))! <= alpha(k) for all k <= checked_k.
/// A violation is a hard error carrying the first bad k.
pub fn check_beta_certificate(
    alpha: &MonotoneMap,
    beta: &BetaFn,
    checked_k: u64,
) -> Result<BetaCertificate> {
    // Walk the gamma steps instead of inverting per k.
    let mut boundaries: Vec<u64> = Vec::with_capacity(beta.horizon() + 1);
    for m in 0..=beta.horizon() {
        boundaries.push(gamma(beta, m)?);
    }
    if *boundaries.last().unwrap() < checked_k {
        return Err(Error::HorizonExceeded(format!(
            "gamma({}) = {} below the certification horizon {}",
            beta.horizon(),
            boundaries.last().unwrap(),
            checked_k
        )));
    }
    let mut m: usize = 0;
    for k in 0..=checked_k {
        while boundaries[m] < k {
            m += 1;
        }
        let need = factorial(m as u64);
        let have = BigUint::from(alpha.eval(k)?);
        if need > have {
            return Err(Error::CertificateFailed {
                k,
                detail: format!("(gamma_circ({}))! = {}! = {} > alpha({}) = {}", k, m, need, k, have),
            });
        }
    }
    Ok(BetaCertificate {
        alpha: alpha.describe(),
        beta: beta.values().to_vec(),
        horizon: beta.horizon(),
        checked_k,
        ok: true,
    })
}
