//! Builder for finite fragments of the disjoint-cycles structure: one unary
//! symbol f acting as a union of disjoint k-cycles. Element b*k + j of copy b
//! maps to b*k + (j+1) mod k.

use serde::{Deserialize, Serialize};

use crate::alg::{Arity, FinStructure, Signature, Table};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MkFragmentSpec {
    pub k: usize,
    pub copies: usize,
}

pub fn build_mk_fragment(spec: &MkFragmentSpec) -> Result<FinStructure> {
    if spec.k == 0 {
        return Err(Error::Precondition("cycle length must be positive".into()));
    }
    let size = spec
        .k
        .checked_mul(spec.copies)
        .ok_or_else(|| Error::Overflow("k * copies".into()))?;
    if size > 100_000 {
        return Err(Error::SizeCap(format!("fragment of {} elements", size)));
    }
    let sig = Signature::new(vec![("f".into(), Arity::Unary)])?;
    let mut f = Vec::with_capacity(size);
    for b in 0..spec.copies {
        for j in 0..spec.k {
            f.push(b * spec.k + (j + 1) % spec.k);
        }
    }
    FinStructure::new(sig, size, vec![Table::Unary(f)])
}
