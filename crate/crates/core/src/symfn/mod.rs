//! Symmetric Boolean functions and their decomposition over the `f_n^k` family.
//!
//! A symmetric function of `n` variables is stored as its value vector indexed
//! by input weight, so symmetry holds by construction. The family
//! `f_n^k(w) = ⌊w/k⌋ mod 2` for `1 ≤ k ≤ n`, together with the constant-one
//! function `f_n^0`, forms a unit lower-triangular basis over GF(2): the column
//! for `f_n^k` is zero above weight `k` and one at weight `k`.

mod anf;
mod circuit;
pub mod qasm;

pub use anf::{anf_degrees, anf_degrees_mobius, mobius_transform, truth_table_oracle, AnfDegreeSet, MAX_TRUTH_TABLE_ARITY};
pub use circuit::{
    build_circuit_u, build_circuit_vu, synthesize_circuit, xor_compose_circuit, Block, BlockKind, CircuitSpec, GateRole,
    LabeledGate,
};

use thiserror::Error;

use crate::angles::AngleError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymFnError {
    #[error("arity must be at least 1")]
    ZeroArity,
    #[error("k = {k} is outside 1..={n}")]
    KOutOfRange { n: usize, k: usize },
    #[error("expected a vector of length {expected}, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("truth tables are limited to n ≤ {max} (got {n})")]
    ArityCapExceeded { n: usize, max: usize },
    #[error(transparent)]
    Angle(#[from] AngleError),
    #[error("malformed QASM at line {line}: {reason}")]
    Qasm { line: usize, reason: String },
}

/// Hamming weight of an input vector.
pub fn weight(x: &[bool]) -> usize {
    x.iter().filter(|&&b| b).count()
}

/// An `n`-variable symmetric Boolean function, stored as `values[w]` for `w = 0..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymmetricFunction {
    values: Vec<bool>,
}

impl SymmetricFunction {
    /// `values` has length `n + 1` with `n ≥ 1`.
    pub fn new(values: Vec<bool>) -> Result<Self, SymFnError> {
        if values.len() < 2 {
            return Err(SymFnError::ZeroArity);
        }
        Ok(SymmetricFunction { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> bool) -> Result<Self, SymFnError> {
        Self::new((0..=n).map(f).collect())
    }

    /// `f_n^k(w) = ⌊w/k⌋ mod 2`, for `1 ≤ k ≤ n`.
    pub fn f_nk(n: usize, k: usize) -> Result<Self, SymFnError> {
        if n == 0 {
            return Err(SymFnError::ZeroArity);
        }
        if k == 0 || k > n {
            return Err(SymFnError::KOutOfRange { n, k });
        }
        Self::from_fn(n, |w| (w / k) % 2 == 1)
    }

    /// The constant-one basis element `f_n^0`.
    pub fn f_n0(n: usize) -> Result<Self, SymFnError> {
        Self::from_fn(n, |_| true)
    }

    /// Basis element `k`, including the `k = 0` constant.
    pub fn basis(n: usize, k: usize) -> Result<Self, SymFnError> {
        if k == 0 {
            Self::f_n0(n)
        } else {
            Self::f_nk(n, k)
        }
    }

    pub fn zero(n: usize) -> Result<Self, SymFnError> {
        Self::from_fn(n, |_| false)
    }

    pub fn parity(n: usize) -> Result<Self, SymFnError> {
        Self::from_fn(n, |w| w % 2 == 1)
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// Value at input weight `w`. Panics if `w > n`.
    pub fn value(&self, w: usize) -> bool {
        self.values[w]
    }

    pub fn evaluate(&self, x: &[bool]) -> Result<bool, SymFnError> {
        if x.len() != self.n() {
            return Err(SymFnError::ArityMismatch {
                expected: self.n(),
                found: x.len(),
            });
        }
        Ok(self.values[weight(x)])
    }

    pub fn xor(&self, other: &SymmetricFunction) -> Result<Self, SymFnError> {
        if self.n() != other.n() {
            return Err(SymFnError::ArityMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(SymmetricFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// All `2^(n+1)` symmetric functions of arity `n`, in value-vector order.
    pub fn enumerate(n: usize) -> impl Iterator<Item = SymmetricFunction> {
        assert!(n < 63, "too many symmetric functions to enumerate");
        (0u64..1 << (n + 1)).map(move |bits| SymmetricFunction {
            values: (0..=n).map(|w| bits >> w & 1 == 1).collect(),
        })
    }
}

/// Coefficients `a_0..a_n` with `f = ⊕_k a_k·f_n^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisCoefficients {
    a: Vec<bool>,
}

impl BasisCoefficients {
    pub fn new(a: Vec<bool>) -> Result<Self, SymFnError> {
        if a.len() < 2 {
            return Err(SymFnError::ZeroArity);
        }
        Ok(BasisCoefficients { a })
    }

    pub fn n(&self) -> usize {
        self.a.len() - 1
    }

    pub fn coefficients(&self) -> &[bool] {
        &self.a
    }

    /// Indices `k` with `a_k = 1`, ascending.
    pub fn active_terms(&self) -> impl Iterator<Item = usize> + '_ {
        self.a.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k)
    }

    /// Evaluates `⊕_k a_k·f_n^k` back into a value vector.
    pub fn recompose(&self) -> SymmetricFunction {
        let n = self.n();
        let m = basis_matrix(n);
        SymmetricFunction {
            values: (0..=n)
                .map(|w| self.active_terms().fold(false, |acc, k| acc ^ m[w][k]))
                .collect(),
        }
    }
}

/// `M[w][k]` = value of basis element `k` at weight `w`.
pub fn basis_matrix(n: usize) -> Vec<Vec<bool>> {
    (0..=n)
        .map(|w| (0..=n).map(|k| k == 0 || (w / k) % 2 == 1).collect())
        .collect()
}

/// Solves `M·a = values` over GF(2) by forward substitution.
pub fn decompose(f: &SymmetricFunction) -> BasisCoefficients {
    let n = f.n();
    let m = basis_matrix(n);
    let mut a = vec![false; n + 1];
    for w in 0..=n {
        // M[w][w] = 1, so a_w is whatever the earlier terms leave unexplained
        let explained = (0..w).fold(false, |acc, k| acc ^ (a[k] & m[w][k]));
        a[w] = f.value(w) ^ explained;
    }
    BasisCoefficients { a }
}
