//! Algebraic normal form of symmetric functions.
//!
//! The ANF of a symmetric function is an XOR of complete degree layers
//! `σ_d` (the XOR of all `C(n, d)` monomials of degree `d`). Two independent
//! routes compute the layer set: a weight-domain triangular solve using
//! `σ_d(w) = C(w, d) mod 2` (Lucas: odd iff `d & !w == 0`), and a Möbius
//! transform of the full truth table.

use std::collections::BTreeSet;

use super::{SymFnError, SymmetricFunction};

/// Truth-table routes are limited to this many variables.
pub const MAX_TRUTH_TABLE_ARITY: usize = 16;

/// The degree layers present in a symmetric function's ANF.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnfDegreeSet {
    n: usize,
    degrees: BTreeSet<usize>,
}

impl AnfDegreeSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degrees(&self) -> &BTreeSet<usize> {
        &self.degrees
    }

    pub fn contains(&self, d: usize) -> bool {
        self.degrees.contains(&d)
    }

    /// Algebraic degree; `None` for the zero function.
    pub fn degree(&self) -> Option<usize> {
        self.degrees.last().copied()
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.degrees.first().copied()
    }
}

fn layer_parity(w: usize, d: usize) -> bool {
    d & !w == 0
}

/// Degree layers via the weight-domain system `values[w] = ⊕_{d∈D} C(w,d) mod 2`.
pub fn anf_degrees(f: &SymmetricFunction) -> AnfDegreeSet {
    let n = f.n();
    let mut present = vec![false; n + 1];
    for w in 0..=n {
        let explained = (0..w).fold(false, |acc, d| acc ^ (present[d] && layer_parity(w, d)));
        present[w] = f.value(w) ^ explained;
    }
    AnfDegreeSet {
        n,
        degrees: (0..=n).filter(|&d| present[d]).collect(),
    }
}

/// Entry `x` (bit `i` of `x` is variable `x_{i+1}`) is `values[wt(x)]`.
pub fn truth_table_oracle(f: &SymmetricFunction) -> Result<Vec<bool>, SymFnError> {
    let n = f.n();
    if n > MAX_TRUTH_TABLE_ARITY {
        return Err(SymFnError::ArityCapExceeded {
            n,
            max: MAX_TRUTH_TABLE_ARITY,
        });
    }
    Ok((0u32..1 << n).map(|x| f.value(x.count_ones() as usize)).collect())
}

/// Binary Möbius transform: truth table to ANF coefficient table. Entry `m`
/// of the result is the coefficient of the monomial whose variables are the
/// set bits of `m`. Panics unless the length is a power of two.
pub fn mobius_transform(truth_table: &[bool]) -> Vec<bool> {
    assert!(truth_table.len().is_power_of_two(), "truth table length must be a power of two");
    let mut coeffs = truth_table.to_vec();
    let mut step = 1;
    while step < coeffs.len() {
        for block in coeffs.chunks_mut(2 * step) {
            let (low, high) = block.split_at_mut(step);
            for (h, l) in high.iter_mut().zip(low.iter()) {
                *h ^= *l;
            }
        }
        step *= 2;
    }
    coeffs
}

/// Degree layers read off the Möbius transform of the truth table.
pub fn anf_degrees_mobius(f: &SymmetricFunction) -> Result<AnfDegreeSet, SymFnError> {
    let coeffs = mobius_transform(&truth_table_oracle(f)?);
    let degrees = coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(m, _)| m.count_ones() as usize)
        .collect();
    Ok(AnfDegreeSet { n: f.n(), degrees })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    /// Count of degree-`d` monomials present in the ANF, by brute force.
    fn monomials_of_degree(coeffs: &[bool], d: usize) -> usize {
        coeffs
            .iter()
            .enumerate()
            .filter(|(m, &c)| c && m.count_ones() as usize == d)
            .count()
    }

    #[test]
    fn parity_is_linear() {
        for n in 1..=10 {
            let set = anf_degrees(&SymmetricFunction::parity(n).unwrap());
            assert_eq!(set.degrees().iter().copied().collect::<Vec<_>>(), vec![1]);
            assert_eq!(set.degree(), Some(1));
        }
    }

    #[test]
    fn f_nk_contains_its_layer_and_nothing_below() {
        for n in 1..=10 {
            for k in 1..=n {
                let set = anf_degrees(&SymmetricFunction::f_nk(n, k).unwrap());
                assert!(set.contains(k));
                assert_eq!(set.min_degree(), Some(k));
                assert!(set.degree().unwrap() >= k);
            }
        }
    }

    #[test]
    fn f_5_2_is_the_pairwise_sum() {
        let f = SymmetricFunction::f_nk(5, 2).unwrap();
        let coeffs = mobius_transform(&truth_table_oracle(&f).unwrap());
        let expected: Vec<bool> = (0u32..32).map(|m| m.count_ones() == 2).collect();
        assert_eq!(coeffs, expected);
        assert_eq!(anf_degrees(&f).degrees().iter().copied().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn truth_table_examples() {
        let parity1 = SymmetricFunction::parity(1).unwrap();
        assert_eq!(truth_table_oracle(&parity1).unwrap(), vec![false, true]);
        let and2 = SymmetricFunction::f_nk(2, 2).unwrap();
        assert_eq!(truth_table_oracle(&and2).unwrap(), vec![false, false, false, true]);
        // x = (1,1,0,0,1): bits 0, 1 and 4
        let f53 = truth_table_oracle(&SymmetricFunction::f_nk(5, 3).unwrap()).unwrap();
        assert!(f53[0b10011]);
        let too_big = SymmetricFunction::parity(17).unwrap();
        assert!(matches!(
            truth_table_oracle(&too_big),
            Err(SymFnError::ArityCapExceeded { n: 17, .. })
        ));
    }

    #[test]
    fn zero_function_has_no_degree() {
        let set = anf_degrees(&SymmetricFunction::zero(4).unwrap());
        assert!(set.degrees().is_empty());
        assert_eq!(set.degree(), None);
        let one = anf_degrees(&SymmetricFunction::f_n0(4).unwrap());
        assert_eq!(one.degree(), Some(0));
    }

    #[test]
    fn both_routes_agree_exhaustively() {
        for n in 1..=8 {
            for f in SymmetricFunction::enumerate(n) {
                assert_eq!(anf_degrees(&f), anf_degrees_mobius(&f).unwrap());
            }
        }
    }

    #[test]
    fn layers_are_complete_for_f_nk() {
        for n in 1..=10 {
            for k in 1..=n {
                let f = SymmetricFunction::f_nk(n, k).unwrap();
                let coeffs = mobius_transform(&truth_table_oracle(&f).unwrap());
                for d in 0..=n {
                    let count = monomials_of_degree(&coeffs, d);
                    assert!(count == 0 || count == binomial(n, d), "partial layer d={d}");
                }
                assert_eq!(monomials_of_degree(&coeffs, k), binomial(n, k));
                assert_eq!((0..k).map(|d| monomials_of_degree(&coeffs, d)).sum::<usize>(), 0);
            }
        }
    }

    #[test]
    fn mobius_is_an_involution() {
        let table: Vec<bool> = (0u32..64).map(|x| (x * 37 + 11) % 5 < 2).collect();
        assert_eq!(mobius_transform(&mobius_transform(&table)), table);
    }
}
