//! Additive sharing over `Z_k` and XOR sharing of bits.

use rand::Rng;

use super::ProtocolError;

/// `n` shares, the first `n − 1` uniform over `Z_k`, summing to `x` mod `k`.
/// `n = 1` returns `[x]`.
pub fn split_mod_k<R: Rng + ?Sized>(x: bool, k: usize, n: usize, rng: &mut R) -> Result<Vec<usize>, ProtocolError> {
    if k < 2 {
        return Err(ProtocolError::ModulusTooSmall(k));
    }
    if n == 0 {
        return Err(ProtocolError::NoShares);
    }
    let mut shares: Vec<usize> = (0..n - 1).map(|_| rng.random_range(0..k)).collect();
    let partial = shares.iter().sum::<usize>() % k;
    shares.push((x as usize + k - partial) % k);
    Ok(shares)
}

/// `n` bits, the first `n − 1` uniform, whose XOR is `r`. `n = 1` returns `[r]`.
pub fn split_xor<R: Rng + ?Sized>(r: bool, n: usize, rng: &mut R) -> Result<Vec<bool>, ProtocolError> {
    if n == 0 {
        return Err(ProtocolError::NoShares);
    }
    let mut shares: Vec<bool> = (0..n - 1).map(|_| rng.random()).collect();
    let partial = shares.iter().fold(false, |a, &b| a ^ b);
    shares.push(r ^ partial);
    Ok(shares)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn single_share_carries_the_value() {
        let mut rng = substream(1, 0);
        assert_eq!(split_mod_k(true, 3, 1, &mut rng).unwrap(), vec![1]);
        assert_eq!(split_mod_k(false, 5, 1, &mut rng).unwrap(), vec![0]);
        assert_eq!(split_xor(true, 1, &mut rng).unwrap(), vec![true]);
    }

    #[test]
    fn parameter_errors() {
        let mut rng = substream(1, 0);
        assert!(matches!(split_mod_k(true, 1, 3, &mut rng), Err(ProtocolError::ModulusTooSmall(1))));
        assert!(matches!(split_mod_k(true, 3, 0, &mut rng), Err(ProtocolError::NoShares)));
        assert!(matches!(split_xor(true, 0, &mut rng), Err(ProtocolError::NoShares)));
    }

    #[test]
    fn reconstruction_holds() {
        let mut rng = substream(7, 0);
        for n in 1..=10 {
            for k in 2..=10 {
                for x in [false, true] {
                    let s = split_mod_k(x, k, n, &mut rng).unwrap();
                    assert_eq!(s.len(), n);
                    assert!(s.iter().all(|&v| v < k));
                    assert_eq!(s.iter().sum::<usize>() % k, x as usize);
                    let b = split_xor(x, n, &mut rng).unwrap();
                    assert_eq!(b.iter().fold(false, |a, &c| a ^ c), x);
                }
            }
        }
        for _ in 0..100 {
            let pair = split_xor(false, 2, &mut rng).unwrap();
            assert_eq!(pair[0], pair[1]);
        }
    }

    #[test]
    fn mod_k_first_shares_are_uniform() {
        let mut rng = substream(2024, 0);
        let draws = 100_000;
        let mut counts = [[0usize; 3]; 3];
        for _ in 0..draws {
            let s = split_mod_k(true, 3, 3, &mut rng).unwrap();
            counts[s[0]][s[1]] += 1;
        }
        let p = 1.0 / 9.0;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for row in counts {
            for c in row {
                assert!((c as f64 - mean).abs() < 3.0 * sigma, "count {c} vs {mean}");
            }
        }
    }

    #[test]
    fn xor_share_marginals_are_uniform() {
        let mut rng = substream(99, 0);
        let draws = 100_000;
        let n = 4;
        let mut ones = vec![0usize; n];
        for i in 0..draws {
            let s = split_xor(i % 2 == 0, n, &mut rng).unwrap();
            for (c, b) in ones.iter_mut().zip(s) {
                *c += b as usize;
            }
        }
        let mean = draws as f64 / 2.0;
        let sigma = (draws as f64 * 0.25).sqrt();
        for c in ones {
            assert!((c as f64 - mean).abs() < 3.0 * sigma, "count {c} vs {mean}");
        }
    }
}
