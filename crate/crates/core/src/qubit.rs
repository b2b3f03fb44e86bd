//! Single-qubit simulation: pure states under `R_y` gates, Born-rule sampling,
//! density matrices, and a depolarizing + readout-flip noise model.
//!
//! Shot experiments use Monte Carlo trajectories (a uniformly random Pauli is
//! inserted after a gate with probability `p`); security analysis uses exact
//! density-matrix evolution. Both describe the same channel
//! `ρ ↦ (1−p)·UρU† + p·I/2`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::angles::{RationalAngle, RyGate};

/// Normalization / Hermiticity / trace tolerance for validated values.
pub const STATE_TOLERANCE: f64 = 1e-12;
/// Default tolerance for [`QubitState::deterministic_readout`].
pub const READOUT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QubitError {
    #[error("state is not normalized (|amp0|²+|amp1|² = {0})")]
    NotNormalized(f64),
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("ensemble weights must be nonnegative and sum to 1 (sum = {0})")]
    InvalidWeights(f64),
    #[error("matrix is not a density matrix: {0}")]
    InvalidDensityMatrix(&'static str),
}

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(p: f64) -> Result<Self, QubitError> {
        if (0.0..=1.0).contains(&p) {
            Ok(Probability(p))
        } else {
            Err(QubitError::InvalidProbability(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Per-gate depolarizing strength and classical readout flip probability.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    pub depolarizing_per_gate: Probability,
    pub measurement_flip: Probability,
}

impl NoiseModel {
    pub fn new(depolarizing_per_gate: f64, measurement_flip: f64) -> Result<Self, QubitError> {
        Ok(NoiseModel {
            depolarizing_per_gate: Probability::new(depolarizing_per_gate)?,
            measurement_flip: Probability::new(measurement_flip)?,
        })
    }

    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn is_noiseless(&self) -> bool {
        self.depolarizing_per_gate.value() == 0.0 && self.measurement_flip.value() == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// A normalized single-qubit pure state `amp0|0⟩ + amp1|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    amp0: Complex64,
    amp1: Complex64,
}

impl QubitState {
    pub fn new(amp0: Complex64, amp1: Complex64) -> Result<Self, QubitError> {
        let norm = amp0.norm_sqr() + amp1.norm_sqr();
        if (norm - 1.0).abs() > STATE_TOLERANCE {
            return Err(QubitError::NotNormalized(norm));
        }
        Ok(QubitState { amp0, amp1 })
    }

    pub fn zero() -> Self {
        QubitState {
            amp0: Complex64::new(1.0, 0.0),
            amp1: Complex64::new(0.0, 0.0),
        }
    }

    pub fn one() -> Self {
        QubitState {
            amp0: Complex64::new(0.0, 0.0),
            amp1: Complex64::new(1.0, 0.0),
        }
    }

    /// `R_y(angle)|0⟩`.
    pub fn from_angle(angle: RationalAngle) -> Self {
        Self::zero().apply_ry(&RyGate::new(angle))
    }

    pub fn amp0(&self) -> Complex64 {
        self.amp0
    }

    pub fn amp1(&self) -> Complex64 {
        self.amp1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    pub fn prob_one(&self) -> f64 {
        self.amp1.norm_sqr() / self.norm_sqr()
    }

    pub fn apply_ry(&self, gate: &RyGate) -> Self {
        let m = gate.matrix();
        QubitState {
            amp0: self.amp0 * m[(0, 0)] + self.amp1 * m[(0, 1)],
            amp1: self.amp0 * m[(1, 0)] + self.amp1 * m[(1, 1)],
        }
    }

    pub fn apply_pauli(&self, pauli: Pauli) -> Self {
        let i = Complex64::i();
        let (amp0, amp1) = match pauli {
            Pauli::I => (self.amp0, self.amp1),
            Pauli::X => (self.amp1, self.amp0),
            Pauli::Y => (-i * self.amp1, i * self.amp0),
            Pauli::Z => (self.amp0, -self.amp1),
        };
        QubitState { amp0, amp1 }
    }

    /// Computational-basis measurement: `true` with probability `|amp1|²`.
    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        rng.random::<f64>() < self.prob_one()
    }

    /// The basis state this qubit sits on, if it is within `tol` of one.
    pub fn deterministic_readout(&self, tol: f64) -> Option<bool> {
        if self.amp0.norm_sqr() > 1.0 - tol {
            Some(false)
        } else if self.amp1.norm_sqr() > 1.0 - tol {
            Some(true)
        } else {
            None
        }
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &QubitState) -> f64 {
        (self.amp0.conj() * other.amp0 + self.amp1.conj() * other.amp1).norm()
    }

    pub fn equals_up_to_phase(&self, other: &QubitState, tol: f64) -> bool {
        self.overlap(other) > 1.0 - tol
    }
}

impl Default for QubitState {
    fn default() -> Self {
        Self::zero()
    }
}

/// A 2×2 density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: Matrix2<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within [`STATE_TOLERANCE`].
    pub fn new(m: Matrix2<Complex64>) -> Result<Self, QubitError> {
        let rho = DensityMatrix { m };
        if (m - m.adjoint()).iter().any(|z| z.norm() > STATE_TOLERANCE) {
            return Err(QubitError::InvalidDensityMatrix("not Hermitian"));
        }
        if (rho.trace() - 1.0).abs() > STATE_TOLERANCE {
            return Err(QubitError::InvalidDensityMatrix("trace is not 1"));
        }
        if rho.eigenvalues().0 < -STATE_TOLERANCE {
            return Err(QubitError::InvalidDensityMatrix("negative eigenvalue"));
        }
        Ok(rho)
    }

    pub fn from_pure(state: &QubitState) -> Self {
        let v = [state.amp0, state.amp1];
        DensityMatrix {
            m: Matrix2::from_fn(|r, c| v[r] * v[c].conj()),
        }
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            m: Matrix2::identity() * Complex64::new(0.5, 0.0),
        }
    }

    /// `Σ weight·|s⟩⟨s|`.
    pub fn ensemble_average(states: &[(QubitState, f64)]) -> Result<Self, QubitError> {
        let total: f64 = states.iter().map(|(_, w)| w).sum();
        if states.iter().any(|(_, w)| *w < 0.0) || (total - 1.0).abs() > STATE_TOLERANCE {
            return Err(QubitError::InvalidWeights(total));
        }
        let m = states
            .iter()
            .fold(Matrix2::zeros(), |acc, (s, w)| acc + Self::from_pure(s).m * Complex64::new(*w, 0.0));
        Ok(DensityMatrix { m })
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        (self.m[(0, 0)] + self.m[(1, 1)]).re
    }

    /// Eigenvalues `(λ_min, λ_max)` of the Hermitian part.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let a = self.m[(0, 0)].re;
        let d = self.m[(1, 1)].re;
        let b = self.m[(0, 1)];
        let mean = (a + d) / 2.0;
        let radius = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
        (mean - radius, mean + radius)
    }

    /// `UρU†` for `U = R_y`.
    pub fn apply_ry(&self, gate: &RyGate) -> Self {
        let u = gate.matrix().map(|x| Complex64::new(x, 0.0));
        DensityMatrix {
            m: u * self.m * u.adjoint(),
        }
    }

    /// `(1−p)·ρ + p·I/2`.
    pub fn depolarize(&self, p: Probability) -> Self {
        let p = p.value();
        DensityMatrix {
            m: self.m * Complex64::new(1.0 - p, 0.0) + Self::maximally_mixed().m * Complex64::new(p, 0.0),
        }
    }

    pub fn prob_one(&self) -> f64 {
        self.m[(1, 1)].re
    }

    /// Probability that a readout which flips with probability `flip` reports 1.
    pub fn readout_prob_one(&self, flip: Probability) -> f64 {
        let q = flip.value();
        (1.0 - q) * self.m[(1, 1)].re + q * self.m[(0, 0)].re
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_deviation(&self, other: &DensityMatrix) -> f64 {
        (self.m - other.m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Applies `gate`, then with probability `p` a uniformly random Pauli.
pub fn apply_noisy_gate<R: Rng + ?Sized>(
    state: &QubitState,
    gate: &RyGate,
    noise: &NoiseModel,
    rng: &mut R,
) -> QubitState {
    let out = state.apply_ry(gate);
    let p = noise.depolarizing_per_gate.value();
    if p > 0.0 && rng.random::<f64>() < p {
        let pauli = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)];
        out.apply_pauli(pauli)
    } else {
        out
    }
}

/// Measures `state`, flipping the classical result with the model's readout error.
/// Measurement draws from `measure_rng`; the flip draws from `noise_rng`.
pub fn noisy_readout<R: Rng + ?Sized, N: Rng + ?Sized>(
    state: &QubitState,
    noise: &NoiseModel,
    measure_rng: &mut R,
    noise_rng: &mut N,
) -> bool {
    let bit = state.measure(measure_rng);
    let q = noise.measurement_flip.value();
    if q > 0.0 && noise_rng.random::<f64>() < q {
        !bit
    } else {
        bit
    }
}

/// One Monte Carlo shot of `gates` applied to `|0⟩`.
pub fn run_trajectory<R: Rng + ?Sized>(gates: &[RyGate], noise: &NoiseModel, rng: &mut R) -> bool {
    let state = gates
        .iter()
        .fold(QubitState::zero(), |s, g| apply_noisy_gate(&s, g, noise, rng));
    let bit = state.measure(rng);
    let q = noise.measurement_flip.value();
    if q > 0.0 && rng.random::<f64>() < q {
        !bit
    } else {
        bit
    }
}

/// Exact density-matrix output state of `gates` on `|0⟩` under per-gate depolarizing.
pub fn evolve_density(gates: &[RyGate], noise: &NoiseModel) -> DensityMatrix {
    gates.iter().fold(DensityMatrix::from_pure(&QubitState::zero()), |rho, g| {
        rho.apply_ry(g).depolarize(noise.depolarizing_per_gate)
    })
}

/// Exact probability that a noisy run of `gates` reads out 1.
pub fn channel_prob_one(gates: &[RyGate], noise: &NoiseModel) -> f64 {
    evolve_density(gates, noise).readout_prob_one(noise.measurement_flip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn plus() -> QubitState {
        QubitState::new(c(0.5f64.sqrt()), c(0.5f64.sqrt())).unwrap()
    }

    fn ang(p: i64, q: i64) -> RationalAngle {
        RationalAngle::new(p, q).unwrap()
    }

    #[test]
    fn zero_state_examples() {
        let z = QubitState::zero();
        assert_eq!((z.amp0(), z.amp1()), (c(1.0), c(0.0)));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| !z.measure(&mut rng)));
        let flipped = z.apply_ry(&RyGate::v());
        assert!((flipped.amp1().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_ry_examples() {
        let z = QubitState::zero();
        assert!(z.apply_ry(&RyGate::new(RationalAngle::ZERO)).equals_up_to_phase(&z, 1e-12));
        let half = z.apply_ry(&RyGate::u(2).unwrap());
        assert!((half.amp0().re - FRAC_PI_4.cos()).abs() < 1e-12);
        assert!((half.amp1().re - FRAC_PI_4.sin()).abs() < 1e-12);
        for k in 1..=10 {
            let g = RyGate::u(k).unwrap();
            let s = (0..k).fold(QubitState::zero(), |s, _| s.apply_ry(&g));
            assert!(s.equals_up_to_phase(&QubitState::one(), 1e-12), "k = {k}");
        }
    }

    #[test]
    fn measure_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        assert!((0..1000).all(|_| QubitState::one().measure(&mut rng)));
        let shots = 100_000;
        let ones = (0..shots).filter(|_| plus().measure(&mut rng)).count();
        let freq = ones as f64 / shots as f64;
        assert!((0.49..=0.51).contains(&freq), "{freq}");
    }

    #[test]
    fn measure_is_deterministic_for_fixed_seed() {
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            (0..64).map(|_| plus().measure(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn deterministic_readout_examples() {
        assert_eq!(QubitState::zero().deterministic_readout(1e-9), Some(false));
        assert_eq!(QubitState::one().deterministic_readout(1e-9), Some(true));
        assert_eq!(plus().deterministic_readout(1e-9), None);
    }

    #[test]
    fn phase_equality_examples() {
        let minus_one = QubitState::new(c(0.0), c(-1.0)).unwrap();
        assert!(QubitState::one().equals_up_to_phase(&minus_one, 1e-12));
        assert!(!QubitState::zero().equals_up_to_phase(&QubitState::one(), 1e-12));
        let v_one = QubitState::one().apply_ry(&RyGate::v());
        assert!((v_one.amp0().re + 1.0).abs() < 1e-12);
        assert!(v_one.equals_up_to_phase(&QubitState::zero(), 1e-12));
    }

    #[test]
    fn new_rejects_unnormalized() {
        assert!(matches!(
            QubitState::new(c(1.0), c(1.0)),
            Err(QubitError::NotNormalized(_))
        ));
    }

    #[test]
    fn depolarize_examples() {
        let rho = DensityMatrix::from_pure(&plus());
        assert_eq!(rho.depolarize(Probability::ZERO), rho);
        assert!(rho.depolarize(Probability::ONE).max_deviation(&DensityMatrix::maximally_mixed()) < 1e-15);
        let d = DensityMatrix::from_pure(&QubitState::zero()).depolarize(Probability::new(0.1).unwrap());
        assert!((d.matrix()[(0, 0)].re - 0.95).abs() < 1e-15);
        assert!((d.matrix()[(1, 1)].re - 0.05).abs() < 1e-15);
        assert!(d.matrix()[(0, 1)].norm() < 1e-15);
        assert!(DensityMatrix::new(*d.matrix()).is_ok());
        assert!(Probability::new(1.5).is_err());
        assert!(NoiseModel::new(0.1, -0.1).is_err());
    }

    #[test]
    fn ensemble_average_examples() {
        let pure0 = DensityMatrix::ensemble_average(&[(QubitState::zero(), 1.0)]).unwrap();
        assert_eq!(pure0, DensityMatrix::from_pure(&QubitState::zero()));
        let mixed = DensityMatrix::ensemble_average(&[(QubitState::zero(), 0.5), (QubitState::one(), 0.5)]).unwrap();
        assert!(mixed.max_deviation(&DensityMatrix::maximally_mixed()) < 1e-15);
        for p in -12..12 {
            let theta = ang(p, 7);
            let pair = [
                (QubitState::from_angle(theta), 0.5),
                (QubitState::from_angle(theta.compose(RationalAngle::PI).unwrap()), 0.5),
            ];
            let rho = DensityMatrix::ensemble_average(&pair).unwrap();
            assert!(rho.max_deviation(&DensityMatrix::maximally_mixed()) < 1e-12);
        }
        assert!(matches!(
            DensityMatrix::ensemble_average(&[(QubitState::zero(), 0.7)]),
            Err(QubitError::InvalidWeights(_))
        ));
        assert!(DensityMatrix::ensemble_average(&[(QubitState::zero(), 1.5), (QubitState::one(), -0.5)]).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = Matrix2::identity().map(|x: Complex64| x);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = Matrix2::new(c(1.5), c(0.0), c(0.0), c(-0.5));
        assert!(DensityMatrix::new(negative).is_err());
        let non_hermitian = Matrix2::new(c(0.5), c(0.3), c(0.0), c(0.5));
        assert!(DensityMatrix::new(non_hermitian).is_err());
    }

    #[test]
    fn norm_preserved_over_random_sequences() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let len = rng.random_range(0..=50);
            let s = (0..len).fold(QubitState::zero(), |s, _| {
                s.apply_ry(&RyGate::new(ang(rng.random_range(-30..30), rng.random_range(1..=12))))
            });
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symbolic_net_angle_matches_numeric_evolution() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let gates: Vec<RyGate> = (0..rng.random_range(0..=30))
                .map(|_| RyGate::new(ang(rng.random_range(-20..20), rng.random_range(1..=10))))
                .collect();
            let net = gates
                .iter()
                .try_fold(RationalAngle::ZERO, |acc, g| acc.compose(g.angle()))
                .unwrap();
            let evolved = gates.iter().fold(QubitState::zero(), |s, g| s.apply_ry(g));
            assert!(evolved.equals_up_to_phase(&QubitState::from_angle(net), 1e-10));
        }
    }

    #[test]
    fn trajectories_match_density_channel() {
        let gates: Vec<RyGate> = [1, 1, -1, 1, 3]
            .iter()
            .map(|&p| RyGate::new(ang(p, 3)))
            .collect();
        let shots = 100_000;
        for &(p, q) in &[(0.0, 0.0), (0.02, 0.0), (0.05, 0.02), (0.2, 0.1)] {
            let noise = NoiseModel::new(p, q).unwrap();
            let exact = channel_prob_one(&gates, &noise);
            let mut rng = ChaCha8Rng::seed_from_u64(314);
            let ones = (0..shots).filter(|_| run_trajectory(&gates, &noise, &mut rng)).count();
            let freq = ones as f64 / shots as f64;
            let sigma = (exact * (1.0 - exact) / shots as f64).sqrt();
            assert!((freq - exact).abs() <= 3.0 * sigma + 1e-12, "p={p} q={q}: {freq} vs {exact}");
        }
    }

    #[test]
    fn full_depolarizing_gives_coin_flip() {
        let gates = [RyGate::v()];
        let noise = NoiseModel::new(1.0, 0.0).unwrap();
        assert!((channel_prob_one(&gates, &noise) - 0.5).abs() < 1e-15);
    }
}
