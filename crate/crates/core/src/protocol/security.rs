//! Exact leakage analysis.
//!
//! [`eavesdrop_marginal`] averages the travelling qubit over every mask vector.
//! [`collusion_partition`] groups honest input tuples by the exact
//! distribution of what a coalition of the server and some clients observes:
//! the shares and reports addressed to colluders, the `r̃` broadcasts, the
//! announcement, and the qubit at every hop a colluder receives.
//!
//! A single qubit travels the ring, so the coalition never holds two hops'
//! states at once. Each colluder-received hop therefore contributes its own
//! classical-quantum state: the classical view jointly with that hop's qubit.
//! Two tuples are equivalent when the classical view distributions and every
//! per-hop classical-quantum state coincide, for every choice of the
//! colluders' own inputs.
//!
//! Colluders' own randomness is fixed (`x_{c,c} = x_c`, other shares and `r_c`
//! zero). Any other fixed choice shifts views by a value the coalition knows,
//! so the partition does not depend on it.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};

use crate::angles::RyGate;
use crate::qubit::{DensityMatrix, QubitState};

use super::{check_parameters, ProtocolError};

pub const MAX_EAVESDROP_ARITY: usize = 16;
pub const MAX_COLLUSION_ARITY: usize = 5;
/// Tolerance when comparing normalized view operators.
pub const VIEW_TOLERANCE: f64 = 1e-9;

/// Noiseless qubit state on hop `tap`: after client `tap`'s gates, and for
/// `tap = n` after the last client's correction. Hop 0 is the server's `|0⟩`.
pub fn hop_state(tap: usize, x: &[bool], r: &[bool], k: usize) -> Result<QubitState, ProtocolError> {
    let n = x.len();
    if tap > n {
        return Err(ProtocolError::TapOutOfRange { tap, n });
    }
    let u = RyGate::u(k as i64)?;
    let mut state = QubitState::zero();
    for i in 0..tap {
        if x[i] {
            state = state.apply_ry(&u);
        }
        if r[i] {
            state = state.apply_ry(&RyGate::v());
        }
    }
    if tap == n {
        let corrections = x.iter().filter(|&&b| b).count() % k;
        for _ in 0..corrections {
            state = state.apply_ry(&u.adjoint());
        }
    }
    Ok(state)
}

/// The intercepted qubit at hop `tap`, averaged uniformly over all `2^n` mask
/// vectors.
pub fn eavesdrop_marginal(tap: usize, x: &[bool], k: usize) -> Result<DensityMatrix, ProtocolError> {
    let n = x.len();
    check_parameters(n, k)?;
    if n > MAX_EAVESDROP_ARITY {
        return Err(ProtocolError::ArityCapExceeded {
            what: "eavesdropper enumeration",
            n,
            max: MAX_EAVESDROP_ARITY,
        });
    }
    if tap > n {
        return Err(ProtocolError::TapOutOfRange { tap, n });
    }
    let weight = 1.0 / (1u64 << n) as f64;
    let ensemble = (0u32..1 << n)
        .map(|mask| {
            let r: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            Ok((hop_state(tap, x, &r, k)?, weight))
        })
        .collect::<Result<Vec<_>, ProtocolError>>()?;
    Ok(DensityMatrix::ensemble_average(&ensemble)?)
}

/// Largest entrywise distance from `I/2` over every post-`C_1` tap and every input.
pub fn eavesdrop_audit(n: usize, k: usize) -> Result<f64, ProtocolError> {
    let mixed = DensityMatrix::maximally_mixed();
    let mut worst: f64 = 0.0;
    for xm in 0u32..1 << n {
        let x: Vec<bool> = (0..n).map(|i| xm >> i & 1 == 1).collect();
        for tap in 1..=n {
            worst = worst.max(eavesdrop_marginal(tap, &x, k)?.max_deviation(&mixed));
        }
    }
    Ok(worst)
}

/// A partition of honest input tuples. Tuples list honest clients' bits in
/// ascending client order; classes and their members are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    classes: Vec<Vec<Vec<bool>>>,
}

impl Partition {
    fn normalized(mut classes: Vec<Vec<Vec<bool>>>) -> Self {
        for c in classes.iter_mut() {
            c.sort();
        }
        classes.sort();
        Partition { classes }
    }

    /// Groups tuples under an equivalence relation given by `same`.
    pub fn group_by(tuples: Vec<Vec<bool>>, mut same: impl FnMut(&[bool], &[bool]) -> bool) -> Self {
        let mut classes: Vec<Vec<Vec<bool>>> = Vec::new();
        for t in tuples {
            match classes.iter_mut().find(|c| same(&c[0], &t)) {
                Some(c) => c.push(t),
                None => classes.push(vec![t]),
            }
        }
        Self::normalized(classes)
    }

    pub fn by_key<K: PartialEq>(tuples: Vec<Vec<bool>>, key: impl Fn(&[bool]) -> K) -> Self {
        Self::group_by(tuples, |a, b| key(a) == key(b))
    }

    pub fn classes(&self) -> &[Vec<Vec<bool>>] {
        &self.classes
    }

    /// Every class is a singleton: the honest inputs are fully determined.
    pub fn is_discrete(&self) -> bool {
        self.classes.iter().all(|c| c.len() == 1)
    }

    fn class_of(&self, t: &[bool]) -> Option<usize> {
        self.classes.iter().position(|c| c.iter().any(|m| m == t))
    }

    /// Common refinement: two tuples share a class iff they do in both.
    pub fn meet(&self, other: &Partition) -> Partition {
        let tuples: Vec<Vec<bool>> = self.classes.iter().flatten().cloned().collect();
        Partition::by_key(tuples, |t| (self.class_of(t), other.class_of(t)))
    }

    /// Whether every class of `self` lies inside a class of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.classes
            .iter()
            .all(|c| c.iter().all(|t| other.class_of(t) == other.class_of(&c[0])))
    }
}

fn all_tuples(len: usize) -> Vec<Vec<bool>> {
    (0u32..1 << len).map(|m| (0..len).map(|i| m >> i & 1 == 1).collect()).collect()
}

fn tuple_weight(t: &[bool]) -> usize {
    t.iter().filter(|&&b| b).count()
}

/// The coalition: the server plus every client outside `honest`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coalition {
    n: usize,
    k: usize,
    honest: Vec<usize>,
    colluders: Vec<usize>,
}

impl Coalition {
    pub fn new(honest: &[usize], k: usize, n: usize) -> Result<Self, ProtocolError> {
        check_parameters(n, k)?;
        if n > MAX_COLLUSION_ARITY {
            return Err(ProtocolError::ArityCapExceeded {
                what: "collusion enumeration",
                n,
                max: MAX_COLLUSION_ARITY,
            });
        }
        let mut h = honest.to_vec();
        h.sort_unstable();
        h.dedup();
        if h.is_empty() {
            return Err(ProtocolError::InvalidHonestSet("no honest client".into()));
        }
        if h.len() != honest.len() || h.iter().any(|&i| i == 0 || i > n) {
            return Err(ProtocolError::InvalidHonestSet(format!(
                "{honest:?} is not a set of client ids in 1..={n}"
            )));
        }
        let colluders = (1..=n).filter(|i| !h.contains(i)).collect();
        Ok(Coalition {
            n,
            k,
            honest: h,
            colluders,
        })
    }

    pub fn honest(&self) -> &[usize] {
        &self.honest
    }

    pub fn colluders(&self) -> &[usize] {
        &self.colluders
    }

    pub fn includes_last_client(&self) -> bool {
        self.colluders.contains(&self.n)
    }

    fn any_client(&self) -> bool {
        !self.colluders.is_empty()
    }

    fn full_input(&self, honest_x: &[bool], colluder_x: &[bool]) -> Vec<bool> {
        let mut x = vec![false; self.n];
        for (&h, &b) in self.honest.iter().zip(honest_x) {
            x[h - 1] = b;
        }
        for (&c, &b) in self.colluders.iter().zip(colluder_x) {
            x[c - 1] = b;
        }
        x
    }

    /// Hops whose recipient colludes, excluding the server's own hop 0.
    fn received_hops(&self) -> Vec<usize> {
        (1..=self.n)
            .filter(|&j| j == self.n || self.colluders.contains(&(j + 1)))
            .collect()
    }

    /// Distribution of the `x`-share part of the view: shares sent to
    /// colluders, plus every honest `x̃_h` when the last client colludes.
    fn x_view(&self, honest_x: &[bool]) -> BTreeMap<(Vec<usize>, Vec<usize>), u64> {
        let (n, k) = (self.n, self.k);
        let mut states: HashMap<(Vec<usize>, Vec<usize>), u64> = HashMap::new();
        states.insert((Vec::new(), vec![0; self.honest.len()]), 1);
        for &xh in honest_x {
            let mut next: HashMap<(Vec<usize>, Vec<usize>), u64> = HashMap::new();
            for free in 0..k.pow(n as u32 - 1) {
                let mut shares = Vec::with_capacity(n);
                let mut rest = free;
                for _ in 0..n - 1 {
                    shares.push(rest % k);
                    rest /= k;
                }
                let partial = shares.iter().sum::<usize>() % k;
                shares.push((xh as usize + k - partial) % k);
                for ((visible, agg), count) in &states {
                    let mut visible = visible.clone();
                    visible.extend(self.colluders.iter().map(|&c| shares[c - 1]));
                    let mut agg = agg.clone();
                    for (idx, &h2) in self.honest.iter().enumerate() {
                        agg[idx] = (agg[idx] + shares[h2 - 1]) % k;
                    }
                    *next.entry((visible, agg)).or_default() += count;
                }
            }
            states = next;
        }
        let mut view = BTreeMap::new();
        for ((visible, agg), count) in states {
            let agg = if self.includes_last_client() { agg } else { Vec::new() };
            *view.entry((visible, agg)).or_default() += count;
        }
        view
    }

    /// The `r`-dependent part of the view: for each classical value, the
    /// probability-weighted qubit operator at every received hop.
    fn r_view(&self, honest_x: &[bool], colluder_x: &[bool]) -> BTreeMap<(Vec<bool>, Vec<bool>, bool), HopOperators> {
        let n = self.n;
        let hops = self.received_hops();
        let x = self.full_input(honest_x, colluder_x);
        let total = tuple_weight(&x);
        let f = (total / self.k) % 2 == 1;
        // (visible r-shares, partial r̃ over honest recipients, parity at each hop)
        type State = (Vec<bool>, Vec<bool>, Vec<bool>);
        let mut states: HashMap<State, u64> = HashMap::new();
        states.insert((Vec::new(), vec![false; self.honest.len()], vec![false; hops.len()]), 1);
        for &h in &self.honest {
            let mut next: HashMap<State, u64> = HashMap::new();
            for rh in [false, true] {
                for free in 0u32..1 << (n - 1) {
                    let mut shares: Vec<bool> = (0..n - 1).map(|i| free >> i & 1 == 1).collect();
                    let partial = shares.iter().fold(false, |a, &b| a ^ b);
                    shares.push(rh ^ partial);
                    for ((visible, agg, parities), count) in &states {
                        let mut visible = visible.clone();
                        visible.extend(self.colluders.iter().map(|&c| shares[c - 1]));
                        let mut agg = agg.clone();
                        for (idx, &h2) in self.honest.iter().enumerate() {
                            agg[idx] ^= shares[h2 - 1];
                        }
                        let parities: Vec<bool> = parities
                            .iter()
                            .zip(&hops)
                            .map(|(&p, &j)| p ^ (rh && h <= j))
                            .collect();
                        *next.entry((visible, agg, parities)).or_default() += count;
                    }
                }
            }
            states = next;
        }
        let total_count: u64 = states.values().sum();
        let mut view: BTreeMap<(Vec<bool>, Vec<bool>, bool), HopOperators> = BTreeMap::new();
        for ((visible, agg, parities), count) in states {
            let r_bar = *parities.last().expect("hop n is always received");
            let agg = if self.any_client() { agg } else { Vec::new() };
            let key = (visible, agg, f ^ r_bar);
            let weight = count as f64 / total_count as f64;
            let acc = view.entry(key).or_insert_with(|| vec![Matrix2::zeros(); hops.len()]);
            for ((&j, &p), op) in hops.iter().zip(&parities).zip(acc.iter_mut()) {
                let prefix = tuple_weight(&x[..j]);
                let turns = if j == self.n { prefix - total % self.k } else { prefix };
                let theta = PI * turns as f64 / self.k as f64 + if p { PI } else { 0.0 };
                let v = Vector2::new((theta / 2.0).cos(), (theta / 2.0).sin());
                *op += v * v.transpose() * weight;
            }
        }
        view
    }
}

/// Weighted qubit operator at each received hop, in hop order.
type HopOperators = Vec<Matrix2<f64>>;

fn same_operator_views<K: Ord>(a: &BTreeMap<K, HopOperators>, b: &BTreeMap<K, HopOperators>) -> bool {
    let close = |m: &HopOperators, other: Option<&HopOperators>| match other {
        Some(o) => m.len() == o.len() && m.iter().zip(o).all(|(x, y)| (x - y).amax() <= VIEW_TOLERANCE),
        None => m.iter().all(|x| x.amax() <= VIEW_TOLERANCE),
    };
    a.iter().all(|(k, m)| close(m, b.get(k))) && b.iter().all(|(k, m)| close(m, a.get(k)))
}

/// Partition of honest tuples for one fixed assignment of the colluders' inputs.
pub fn collusion_partition_for(
    honest: &[usize],
    k: usize,
    n: usize,
    colluder_inputs: &[bool],
) -> Result<Partition, ProtocolError> {
    let coalition = Coalition::new(honest, k, n)?;
    if colluder_inputs.len() != coalition.colluders.len() {
        return Err(ProtocolError::LengthMismatch {
            what: "colluder inputs",
            expected: coalition.colluders.len(),
            found: colluder_inputs.len(),
        });
    }
    let tuples = all_tuples(coalition.honest.len());
    let x_views: Vec<_> = tuples.iter().map(|t| coalition.x_view(t)).collect();
    let r_views: Vec<_> = tuples.iter().map(|t| coalition.r_view(t, colluder_inputs)).collect();
    let index = |t: &[bool]| tuples.iter().position(|u| u == t).expect("tuple enumerated");
    Ok(Partition::group_by(tuples.clone(), |a, b| {
        let (ia, ib) = (index(a), index(b));
        x_views[ia] == x_views[ib] && same_operator_views(&r_views[ia], &r_views[ib])
    }))
}

/// Partition of honest tuples induced by the coalition's view, refined over
/// every assignment of the colluders' own inputs.
pub fn collusion_partition(honest: &[usize], k: usize, n: usize) -> Result<Partition, ProtocolError> {
    let coalition = Coalition::new(honest, k, n)?;
    all_tuples(coalition.colluders.len())
        .iter()
        .try_fold(None::<Partition>, |acc, xc| {
            let p = collusion_partition_for(honest, k, n, xc)?;
            Ok(Some(match acc {
                Some(a) => a.meet(&p),
                None => p,
            }))
        })
        .map(|p| p.expect("at least one colluder assignment"))
}

/// Honest tuples grouped by `Σ x_h mod k`.
pub fn sum_mod_k_partition(honest_len: usize, k: usize) -> Partition {
    Partition::by_key(all_tuples(honest_len), |t| tuple_weight(t) % k)
}

/// What any correct evaluation unavoidably reveals to this coalition: the
/// output for every colluder input (when a client colludes) and, when the last
/// client colludes, the aggregate `Σ x_h mod k` it reconstructs by design.
pub fn ideal_leakage_partition(honest: &[usize], k: usize, n: usize) -> Result<Partition, ProtocolError> {
    let coalition = Coalition::new(honest, k, n)?;
    let tuples = all_tuples(coalition.honest.len());
    let mut p = Partition::by_key(tuples.clone(), |_| ());
    if coalition.includes_last_client() {
        p = p.meet(&sum_mod_k_partition(coalition.honest.len(), k));
    }
    if coalition.any_client() {
        for xc in all_tuples(coalition.colluders.len()) {
            let outputs = Partition::by_key(tuples.clone(), |t| ((tuple_weight(t) + tuple_weight(&xc)) / k) % 2);
            p = p.meet(&outputs);
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollusionReport {
    pub honest: Vec<usize>,
    pub colluders: Vec<usize>,
    pub partition: Partition,
    pub sum_mod_k: Partition,
    pub ideal: Partition,
}

impl CollusionReport {
    /// The view pins down every honest input.
    pub fn input_leaked(&self) -> bool {
        self.partition.is_discrete()
    }

    pub fn matches_sum_mod_k(&self) -> bool {
        self.partition == self.sum_mod_k
    }

    /// The view reveals exactly the unavoidable leakage and nothing more.
    pub fn matches_ideal(&self) -> bool {
        self.partition == self.ideal
    }
}

pub fn collusion_report(honest: &[usize], k: usize, n: usize) -> Result<CollusionReport, ProtocolError> {
    let coalition = Coalition::new(honest, k, n)?;
    Ok(CollusionReport {
        partition: collusion_partition(honest, k, n)?,
        sum_mod_k: sum_mod_k_partition(coalition.honest.len(), k),
        ideal: ideal_leakage_partition(honest, k, n)?,
        honest: coalition.honest,
        colluders: coalition.colluders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{execute_with_shares, ClientInput, Message, Party, Shares};
    use crate::qubit::NoiseModel;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn first_tap_is_exactly_mixed() {
        let mixed = DensityMatrix::maximally_mixed();
        for x in all_tuples(4) {
            for k in 2..=4 {
                let rho = eavesdrop_marginal(1, &x, k).unwrap();
                assert!(rho.max_deviation(&mixed) < 1e-15);
            }
        }
    }

    #[test]
    fn tap_zero_is_ground_state() {
        let rho = eavesdrop_marginal(0, &bits("1101"), 3).unwrap();
        assert!(rho.max_deviation(&DensityMatrix::from_pure(&QubitState::zero())) < 1e-15);
        assert_eq!(
            eavesdrop_marginal(5, &bits("1101"), 3).unwrap_err(),
            ProtocolError::TapOutOfRange { tap: 5, n: 4 }
        );
    }

    #[test]
    fn every_tap_is_mixed_up_to_six_clients() {
        for n in 2..=6 {
            for k in 2..=n {
                assert!(eavesdrop_audit(n, k).unwrap() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn hop_state_matches_protocol_hops() {
        let x = bits("10111");
        let r = bits("01101");
        let t = crate::protocol::run_protocol(&ClientInput::zip(&x, &r).unwrap(), 3, NoiseModel::noiseless(), 2).unwrap();
        for (tap, s) in t.hop_states().iter().enumerate() {
            assert!(hop_state(tap, &x, &r, 3).unwrap().equals_up_to_phase(s, 1e-12));
        }
    }

    #[test]
    fn partition_algebra() {
        let a = sum_mod_k_partition(3, 2);
        let b = Partition::by_key(all_tuples(3), |t| t[0]);
        let m = a.meet(&b);
        assert!(m.refines(&a) && m.refines(&b));
        assert!(!a.refines(&b));
        assert_eq!(m.classes().len(), 4);
        assert!(Partition::by_key(all_tuples(2), |t| t.to_vec()).is_discrete());
    }

    #[test]
    fn invalid_honest_sets() {
        assert!(collusion_partition(&[], 2, 3).is_err());
        assert!(collusion_partition(&[0], 2, 3).is_err());
        assert!(collusion_partition(&[4], 2, 3).is_err());
        assert!(collusion_partition(&[1, 1], 2, 3).is_err());
        assert!(matches!(
            collusion_partition(&[1], 2, 6),
            Err(ProtocolError::ArityCapExceeded { .. })
        ));
    }

    #[test]
    fn single_honest_client_is_leaked() {
        for n in 2..=5 {
            for k in 2..=n.min(3) {
                for h in 1..n {
                    let report = collusion_report(&[h], k, n).unwrap();
                    assert!(report.input_leaked(), "n={n} k={k} h={h}");
                }
            }
        }
    }

    #[test]
    fn server_alone_learns_nothing() {
        for n in 2..=4 {
            for k in 2..=n {
                let honest: Vec<usize> = (1..=n).collect();
                let p = collusion_partition(&honest, k, n).unwrap();
                assert_eq!(p.classes().len(), 1, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn two_honest_k2_n4() {
        let report = collusion_report(&[1, 2], 2, 4).unwrap();
        let class_of = |t: &[bool]| report.partition.classes().iter().position(|c| c.iter().any(|m| m == t));
        assert_eq!(class_of(&bits("01")), class_of(&bits("10")));
        assert_ne!(class_of(&bits("00")), class_of(&bits("01")));
        // the announcement unmasked by the broadcast r̃ also separates weight 0 from weight 2
        assert_ne!(class_of(&bits("00")), class_of(&bits("11")));
        assert!(report.matches_ideal());
        assert!(!report.matches_sum_mod_k());
    }

    #[test]
    fn k3_pairs_match_sum_mod_3() {
        for n in 3..=5 {
            for a in 1..n {
                for b in (a + 1)..n {
                    let report = collusion_report(&[a, b], 3, n).unwrap();
                    assert!(report.matches_sum_mod_k(), "n={n} honest={{{a},{b}}}");
                    assert!(report.matches_ideal());
                }
            }
        }
    }

    #[test]
    fn leakage_never_exceeds_the_ideal() {
        for n in 2..=5 {
            for k in 2..=n.min(3) {
                for mask in 1u32..1 << (n - 1) {
                    let honest: Vec<usize> = (1..n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
                    let report = collusion_report(&honest, k, n).unwrap();
                    assert!(report.matches_ideal(), "n={n} k={k} honest={honest:?}");
                    assert!(report.partition.refines(&report.sum_mod_k));
                }
            }
        }
    }

    /// Brute force: runs the real protocol over every honest random choice and
    /// reads the coalition's view straight off the transcript.
    fn brute_force_partition(honest: &[usize], k: usize, n: usize, colluder_x: &[bool]) -> Partition {
        let colluders: Vec<usize> = (1..=n).filter(|i| !honest.contains(i)).collect();
        let is_colluder = |p: Party| match p {
            Party::Server => true,
            Party::Client(i) => colluders.contains(&i),
            Party::AllClients => !colluders.is_empty(),
        };
        let per_client = 2 * k.pow(n as u32 - 1) * (1 << (n - 1));
        let runs = per_client.pow(honest.len() as u32);
        let views: Vec<BTreeMap<String, HopOperators>> = all_tuples(honest.len())
            .iter()
            .map(|hx| {
                let mut view: BTreeMap<String, HopOperators> = BTreeMap::new();
                for run in 0..runs {
                    let mut code = run;
                    let mut inputs = vec![ClientInput::default(); n];
                    let mut shares = Shares {
                        x: vec![vec![0; n]; n],
                        r: vec![vec![false; n]; n],
                    };
                    for (&c, &xc) in colluders.iter().zip(colluder_x) {
                        inputs[c - 1].x = xc;
                        shares.x[c - 1][c - 1] = xc as usize;
                    }
                    for (&h, &xh) in honest.iter().zip(hx) {
                        let mut local = code % per_client;
                        code /= per_client;
                        let rh = local % 2 == 1;
                        local /= 2;
                        inputs[h - 1] = ClientInput::new(xh, rh);
                        let row = &mut shares.x[h - 1];
                        for slot in row.iter_mut().take(n - 1) {
                            *slot = local % k;
                            local /= k;
                        }
                        row[n - 1] = (xh as usize + k * n - row[..n - 1].iter().sum::<usize>()) % k;
                        let rrow = &mut shares.r[h - 1];
                        for slot in rrow.iter_mut().take(n - 1) {
                            *slot = local % 2 == 1;
                            local /= 2;
                        }
                        rrow[n - 1] = rrow[..n - 1].iter().fold(rh, |a, &b| a ^ b);
                    }
                    let run = execute_with_shares(&inputs, &shares, k, NoiseModel::noiseless(), 0).unwrap();
                    let mut classical = String::new();
                    let mut quantum = Vec::new();
                    for m in &run.transcript.messages {
                        // the server measured the announcement itself
                        if !is_colluder(m.recipient()) && !matches!(m, Message::Announcement { .. }) {
                            continue;
                        }
                        match m {
                            Message::QubitHop { state, .. } => {
                                let v = Vector2::new(state.amp0().re, state.amp1().re);
                                quantum.push(v * v.transpose());
                            }
                            other => classical.push_str(&format!("{other:?};")),
                        }
                    }
                    let acc = view.entry(classical).or_insert_with(|| vec![Matrix2::zeros(); quantum.len()]);
                    for (op, q) in acc.iter_mut().zip(quantum) {
                        *op += q / runs as f64;
                    }
                }
                view
            })
            .collect();
        let tuples = all_tuples(honest.len());
        let index = |t: &[bool]| tuples.iter().position(|u| u == t).unwrap();
        Partition::group_by(tuples.clone(), |a, b| same_operator_views(&views[index(a)], &views[index(b)]))
    }

    #[test]
    fn exact_partition_matches_brute_force() {
        for (honest, k, n) in [(vec![1, 2], 2, 3), (vec![1, 2], 3, 3), (vec![1], 2, 3), (vec![2], 3, 3)] {
            let colluders = n - honest.len();
            for xc in all_tuples(colluders) {
                let exact = collusion_partition_for(&honest, k, n, &xc).unwrap();
                let brute = brute_force_partition(&honest, k, n, &xc);
                assert_eq!(exact, brute, "honest={honest:?} k={k} n={n} xc={xc:?}");
            }
        }
        let exact = collusion_partition_for(&[1, 3], 2, 4, &[true, false]).unwrap();
        assert_eq!(exact, brute_force_partition(&[1, 3], 2, 4, &[true, false]));
    }

    #[test]
    fn server_only_brute_force() {
        let honest = [1, 2, 3];
        assert_eq!(
            collusion_partition_for(&honest, 2, 3, &[]).unwrap(),
            brute_force_partition(&honest, 2, 3, &[])
        );
    }
}
