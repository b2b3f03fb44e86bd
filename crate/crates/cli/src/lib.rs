//! Experiment drivers behind the `qsmpc` binary. Every command is a pure
//! function of its arguments and seed, returning the text it would print.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, ensure, Context, Result};
use qsmpc::protocol::security::{
    collusion_report, eavesdrop_audit, CollusionReport, MAX_COLLUSION_ARITY, MAX_EAVESDROP_ARITY,
};
use qsmpc::protocol::{check_parameters, run_protocol, ClientInput, ProtocolTranscript};
use qsmpc::qubit::NoiseModel;
use qsmpc::rng::derive_seed;
use qsmpc::symfn::{build_circuit_vu, qasm, weight, CircuitSpec};

pub const DEFAULT_SHOTS: usize = 1024;
/// Largest deviation from `I/2` accepted by the eavesdropper audit.
pub const MARGINAL_TOLERANCE: f64 = 1e-12;
/// Device measurements for the built-in cases.
pub const HARDWARE_REFERENCE_CSV: &str = include_str!("../data/ibmqx4_reference.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseName {
    N5,
    N8,
    N10,
    Custom,
}

impl CaseName {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseName::N5 => "n5",
            CaseName::N8 => "n8",
            CaseName::N10 => "n10",
            CaseName::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCase {
    pub name: CaseName,
    pub x: Vec<bool>,
    pub r: Vec<bool>,
    pub ks: Vec<usize>,
    pub shots: usize,
    pub noise: NoiseModel,
    pub seed: u64,
}

/// Parses `1,0,1` (or `101`) into bits.
pub fn parse_bits(text: &str) -> Result<Vec<bool>> {
    let tokens: Vec<String> = if text.contains(',') {
        text.split(',').map(|s| s.trim().to_string()).collect()
    } else {
        text.trim().chars().map(String::from).collect()
    };
    tokens
        .iter()
        .map(|b| match b.as_str() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => bail!("expected a bit (0 or 1), got {other:?}"),
        })
        .collect()
}

pub fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    text.split(',')
        .map(|s| s.trim().parse::<T>().with_context(|| format!("cannot parse {s:?}")))
        .collect()
}

fn bit_string(bits: impl IntoIterator<Item = bool>) -> String {
    bits.into_iter().map(|b| if b { '1' } else { '0' }).collect()
}

impl ExperimentCase {
    pub fn builtin(name: &str) -> Result<Self> {
        let (name, x, r, ks): (CaseName, &str, &str, Vec<usize>) = match name {
            "n5" => (CaseName::N5, "11001", "10010", vec![2, 3, 4]),
            "n8" => (CaseName::N8, "10111010", "11100100", (2..=6).collect()),
            "n10" => (CaseName::N10, "1010101010", "1011001010", (2..=6).collect()),
            other => bail!("unknown case {other:?}; expected n5, n8, n10 or custom"),
        };
        Ok(ExperimentCase {
            name,
            x: parse_bits(x)?,
            r: parse_bits(r)?,
            ks,
            shots: DEFAULT_SHOTS,
            noise: NoiseModel::noiseless(),
            seed: 0,
        })
    }

    pub fn custom(x: Vec<bool>, r: Vec<bool>, ks: Vec<usize>) -> Result<Self> {
        ensure!(x.len() == r.len(), "--x has {} bits but --r has {}", x.len(), r.len());
        ensure!(!ks.is_empty(), "at least one k is required");
        for &k in &ks {
            check_parameters(x.len(), k)?;
        }
        Ok(ExperimentCase {
            name: CaseName::Custom,
            x,
            r,
            ks,
            shots: DEFAULT_SHOTS,
            noise: NoiseModel::noiseless(),
            seed: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn inputs(&self) -> Vec<ClientInput> {
        self.x.iter().zip(&self.r).map(|(&x, &r)| ClientInput::new(x, r)).collect()
    }

    pub fn correct_value(&self, k: usize) -> bool {
        (weight(&self.x) / k) % 2 == 1
    }

    pub fn r_bar(&self) -> bool {
        self.r.iter().fold(false, |a, &b| a ^ b)
    }

    /// Seed of shot `shot` for modulus `k`; shared across noise levels.
    pub fn shot_seed(&self, k: usize, shot: usize) -> u64 {
        derive_seed(self.seed, k as u64, shot as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub k: usize,
    pub correct_value: bool,
    pub correct_count: usize,
    pub shots: usize,
}

impl ResultRow {
    pub fn frequency(&self) -> f64 {
        self.correct_count as f64 / self.shots as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub n: usize,
    /// Ascending in `k`.
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["function", "n", "k", "correct_value", "correct_count", "shots", "frequency"])?;
        for row in &self.rows {
            w.write_record([
                format!("f_{}^{}", self.n, row.k),
                self.n.to_string(),
                row.k.to_string(),
                (row.correct_value as u8).to_string(),
                row.correct_count.to_string(),
                row.shots.to_string(),
                format!("{:.6}", row.frequency()),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardwareRow {
    pub case: String,
    pub k: usize,
    pub correct_value: bool,
    pub correct_count: usize,
    pub shots: usize,
    pub probability: f64,
}

pub fn hardware_reference() -> Result<Vec<HardwareRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(HARDWARE_REFERENCE_CSV.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).context("short hardware reference row");
        rows.push(HardwareRow {
            case: field(0)?.to_string(),
            k: field(3)?.parse()?,
            correct_value: field(4)? == "1",
            correct_count: field(5)?.parse()?,
            shots: field(6)?.parse()?,
            probability: field(7)?.parse()?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceOutput {
    pub table: ResultTable,
    /// Unmasked output tuples, largest `k` leftmost.
    pub histogram: BTreeMap<String, usize>,
    /// Server announcements `f ⊕ r̄`, same ordering.
    pub announcement_histogram: BTreeMap<String, usize>,
}

fn empty_histogram(width: usize) -> BTreeMap<String, usize> {
    (0u32..1 << width)
        .map(|m| (bit_string((0..width).rev().map(|i| m >> i & 1 == 1)), 0))
        .collect()
}

/// Runs the full protocol `shots` times for every `k` in the case.
pub fn reproduce(case: &ExperimentCase) -> Result<ReproduceOutput> {
    ensure!(case.shots > 0, "shots must be positive");
    let inputs = case.inputs();
    let mut outcomes = vec![Vec::with_capacity(case.ks.len()); case.shots];
    let mut announcements = vec![Vec::with_capacity(case.ks.len()); case.shots];
    let mut rows = Vec::new();
    for &k in &case.ks {
        let correct_value = case.correct_value(k);
        let mut correct_count = 0;
        for shot in 0..case.shots {
            let t = run_protocol(&inputs, k, case.noise, case.shot_seed(k, shot))?;
            let out = t.outputs[0];
            correct_count += (out == correct_value) as usize;
            outcomes[shot].push((k, out));
            announcements[shot].push((k, t.announcement));
        }
        rows.push(ResultRow {
            k,
            correct_value,
            correct_count,
            shots: case.shots,
        });
    }
    rows.sort_by_key(|r| r.k);
    let tally = |per_shot: &[Vec<(usize, bool)>]| {
        let mut hist = empty_histogram(case.ks.len());
        for shot in per_shot {
            let mut bits = shot.clone();
            bits.sort_by_key(|b| std::cmp::Reverse(b.0));
            *hist.entry(bit_string(bits.into_iter().map(|(_, b)| b))).or_default() += 1;
        }
        hist
    };
    Ok(ReproduceOutput {
        table: ResultTable { n: case.n(), rows },
        histogram: tally(&outcomes),
        announcement_histogram: tally(&announcements),
    })
}

/// Simulated and hardware frequencies side by side.
pub fn side_by_side(case: &ExperimentCase, out: &ReproduceOutput) -> Result<String> {
    let hardware = hardware_reference()?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<10} {:>7} {:>12} {:>12} {:>22}",
        "function", "correct", "simulated", "frequency", "ibmqx4 (hardware)"
    );
    for row in &out.table.rows {
        let hw = hardware
            .iter()
            .find(|h| h.case == case.name.as_str() && h.k == row.k)
            .map(|h| format!("{}/{} = {:.2}%", h.correct_count, h.shots, 100.0 * h.probability))
            .unwrap_or_else(|| "-".to_string());
        let _ = writeln!(
            text,
            "{:<10} {:>7} {:>12} {:>12.4} {:>22}",
            format!("f_{}^{}", out.table.n, row.k),
            row.correct_value as u8,
            format!("{}/{}", row.correct_count, row.shots),
            row.frequency(),
            hw
        );
    }
    Ok(text)
}

pub fn histogram_json(hist: &BTreeMap<String, usize>) -> Result<String> {
    Ok(serde_json::to_string_pretty(hist)? + "\n")
}

pub struct ComputeReport {
    pub transcript: ProtocolTranscript,
    pub expected: bool,
}

pub fn compute(x: &[bool], r: &[bool], k: usize, noise: NoiseModel, seed: u64) -> Result<ComputeReport> {
    let inputs = ClientInput::zip(x, r)?;
    check_parameters(inputs.len(), k)?;
    let transcript = run_protocol(&inputs, k, noise, seed)?;
    Ok(ComputeReport {
        transcript,
        expected: (weight(x) / k) % 2 == 1,
    })
}

impl ComputeReport {
    pub fn summary(&self) -> String {
        let t = &self.transcript;
        let count = |kind| t.messages.iter().filter(|m| m.kind() == kind).count();
        let c = &t.counters;
        let mut s = String::new();
        let _ = writeln!(s, "n = {}, k = {}, seed = {}", t.n, t.k, t.seed);
        let _ = writeln!(
            s,
            "messages: {} total ({} ClassicalShare, {} QubitHop, {} AggregateReport, {} Announcement, {} MaskBroadcast)",
            t.messages.len(),
            count("ClassicalShare"),
            count("QubitHop"),
            count("AggregateReport"),
            count("Announcement"),
            count("MaskBroadcast")
        );
        let _ = writeln!(s, "announcement (f ⊕ r̄): {}", t.announcement as u8);
        let _ = writeln!(s, "output f_{}^{}: {}", t.n, t.k, t.outputs[0] as u8);
        let _ = writeln!(s, "client outputs: {}", bit_string(t.outputs.iter().copied()));
        let _ = writeln!(s, "expected ⌊wt(x)/k⌋ mod 2: {}", self.expected as u8);
        let _ = writeln!(
            s,
            "counters: qubits_used={} qubit_hops={} unitary_ops={} classical_messages={} share_messages={}",
            c.qubits_used, c.qubit_hops, c.unitary_ops, c.classical_messages, c.share_messages
        );
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub p: f64,
    pub correct_count: usize,
    pub shots: usize,
}

impl SweepRow {
    pub fn frequency(&self) -> f64 {
        self.correct_count as f64 / self.shots as f64
    }

    pub fn sigma(&self) -> f64 {
        let f = self.frequency();
        (f * (1.0 - f) / self.shots as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// `(k, p_lo, p_hi)` for adjacent grid points where the frequency rises by
    /// more than three combined standard deviations.
    pub fn monotonicity_violations(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for pair in self.rows.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.k != b.k {
                continue;
            }
            let sigma = (a.sigma().powi(2) + b.sigma().powi(2)).sqrt();
            if b.frequency() > a.frequency() + 3.0 * sigma {
                out.push((a.k, a.p, b.p));
            }
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "p", "correct_count", "shots", "frequency", "sigma"])?;
        for row in &self.rows {
            w.write_record([
                row.k.to_string(),
                row.p.to_string(),
                row.correct_count.to_string(),
                row.shots.to_string(),
                format!("{:.6}", row.frequency()),
                format!("{:.6}", row.sigma()),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn monotonicity_summary(&self) -> String {
        let violations = self.monotonicity_violations();
        if violations.is_empty() {
            "monotonicity: frequency non-increasing in p within 3σ for every k\n".to_string()
        } else {
            violations
                .iter()
                .map(|(k, lo, hi)| format!("monotonicity: k={k} frequency rises from p={lo} to p={hi} beyond 3σ\n"))
                .collect()
        }
    }
}

/// Correct-output frequency per `(k, p)`. Shot `i` uses the same seed at every
/// `p`, so the grid points share their randomness.
pub fn noise_sweep(case: &ExperimentCase, ps: &[f64], measurement_flip: f64) -> Result<SweepReport> {
    ensure!(case.shots > 0, "shots must be positive");
    let inputs = case.inputs();
    let mut ks = case.ks.clone();
    ks.sort_unstable();
    let mut rows = Vec::new();
    for &k in &ks {
        let correct_value = case.correct_value(k);
        for &p in ps {
            let noise = NoiseModel::new(p, measurement_flip)?;
            let mut correct_count = 0;
            for shot in 0..case.shots {
                let t = run_protocol(&inputs, k, noise, case.shot_seed(k, shot))?;
                correct_count += (t.outputs[0] == correct_value) as usize;
            }
            rows.push(SweepRow {
                k,
                p,
                correct_count,
                shots: case.shots,
            });
        }
    }
    Ok(SweepReport { rows })
}

pub struct AuditReport {
    pub n: usize,
    pub k: usize,
    pub max_deviation: f64,
    /// Empty when `n` exceeds the collusion cap.
    pub collusion: Vec<CollusionReport>,
}

impl AuditReport {
    pub fn marginal_pass(&self) -> bool {
        self.max_deviation < MARGINAL_TOLERANCE
    }

    /// Coalitions with at least two honest clients (or the server alone) must
    /// learn exactly the unavoidable leakage.
    pub fn collusion_pass(&self) -> bool {
        self.collusion.iter().all(|c| c.honest.len() < 2 || c.matches_ideal())
    }

    pub fn pass(&self) -> bool {
        self.marginal_pass() && self.collusion_pass()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "security audit n={} k={}", self.n, self.k);
        let _ = writeln!(
            s,
            "eavesdropper: max |ρ − I/2| over taps 1..={} and all inputs = {:.3e} [{}]",
            self.n,
            self.max_deviation,
            if self.marginal_pass() { "PASS" } else { "FAIL" }
        );
        if self.collusion.is_empty() {
            let _ = writeln!(s, "collusion: skipped (n > {MAX_COLLUSION_ARITY})");
        }
        for c in &self.collusion {
            let status = if c.honest.len() == 1 {
                if c.input_leaked() {
                    "input leaked (expected with one honest client)"
                } else {
                    "not leaked"
                }
            } else if c.matches_ideal() {
                "PASS"
            } else {
                "FAIL"
            };
            let _ = writeln!(
                s,
                "collusion honest={:?} colluders=S+{:?}: {} class{}; sum mod k: {}; ideal leakage: {} [{}]",
                c.honest,
                c.colluders,
                c.partition.classes().len(),
                if c.partition.classes().len() == 1 { "" } else { "es" },
                if c.matches_sum_mod_k() { "equal" } else { "differs" },
                if c.matches_ideal() { "equal" } else { "differs" },
                status
            );
        }
        let _ = writeln!(s, "overall: {}", if self.pass() { "PASS" } else { "FAIL" });
        s
    }
}

/// Eavesdropper marginals at every tap, then every coalition of the server and
/// `C_n` with some other clients, plus the server alone.
pub fn security_audit(n: usize, k: usize) -> Result<AuditReport> {
    check_parameters(n, k)?;
    ensure!(
        n <= MAX_EAVESDROP_ARITY.min(6),
        "security audit is limited to n ≤ 6 (got {n})"
    );
    let max_deviation = eavesdrop_audit(n, k)?;
    let mut collusion = Vec::new();
    if n <= MAX_COLLUSION_ARITY {
        for mask in 1u32..1 << (n - 1) {
            let honest: Vec<usize> = (1..n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
            collusion.push(collusion_report(&honest, k, n)?);
        }
        collusion.push(collusion_report(&(1..=n).collect::<Vec<_>>(), k, n)?);
    }
    Ok(AuditReport {
        n,
        k,
        max_deviation,
        collusion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitFormat {
    PaperNotation,
    Qasm,
}

impl std::str::FromStr for CircuitFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-notation" => Ok(CircuitFormat::PaperNotation),
            "qasm" => Ok(CircuitFormat::Qasm),
            other => bail!("unknown format {other:?}; expected paper-notation or qasm"),
        }
    }
}

/// One `VU(n,k,x,r)` circuit per `k`. QASM puts each on its own qubit.
pub fn emit_circuit(x: &[bool], r: &[bool], ks: &[usize], format: CircuitFormat) -> Result<String> {
    ensure!(x.len() == r.len(), "--x has {} bits but --r has {}", x.len(), r.len());
    let circuits: Vec<CircuitSpec> = ks
        .iter()
        .map(|&k| build_circuit_vu(x.len(), k, x, r))
        .collect::<Result<_, _>>()?;
    Ok(match format {
        CircuitFormat::PaperNotation => circuits.iter().map(|c| c.paper_notation() + "\n").collect(),
        CircuitFormat::Qasm => qasm::emit(&circuits),
    })
}
