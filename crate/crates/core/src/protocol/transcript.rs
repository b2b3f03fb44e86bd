//! Transcripts: the ordered message log of a run, its resource counters,
//! replay, and a line-oriented text encoding (see `docs/transcript-schema.md`).

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::qubit::{NoiseModel, QubitState};

use super::{execute_with_shares, ClientInput, ClientState, Message, Party, ProtocolError, Shares};

pub const TRANSCRIPT_VERSION: u32 = 1;
const MAGIC: &str = "qsmpc-transcript";
/// Replayed qubit amplitudes must agree to this precision.
const REPLAY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ResourceCounters {
    pub qubits_used: usize,
    pub qubit_hops: usize,
    /// Non-identity single-qubit gates applied by clients.
    pub unitary_ops: usize,
    /// Every message other than a qubit hop.
    pub classical_messages: usize,
    pub share_messages: usize,
}

impl ResourceCounters {
    pub(super) fn tally(log: &[Message], clients: &[ClientState]) -> Self {
        let count = |kind| log.iter().filter(|m| m.kind() == kind).count();
        let prepared = log
            .iter()
            .filter(|m| matches!(m, Message::QubitHop { from: Party::Server, .. }))
            .count();
        ResourceCounters {
            qubits_used: prepared,
            qubit_hops: count("QubitHop"),
            unitary_ops: clients.iter().map(|c| c.unitary_ops()).sum(),
            classical_messages: log.len() - count("QubitHop"),
            share_messages: count("ClassicalShare"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTranscript {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub noise: NoiseModel,
    pub inputs: Vec<ClientInput>,
    pub messages: Vec<Message>,
    pub announcement: bool,
    /// Client `i`'s output at index `i − 1`.
    pub outputs: Vec<bool>,
    pub counters: ResourceCounters,
}

impl ProtocolTranscript {
    /// Qubit states in hop order: hop `j` leaves client `j` (hop 0 leaves the server).
    pub fn hop_states(&self) -> Vec<QubitState> {
        self.messages
            .iter()
            .filter_map(|m| match m {
                Message::QubitHop { state, .. } => Some(*state),
                _ => None,
            })
            .collect()
    }

    /// Rebuilds every client's share vectors from the logged shares; self-shares
    /// are whatever completes each client's sum and XOR.
    pub fn reconstruct_shares(&self) -> Result<Shares, ProtocolError> {
        let (n, k) = (self.n, self.k);
        let mut x = vec![vec![None; n]; n];
        let mut r = vec![vec![None; n]; n];
        for m in &self.messages {
            if let Message::ClassicalShare { from, to, x_share, r_share } = *m {
                let in_range = (1..=n).contains(&from) && (1..=n).contains(&to) && from != to && x_share < k;
                if !in_range || x[from - 1][to - 1].is_some() {
                    return Err(ProtocolError::ReplayDivergence {
                        index: 0,
                        detail: format!("invalid share C{from}->C{to}"),
                    });
                }
                x[from - 1][to - 1] = Some(x_share);
                r[from - 1][to - 1] = Some(r_share);
            }
        }
        let mut shares = Shares { x: Vec::new(), r: Vec::new() };
        for (i, input) in self.inputs.iter().enumerate() {
            let mut xs = Vec::with_capacity(n);
            let mut rs = Vec::with_capacity(n);
            for j in 0..n {
                if j == i {
                    xs.push(0);
                    rs.push(false);
                    continue;
                }
                let missing = || ProtocolError::ReplayDivergence {
                    index: 0,
                    detail: format!("missing share C{}->C{}", i + 1, j + 1),
                };
                xs.push(x[i][j].ok_or_else(missing)?);
                rs.push(r[i][j].ok_or_else(missing)?);
            }
            let others = xs.iter().sum::<usize>() % k;
            xs[i] = (input.x as usize + k - others) % k;
            rs[i] = rs.iter().fold(input.r, |a, &b| a ^ b);
            shares.x.push(xs);
            shares.r.push(rs);
        }
        Ok(shares)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC}\t{TRANSCRIPT_VERSION}\n");
        let _ = writeln!(out, "params\t{}\t{}\t{}", self.n, self.k, self.seed);
        let _ = writeln!(
            out,
            "noise\t{}\t{}",
            self.noise.depolarizing_per_gate.value(),
            self.noise.measurement_flip.value()
        );
        for (i, inp) in self.inputs.iter().enumerate() {
            let _ = writeln!(out, "input\tC{}\t{}\t{}", i + 1, inp.x as u8, inp.r as u8);
        }
        for m in &self.messages {
            let _ = write!(out, "{}\t{}\t{}\t", m.kind(), m.sender(), m.recipient());
            match *m {
                Message::ClassicalShare { x_share, r_share, .. } => {
                    let _ = writeln!(out, "{x_share}\t{}", r_share as u8);
                }
                Message::QubitHop { state, .. } => {
                    let (a, b) = (state.amp0(), state.amp1());
                    let _ = writeln!(out, "{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}", a.re, a.im, b.re, b.im);
                }
                Message::AggregateReport { x_tilde, .. } => {
                    let _ = writeln!(out, "{x_tilde}");
                }
                Message::Announcement { value } => {
                    let _ = writeln!(out, "{}", value as u8);
                }
                Message::MaskBroadcast { r_tilde, .. } => {
                    let _ = writeln!(out, "{}", r_tilde as u8);
                }
            }
        }
        let _ = writeln!(out, "announcement\t{}", self.announcement as u8);
        for (i, o) in self.outputs.iter().enumerate() {
            let _ = writeln!(out, "output\tC{}\t{}", i + 1, *o as u8);
        }
        let c = &self.counters;
        let _ = writeln!(
            out,
            "counters\t{}\t{}\t{}\t{}\t{}",
            c.qubits_used, c.qubit_hops, c.unitary_ops, c.classical_messages, c.share_messages
        );
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ProtocolError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(ProtocolError::MalformedTranscript {
            line: 1,
            reason: "empty transcript".into(),
        })?;
        if first != format!("{MAGIC}\t{TRANSCRIPT_VERSION}") {
            return Err(ProtocolError::MalformedTranscript {
                line: 1,
                reason: format!("expected header {MAGIC:?} version {TRANSCRIPT_VERSION}"),
            });
        }
        let mut params = None;
        let mut noise = None;
        let mut inputs = Vec::new();
        let mut messages = Vec::new();
        let mut announcement = None;
        let mut outputs = Vec::new();
        let mut counters = None;
        for (idx, line) in lines {
            let mut p = LineParser::new(line, idx + 1);
            let tag = p.field()?;
            match tag {
                "params" => params = Some((p.parse::<usize>()?, p.parse::<usize>()?, p.parse::<u64>()?)),
                "noise" => {
                    let (dp, q) = (p.parse::<f64>()?, p.parse::<f64>()?);
                    noise = Some(NoiseModel::new(dp, q).map_err(|e| p.error(&e.to_string()))?);
                }
                "input" => {
                    p.expect_client(inputs.len() + 1)?;
                    inputs.push(ClientInput::new(p.bit()?, p.bit()?));
                }
                "announcement" => announcement = Some(p.bit()?),
                "output" => {
                    p.expect_client(outputs.len() + 1)?;
                    outputs.push(p.bit()?);
                }
                "counters" => {
                    counters = Some(ResourceCounters {
                        qubits_used: p.parse()?,
                        qubit_hops: p.parse()?,
                        unitary_ops: p.parse()?,
                        classical_messages: p.parse()?,
                        share_messages: p.parse()?,
                    })
                }
                kind => messages.push(p.message(kind)?),
            }
            p.finish()?;
        }
        let missing = |what: &str| ProtocolError::MalformedTranscript {
            line: 0,
            reason: format!("missing {what}"),
        };
        let (n, k, seed) = params.ok_or_else(|| missing("params"))?;
        if inputs.len() != n || outputs.len() != n {
            return Err(missing("one input and one output line per client"));
        }
        Ok(ProtocolTranscript {
            n,
            k,
            seed,
            noise: noise.ok_or_else(|| missing("noise"))?,
            inputs,
            messages,
            announcement: announcement.ok_or_else(|| missing("announcement"))?,
            outputs,
            counters: counters.ok_or_else(|| missing("counters"))?,
        })
    }
}

struct LineParser<'a> {
    fields: std::str::Split<'a, char>,
    line: usize,
}

impl<'a> LineParser<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        LineParser {
            fields: text.split('\t'),
            line,
        }
    }

    fn error(&self, reason: &str) -> ProtocolError {
        ProtocolError::MalformedTranscript {
            line: self.line,
            reason: reason.to_string(),
        }
    }

    fn field(&mut self) -> Result<&'a str, ProtocolError> {
        self.fields.next().ok_or_else(|| self.error("missing field"))
    }

    fn parse<T: std::str::FromStr>(&mut self) -> Result<T, ProtocolError> {
        let f = self.field()?;
        f.parse().map_err(|_| self.error(&format!("cannot parse {f:?}")))
    }

    fn bit(&mut self) -> Result<bool, ProtocolError> {
        match self.field()? {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(self.error(&format!("expected 0 or 1, got {other:?}"))),
        }
    }

    fn party(&mut self) -> Result<Party, ProtocolError> {
        let f = self.field()?;
        f.parse().map_err(|e: String| self.error(&e))
    }

    fn client(&mut self) -> Result<usize, ProtocolError> {
        match self.party()? {
            Party::Client(i) => Ok(i),
            other => Err(self.error(&format!("expected a client, got {other}"))),
        }
    }

    fn expect_client(&mut self, id: usize) -> Result<(), ProtocolError> {
        if self.client()? != id {
            return Err(self.error(&format!("expected C{id}")));
        }
        Ok(())
    }

    fn expect_party(&mut self, party: Party) -> Result<(), ProtocolError> {
        if self.party()? != party {
            return Err(self.error(&format!("expected {party}")));
        }
        Ok(())
    }

    fn message(&mut self, kind: &str) -> Result<Message, ProtocolError> {
        Ok(match kind {
            "ClassicalShare" => Message::ClassicalShare {
                from: self.client()?,
                to: self.client()?,
                x_share: self.parse()?,
                r_share: self.bit()?,
            },
            "QubitHop" => {
                let (from, to) = (self.party()?, self.party()?);
                let a = Complex64::new(self.parse()?, self.parse()?);
                let b = Complex64::new(self.parse()?, self.parse()?);
                let state = QubitState::new(a, b).map_err(|e| self.error(&e.to_string()))?;
                Message::QubitHop { from, to, state }
            }
            "AggregateReport" => Message::AggregateReport {
                from: self.client()?,
                to: self.client()?,
                x_tilde: self.parse()?,
            },
            "Announcement" => {
                self.expect_party(Party::Server)?;
                self.expect_party(Party::AllClients)?;
                Message::Announcement { value: self.bit()? }
            }
            "MaskBroadcast" => {
                let from = self.client()?;
                self.expect_party(Party::AllClients)?;
                Message::MaskBroadcast {
                    from,
                    r_tilde: self.bit()?,
                }
            }
            other => return Err(self.error(&format!("unknown record type {other:?}"))),
        })
    }

    fn finish(&mut self) -> Result<(), ProtocolError> {
        match self.fields.next() {
            None => Ok(()),
            Some(extra) => Err(self.error(&format!("unexpected trailing field {extra:?}"))),
        }
    }
}

fn same_message(a: &Message, b: &Message) -> bool {
    match (a, b) {
        (
            Message::QubitHop { from, to, state },
            Message::QubitHop {
                from: f2,
                to: t2,
                state: s2,
            },
        ) => {
            from == f2
                && to == t2
                && (state.amp0() - s2.amp0()).norm() <= REPLAY_TOLERANCE
                && (state.amp1() - s2.amp1()).norm() <= REPLAY_TOLERANCE
        }
        _ => a == b,
    }
}

/// Re-executes a transcript on fresh participants, feeding them the logged
/// shares and the logged seed, and checks that every message, the announcement,
/// the outputs and the counters come out identical.
pub fn replay(t: &ProtocolTranscript) -> Result<Vec<bool>, ProtocolError> {
    if t.inputs.len() != t.n {
        return Err(ProtocolError::LengthMismatch {
            what: "transcript inputs",
            expected: t.n,
            found: t.inputs.len(),
        });
    }
    let shares = t.reconstruct_shares()?;
    let fresh = execute_with_shares(&t.inputs, &shares, t.k, t.noise, t.seed)?.transcript;
    for (index, (logged, replayed)) in t.messages.iter().zip(&fresh.messages).enumerate() {
        if !same_message(logged, replayed) {
            return Err(ProtocolError::ReplayDivergence {
                index,
                detail: format!("logged {logged:?}, replayed {replayed:?}"),
            });
        }
    }
    if t.messages.len() != fresh.messages.len() {
        return Err(ProtocolError::ReplayDivergence {
            index: t.messages.len().min(fresh.messages.len()),
            detail: format!("logged {} messages, replayed {}", t.messages.len(), fresh.messages.len()),
        });
    }
    let index = t.messages.len();
    if t.announcement != fresh.announcement {
        return Err(ProtocolError::ReplayDivergence {
            index,
            detail: "announcement differs".into(),
        });
    }
    if t.outputs != fresh.outputs {
        return Err(ProtocolError::ReplayDivergence {
            index,
            detail: "outputs differ".into(),
        });
    }
    if t.counters != fresh.counters {
        return Err(ProtocolError::ReplayDivergence {
            index,
            detail: "resource counters differ".into(),
        });
    }
    Ok(fresh.outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::run_protocol;
    use crate::rng::substream;
    use rand::Rng;

    fn random_transcript(seed: u64) -> ProtocolTranscript {
        let mut rng = substream(seed, 900);
        let n = rng.random_range(2..=8);
        let k = rng.random_range(2..=n);
        let inputs: Vec<ClientInput> = (0..n).map(|_| ClientInput::new(rng.random(), rng.random())).collect();
        let noise = if seed.is_multiple_of(3) {
            NoiseModel::new(0.05, 0.02).unwrap()
        } else {
            NoiseModel::noiseless()
        };
        run_protocol(&inputs, k, noise, seed).unwrap()
    }

    #[test]
    fn replay_matches_on_random_runs() {
        for seed in 0..100 {
            let t = random_transcript(seed);
            assert_eq!(replay(&t).unwrap(), t.outputs);
        }
    }

    #[test]
    fn text_round_trip() {
        for seed in 0..30 {
            let t = random_transcript(seed);
            let text = t.to_text();
            let back = ProtocolTranscript::from_text(&text).unwrap();
            assert_eq!(back, t);
            assert_eq!(back.to_text(), text);
            assert_eq!(replay(&back).unwrap(), t.outputs);
        }
    }

    #[test]
    fn mutated_qubit_hop_is_detected() {
        let mut t = random_transcript(4);
        let idx = t
            .messages
            .iter()
            .position(|m| matches!(m, Message::QubitHop { from: Party::Client(_), .. }))
            .unwrap();
        if let Message::QubitHop { state, .. } = &mut t.messages[idx] {
            *state = state.apply_ry(&crate::angles::RyGate::u(7).unwrap());
        }
        match replay(&t) {
            Err(ProtocolError::ReplayDivergence { index, .. }) => assert_eq!(index, idx),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn other_tampering_is_detected() {
        let base = random_transcript(5);
        let mut flipped_output = base.clone();
        flipped_output.outputs[0] ^= true;
        assert!(matches!(replay(&flipped_output), Err(ProtocolError::ReplayDivergence { .. })));

        let mut changed_share = base.clone();
        let idx = changed_share
            .messages
            .iter()
            .position(|m| matches!(m, Message::ClassicalShare { to, .. } if *to < base.n))
            .unwrap();
        if let Message::ClassicalShare { x_share, .. } = &mut changed_share.messages[idx] {
            *x_share = (*x_share + 1) % base.k;
        }
        assert!(matches!(replay(&changed_share), Err(ProtocolError::ReplayDivergence { .. })));

        let mut truncated = base.clone();
        truncated.messages.pop();
        assert!(matches!(replay(&truncated), Err(ProtocolError::ReplayDivergence { .. })));
    }

    #[test]
    fn malformed_text_is_rejected() {
        let text = random_transcript(6).to_text();
        assert!(ProtocolTranscript::from_text("").is_err());
        assert!(ProtocolTranscript::from_text(&text.replacen("qsmpc-transcript\t1", "qsmpc-transcript\t9", 1)).is_err());
        assert!(ProtocolTranscript::from_text(&text.replacen("ClassicalShare", "Bogus", 1)).is_err());
        let cut: String = text.lines().filter(|l| !l.starts_with("counters")).map(|l| format!("{l}\n")).collect();
        assert!(ProtocolTranscript::from_text(&cut).is_err());
    }
}
