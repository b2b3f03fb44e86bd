//! The single-qubit protocol as message-passing state machines.
//!
//! A run proceeds in four phases, each driven to quiescence by a FIFO
//! scheduler before the next begins:
//!
//! 1. every client sends its `Z_k` and XOR shares to every other client;
//! 2. the server sends `|0⟩` to `C_1`, and client `i` applies `V^{r_i} U_k^{x_i}`
//!    before forwarding;
//! 3. clients report `x̃_i` to `C_n`, which applies `(U_k†)^{(Σx̃) mod k}` and
//!    returns the qubit; the server measures and announces `f ⊕ r̄`;
//! 4. clients broadcast `r̃_i` and unmask the announcement.
//!
//! Every cross-participant value travels through the message log, so the log
//! plus the seed determines the run.

mod message;
mod participant;
pub mod security;
mod sharing;
mod transcript;

use std::collections::VecDeque;

use thiserror::Error;

use crate::angles::AngleError;
use crate::qubit::{NoiseModel, QubitError};
use crate::rng::{client_stream, substream, ENVIRONMENT_STREAM, SERVER_STREAM};

pub use message::{Message, Party};
pub use participant::{ClientState, Environment, ServerState};
pub use sharing::{split_mod_k, split_xor};
pub use transcript::{replay, ProtocolTranscript, ResourceCounters, TRANSCRIPT_VERSION};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("modulus k = {k} outside 2..={n}")]
    KOutOfRange { n: usize, k: usize },
    #[error("at least 2 clients are required, got {0}")]
    TooFewClients(usize),
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(usize),
    #[error("share count must be at least 1")]
    NoShares,
    #[error("{what}: expected length {expected}, got {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid shares for client {client}: {reason}")]
    InvalidShares { client: usize, reason: String },
    #[error("{party} cannot accept a {kind} message now")]
    UnexpectedMessage { party: Party, kind: &'static str },
    #[error("{party}: {reason}")]
    OutOfOrder { party: Party, reason: &'static str },
    #[error("run ended before {0}")]
    Incomplete(&'static str),
    #[error("tap {tap} outside 0..={n}")]
    TapOutOfRange { tap: usize, n: usize },
    #[error("{what} is limited to n ≤ {max} (got {n})")]
    ArityCapExceeded { what: &'static str, n: usize, max: usize },
    #[error("invalid honest set: {0}")]
    InvalidHonestSet(String),
    #[error("replay diverged at message {index}: {detail}")]
    ReplayDivergence { index: usize, detail: String },
    #[error("malformed transcript at line {line}: {reason}")]
    MalformedTranscript { line: usize, reason: String },
    #[error(transparent)]
    Angle(#[from] AngleError),
    #[error(transparent)]
    Qubit(#[from] QubitError),
}

/// A client's private input bit and random mask bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ClientInput {
    pub x: bool,
    pub r: bool,
}

impl ClientInput {
    pub fn new(x: bool, r: bool) -> Self {
        ClientInput { x, r }
    }

    pub fn zip(x: &[bool], r: &[bool]) -> Result<Vec<ClientInput>, ProtocolError> {
        if x.len() != r.len() {
            return Err(ProtocolError::LengthMismatch {
                what: "mask vector",
                expected: x.len(),
                found: r.len(),
            });
        }
        Ok(x.iter().zip(r).map(|(&x, &r)| ClientInput { x, r }).collect())
    }
}

/// Every client's outgoing shares: `x[i][j] = x_{i+1,j+1}`, likewise `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shares {
    pub x: Vec<Vec<usize>>,
    pub r: Vec<Vec<bool>>,
}

impl Shares {
    /// Client `i` draws its shares from its own substream of `seed`.
    pub fn sample(inputs: &[ClientInput], k: usize, seed: u64) -> Result<Shares, ProtocolError> {
        let n = inputs.len();
        let mut x = Vec::with_capacity(n);
        let mut r = Vec::with_capacity(n);
        for (i, input) in inputs.iter().enumerate() {
            let mut rng = client_stream(seed, i + 1);
            x.push(split_mod_k(input.x, k, n, &mut rng)?);
            r.push(split_xor(input.r, n, &mut rng)?);
        }
        Ok(Shares { x, r })
    }
}

pub fn check_parameters(n: usize, k: usize) -> Result<(), ProtocolError> {
    if n < 2 {
        return Err(ProtocolError::TooFewClients(n));
    }
    if k < 2 || k > n {
        return Err(ProtocolError::KOutOfRange { n, k });
    }
    Ok(())
}

/// Final participant states alongside the transcript.
#[derive(Debug, Clone)]
pub struct Execution {
    pub transcript: ProtocolTranscript,
    pub clients: Vec<ClientState>,
    pub server: ServerState,
}

/// FIFO delivery. Messages are logged in the order they are sent.
struct Scheduler {
    queue: VecDeque<Message>,
    log: Vec<Message>,
}

impl Scheduler {
    fn send(&mut self, msgs: impl IntoIterator<Item = Message>) {
        for m in msgs {
            self.log.push(m);
            self.queue.push_back(m);
        }
    }

    fn run_until_quiet(
        &mut self,
        clients: &mut [ClientState],
        server: &mut ServerState,
        env: &mut Environment,
    ) -> Result<(), ProtocolError> {
        while let Some(msg) = self.queue.pop_front() {
            let mut replies = Vec::new();
            if msg.delivered_to(Party::Server) {
                replies.extend(server.handle(&msg, env)?);
            }
            for c in clients.iter_mut() {
                if msg.delivered_to(Party::Client(c.id())) {
                    replies.extend(c.handle(&msg, env)?);
                }
            }
            if let Party::Client(to) = msg.recipient() {
                if to == 0 || to > clients.len() {
                    return Err(ProtocolError::UnexpectedMessage {
                        party: msg.recipient(),
                        kind: msg.kind(),
                    });
                }
            }
            self.send(replies);
        }
        Ok(())
    }
}

/// Runs the protocol with explicitly supplied shares. The seed drives only the
/// server's measurement and the channel noise.
pub fn execute_with_shares(
    inputs: &[ClientInput],
    shares: &Shares,
    k: usize,
    noise: NoiseModel,
    seed: u64,
) -> Result<Execution, ProtocolError> {
    let n = inputs.len();
    check_parameters(n, k)?;
    for (what, len) in [("x share matrix", shares.x.len()), ("r share matrix", shares.r.len())] {
        if len != n {
            return Err(ProtocolError::LengthMismatch {
                what,
                expected: n,
                found: len,
            });
        }
    }
    let mut clients = inputs
        .iter()
        .enumerate()
        .map(|(i, inp)| ClientState::new(i + 1, n, k, (inp.x, inp.r), shares.x[i].clone(), shares.r[i].clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut server = ServerState::new(substream(seed, SERVER_STREAM));
    let mut env = Environment {
        noise,
        rng: substream(seed, ENVIRONMENT_STREAM),
    };
    let mut net = Scheduler {
        queue: VecDeque::new(),
        log: Vec::new(),
    };

    for c in &clients {
        net.send(c.outgoing_shares());
    }
    net.run_until_quiet(&mut clients, &mut server, &mut env)?;

    net.send([server.prepare()?]);
    net.run_until_quiet(&mut clients, &mut server, &mut env)?;

    for c in &clients {
        net.send(c.report()?);
    }
    net.run_until_quiet(&mut clients, &mut server, &mut env)?;

    for c in clients.iter_mut() {
        let m = c.broadcast()?;
        net.send([m]);
    }
    net.run_until_quiet(&mut clients, &mut server, &mut env)?;

    let announcement = server
        .announcement()
        .ok_or(ProtocolError::Incomplete("the server announced"))?;
    let outputs = clients
        .iter()
        .map(|c| c.output())
        .collect::<Option<Vec<bool>>>()
        .ok_or(ProtocolError::Incomplete("every client produced an output"))?;
    let counters = ResourceCounters::tally(&net.log, &clients);
    let transcript = ProtocolTranscript {
        n,
        k,
        seed,
        noise,
        inputs: inputs.to_vec(),
        messages: net.log,
        announcement,
        outputs,
        counters,
    };
    Ok(Execution {
        transcript,
        clients,
        server,
    })
}

pub fn run_protocol_with_shares(
    inputs: &[ClientInput],
    shares: &Shares,
    k: usize,
    noise: NoiseModel,
    seed: u64,
) -> Result<ProtocolTranscript, ProtocolError> {
    Ok(execute_with_shares(inputs, shares, k, noise, seed)?.transcript)
}

/// One complete run. Shares, measurement and noise each draw from their own
/// substream of `seed`.
pub fn run_protocol(
    inputs: &[ClientInput],
    k: usize,
    noise: NoiseModel,
    seed: u64,
) -> Result<ProtocolTranscript, ProtocolError> {
    check_parameters(inputs.len(), k)?;
    let shares = Shares::sample(inputs, k, seed)?;
    run_protocol_with_shares(inputs, &shares, k, noise, seed)
}

pub fn execute(inputs: &[ClientInput], k: usize, noise: NoiseModel, seed: u64) -> Result<Execution, ProtocolError> {
    check_parameters(inputs.len(), k)?;
    let shares = Shares::sample(inputs, k, seed)?;
    execute_with_shares(inputs, &shares, k, noise, seed)
}
