//! Client and server state machines. Each reacts to one delivered message at a
//! time and returns the messages it sends in response.

use crate::angles::RyGate;
use crate::qubit::{apply_noisy_gate, noisy_readout, NoiseModel, QubitState};
use crate::rng::SimRng;

use super::{Message, Party, ProtocolError};

/// Channel noise and its random source; shared by every gate and readout.
#[derive(Debug, Clone)]
pub struct Environment {
    pub noise: NoiseModel,
    pub rng: SimRng,
}

#[derive(Debug, Clone)]
pub struct ClientState {
    id: usize,
    n: usize,
    k: usize,
    x: bool,
    r: bool,
    outgoing_x_shares: Vec<usize>,
    outgoing_r_shares: Vec<bool>,
    incoming_x: Vec<Option<usize>>,
    incoming_r: Vec<Option<bool>>,
    aggregated_x: Option<usize>,
    aggregated_r: Option<bool>,
    qubit: Option<QubitState>,
    qubit_seen: bool,
    /// `x̃_j` reported to the last client, indexed by `j − 1`.
    reports: Vec<Option<usize>>,
    masks: Vec<Option<bool>>,
    received_announcement: Option<bool>,
    output: Option<bool>,
    unitary_ops: usize,
}

impl ClientState {
    /// Requires `Σ_j x_shares[j] ≡ x (mod k)` and `⊕_j r_shares[j] = r`.
    pub fn new(
        id: usize,
        n: usize,
        k: usize,
        (x, r): (bool, bool),
        x_shares: Vec<usize>,
        r_shares: Vec<bool>,
    ) -> Result<Self, ProtocolError> {
        if id == 0 || id > n {
            return Err(ProtocolError::InvalidShares {
                client: id,
                reason: format!("client id outside 1..={n}"),
            });
        }
        let invalid = |reason: &str| ProtocolError::InvalidShares {
            client: id,
            reason: reason.to_string(),
        };
        if x_shares.len() != n || r_shares.len() != n {
            return Err(invalid("share vectors must have one entry per client"));
        }
        if x_shares.iter().any(|&s| s >= k) {
            return Err(invalid("x share outside Z_k"));
        }
        if x_shares.iter().sum::<usize>() % k != x as usize {
            return Err(invalid("x shares do not sum to x mod k"));
        }
        if r_shares.iter().fold(false, |a, &b| a ^ b) != r {
            return Err(invalid("r shares do not XOR to r"));
        }
        let mut incoming_x = vec![None; n];
        let mut incoming_r = vec![None; n];
        incoming_x[id - 1] = Some(x_shares[id - 1]);
        incoming_r[id - 1] = Some(r_shares[id - 1]);
        let mut client = ClientState {
            id,
            n,
            k,
            x,
            r,
            outgoing_x_shares: x_shares,
            outgoing_r_shares: r_shares,
            incoming_x,
            incoming_r,
            aggregated_x: None,
            aggregated_r: None,
            qubit: None,
            qubit_seen: false,
            reports: vec![None; n],
            masks: vec![None; n],
            received_announcement: None,
            output: None,
            unitary_ops: 0,
        };
        client.try_aggregate();
        Ok(client)
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn x(&self) -> bool {
        self.x
    }

    pub fn r(&self) -> bool {
        self.r
    }

    pub fn outgoing_x_shares(&self) -> &[usize] {
        &self.outgoing_x_shares
    }

    pub fn outgoing_r_shares(&self) -> &[bool] {
        &self.outgoing_r_shares
    }

    /// `x̃_i = Σ_j x_{j,i} mod k`, once every share has arrived.
    pub fn aggregated_x(&self) -> Option<usize> {
        self.aggregated_x
    }

    /// `r̃_i = ⊕_j r_{j,i}`.
    pub fn aggregated_r(&self) -> Option<bool> {
        self.aggregated_r
    }

    pub fn received_announcement(&self) -> Option<bool> {
        self.received_announcement
    }

    pub fn output(&self) -> Option<bool> {
        self.output
    }

    pub fn unitary_ops(&self) -> usize {
        self.unitary_ops
    }

    fn is_last(&self) -> bool {
        self.id == self.n
    }

    /// Step 1: one share pair to every other client; the self-share stays local.
    pub fn outgoing_shares(&self) -> Vec<Message> {
        (1..=self.n)
            .filter(|&j| j != self.id)
            .map(|j| Message::ClassicalShare {
                from: self.id,
                to: j,
                x_share: self.outgoing_x_shares[j - 1],
                r_share: self.outgoing_r_shares[j - 1],
            })
            .collect()
    }

    /// Step 3: `x̃_i` to the last client. The last client keeps its own.
    pub fn report(&self) -> Result<Option<Message>, ProtocolError> {
        if self.is_last() {
            return Ok(None);
        }
        let x_tilde = self.aggregated_x.ok_or(ProtocolError::OutOfOrder {
            party: Party::Client(self.id),
            reason: "report before all shares arrived",
        })?;
        Ok(Some(Message::AggregateReport {
            from: self.id,
            to: self.n,
            x_tilde,
        }))
    }

    /// Step 4: `r̃_i` to every other client.
    pub fn broadcast(&mut self) -> Result<Message, ProtocolError> {
        let r_tilde = self.aggregated_r.ok_or(ProtocolError::OutOfOrder {
            party: Party::Client(self.id),
            reason: "broadcast before all shares arrived",
        })?;
        self.masks[self.id - 1] = Some(r_tilde);
        self.try_output();
        Ok(Message::MaskBroadcast {
            from: self.id,
            r_tilde,
        })
    }

    pub fn handle(&mut self, msg: &Message, env: &mut Environment) -> Result<Vec<Message>, ProtocolError> {
        let unexpected = || ProtocolError::UnexpectedMessage {
            party: Party::Client(self.id),
            kind: msg.kind(),
        };
        match *msg {
            Message::ClassicalShare { from, to, x_share, r_share } if to == self.id && from != self.id && from >= 1 => {
                let slot = self.incoming_x.get_mut(from - 1).ok_or_else(unexpected)?;
                if slot.is_some() || x_share >= self.k {
                    return Err(unexpected());
                }
                *slot = Some(x_share);
                self.incoming_r[from - 1] = Some(r_share);
                self.try_aggregate();
                Ok(vec![])
            }
            Message::QubitHop { to: Party::Client(to), state, .. } if to == self.id && !self.qubit_seen => {
                self.qubit_seen = true;
                let mut state = state;
                if self.x {
                    state = apply_noisy_gate(&state, &RyGate::u(self.k as i64)?, &env.noise, &mut env.rng);
                    self.unitary_ops += 1;
                }
                if self.r {
                    state = apply_noisy_gate(&state, &RyGate::v(), &env.noise, &mut env.rng);
                    self.unitary_ops += 1;
                }
                if self.is_last() {
                    self.qubit = Some(state);
                    self.try_correct(env)
                } else {
                    Ok(vec![Message::QubitHop {
                        from: Party::Client(self.id),
                        to: Party::Client(self.id + 1),
                        state,
                    }])
                }
            }
            Message::AggregateReport { from, to, x_tilde } if to == self.id && self.is_last() && (1..self.n).contains(&from) => {
                if self.reports[from - 1].replace(x_tilde).is_some() {
                    return Err(unexpected());
                }
                self.try_correct(env)
            }
            Message::Announcement { value } if self.received_announcement.is_none() => {
                self.received_announcement = Some(value);
                self.try_output();
                Ok(vec![])
            }
            Message::MaskBroadcast { from, r_tilde } if from != self.id && (1..=self.n).contains(&from) => {
                if self.masks[from - 1].replace(r_tilde).is_some() {
                    return Err(unexpected());
                }
                self.try_output();
                Ok(vec![])
            }
            _ => Err(unexpected()),
        }
    }

    fn try_aggregate(&mut self) {
        if self.aggregated_x.is_some() {
            return;
        }
        let xs: Option<Vec<usize>> = self.incoming_x.iter().copied().collect();
        let rs: Option<Vec<bool>> = self.incoming_r.iter().copied().collect();
        if let (Some(xs), Some(rs)) = (xs, rs) {
            self.aggregated_x = Some(xs.iter().sum::<usize>() % self.k);
            self.aggregated_r = Some(rs.iter().fold(false, |a, &b| a ^ b));
            if self.is_last() {
                self.reports[self.id - 1] = self.aggregated_x;
            }
        }
    }

    /// Last client only: applies `(U_k†)^{(Σ x̃) mod k}` once the qubit and all
    /// reports are in, then returns the qubit to the server.
    fn try_correct(&mut self, env: &mut Environment) -> Result<Vec<Message>, ProtocolError> {
        let Some(state) = self.qubit else {
            return Ok(vec![]);
        };
        let Some(reports) = self.reports.iter().copied().collect::<Option<Vec<usize>>>() else {
            return Ok(vec![]);
        };
        let count = reports.iter().sum::<usize>() % self.k;
        let correction = RyGate::u(self.k as i64)?.adjoint();
        let mut state = state;
        for _ in 0..count {
            state = apply_noisy_gate(&state, &correction, &env.noise, &mut env.rng);
            self.unitary_ops += 1;
        }
        self.qubit = None;
        Ok(vec![Message::QubitHop {
            from: Party::Client(self.id),
            to: Party::Server,
            state,
        }])
    }

    /// Output `= announcement ⊕ r̄` once every `r̃_j` is known.
    fn try_output(&mut self) {
        if let (Some(a), Some(masks)) = (
            self.received_announcement,
            self.masks.iter().copied().collect::<Option<Vec<bool>>>(),
        ) {
            self.output = Some(a ^ masks.iter().fold(false, |acc, &b| acc ^ b));
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServerState {
    prepared: bool,
    announcement: Option<bool>,
    measure_rng: SimRng,
}

impl ServerState {
    pub fn new(measure_rng: SimRng) -> Self {
        ServerState {
            prepared: false,
            announcement: None,
            measure_rng,
        }
    }

    pub fn prepared(&self) -> bool {
        self.prepared
    }

    /// Present only after the returning qubit has been measured.
    pub fn announcement(&self) -> Option<bool> {
        self.announcement
    }

    /// Step 2: `|0⟩` to the first client.
    pub fn prepare(&mut self) -> Result<Message, ProtocolError> {
        if self.prepared {
            return Err(ProtocolError::OutOfOrder {
                party: Party::Server,
                reason: "qubit already prepared",
            });
        }
        self.prepared = true;
        Ok(Message::QubitHop {
            from: Party::Server,
            to: Party::Client(1),
            state: QubitState::zero(),
        })
    }

    pub fn handle(&mut self, msg: &Message, env: &mut Environment) -> Result<Vec<Message>, ProtocolError> {
        match *msg {
            Message::QubitHop {
                to: Party::Server,
                state,
                ..
            } if self.prepared && self.announcement.is_none() => {
                let value = noisy_readout(&state, &env.noise, &mut self.measure_rng, &mut env.rng);
                self.announcement = Some(value);
                Ok(vec![Message::Announcement { value }])
            }
            _ => Err(ProtocolError::UnexpectedMessage {
                party: Party::Server,
                kind: msg.kind(),
            }),
        }
    }
}
