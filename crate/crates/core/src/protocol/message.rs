use std::fmt;

use crate::qubit::QubitState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    Server,
    /// 1-based client index.
    Client(usize),
    AllClients,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Server => write!(f, "S"),
            Party::Client(i) => write!(f, "C{i}"),
            Party::AllClients => write!(f, "*"),
        }
    }
}

impl std::str::FromStr for Party {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S" => Ok(Party::Server),
            "*" => Ok(Party::AllClients),
            _ => s
                .strip_prefix('C')
                .and_then(|i| i.parse().ok())
                .filter(|&i| i >= 1)
                .map(Party::Client)
                .ok_or_else(|| format!("unknown party {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Message {
    /// `x_{from,to}` and `r_{from,to}`.
    ClassicalShare {
        from: usize,
        to: usize,
        x_share: usize,
        r_share: bool,
    },
    QubitHop { from: Party, to: Party, state: QubitState },
    /// `x̃_from`, sent to the last client.
    AggregateReport { from: usize, to: usize, x_tilde: usize },
    /// The server's measured `f ⊕ r̄`.
    Announcement { value: bool },
    /// `r̃_from`, sent to every other client.
    MaskBroadcast { from: usize, r_tilde: bool },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::ClassicalShare { .. } => "ClassicalShare",
            Message::QubitHop { .. } => "QubitHop",
            Message::AggregateReport { .. } => "AggregateReport",
            Message::Announcement { .. } => "Announcement",
            Message::MaskBroadcast { .. } => "MaskBroadcast",
        }
    }

    pub fn sender(&self) -> Party {
        match *self {
            Message::ClassicalShare { from, .. }
            | Message::AggregateReport { from, .. }
            | Message::MaskBroadcast { from, .. } => Party::Client(from),
            Message::QubitHop { from, .. } => from,
            Message::Announcement { .. } => Party::Server,
        }
    }

    pub fn recipient(&self) -> Party {
        match *self {
            Message::ClassicalShare { to, .. } | Message::AggregateReport { to, .. } => Party::Client(to),
            Message::QubitHop { to, .. } => to,
            Message::Announcement { .. } | Message::MaskBroadcast { .. } => Party::AllClients,
        }
    }

    /// Whether a party receives this message; broadcasts skip their sender.
    pub fn delivered_to(&self, party: Party) -> bool {
        match self.recipient() {
            Party::AllClients => matches!(party, Party::Client(_)) && party != self.sender(),
            to => to == party,
        }
    }
}
