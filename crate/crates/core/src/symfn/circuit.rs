//! Gate lists realizing symmetric functions on one qubit.

use crate::angles::{AngleError, RationalAngle, RyGate};
use crate::qubit::{QubitState, READOUT_TOLERANCE};

use super::{decompose, weight, SymFnError, SymmetricFunction};

/// What a gate stands for in the protocol picture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateRole {
    /// `U_k^{x_i}` applied for client `i` (1-based) holding `x_i = 1`.
    Input { client: usize },
    /// `V^{r_i}` applied for client `i` holding `r_i = 1`.
    Mask { client: usize },
    /// One factor of the closing `(U_k†)^{(Σx) mod k}`.
    Correction,
    /// The `R_y(π)` realizing an `a_0 = 1` term.
    Complement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledGate {
    pub gate: RyGate,
    pub role: GateRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// `U(n,k,x)`, or `VU(n,k,x,r)` when masked.
    Function { k: usize, masked: bool },
    Complement,
}

/// A contiguous run of gates produced by one builder call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    pub gates: Vec<LabeledGate>,
}

/// An ordered single-qubit circuit; blocks and their gates are in application order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitSpec {
    n: usize,
    blocks: Vec<Block>,
}

impl CircuitSpec {
    pub fn empty(n: usize) -> Self {
        CircuitSpec { n, blocks: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Gates in application order.
    pub fn gates(&self) -> impl Iterator<Item = &LabeledGate> {
        self.blocks.iter().flat_map(|b| b.gates.iter())
    }

    pub fn ry_gates(&self) -> Vec<RyGate> {
        self.gates().map(|g| g.gate).collect()
    }

    pub fn gate_count(&self) -> usize {
        self.blocks.iter().map(|b| b.gates.len()).sum()
    }

    /// Appends `other`'s blocks so they act after this circuit's.
    pub fn then(mut self, other: CircuitSpec) -> Result<Self, SymFnError> {
        if self.n != other.n {
            return Err(SymFnError::ArityMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        self.blocks.extend(other.blocks);
        Ok(self)
    }

    /// Exact total rotation.
    pub fn net_angle(&self) -> Result<RationalAngle, AngleError> {
        self.gates()
            .try_fold(RationalAngle::ZERO, |acc, g| acc.compose(g.gate.angle()))
    }

    pub fn simulate_from(&self, start: QubitState) -> QubitState {
        self.gates().fold(start, |s, g| s.apply_ry(&g.gate))
    }

    pub fn simulate(&self) -> QubitState {
        self.simulate_from(QubitState::zero())
    }

    /// Noiseless measurement outcome, if the final state is a basis state.
    pub fn readout(&self) -> Option<bool> {
        self.simulate().deterministic_readout(READOUT_TOLERANCE)
    }

    /// Operator-order rendering, e.g. `U_2† IU_2 VI II IU_2 VU_2`. The leftmost
    /// token acts last; within a function block client `n` is leftmost.
    pub fn paper_notation(&self) -> String {
        self.blocks
            .iter()
            .rev()
            .map(|b| block_notation(b, self.n))
            .collect::<Vec<_>>()
            .join(" · ")
    }

    pub fn to_qasm(&self) -> String {
        super::qasm::emit(std::slice::from_ref(self))
    }
}

fn block_notation(block: &Block, n: usize) -> String {
    let (k, masked) = match block.kind {
        BlockKind::Complement => return "V".to_string(),
        BlockKind::Function { k, masked } => (k, masked),
    };
    let corrections = block.gates.iter().filter(|g| g.role == GateRole::Correction).count();
    let mut tokens = vec![if corrections == 1 {
        format!("U_{k}†")
    } else {
        format!("(U_{k}†)^{corrections}")
    }];
    for client in (1..=n).rev() {
        let has = |role| block.gates.iter().any(|g| g.role == role);
        let input = if has(GateRole::Input { client }) {
            format!("U_{k}")
        } else {
            "I".to_string()
        };
        if masked {
            let mask = if has(GateRole::Mask { client }) { "V" } else { "I" };
            tokens.push(format!("{mask}{input}"));
        } else {
            tokens.push(input);
        }
    }
    tokens.join(" ")
}

fn function_block(n: usize, k: usize, x: &[bool], r: Option<&[bool]>) -> Result<Block, SymFnError> {
    if n == 0 {
        return Err(SymFnError::ZeroArity);
    }
    if k == 0 || k > n {
        return Err(SymFnError::KOutOfRange { n, k });
    }
    for v in std::iter::once(x).chain(r) {
        if v.len() != n {
            return Err(SymFnError::ArityMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let u = RyGate::u(k as i64)?;
    let mut gates = Vec::new();
    for i in 0..n {
        if x[i] {
            gates.push(LabeledGate {
                gate: u,
                role: GateRole::Input { client: i + 1 },
            });
        }
        if r.is_some_and(|r| r[i]) {
            gates.push(LabeledGate {
                gate: RyGate::v(),
                role: GateRole::Mask { client: i + 1 },
            });
        }
    }
    let correction = LabeledGate {
        gate: u.adjoint(),
        role: GateRole::Correction,
    };
    gates.extend(std::iter::repeat_n(correction, weight(x) % k));
    Ok(Block {
        kind: BlockKind::Function { k, masked: r.is_some() },
        gates,
    })
}

/// `U(n,k,x) = (U_k†)^{(Σx) mod k} U_k^{x_n} ⋯ U_k^{x_1}`; net angle `⌊wt(x)/k⌋·π`.
pub fn build_circuit_u(n: usize, k: usize, x: &[bool]) -> Result<CircuitSpec, SymFnError> {
    Ok(CircuitSpec {
        n,
        blocks: vec![function_block(n, k, x, None)?],
    })
}

/// `VU(n,k,x,r)`: client `i` applies `V^{r_i} U_k^{x_i}`; reads out `f_n^k(x) ⊕ r̄`.
pub fn build_circuit_vu(n: usize, k: usize, x: &[bool], r: &[bool]) -> Result<CircuitSpec, SymFnError> {
    Ok(CircuitSpec {
        n,
        blocks: vec![function_block(n, k, x, Some(r))?],
    })
}

/// `U(n,k,x)·U(n,h,x)`: the `h` block acts first. Reads out `f_n^k ⊕ f_n^h`.
pub fn xor_compose_circuit(n: usize, k: usize, h: usize, x: &[bool]) -> Result<CircuitSpec, SymFnError> {
    build_circuit_u(n, h, x)?.then(build_circuit_u(n, k, x)?)
}

/// `Π_k U(n,k,x)^{a_k}` over the decomposition of `f`, with a leading `R_y(π)`
/// for the constant term.
pub fn synthesize_circuit(f: &SymmetricFunction, x: &[bool]) -> Result<CircuitSpec, SymFnError> {
    let n = f.n();
    if x.len() != n {
        return Err(SymFnError::ArityMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let coeffs = decompose(f);
    let mut circuit = CircuitSpec::empty(n);
    for k in coeffs.active_terms() {
        let block = if k == 0 {
            Block {
                kind: BlockKind::Complement,
                gates: vec![LabeledGate {
                    gate: RyGate::v(),
                    role: GateRole::Complement,
                }],
            }
        } else {
            function_block(n, k, x, None)?
        };
        circuit.blocks.push(block);
    }
    Ok(circuit)
}
