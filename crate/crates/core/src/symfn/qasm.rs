//! OpenQASM 2.0 emission and a reader for the subset we emit.
//!
//! Each circuit occupies its own qubit `q[i]`. `R_y(θ)` is written as
//! `u3(θ,0,0)`, empty input/mask slots of a function block as `id`, and each
//! qubit is measured into `c[i]` at the end.

use crate::angles::{RationalAngle, RyGate};

use super::{BlockKind, CircuitSpec, GateRole, SymFnError};

pub const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

pub fn emit(circuits: &[CircuitSpec]) -> String {
    let m = circuits.len();
    let mut out = String::from(HEADER);
    out.push_str(&format!("qreg q[{m}];\ncreg c[{m}];\n"));
    for (q, circuit) in circuits.iter().enumerate() {
        let u3 = |angle: RationalAngle| format!("u3({},0,0) q[{q}];\n", angle.to_qasm());
        let id = format!("id q[{q}];\n");
        for block in circuit.blocks() {
            match block.kind {
                BlockKind::Complement => {
                    for g in &block.gates {
                        out.push_str(&u3(g.gate.angle()));
                    }
                }
                BlockKind::Function { masked, .. } => {
                    for client in 1..=circuit.n() {
                        let slot = |role| block.gates.iter().find(|g| g.role == role);
                        out.push_str(&match slot(GateRole::Input { client }) {
                            Some(g) => u3(g.gate.angle()),
                            None => id.clone(),
                        });
                        if masked {
                            out.push_str(&match slot(GateRole::Mask { client }) {
                                Some(g) => u3(g.gate.angle()),
                                None => id.clone(),
                            });
                        }
                    }
                    for g in block.gates.iter().filter(|g| g.role == GateRole::Correction) {
                        out.push_str(&u3(g.gate.angle()));
                    }
                }
            }
        }
    }
    for q in 0..m {
        out.push_str(&format!("measure q[{q}] -> c[{q}];\n"));
    }
    out
}

fn qubit_index(operand: &str, reg: &str, line: usize) -> Result<usize, SymFnError> {
    let err = |reason: &str| SymFnError::Qasm {
        line,
        reason: reason.to_string(),
    };
    operand
        .trim()
        .strip_prefix(reg)
        .and_then(|s| s.strip_prefix('['))
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| err("bad register operand"))?
        .parse()
        .map_err(|_| err("bad register index"))
}

/// Reads QASM in the emitted dialect back into one gate list per qubit.
/// `id` lines are dropped; `u3` lines must have `φ = λ = 0`.
pub fn parse(text: &str) -> Result<Vec<Vec<RyGate>>, SymFnError> {
    let mut qubits: Option<Vec<Vec<RyGate>>> = None;
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |reason: &str| SymFnError::Qasm {
            line: line_no,
            reason: reason.to_string(),
        };
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let stmt = line.strip_suffix(';').ok_or_else(|| err("missing ';'"))?.trim();
        if !saw_header {
            if stmt != "OPENQASM 2.0" {
                return Err(err("expected OPENQASM 2.0 header"));
            }
            saw_header = true;
            continue;
        }
        if stmt.starts_with("include") || stmt.starts_with("creg") {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("qreg") {
            let size = qubit_index(rest, "q", line_no)?;
            qubits = Some(vec![Vec::new(); size]);
            continue;
        }
        let regs = qubits.as_mut().ok_or_else(|| err("gate before qreg"))?;
        if let Some(rest) = stmt.strip_prefix("measure") {
            let (target, _) = rest.split_once("->").ok_or_else(|| err("bad measure"))?;
            let q = qubit_index(target, "q", line_no)?;
            if q >= regs.len() {
                return Err(err("qubit out of range"));
            }
        } else if let Some(rest) = stmt.strip_prefix("id ") {
            let q = qubit_index(rest, "q", line_no)?;
            if q >= regs.len() {
                return Err(err("qubit out of range"));
            }
        } else if let Some(rest) = stmt.strip_prefix("u3(") {
            let (params, operand) = rest.split_once(')').ok_or_else(|| err("unclosed u3 parameters"))?;
            let params: Vec<&str> = params.split(',').map(str::trim).collect();
            if params.len() != 3 || params[1] != "0" || params[2] != "0" {
                return Err(err("only u3(theta,0,0) is supported"));
            }
            let angle = RationalAngle::from_qasm(params[0])?;
            let q = qubit_index(operand, "q", line_no)?;
            regs.get_mut(q)
                .ok_or_else(|| err("qubit out of range"))?
                .push(RyGate::new(angle));
        } else {
            return Err(err("unsupported statement"));
        }
    }
    qubits.ok_or(SymFnError::Qasm {
        line: 0,
        reason: "no qreg declaration".to_string(),
    })
}
