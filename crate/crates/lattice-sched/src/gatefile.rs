//! Line-based Clifford+T gate files.
//!
//! ```text
//! # comments run to the end of the line
//! qubits 2
//! h 0
//! cx 0 1
//! t 1
//! ```

use std::fmt;

use lattice_sched_core::clifford::{Gate, GateKind, GateList};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GateParseErrorKind {
    MissingHeader,
    BadQubitCount(String),
    UnknownGate(String),
    Arity { gate: &'static str, expected: usize, found: usize },
    BadOperand(String),
    OutOfRange,
    RepeatedOperand,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind}, line {line}")]
pub struct GateParseError {
    pub line: usize,
    pub kind: GateParseErrorKind,
}

impl fmt::Display for GateParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MissingHeader => f.write_str("expected `qubits <n>` header"),
            Self::BadQubitCount(s) => write!(f, "invalid qubit count {s:?}"),
            Self::UnknownGate(s) => write!(f, "unknown gate {s:?}"),
            Self::Arity { gate, expected, found } => {
                write!(f, "{gate} takes {expected} operand(s), found {found}")
            }
            Self::BadOperand(s) => write!(f, "invalid qubit index {s:?}"),
            Self::OutOfRange => f.write_str("qubit index out of range"),
            Self::RepeatedOperand => f.write_str("two-qubit gate needs distinct operands"),
        }
    }
}

pub fn parse_gate_file(text: &str) -> Result<GateList, GateParseError> {
    let mut num_qubits = None;
    let mut gates = Vec::new();
    let mut last_line = 1;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(head) = tokens.next() else { continue };
        let err = |kind| GateParseError { line, kind };

        let Some(n) = num_qubits else {
            if head != "qubits" {
                return Err(err(GateParseErrorKind::MissingHeader));
            }
            let count: Vec<&str> = tokens.collect();
            match count.as_slice() {
                [c] => match c.parse::<u32>() {
                    Ok(v) if v > 0 => num_qubits = Some(v),
                    _ => return Err(err(GateParseErrorKind::BadQubitCount(c.to_string()))),
                },
                _ => return Err(err(GateParseErrorKind::BadQubitCount(count.join(" ")))),
            }
            continue;
        };

        let kind = GateKind::from_mnemonic(head).ok_or_else(|| err(GateParseErrorKind::UnknownGate(head.into())))?;
        let operands = tokens
            .map(|t| t.parse::<u32>().map_err(|_| err(GateParseErrorKind::BadOperand(t.into()))))
            .collect::<Result<Vec<_>, _>>()?;
        if operands.len() != kind.arity() {
            return Err(err(GateParseErrorKind::Arity {
                gate: kind.mnemonic(),
                expected: kind.arity(),
                found: operands.len(),
            }));
        }
        if operands.iter().any(|&q| q >= n) {
            return Err(err(GateParseErrorKind::OutOfRange));
        }
        let gate = match operands[..] {
            [q] => Gate::one(kind, q),
            [a, b] if a == b => return Err(err(GateParseErrorKind::RepeatedOperand)),
            [a, b] => Gate::two(kind, a, b),
            _ => unreachable!("arity is 1 or 2"),
        };
        gates.push(gate);
    }
    let n = num_qubits.ok_or(GateParseError {
        line: last_line,
        kind: GateParseErrorKind::MissingHeader,
    })?;
    Ok(GateList::new(n, gates).expect("operands checked while parsing"))
}

/// Inverse of [`parse_gate_file`].
pub fn format_gate_file(gates: &GateList) -> String {
    let mut out = format!("qubits {}\n", gates.num_qubits());
    for g in gates.gates() {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    out
}
