use alloc::string::String;
use core::fmt;

use crate::Qubit;

/// Errors raised by the scheduling engine.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A Pauli product or token could not be parsed or is malformed.
    InvalidProduct(String),
    QubitOutOfRange { qubit: Qubit, num_qubits: u32 },
    /// Parameters outside their documented domain.
    InvalidParams(String),
    /// A `t`/`tdg` gate was handed to the Clifford tableau.
    NotClifford,
    /// Cultivation state advanced to an earlier cycle than before.
    CycleRegression { last: u64, requested: u64 },
    /// The product cannot be routed even on an empty, fully ready layout.
    Unroutable { product: usize, reason: String },
    /// No product could be committed and no cultivation is pending.
    Starvation { cycle: u64, remaining: usize },
    /// Calibration did not reach its target within the iteration budget.
    Calibration(String),
    /// Exact Steiner oracle refused an instance above its size limits.
    OracleLimit { vertices: usize, terminals: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidProduct(msg) => write!(f, "invalid Pauli product: {msg}"),
            Error::QubitOutOfRange { qubit, num_qubits } => {
                write!(f, "qubit index {qubit} out of range for {num_qubits} qubits")
            }
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::NotClifford => f.write_str("non-Clifford gate passed to the Clifford tableau"),
            Error::CycleRegression { last, requested } => {
                write!(f, "cultivation advanced backwards from cycle {last} to {requested}")
            }
            Error::Unroutable { product, reason } => {
                write!(f, "product {product} can never be routed: {reason}")
            }
            Error::Starvation { cycle, remaining } => write!(
                f,
                "scheduler starved at cycle {cycle} with {remaining} products left and no pending cultivation"
            ),
            Error::Calibration(msg) => write!(f, "calibration failed: {msg}"),
            Error::OracleLimit { vertices, terminals } => write!(
                f,
                "exact Steiner oracle limited to 30 vertices and 4 terminals, got {vertices} and {terminals}"
            ),
        }
    }
}

impl core::error::Error for Error {}
