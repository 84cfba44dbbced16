//! Sparse Pauli products and circuits of π/8 rotations.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

pub type Qubit = u32;

/// Non-identity single-qubit Pauli. Identity is represented by absence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Symplectic `(x, z)` bits; `Y` sets both.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Option<Pauli> {
        match (x, z) {
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
            (false, false) => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A multi-qubit Pauli operator `P` standing for the rotation `exp(-i P π/8)`.
///
/// Operators are kept sorted by qubit with no duplicates, so equality and the
/// textual form (`"X0 Y4 Z6"`) are canonical.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliProduct {
    ops: Vec<(Qubit, Pauli)>,
}

impl PauliProduct {
    /// Builds a product from `(qubit, operator)` pairs in any order.
    pub fn new(mut ops: Vec<(Qubit, Pauli)>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidProduct("empty product".into()));
        }
        ops.sort_unstable_by_key(|&(q, _)| q);
        if let Some(w) = ops.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidProduct(format!("qubit {} appears twice", w[0].0)));
        }
        Ok(PauliProduct { ops })
    }

    pub fn ops(&self) -> &[(Qubit, Pauli)] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn get(&self, qubit: Qubit) -> Option<Pauli> {
        self.ops
            .binary_search_by_key(&qubit, |&(q, _)| q)
            .ok()
            .map(|i| self.ops[i].1)
    }

    pub fn qubits(&self) -> impl Iterator<Item = Qubit> + '_ {
        self.ops.iter().map(|&(q, _)| q)
    }

    pub fn max_qubit(&self) -> Qubit {
        self.ops.last().map_or(0, |&(q, _)| q)
    }
}

impl fmt::Display for PauliProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (q, p)) in self.ops.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}{q}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliProduct {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut ops = Vec::new();
        for token in s.split_whitespace() {
            let mut chars = token.chars();
            let p = chars
                .next()
                .and_then(Pauli::from_char)
                .ok_or_else(|| Error::InvalidProduct(format!("bad token {token:?}")))?;
            let digits = chars.as_str();
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::InvalidProduct(format!("bad token {token:?}")));
            }
            let q = digits
                .parse::<Qubit>()
                .map_err(|e| Error::InvalidProduct(format!("bad qubit in {token:?}: {e}")))?;
            ops.push((q, p));
        }
        PauliProduct::new(ops)
    }
}

/// An ordered sequence of π/8 products over `num_qubits` qubits. A product's
/// sequence number is its index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    num_qubits: u32,
    products: Vec<PauliProduct>,
}

impl Circuit {
    pub fn new(num_qubits: u32, products: Vec<PauliProduct>) -> Result<Self> {
        if let Some(p) = products.iter().find(|p| p.max_qubit() >= num_qubits) {
            return Err(Error::QubitOutOfRange {
                qubit: p.max_qubit(),
                num_qubits,
            });
        }
        Ok(Circuit {
            num_qubits,
            products,
        })
    }

    /// Convenience constructor from textual products.
    pub fn parse<'a, I>(num_qubits: u32, products: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let products = products
            .into_iter()
            .map(str::parse)
            .collect::<Result<Vec<PauliProduct>>>()?;
        Circuit::new(num_qubits, products)
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn products(&self) -> &[PauliProduct] {
        &self.products
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    /// Canonical textual form of every product, in order.
    pub fn product_strings(&self) -> Vec<alloc::string::String> {
        self.products.iter().map(ToString::to_string).collect()
    }
}
