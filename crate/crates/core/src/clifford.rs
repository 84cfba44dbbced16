//! Lowering of Clifford+T gate lists to π/8 Pauli products.
//!
//! Clifford gates are pushed to the end of the circuit. The tableau tracks,
//! for the accumulated Clifford `C`, the images `C† X_q C` and `C† Z_q C`;
//! a `t` on qubit `q` then becomes the rotation about `C† Z_q C`. Appending
//! a gate `G` gives `C' = G C`, so each image is rebuilt from the old images
//! of `G† P G`.
//!
//! Signs follow the usual stabilizer conventions: `S† X S = -Y`,
//! `S X S† = Y`, `X Z X = -Z`, and so on.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Circuit, Error, Pauli, PauliProduct, Qubit, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    Cx,
    Cz,
    T,
    Tdg,
}

impl GateKind {
    pub fn from_mnemonic(s: &str) -> Option<GateKind> {
        Some(match s {
            "h" => GateKind::H,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "cx" => GateKind::Cx,
            "cz" => GateKind::Cz,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            _ => return None,
        })
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz => 2,
            _ => 1,
        }
    }

    pub fn is_clifford(self) -> bool {
        !matches!(self, GateKind::T | GateKind::Tdg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    /// Operands; the second entry is only meaningful for two-qubit gates.
    pub qubits: [Qubit; 2],
}

impl Gate {
    pub fn one(kind: GateKind, q: Qubit) -> Gate {
        Gate { kind, qubits: [q, q] }
    }

    pub fn two(kind: GateKind, a: Qubit, b: Qubit) -> Gate {
        Gate { kind, qubits: [a, b] }
    }

    pub fn operands(&self) -> &[Qubit] {
        &self.qubits[..self.kind.arity()]
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.mnemonic())?;
        for q in self.operands() {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateList {
    num_qubits: u32,
    gates: Vec<Gate>,
}

impl GateList {
    pub fn new(num_qubits: u32, gates: Vec<Gate>) -> Result<GateList> {
        for g in &gates {
            g.validate(num_qubits)?;
        }
        Ok(GateList { num_qubits, gates })
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }
}

impl Gate {
    pub fn validate(&self, num_qubits: u32) -> Result<()> {
        for &q in self.operands() {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, num_qubits });
            }
        }
        if self.kind.arity() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::InvalidParams(alloc::format!(
                "{} operands must be distinct",
                self.kind.mnemonic()
            )));
        }
        Ok(())
    }
}

/// Dense Pauli operator `±P` over a fixed number of qubits, stored as
/// symplectic bit vectors. `x & z` set on a qubit means `Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    x: Vec<u64>,
    z: Vec<u64>,
    negative: bool,
}

/// Exponent of `i` picked up by one qubit in `P1 · P2`.
fn phase_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2, z2) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 - x2,
        (true, false) => z2 * (2 * x2 - 1),
        (false, true) => x2 * (1 - 2 * z2),
    }
}

impl PauliString {
    pub fn identity(num_qubits: u32) -> PauliString {
        let words = (num_qubits as usize).div_ceil(64);
        PauliString {
            x: vec![0; words],
            z: vec![0; words],
            negative: false,
        }
    }

    pub fn single(num_qubits: u32, q: Qubit, p: Pauli) -> PauliString {
        let mut s = PauliString::identity(num_qubits);
        s.set(q, Some(p));
        s
    }

    pub fn get(&self, q: Qubit) -> Option<Pauli> {
        let (w, b) = ((q / 64) as usize, q % 64);
        Pauli::from_bits(self.x[w] >> b & 1 == 1, self.z[w] >> b & 1 == 1)
    }

    pub fn set(&mut self, q: Qubit, p: Option<Pauli>) {
        let (w, b) = ((q / 64) as usize, q % 64);
        let (x, z) = p.map_or((false, false), Pauli::bits);
        self.x[w] = self.x[w] & !(1 << b) | (x as u64) << b;
        self.z[w] = self.z[w] & !(1 << b) | (z as u64) << b;
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn negate(&mut self) {
        self.negative = !self.negative;
    }

    /// Non-identity factors in qubit order.
    pub fn support(&self) -> Vec<(Qubit, Pauli)> {
        let mut out = Vec::new();
        for (w, (&x, &z)) in self.x.iter().zip(&self.z).enumerate() {
            let mut bits = x | z;
            while bits != 0 {
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                let q = w as u32 * 64 + b;
                out.push((q, Pauli::from_bits(x >> b & 1 == 1, z >> b & 1 == 1).unwrap()));
            }
        }
        out
    }

    /// Product with the sign dropped; `None` for the identity.
    pub fn to_product(&self) -> Option<PauliProduct> {
        let ops = self.support();
        (!ops.is_empty()).then(|| PauliProduct::new(ops).expect("support is sorted and unique"))
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        parity == 0
    }

    /// `self ← i^extra · self · other`. The result must be Hermitian, which
    /// holds whenever `extra` is even for commuting factors or odd for
    /// anticommuting ones.
    fn mul_assign(&mut self, other: &PauliString, extra: i32) {
        let mut e = extra + 2 * (self.negative as i32) + 2 * (other.negative as i32);
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let mut bits = (x1 | z1) & (x2 | z2);
            while bits != 0 {
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                e += phase_exponent(x1 >> b & 1 == 1, z1 >> b & 1 == 1, x2 >> b & 1 == 1, z2 >> b & 1 == 1);
            }
            self.x[i] = x1 ^ x2;
            self.z[i] = z1 ^ z2;
        }
        let e = e.rem_euclid(4);
        debug_assert!(e % 2 == 0, "non-Hermitian product");
        self.negative = e == 2;
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        match self.to_product() {
            Some(p) => write!(f, "{p}"),
            None => f.write_str("I"),
        }
    }
}

/// Images of every `X_q` and `Z_q` under conjugation by the accumulated Clifford.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordTableau {
    num_qubits: u32,
    x_images: Vec<PauliString>,
    z_images: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(num_qubits: u32) -> CliffordTableau {
        CliffordTableau {
            num_qubits,
            x_images: (0..num_qubits).map(|q| PauliString::single(num_qubits, q, Pauli::X)).collect(),
            z_images: (0..num_qubits).map(|q| PauliString::single(num_qubits, q, Pauli::Z)).collect(),
        }
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn x_image(&self, q: Qubit) -> &PauliString {
        &self.x_images[q as usize]
    }

    pub fn z_image(&self, q: Qubit) -> &PauliString {
        &self.z_images[q as usize]
    }

    /// Appends a Clifford gate to the accumulated circuit.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let [a, b] = gate.qubits.map(|q| q as usize);
        match gate.kind {
            GateKind::T | GateKind::Tdg => return Err(Error::NotClifford),
            GateKind::H => core::mem::swap(&mut self.x_images[a], &mut self.z_images[a]),
            // S† X S = -Y = -i X Z
            GateKind::S => {
                let z = self.z_images[a].clone();
                self.x_images[a].mul_assign(&z, 3);
            }
            // S X S† = Y = i X Z
            GateKind::Sdg => {
                let z = self.z_images[a].clone();
                self.x_images[a].mul_assign(&z, 1);
            }
            GateKind::X => self.z_images[a].negate(),
            GateKind::Z => self.x_images[a].negate(),
            GateKind::Y => {
                self.x_images[a].negate();
                self.z_images[a].negate();
            }
            // X_c -> X_c X_t, Z_t -> Z_c Z_t
            GateKind::Cx => {
                let xt = self.x_images[b].clone();
                self.x_images[a].mul_assign(&xt, 0);
                let zc = self.z_images[a].clone();
                let zt = &mut self.z_images[b];
                let mut img = zc;
                img.mul_assign(zt, 0);
                *zt = img;
            }
            // X_a -> X_a Z_b, X_b -> Z_a X_b
            GateKind::Cz => {
                let (za, zb) = (self.z_images[a].clone(), self.z_images[b].clone());
                self.x_images[a].mul_assign(&zb, 0);
                let mut img = za;
                img.mul_assign(&self.x_images[b], 0);
                self.x_images[b] = img;
            }
        }
        Ok(())
    }

    /// Checks that `X_q`/`Z_q` images anticommute pairwise for equal `q` and
    /// commute otherwise.
    pub fn is_symplectic(&self) -> bool {
        let n = self.num_qubits as usize;
        for i in 0..n {
            for j in 0..n {
                let expect = i != j;
                if self.x_images[i].commutes_with(&self.z_images[j]) != expect {
                    return false;
                }
                if j > i
                    && (!self.x_images[i].commutes_with(&self.x_images[j])
                        || !self.z_images[i].commutes_with(&self.z_images[j]))
                {
                    return false;
                }
            }
        }
        true
    }
}

/// Output of [`transpile`]: the product circuit plus the rotation direction
/// of each product (`true` for `exp(+i P π/8)`), which the scheduler ignores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transpiled {
    pub circuit: Circuit,
    pub negative: Vec<bool>,
}

pub fn transpile(gates: &GateList) -> Transpiled {
    let n = gates.num_qubits();
    let mut tableau = CliffordTableau::identity(n);
    let mut products = Vec::new();
    let mut negative = Vec::new();
    for gate in gates.gates() {
        if gate.kind.is_clifford() {
            tableau.apply(gate).expect("gate list is validated");
        } else {
            let image = tableau.z_image(gate.qubits[0]);
            products.push(image.to_product().expect("image of Z_q is never the identity"));
            negative.push(image.is_negative() ^ (gate.kind == GateKind::Tdg));
        }
    }
    Transpiled {
        circuit: Circuit::new(n, products).expect("images stay within the register"),
        negative,
    }
}
