//! Dense state-vector reference for Clifford conjugation on a few qubits.
//! Qubit `q` is bit `q` of the basis index.

#![allow(dead_code)]

use lattice_sched_core::clifford::{Gate, GateKind};
use lattice_sched_core::Pauli;
use num_complex::Complex64 as C;

pub type Matrix = Vec<Vec<C>>;

const I: C = C::new(0.0, 1.0);

pub fn identity(n: u32) -> Matrix {
    let d = 1usize << n;
    (0..d)
        .map(|r| (0..d).map(|c| if r == c { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) }).collect())
        .collect()
}

/// Applies `gate` to a state vector in place.
fn apply_to_vector(v: &mut [C], gate: &Gate) {
    let bit = |q: u32| 1usize << q;
    let d = v.len();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match gate.kind {
        GateKind::Cx => {
            let (c, t) = (bit(gate.qubits[0]), bit(gate.qubits[1]));
            for b in 0..d {
                if b & c != 0 && b & t == 0 {
                    v.swap(b, b | t);
                }
            }
        }
        GateKind::Cz => {
            let (a, c) = (bit(gate.qubits[0]), bit(gate.qubits[1]));
            for (b, x) in v.iter_mut().enumerate() {
                if b & a != 0 && b & c != 0 {
                    *x = -*x;
                }
            }
        }
        kind => {
            let m = bit(gate.qubits[0]);
            let t = C::from_polar(1.0, std::f64::consts::FRAC_PI_4);
            // [[u00, u01], [u10, u11]]
            let u: [[C; 2]; 2] = match kind {
                GateKind::H => [[C::new(h, 0.0), C::new(h, 0.0)], [C::new(h, 0.0), C::new(-h, 0.0)]],
                GateKind::S => [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), I]],
                GateKind::Sdg => [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), -I]],
                GateKind::X => [[C::new(0.0, 0.0), C::new(1.0, 0.0)], [C::new(1.0, 0.0), C::new(0.0, 0.0)]],
                GateKind::Y => [[C::new(0.0, 0.0), -I], [I, C::new(0.0, 0.0)]],
                GateKind::Z => [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(-1.0, 0.0)]],
                GateKind::T => [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), t]],
                GateKind::Tdg => [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), t.conj()]],
                GateKind::Cx | GateKind::Cz => unreachable!(),
            };
            for b in 0..d {
                if b & m == 0 {
                    let (a0, a1) = (v[b], v[b | m]);
                    v[b] = u[0][0] * a0 + u[0][1] * a1;
                    v[b | m] = u[1][0] * a0 + u[1][1] * a1;
                }
            }
        }
    }
}

/// `gate · m`.
pub fn left_apply(m: &mut Matrix, gate: &Gate) {
    let d = m.len();
    for c in 0..d {
        let mut col: Vec<C> = (0..d).map(|r| m[r][c]).collect();
        apply_to_vector(&mut col, gate);
        for (row, x) in m.iter_mut().zip(col) {
            row[c] = x;
        }
    }
}

/// Unitary of a gate sequence (first gate applied first).
pub fn unitary(n: u32, gates: &[Gate]) -> Matrix {
    let mut u = identity(n);
    for g in gates {
        left_apply(&mut u, g);
    }
    u
}

/// Basis action of a Pauli string: `P|b> = phase[b] |perm[b]>`.
fn pauli_action(n: u32, ops: &[(u32, Pauli)]) -> (Vec<usize>, Vec<C>) {
    let d = 1usize << n;
    let mut perm = vec![0; d];
    let mut phases = vec![C::new(1.0, 0.0); d];
    for b in 0..d {
        let mut out = b;
        for &(q, p) in ops {
            let sign = if b >> q & 1 == 1 { -1.0 } else { 1.0 };
            match p {
                Pauli::X => out ^= 1 << q,
                Pauli::Z => phases[b] *= sign,
                Pauli::Y => {
                    out ^= 1 << q;
                    phases[b] *= I * sign;
                }
            }
        }
        perm[b] = out;
    }
    (perm, phases)
}

/// `P · m`.
pub fn pauli_left(n: u32, ops: &[(u32, Pauli)], m: &Matrix) -> Matrix {
    let (perm, phase) = pauli_action(n, ops);
    let mut out = m.clone();
    for b in 0..m.len() {
        out[perm[b]] = m[b].iter().map(|x| phase[b] * x).collect();
    }
    out
}

/// `m · P`.
pub fn pauli_right(n: u32, m: &Matrix, ops: &[(u32, Pauli)]) -> Matrix {
    let (perm, phase) = pauli_action(n, ops);
    m.iter()
        .map(|row| (0..row.len()).map(|b| row[perm[b]] * phase[b]).collect())
        .collect()
}

/// `Some(±1)` when `a = ±b` entrywise within `tol`.
pub fn sign_relation(a: &Matrix, b: &Matrix, tol: f64) -> Option<i8> {
    [1i8, -1].into_iter().find(|&s| {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .all(|(x, y)| (x - y * s as f64).norm() < tol)
    })
}

/// The sign `s` with `U† P U = s Q`, if any: checked as `P U = s U Q`.
pub fn conjugation_sign(n: u32, u: &Matrix, p: &[(u32, Pauli)], q: &[(u32, Pauli)]) -> Option<i8> {
    sign_relation(&pauli_left(n, p, u), &pauli_right(n, u, q), 1e-9)
}
