use std::f64::consts::FRAC_PI_2;

use super::{CliffordCircuit, Direction, Gate};
use crate::design::MubDesign;
use crate::error::{Error, Result};
use crate::pauli::PauliIndex;

/// A relative phase `e^{iβ}` with `β` a multiple of `π/2`, stored as the power of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhaseTurn(u8);

impl PhaseTurn {
    pub const ZERO: PhaseTurn = PhaseTurn(0);
    pub const QUARTER: PhaseTurn = PhaseTurn(1);
    pub const HALF: PhaseTurn = PhaseTurn(2);
    pub const THREE_QUARTER: PhaseTurn = PhaseTurn(3);
    pub const ALL: [PhaseTurn; 4] = [Self::ZERO, Self::QUARTER, Self::HALF, Self::THREE_QUARTER];

    pub fn new(quarter_turns: u8) -> Self {
        PhaseTurn(quarter_turns % 4)
    }

    pub fn from_radians(beta: f64) -> Result<Self> {
        let q = beta / FRAC_PI_2;
        let r = q.round();
        if !beta.is_finite() || (q - r).abs() > 1e-9 {
            return Err(Error::InvalidBeta(beta));
        }
        Ok(PhaseTurn((r as i64).rem_euclid(4) as u8))
    }

    pub fn quarter_turns(self) -> u8 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0 as f64 * FRAC_PI_2
    }
}

/// Compiled preparation of `(E_a + e^{iβ}E_b)|φ_i^(α)⟩`.
///
/// The target equals (up to global phase) `V^α (|m⟩ + i^γ |n_idx⟩)`;
/// `squared_norm` is the norm² of the unnormalized target.
#[derive(Clone, Debug, PartialEq)]
pub struct PrepProgram {
    pub alpha: usize,
    pub circuit: Option<CliffordCircuit>,
    pub squared_norm: f64,
    pub m: usize,
    pub n_idx: usize,
    pub gamma: u8,
}

impl PrepProgram {
    pub fn is_null(&self) -> bool {
        self.circuit.is_none()
    }

    /// Phase-insensitive description `(lo, hi, γ')` of `|lo⟩ + i^γ' |hi⟩`, with `lo ≤ hi`;
    /// `None` when null.
    pub fn canonical_pair(&self) -> Option<(usize, usize, u8)> {
        if self.is_null() {
            return None;
        }
        Some(canonical_pair(self.m, self.n_idx, self.gamma))
    }
}

pub(crate) fn canonical_pair(m: usize, n_idx: usize, gamma: u8) -> (usize, usize, u8) {
    use std::cmp::Ordering::*;
    match m.cmp(&n_idx) {
        Equal => (m, m, 0),
        Less => (m, n_idx, gamma),
        Greater => (n_idx, m, (4 - gamma) % 4),
    }
}

/// Circuit preparing `|lo⟩ + i^γ |hi⟩` (normalized) from `|0…0⟩`: one H on the
/// first differing qubit, CNOT fan-out, at most two phase gates, then X gates
/// shifting by `lo`. For `lo == hi` only the X gates remain.
pub fn superposition_circuit(n: usize, lo: usize, hi: usize, gamma: u8) -> CliffordCircuit {
    let bit = |v: usize, q: usize| (v >> (n - 1 - q)) & 1 == 1;
    let mut c = CliffordCircuit::new(n);
    let diff = lo ^ hi;
    if diff != 0 {
        let pivot = (0..n).find(|&q| bit(diff, q)).expect("nonzero difference");
        let mut gates = vec![Gate::H(pivot)];
        gates.extend((pivot + 1..n).filter(|&q| bit(diff, q)).map(|q| Gate::Cnot { control: pivot, target: q }));
        match gamma % 4 {
            1 => gates.push(Gate::S(pivot)),
            2 => gates.push(Gate::Z(pivot)),
            3 => gates.extend([Gate::Z(pivot), Gate::S(pivot)]),
            _ => {}
        }
        for g in gates {
            c.push(g).expect("in range");
        }
    }
    for q in (0..n).filter(|&q| bit(lo, q)) {
        c.push(Gate::X(q)).expect("in range");
    }
    c
}

/// Compiles the preparation of `(E_a + e^{iβ}E_b)|φ_i^(α)⟩`.
///
/// Both Paulis are pulled back through the basis circuit, act on `|i⟩` as
/// signed bit flips, and the resulting pair of computational states is
/// prepared before the basis change.
pub fn compile_prep(design: &MubDesign, alpha: usize, i: usize, a: PauliIndex, b: PauliIndex, beta: PhaseTurn) -> Result<PrepProgram> {
    let basis = design.basis(alpha)?;
    let dim = design.dim();
    if i >= dim {
        return Err(Error::IndexOutOfRange { index: i, bound: dim });
    }
    for idx in [a, b] {
        if idx.n() != design.n() {
            return Err(Error::Dimension { expected: design.n(), found: idx.n() });
        }
    }
    let circuit = basis.circuit();
    let ea = circuit.conjugate(&a.operator(), Direction::Reverse)?;
    let eb = circuit.conjugate(&b.operator(), Direction::Reverse)?;
    let (m, ka) = ea.apply_to_basis(i);
    let (n_idx, kb) = eb.apply_to_basis(i);
    let gamma = (beta.quarter_turns() + kb + 4 - ka) % 4;

    let squared_norm = if m == n_idx {
        match gamma {
            0 => 4.0,
            2 => 0.0,
            _ => 2.0,
        }
    } else {
        2.0
    };
    let circuit = if squared_norm == 0.0 {
        None
    } else {
        let (lo, hi, g) = canonical_pair(m, n_idx, gamma);
        Some(superposition_circuit(design.n(), lo, hi, g).then(circuit)?)
    };
    Ok(PrepProgram { alpha, circuit, squared_norm, m, n_idx, gamma })
}
