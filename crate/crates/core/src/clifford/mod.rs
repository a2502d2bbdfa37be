//! Clifford circuits over `{H, S, CNOT, X, Z}`: tableau conjugation of Paulis,
//! dense execution, basis-change synthesis and the preparation compiler.

mod prep;
mod synth;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dense::{check_dense, StateVector};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::C64;

pub use prep::{compile_prep, superposition_circuit, PhaseTurn, PrepProgram};
pub use synth::synthesize_basis_circuit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
}

impl Gate {
    fn max_qubit(&self) -> usize {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Z(q) => q,
            Gate::Cnot { control, target } => control.max(target),
        }
    }

    /// `G P G†` when `adjoint` is false, `G† P G` otherwise.
    fn conjugate(&self, p: &mut PauliOperator, adjoint: bool) {
        match *self {
            Gate::H(q) => {
                let (x, z) = (p.x_bits()[q], p.z_bits()[q]);
                if x && z {
                    p.multiply_phase(2);
                }
                p.set_bits(q, z, x);
            }
            Gate::S(q) => {
                let (x, z) = (p.x_bits()[q], p.z_bits()[q]);
                // S X S† = Y, S Y S† = -X; the adjoint flips which one picks up the sign.
                if x && (z != adjoint) {
                    p.multiply_phase(2);
                }
                p.set_bits(q, x, z ^ x);
            }
            Gate::X(q) => {
                if p.z_bits()[q] {
                    p.multiply_phase(2);
                }
            }
            Gate::Z(q) => {
                if p.x_bits()[q] {
                    p.multiply_phase(2);
                }
            }
            Gate::Cnot { control: c, target: t } => {
                let (xc, zc) = (p.x_bits()[c], p.z_bits()[c]);
                let (xt, zt) = (p.x_bits()[t], p.z_bits()[t]);
                if xc && zt && !(xt ^ zc) {
                    p.multiply_phase(2);
                }
                p.set_bits(t, xt ^ xc, zt);
                p.set_bits(c, xc, zc ^ zt);
            }
        }
    }

    fn apply(&self, n: usize, amps: &mut DVector<C64>) {
        let mask = |q: usize| 1usize << (n - 1 - q);
        let dim = amps.len();
        match *self {
            Gate::H(q) => {
                let m = mask(q);
                let h = std::f64::consts::FRAC_1_SQRT_2;
                for j in (0..dim).filter(|j| j & m == 0) {
                    let (a, b) = (amps[j], amps[j | m]);
                    amps[j] = (a + b) * h;
                    amps[j | m] = (a - b) * h;
                }
            }
            Gate::S(q) => {
                let m = mask(q);
                for j in (0..dim).filter(|j| j & m != 0) {
                    amps[j] *= C64::new(0.0, 1.0);
                }
            }
            Gate::X(q) => {
                let m = mask(q);
                for j in (0..dim).filter(|j| j & m == 0) {
                    amps.swap_rows(j, j | m);
                }
            }
            Gate::Z(q) => {
                let m = mask(q);
                for j in (0..dim).filter(|j| j & m != 0) {
                    amps[j] = -amps[j];
                }
            }
            Gate::Cnot { control, target } => {
                let (mc, mt) = (mask(control), mask(target));
                for j in (0..dim).filter(|j| j & mc != 0 && j & mt == 0) {
                    amps.swap_rows(j, j | mt);
                }
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::S(q) => write!(f, "S {q}"),
            Gate::X(q) => write!(f, "X {q}"),
            Gate::Z(q) => write!(f, "Z {q}"),
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("malformed gate line {s:?}"));
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or_else(bad)?;
        let mut qubit = || -> Result<usize> { parts.next().ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let gate = match kind {
            "H" => Gate::H(qubit()?),
            "S" => Gate::S(qubit()?),
            "X" => Gate::X(qubit()?),
            "Z" => Gate::Z(qubit()?),
            "CNOT" => {
                let control = qubit()?;
                Gate::Cnot { control, target: qubit()? }
            }
            _ => return Err(bad()),
        };
        Ok(gate)
    }
}

/// Which way [`CliffordCircuit::conjugate`] maps a Pauli.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `C P C†`
    Forward,
    /// `C† P C`
    Reverse,
}

/// Gate list in application order (first gate acts first on the state).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "CircuitLines")]
pub struct CliffordCircuit {
    n: usize,
    gates: Vec<Gate>,
}

impl CliffordCircuit {
    pub fn new(n: usize) -> Self {
        Self { n, gates: Vec::new() }
    }

    pub fn from_gates(n: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Self::new(n);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if gate.max_qubit() >= self.n {
            return Err(Error::IndexOutOfRange { index: gate.max_qubit(), bound: self.n });
        }
        if let Gate::Cnot { control, target } = gate {
            if control == target {
                return Err(Error::InvalidBasis(format!("CNOT with control = target = {control}")));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Circuit running `self` and then `next`.
    pub fn then(&self, next: &CliffordCircuit) -> Result<CliffordCircuit> {
        if self.n != next.n {
            return Err(Error::Dimension { expected: self.n, found: next.n });
        }
        let gates = self.gates.iter().chain(&next.gates).copied().collect();
        Ok(CliffordCircuit { n: self.n, gates })
    }

    /// Inverse circuit; `S†` is emitted as `Z` followed by `S`.
    pub fn inverse(&self) -> CliffordCircuit {
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in self.gates.iter().rev() {
            match *g {
                Gate::S(q) => gates.extend([Gate::Z(q), Gate::S(q)]),
                other => gates.push(other),
            }
        }
        CliffordCircuit { n: self.n, gates }
    }

    pub fn conjugate(&self, p: &PauliOperator, direction: Direction) -> Result<PauliOperator> {
        if p.n() != self.n {
            return Err(Error::Dimension { expected: self.n, found: p.n() });
        }
        let mut out = p.clone();
        match direction {
            Direction::Forward => self.gates.iter().for_each(|g| g.conjugate(&mut out, false)),
            Direction::Reverse => self.gates.iter().rev().for_each(|g| g.conjugate(&mut out, true)),
        }
        Ok(out)
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.n() != self.n {
            return Err(Error::Dimension { expected: self.n, found: state.n() });
        }
        let mut amps = state.amplitudes().clone();
        self.apply_in_place(&mut amps)?;
        Ok(StateVector::from_raw_unchecked(self.n, amps))
    }

    pub(crate) fn apply_in_place(&self, amps: &mut DVector<C64>) -> Result<()> {
        check_dense(self.n)?;
        if amps.len() != 1 << self.n {
            return Err(Error::Dimension { expected: 1 << self.n, found: amps.len() });
        }
        for g in &self.gates {
            g.apply(self.n, amps);
        }
        Ok(())
    }

    /// Dense unitary; column `i` is the circuit applied to `|i⟩`.
    pub fn unitary(&self) -> Result<DMatrix<C64>> {
        check_dense(self.n)?;
        let dim = 1usize << self.n;
        let mut u = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let mut v = DVector::zeros(dim);
            v[i] = C64::new(1.0, 0.0);
            self.apply_in_place(&mut v)?;
            u.set_column(i, &v);
        }
        Ok(u)
    }

    /// One gate per line, e.g. `"H 0"`, `"CNOT 0 1"`.
    pub fn to_lines(&self) -> Vec<String> {
        self.gates.iter().map(Gate::to_string).collect()
    }

    pub fn from_lines<S: AsRef<str>>(n: usize, lines: &[S]) -> Result<Self> {
        let gates = lines.iter().map(|l| l.as_ref().parse()).collect::<Result<Vec<Gate>>>()?;
        Self::from_gates(n, gates)
    }
}

impl From<CliffordCircuit> for Vec<String> {
    fn from(c: CliffordCircuit) -> Self {
        c.to_lines()
    }
}

/// Serialized form: the gate lines; the qubit count is inferred from the gates.
#[derive(Deserialize)]
#[serde(transparent)]
struct CircuitLines(Vec<String>);

impl TryFrom<CircuitLines> for CliffordCircuit {
    type Error = Error;

    fn try_from(lines: CircuitLines) -> Result<Self> {
        let gates = lines.0.iter().map(|l| l.parse()).collect::<Result<Vec<Gate>>>()?;
        let n = gates.iter().map(|g| g.max_qubit() + 1).max().unwrap_or(1);
        Self::from_gates(n, gates)
    }
}
