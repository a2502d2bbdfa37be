//! n-qubit Pauli operators in binary symplectic form.
//!
//! A [`PauliOperator`] stores one X bit and one Z bit per qubit together with
//! a global phase `i^phase_power`. The bit pair `(x, z)` on a qubit selects the
//! Hermitian single-qubit matrix `I`, `X`, `Y` or `Z`; with `phase_power == 0`
//! the operator is the familiar Hermitian tensor product (so `Y` is stored as
//! `x = z = 1` with no extra phase). Qubit 0 is the leftmost label character and
//! the most significant tensor factor.
//!
//! All arithmetic here is exact: phases are integers mod 4.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::{C64, DENSE_LIMIT};

/// `i^k` as a complex number.
pub fn phase_value(k: u8) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOperator {
    x: Vec<bool>,
    z: Vec<bool>,
    phase: u8,
}

impl PauliOperator {
    pub fn new(x: Vec<bool>, z: Vec<bool>, phase_power: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Dimension { expected: x.len(), found: z.len() });
        }
        if x.is_empty() {
            return Err(Error::EmptyLabel);
        }
        Ok(Self { x, z, phase: phase_power % 4 })
    }

    pub fn identity(n: usize) -> Self {
        Self { x: vec![false; n], z: vec![false; n], phase: 0 }
    }

    /// Single-qubit factor `kind` (one of `'X'`, `'Y'`, `'Z'`, `'I'`) on `qubit`.
    pub fn single(n: usize, qubit: usize, kind: char) -> Result<Self> {
        if qubit >= n {
            return Err(Error::IndexOutOfRange { index: qubit, bound: n });
        }
        let mut p = Self::identity(n);
        let (x, z) = bits_of(kind).ok_or(Error::PauliParse { position: 0, found: kind })?;
        p.x[qubit] = x;
        p.z[qubit] = z;
        Ok(p)
    }

    /// Parses a phaseless label such as `"XIZ"`.
    pub fn from_label(label: &str) -> Result<Self> {
        if label.is_empty() {
            return Err(Error::EmptyLabel);
        }
        let mut x = Vec::with_capacity(label.len());
        let mut z = Vec::with_capacity(label.len());
        for (position, c) in label.chars().enumerate() {
            let (xb, zb) = bits_of(c).ok_or(Error::PauliParse { position, found: c })?;
            x.push(xb);
            z.push(zb);
        }
        Ok(Self { x, z, phase: 0 })
    }

    pub fn from_index(index: PauliIndex) -> Self {
        let n = index.n;
        let mut p = Self::identity(n);
        for q in 0..n {
            let digit = (index.value >> (2 * (n - 1 - q))) & 3;
            let (x, z) = match digit {
                0 => (false, false),
                1 => (true, false),
                2 => (true, true),
                _ => (false, true),
            };
            p.x[q] = x;
            p.z[q] = z;
        }
        p
    }

    /// Index of the phaseless representative.
    pub fn to_index(&self) -> PauliIndex {
        let n = self.n();
        let value = (0..n).fold(0usize, |acc, q| {
            let digit = match (self.x[q], self.z[q]) {
                (false, false) => 0,
                (true, false) => 1,
                (true, true) => 2,
                (false, true) => 3,
            };
            (acc << 2) | digit
        });
        PauliIndex { value, n }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z
    }

    pub fn phase_power(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase_power: u8) -> Self {
        self.phase = phase_power % 4;
        self
    }

    pub fn phaseless(&self) -> Self {
        Self { x: self.x.clone(), z: self.z.clone(), phase: 0 }
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|b| !b)
    }

    pub fn has_x_part(&self) -> bool {
        self.x.iter().any(|&b| b)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(x, z)| **x || **z).count()
    }

    /// Label of the phaseless representative, e.g. `"XY"`.
    pub fn label(&self) -> String {
        self.x.iter().zip(&self.z).map(|(&x, &z)| char_of(x, z)).collect()
    }

    pub fn multiply_phase(&mut self, k: u8) {
        self.phase = (self.phase + k) % 4;
    }

    pub(crate) fn set_bits(&mut self, qubit: usize, x: bool, z: bool) {
        self.x[qubit] = x;
        self.z[qubit] = z;
    }

    /// Operator product `self · other`, exact including phase.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        // Phase exponent of i accumulates per qubit; done in i32 then reduced.
        let mut e: i32 = self.phase as i32 + other.phase as i32;
        let mut x = Vec::with_capacity(self.n());
        let mut z = Vec::with_capacity(self.n());
        for q in 0..self.n() {
            let (x1, z1, x2, z2) = (self.x[q], self.z[q], other.x[q], other.z[q]);
            e += product_exponent(x1, z1, x2, z2);
            x.push(x1 ^ x2);
            z.push(z1 ^ z2);
        }
        Ok(Self { x, z, phase: e.rem_euclid(4) as u8 })
    }

    /// Symplectic inner product test: true iff the operators commute.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_n(other)?;
        Ok(!self.symplectic(other))
    }

    /// `true` when the symplectic product is 1 (anticommuting).
    pub(crate) fn symplectic(&self, other: &Self) -> bool {
        (0..self.n()).fold(false, |acc, q| {
            acc ^ (self.x[q] & other.z[q]) ^ (self.z[q] & other.x[q])
        })
    }

    /// Dense `2^n × 2^n` matrix, refused above [`DENSE_LIMIT`] qubits.
    pub fn to_matrix(&self) -> Result<DMatrix<C64>> {
        self.to_matrix_limited(DENSE_LIMIT)
    }

    pub fn to_matrix_limited(&self, limit: usize) -> Result<DMatrix<C64>> {
        let n = self.n();
        if n > limit {
            return Err(Error::DenseLimit { n, limit });
        }
        let dim = 1usize << n;
        // Each column has exactly one nonzero entry: P|j⟩ = coeff·|j ⊕ xmask⟩.
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let (row, k) = self.apply_to_basis(col);
            m[(row, col)] = phase_value(k);
        }
        Ok(m)
    }

    /// Action on a computational basis index: `P|j⟩ = i^k |j'⟩`, returning `(j', k)`.
    pub fn apply_to_basis(&self, j: usize) -> (usize, u8) {
        let n = self.n();
        let mut out = j;
        let mut k = self.phase as u32;
        for q in 0..n {
            let shift = n - 1 - q;
            let bit = (j >> shift) & 1;
            match (self.x[q], self.z[q]) {
                (false, false) => {}
                (true, false) => out ^= 1 << shift,
                (false, true) => k += 2 * bit as u32,
                (true, true) => {
                    // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
                    out ^= 1 << shift;
                    k += 1 + 2 * bit as u32;
                }
            }
        }
        (out, (k % 4) as u8)
    }

    fn check_n(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::Dimension { expected: self.n(), found: other.n() });
        }
        Ok(())
    }
}

/// Exponent `g` with `σ(x1,z1)·σ(x2,z2) = i^g σ(x1⊕x2, z1⊕z2)` for Hermitian factors.
fn product_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2i, z2i) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2i - x2i,
        (true, false) => z2i * (2 * x2i - 1),
        (false, true) => x2i * (1 - 2 * z2i),
    }
}

fn bits_of(c: char) -> Option<(bool, bool)> {
    match c {
        'I' => Some((false, false)),
        'X' => Some((true, false)),
        'Y' => Some((true, true)),
        'Z' => Some((false, true)),
        _ => None,
    }
}

fn char_of(x: bool, z: bool) -> char {
    match (x, z) {
        (false, false) => 'I',
        (true, false) => 'X',
        (true, true) => 'Y',
        (false, true) => 'Z',
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_label(s)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}{}", self.label())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

/// Label `a ∈ [0, 4^n)` of a phaseless Pauli; base-4 digits 0=I, 1=X, 2=Y, 3=Z
/// with qubit 0 as the most significant digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliIndex {
    value: usize,
    n: usize,
}

impl PauliIndex {
    pub fn new(value: usize, n: usize) -> Result<Self> {
        let bound = 1usize << (2 * n);
        if value >= bound {
            return Err(Error::IndexOutOfRange { index: value, bound });
        }
        Ok(Self { value, n })
    }

    pub fn identity(n: usize) -> Self {
        Self { value: 0, n }
    }

    pub fn parse(label: &str) -> Result<Self> {
        Ok(PauliOperator::from_label(label)?.to_index())
    }

    pub fn value(self) -> usize {
        self.value
    }

    pub fn n(self) -> usize {
        self.n
    }

    pub fn operator(self) -> PauliOperator {
        PauliOperator::from_index(self)
    }

    pub fn label(self) -> String {
        self.operator().label()
    }

    /// All `4^n` indices in increasing order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliIndex> {
        (0..1usize << (2 * n)).map(move |value| PauliIndex { value, n })
    }
}

impl fmt::Display for PauliIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
