//! Dense state vectors and density matrices: the ground-truth simulator.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::clifford::CliffordCircuit;
use crate::error::{Error, Result};
use crate::{C64, DENSE_LIMIT};

pub const NORM_TOL: f64 = 1e-12;
pub const DENSITY_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub(crate) fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(Error::DenseLimit { n, limit: DENSE_LIMIT });
    }
    Ok(())
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() || dim == 1 {
        return Err(Error::Dimension { expected: 2, found: dim });
    }
    Ok(dim.trailing_zeros() as usize)
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let n = qubits_for_dim(amplitudes.len())?;
        let norm2 = amplitudes.norm_squared();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NumericalIntegrity(format!(
                "state norm² {norm2} deviates from 1"
            )));
        }
        Ok(Self { n, amplitudes })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, bound: dim });
        }
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self { n, amplitudes: v })
    }

    pub(crate) fn from_raw_unchecked(n: usize, amplitudes: DVector<C64>) -> Self {
        Self { n, amplitudes }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn projector(&self) -> DMatrix<C64> {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// An unnormalized state, e.g. `(E_a + e^{iβ}E_b)|φ⟩` before normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct RawState {
    n: usize,
    amplitudes: DVector<C64>,
}

impl RawState {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let n = qubits_for_dim(amplitudes.len())?;
        Ok(Self { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn squared_norm(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// Normalized copy; `None` for the zero vector.
    pub fn normalized(&self) -> Option<StateVector> {
        let norm = self.squared_norm().sqrt();
        if norm < NORM_TOL {
            return None;
        }
        Some(StateVector { n: self.n, amplitudes: &self.amplitudes / C64::new(norm, 0.0) })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension { expected: entries.nrows(), found: entries.ncols() });
        }
        let n = qubits_for_dim(entries.nrows())?;
        let herm = hermitian_deviation(&entries);
        if herm > DENSITY_TOL {
            return Err(Error::NumericalIntegrity(format!("density matrix not Hermitian ({herm:.3e})")));
        }
        let tr = entries.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::NumericalIntegrity(format!("density matrix trace {tr}")));
        }
        let min = min_eigenvalue(&entries);
        if min < -PSD_TOL {
            return Err(Error::NumericalIntegrity(format!("density matrix eigenvalue {min:.3e}")));
        }
        Ok(Self { n, entries })
    }

    pub fn pure(state: &StateVector) -> Self {
        Self { n: state.n, entries: state.projector() }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        Self { n, entries: DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0) }
    }

    /// Convex combination `weight·self + (1−weight)·other`.
    pub fn mix(&self, other: &Self, weight: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, found: other.n });
        }
        let w = C64::new(weight, 0.0);
        let entries = &self.entries * w + &other.entries * (C64::new(1.0, 0.0) - w);
        Ok(Self { n: self.n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }
}

pub fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Converts a nearly real probability to `f64`, clamped to `[0, 1]`.
pub(crate) fn checked_probability(value: C64) -> Result<f64> {
    if value.im.abs() > NORM_TOL || value.re < -NORM_TOL || value.re > 1.0 + NORM_TOL {
        return Err(Error::NumericalIntegrity(format!("probability {value} out of range")));
    }
    Ok(value.re.clamp(0.0, 1.0))
}

/// `⟨φ|ρ|φ⟩`.
pub fn survival_probability(rho: &DensityMatrix, phi: &StateVector) -> Result<f64> {
    if rho.n != phi.n {
        return Err(Error::Dimension { expected: rho.n, found: phi.n });
    }
    let v = phi.amplitudes();
    checked_probability(v.dotc(&(&rho.entries * v)))
}

/// Outcome probabilities for the basis `{C|i⟩}`.
pub fn basis_probabilities(rho: &DensityMatrix, basis_circuit: &CliffordCircuit) -> Result<Vec<f64>> {
    if rho.n != basis_circuit.n() {
        return Err(Error::Dimension { expected: rho.n, found: basis_circuit.n() });
    }
    let u = basis_circuit.unitary()?;
    let rotated = u.adjoint() * &rho.entries * &u;
    (0..rotated.nrows()).map(|i| checked_probability(rotated[(i, i)])).collect()
}

/// Haar-random pure state from normalized complex Gaussian amplitudes.
pub fn haar_random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    check_dense(n)?;
    let dim = 1usize << n;
    let v = DVector::from_fn(dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let norm = v.norm();
    Ok(StateVector::from_raw_unchecked(n, v / C64::new(norm, 0.0)))
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the R-diagonal phases removed.
pub fn haar_random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DMatrix<C64>> {
    check_dense(n)?;
    let dim = 1usize << n;
    let g = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / C64::new(d.norm(), 0.0) } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    Ok(q)
}
