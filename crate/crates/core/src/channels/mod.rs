//! Quantum channels in Kraus form, their process (χ) matrices in the Pauli
//! basis, the named channel registry, and fidelity measures.

mod chi;
mod fidelity;
mod registry;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dense::{check_dense, DensityMatrix};
use crate::error::{Error, Result};
use crate::C64;

pub use chi::{chi_from_kraus, kraus_from_chi, pauli_basis, ChiMatrix};
pub use fidelity::{average_fidelity, chi_comparison_fidelity, psd_project, ComparisonFidelity, TargetSupport};
pub use registry::{builtin_channel, uc_matrix, ChannelFactory, ChannelParams, ChannelRegistry, ChannelSpec};

pub const TP_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct QuantumChannel {
    n: usize,
    kraus: Vec<DMatrix<C64>>,
}

impl QuantumChannel {
    /// Validates shapes and `Σ A_k† A_k = I`.
    pub fn new(kraus: Vec<DMatrix<C64>>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidParameter { name: "kraus".into(), reason: "empty Kraus list".into() })?;
        let dim = first.nrows();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Dimension { expected: 2, found: dim });
        }
        let n = dim.trailing_zeros() as usize;
        check_dense(n)?;
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::Dimension { expected: dim, found: k.ncols().max(k.nrows()) });
            }
        }
        let ch = Self { n, kraus };
        let dev = ch.tp_deviation();
        if dev > TP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(ch)
    }

    pub fn unitary(u: DMatrix<C64>) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let dim = 1usize << n;
        Self::new(vec![DMatrix::identity(dim, dim)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn kraus(&self) -> &[DMatrix<C64>] {
        &self.kraus
    }

    /// The single Kraus operator when the channel is unitary.
    pub fn as_unitary(&self) -> Option<&DMatrix<C64>> {
        match self.kraus.as_slice() {
            [u] => {
                let id = DMatrix::<C64>::identity(self.dim(), self.dim());
                ((u * u.adjoint() - id).norm() < 1e-9).then_some(u)
            }
            _ => None,
        }
    }

    pub fn tp_deviation(&self) -> f64 {
        let dim = self.dim();
        let sum = self.kraus.iter().fold(DMatrix::<C64>::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
        (sum - DMatrix::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `Σ_k A_k X A_k†` for an arbitrary (not necessarily Hermitian) operator `X`.
    pub fn apply_operator(&self, x: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if x.nrows() != self.dim() || x.ncols() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: x.nrows() });
        }
        Ok(self.kraus.iter().fold(DMatrix::zeros(self.dim(), self.dim()), |acc, k| acc + k * x * k.adjoint()))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.n() != self.n {
            return Err(Error::Dimension { expected: self.n, found: rho.n() });
        }
        DensityMatrix::new(self.apply_operator(rho.matrix())?)
    }

    /// Channel applying `self` and then `next`.
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if self.n != next.n {
            return Err(Error::Dimension { expected: self.n, found: next.n });
        }
        let kraus = next.kraus.iter().flat_map(|b| self.kraus.iter().map(move |a| b * a)).collect();
        QuantumChannel::new(kraus)
    }
}

/// Random CP trace-preserving channel with `rank` Kraus operators: complex
/// Gaussian matrices right-multiplied by `(Σ A†A)^{-1/2}`.
pub fn random_channel<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<QuantumChannel> {
    check_dense(n)?;
    let dim = 1usize << n;
    let raw: Vec<DMatrix<C64>> = (0..rank.max(1))
        .map(|_| DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))))
        .collect();
    let s = raw.iter().fold(DMatrix::<C64>::zeros(dim, dim), |acc, a| acc + a.adjoint() * a);
    let eig = s.symmetric_eigen();
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(1.0 / l.sqrt(), 0.0)));
    let w = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    QuantumChannel::new(raw.into_iter().map(|a| a * &w).collect())
}
