use nalgebra::DMatrix;

use super::QuantumChannel;
use crate::dense::{check_dense, hermitian_deviation, min_eigenvalue};
use crate::error::{Error, Result};
use crate::pauli::PauliIndex;
use crate::C64;

/// Dense matrices of all `4^n` phaseless Paulis in index order.
pub fn pauli_basis(n: usize) -> Result<Vec<DMatrix<C64>>> {
    check_dense(n)?;
    PauliIndex::all(n).map(|a| a.operator().to_matrix()).collect()
}

/// Process matrix in the Pauli basis: `Λ(ρ) = Σ_ab χ_ab E_a ρ E_b†`.
///
/// Construction is unchecked so that noisy reconstructions can be held;
/// [`ChiMatrix::validate`] tests the physical invariants.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix {
    n: usize,
    entries: DMatrix<C64>,
}

impl ChiMatrix {
    pub fn from_entries(n: usize, entries: DMatrix<C64>) -> Result<Self> {
        let d2 = 1usize << (2 * n);
        if entries.nrows() != d2 || entries.ncols() != d2 {
            return Err(Error::Dimension { expected: d2, found: entries.nrows() });
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn get(&self, a: PauliIndex, b: PauliIndex) -> C64 {
        self.entries[(a.value(), b.value())]
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.entries)
    }

    /// `‖Σ_ab χ_ab E_b†E_a − I‖_max`.
    pub fn tp_deviation(&self) -> Result<f64> {
        let paulis = pauli_basis(self.n)?;
        let dim = 1usize << self.n;
        let mut sum = DMatrix::<C64>::zeros(dim, dim);
        for (a, ea) in paulis.iter().enumerate() {
            for (b, eb) in paulis.iter().enumerate() {
                let c = self.entries[(a, b)];
                if c != C64::new(0.0, 0.0) {
                    sum += eb.adjoint() * ea * c;
                }
            }
        }
        Ok((sum - DMatrix::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.entries)
    }

    /// Checks Hermiticity, trace preservation, positivity and unit trace.
    pub fn validate(&self) -> Result<()> {
        let h = self.hermitian_deviation();
        if h > 1e-10 {
            return Err(Error::NumericalIntegrity(format!("process matrix not Hermitian ({h:.3e})")));
        }
        let tp = self.tp_deviation()?;
        if tp > 1e-10 {
            return Err(Error::NotTracePreserving(tp));
        }
        let min = self.min_eigenvalue();
        if min < -1e-9 {
            return Err(Error::NotCompletelyPositive(min));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::NumericalIntegrity(format!("process matrix trace {tr}")));
        }
        Ok(())
    }

    /// Indices of entries with modulus above `tol`.
    pub fn support(&self, tol: f64) -> Vec<(PauliIndex, PauliIndex)> {
        let d2 = self.entries.nrows();
        let idx = |v| PauliIndex::new(v, self.n).expect("in range");
        (0..d2)
            .flat_map(|a| (0..d2).map(move |b| (a, b)))
            .filter(|&(a, b)| self.entries[(a, b)].norm() > tol)
            .map(|(a, b)| (idx(a), idx(b)))
            .collect()
    }
}

/// Expands each Kraus operator as `A_k = Σ_a c_ka E_a`, `c_ka = Tr(E_a A_k)/D`,
/// and sums `χ_ab = Σ_k c_ka c̄_kb`.
pub fn chi_from_kraus(channel: &QuantumChannel) -> Result<ChiMatrix> {
    let dev = channel.tp_deviation();
    if dev > super::TP_TOL {
        return Err(Error::NotTracePreserving(dev));
    }
    let n = channel.n();
    let d = channel.dim() as f64;
    let paulis = pauli_basis(n)?;
    let d2 = paulis.len();
    let mut chi = DMatrix::<C64>::zeros(d2, d2);
    for k in channel.kraus() {
        let coeffs: Vec<C64> = paulis.iter().map(|e| (e * k).trace() / d).collect();
        for a in 0..d2 {
            for b in 0..d2 {
                chi[(a, b)] += coeffs[a] * coeffs[b].conj();
            }
        }
    }
    ChiMatrix::from_entries(n, chi)
}

/// Kraus form from the eigendecomposition `χ = Σ λ_k v_k v_k†`:
/// `A_k = √λ_k Σ_a v_ka E_a`.
pub fn kraus_from_chi(chi: &ChiMatrix) -> Result<QuantumChannel> {
    let n = chi.n();
    let h = chi.hermitian_deviation();
    if h > 1e-10 {
        return Err(Error::NumericalIntegrity(format!("process matrix not Hermitian ({h:.3e})")));
    }
    let herm = (chi.entries() + chi.entries().adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let paulis = pauli_basis(n)?;
    let dim = 1usize << n;
    let mut kraus = Vec::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -1e-7 {
            return Err(Error::NotCompletelyPositive(lambda));
        }
        if lambda <= 1e-13 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let a = paulis
            .iter()
            .zip(v.iter())
            .fold(DMatrix::<C64>::zeros(dim, dim), |acc, (e, c)| acc + e * *c);
        kraus.push(a * C64::new(lambda.sqrt(), 0.0));
    }
    QuantumChannel::new(kraus)
}
