use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use super::chi::{pauli_basis, ChiMatrix};
use crate::error::{Error, Result};
use crate::pauli::PauliIndex;
use crate::C64;

/// Nonzero entries of the process matrix of the inverse target `ρ ↦ U†ρU`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetSupport {
    n: usize,
    entries: BTreeMap<(PauliIndex, PauliIndex), C64>,
}

impl TargetSupport {
    /// `χ̃_ab = d_a d̄_b` with `U† = Σ_a d_a E_a`.
    pub fn for_unitary(u: &DMatrix<C64>) -> Result<Self> {
        let dim = u.nrows();
        if !u.is_square() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Dimension { expected: dim, found: u.ncols() });
        }
        if (u.adjoint() * u - DMatrix::identity(dim, dim)).norm() > 1e-9 {
            return Err(Error::InvalidParameter { name: "target".into(), reason: "target is not unitary".into() });
        }
        let n = dim.trailing_zeros() as usize;
        let udag = u.adjoint();
        let coeffs: Vec<(PauliIndex, C64)> = pauli_basis(n)?
            .iter()
            .zip(PauliIndex::all(n))
            .map(|(e, a)| (a, (e * &udag).trace() / dim as f64))
            .filter(|(_, c)| c.norm() > 1e-12)
            .collect();
        let mut entries = BTreeMap::new();
        for &(a, ca) in &coeffs {
            for &(b, cb) in &coeffs {
                entries.insert((a, b), ca * cb.conj());
            }
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &BTreeMap<(PauliIndex, PauliIndex), C64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct unordered pairs `(a, b)` with `a ≤ b` that must be estimated.
    pub fn required_elements(&self) -> Vec<(PauliIndex, PauliIndex)> {
        self.entries.keys().filter(|(a, b)| a <= b).copied().collect()
    }

    /// `Σ_ab χ_ab χ̃_ab` over the support, given any source of `χ_ab`.
    pub fn overlap_with(&self, mut chi: impl FnMut(PauliIndex, PauliIndex) -> C64) -> C64 {
        self.entries.iter().map(|(&(a, b), &t)| chi(a, b) * t).sum()
    }

    /// Average fidelity as an affine function of the overlap.
    pub fn fidelity_from_overlap(&self, overlap: f64) -> f64 {
        let d = (1usize << self.n) as f64;
        (d * overlap + 1.0) / (d + 1.0)
    }
}

/// `F = (D·Tr(χχ̃) + 1)/(D + 1)` where the trace pairs `χ_ab` with the
/// inverse-target entry `χ̃_ab`.
pub fn average_fidelity(chi: &ChiMatrix, target: &TargetSupport) -> Result<f64> {
    if chi.n() != target.n {
        return Err(Error::Dimension { expected: target.n, found: chi.n() });
    }
    let overlap = target.overlap_with(|a, b| chi.get(a, b));
    Ok(target.fidelity_from_overlap(overlap.re))
}

/// Nearest positive semidefinite, unit-trace matrix: Hermitian part with
/// negative eigenvalues clipped, then renormalized. Returns the clipped
/// negative weight alongside.
pub fn psd_project(m: &DMatrix<C64>) -> (DMatrix<C64>, f64) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let clipped: f64 = eig.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let kept = eig.eigenvalues.map(|l| l.max(0.0));
    let tr: f64 = kept.iter().sum();
    let diag = DMatrix::from_diagonal(&kept.map(|l| C64::new(l / tr, 0.0)));
    (&eig.eigenvectors * diag * eig.eigenvectors.adjoint(), clipped)
}

fn sqrt_psd(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = m.clone().symmetric_eigen();
    let diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * diag * eig.eigenvectors.adjoint()
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonFidelity {
    pub fidelity: f64,
    /// Negative eigenvalue weight removed from each input by the projection.
    pub clipped_weight: [f64; 2],
    pub method: &'static str,
}

/// State fidelity `(Tr√(√χ₁ χ₂ √χ₁))²` of the two process matrices after
/// projecting each onto unit-trace PSD matrices.
pub fn chi_comparison_fidelity(chi1: &ChiMatrix, chi2: &ChiMatrix) -> Result<ComparisonFidelity> {
    if chi1.n() != chi2.n() {
        return Err(Error::Dimension { expected: chi1.n(), found: chi2.n() });
    }
    for c in [chi1, chi2] {
        let h = c.hermitian_deviation();
        if h > 1e-8 {
            return Err(Error::NumericalIntegrity(format!("process matrix not Hermitian ({h:.3e})")));
        }
    }
    let (p1, w1) = psd_project(chi1.entries());
    let (p2, w2) = psd_project(chi2.entries());
    // Tr√(√χ₁ χ₂ √χ₁) is the trace norm of √χ₁√χ₂.
    let root_trace: f64 = (sqrt_psd(&p1) * sqrt_psd(&p2)).singular_values().iter().sum();
    Ok(ComparisonFidelity {
        fidelity: root_trace * root_trace,
        clipped_weight: [w1, w2],
        method: "psd-projected state fidelity of process matrices",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{builtin_channel, chi_from_kraus, random_channel, uc_matrix, ChannelParams, QuantumChannel};
    use crate::dense::haar_random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chi(name: &str, n: usize) -> ChiMatrix {
        chi_from_kraus(&builtin_channel(name, n, &ChannelParams::default()).unwrap()).unwrap()
    }

    #[test]
    fn identity_target_support() {
        let t = TargetSupport::for_unitary(&DMatrix::identity(4, 4)).unwrap();
        assert_eq!(t.len(), 1);
        let ii = PauliIndex::identity(2);
        assert_eq!(t.entries()[&(ii, ii)], C64::new(1.0, 0.0));
        let uc = TargetSupport::for_unitary(&uc_matrix()).unwrap();
        assert_eq!(uc.len(), 16);
        assert_eq!(uc.required_elements().len(), 10);
        assert!(TargetSupport::for_unitary(&(DMatrix::identity(2, 2) * C64::new(2.0, 0.0))).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let id_t = TargetSupport::for_unitary(&DMatrix::identity(4, 4)).unwrap();
        let uc_t = TargetSupport::for_unitary(&uc_matrix()).unwrap();
        assert!((average_fidelity(&chi("identity", 2), &id_t).unwrap() - 1.0).abs() < 1e-12);
        assert!((average_fidelity(&chi("controlled_uc", 2), &id_t).unwrap() - 0.2).abs() < 1e-12);
        assert!((average_fidelity(&chi("controlled_uc", 2), &uc_t).unwrap() - 1.0).abs() < 1e-12);
        let noisy = chi_from_kraus(&builtin_channel("noisy_uc", 2, &ChannelParams::from_pairs([("p", 0.5)])).unwrap()).unwrap();
        assert!((average_fidelity(&noisy, &uc_t).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn unitary_self_fidelity_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 1..=2 {
            let u = haar_random_unitary(n, &mut rng).unwrap();
            let c = chi_from_kraus(&QuantumChannel::unitary(u.clone()).unwrap()).unwrap();
            let f = average_fidelity(&c, &TargetSupport::for_unitary(&u).unwrap()).unwrap();
            assert!((f - 1.0).abs() < 1e-10, "{f}");
        }
    }

    #[test]
    fn comparison_examples() {
        let id = chi("identity", 2);
        assert!((chi_comparison_fidelity(&id, &id).unwrap().fidelity - 1.0).abs() < 1e-10);
        assert!(chi_comparison_fidelity(&id, &chi("controlled_uc", 2)).unwrap().fidelity.abs() < 1e-10);
        let dep = chi_from_kraus(&builtin_channel("depolarizing", 1, &ChannelParams::from_pairs([("p", 1.0)])).unwrap()).unwrap();
        let f = chi_comparison_fidelity(&chi("identity", 1), &dep).unwrap();
        assert!((f.fidelity - 0.25).abs() < 1e-10);
    }

    #[test]
    fn comparison_is_symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let a = chi_from_kraus(&random_channel(1, 2, &mut rng).unwrap()).unwrap();
            let b = chi_from_kraus(&random_channel(1, 3, &mut rng).unwrap()).unwrap();
            let f1 = chi_comparison_fidelity(&a, &b).unwrap().fidelity;
            let f2 = chi_comparison_fidelity(&b, &a).unwrap().fidelity;
            assert!((f1 - f2).abs() < 1e-8 && (0.0..=1.0 + 1e-9).contains(&f1));
        }
    }

    #[test]
    fn projection_clips_negative_weight() {
        let mut m = DMatrix::<C64>::zeros(4, 4);
        m[(0, 0)] = C64::new(1.1, 0.0);
        m[(1, 1)] = C64::new(-0.1, 0.0);
        let (p, w) = psd_project(&m);
        assert!((w - 0.1).abs() < 1e-12);
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-12);
        let bad = ChiMatrix::from_entries(1, {
            let mut x = m.clone();
            x[(0, 1)] = C64::new(0.5, 0.0);
            x
        })
        .unwrap();
        assert!(chi_comparison_fidelity(&bad, &bad).is_err());
    }
}
