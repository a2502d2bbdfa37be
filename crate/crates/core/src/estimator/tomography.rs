use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::element::Estimator;
use super::plan::SamplingPlan;
use super::settings::{enumerate_settings, upper_triangle, DedupReport};
use crate::channels::{ChiMatrix, QuantumChannel};
use crate::design::MubDesign;
use crate::error::Result;
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElementRecord {
    pub a: String,
    pub b: String,
    pub value_re: f64,
    pub value_im: f64,
    pub std_error: f64,
    /// `(m, re, im)`.
    pub trace: Vec<(usize, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TomographyReport {
    pub dedup: DedupReport,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub elements: Vec<ElementRecord>,
}

/// Estimates every `χ_ab` with `a ≤ b` and fills the rest by Hermiticity.
/// Diagonal entries are stored as real numbers.
pub fn full_tomography(channel: &QuantumChannel, plan: &SamplingPlan, design: &MubDesign) -> Result<(ChiMatrix, TomographyReport)> {
    let est = Estimator::new(channel, design)?;
    tomography_with(&est, plan)
}

pub(crate) fn tomography_with(est: &Estimator, plan: &SamplingPlan) -> Result<(ChiMatrix, TomographyReport)> {
    let design = est.design();
    let pairs = upper_triangle(design.n());
    let dedup = enumerate_settings(&pairs, design)?;
    est.bank().prefetch(dedup.settings.iter().map(|s| s.key))?;

    let results = pairs.par_iter().map(|&(a, b)| est.element(a, b, plan)).collect::<Result<Vec<_>>>()?;

    let d2 = design.dim() * design.dim();
    let mut chi = DMatrix::<C64>::zeros(d2, d2);
    let mut elements = Vec::with_capacity(pairs.len());
    for (&(a, b), r) in pairs.iter().zip(&results) {
        let (i, j) = (a.value(), b.value());
        if i == j {
            chi[(i, i)] = C64::new(r.value.re, 0.0);
        } else {
            chi[(i, j)] = r.value;
            chi[(j, i)] = r.value.conj();
        }
        elements.push(ElementRecord {
            a: a.label(),
            b: b.label(),
            value_re: r.value.re,
            value_im: if i == j { 0.0 } else { r.value.im },
            std_error: r.std_error,
            trace: r.trace.iter().map(|&(m, v)| (m, v.re, v.im)).collect(),
        });
    }
    let report = TomographyReport { dedup: dedup.report, m: plan.m(), k: plan.k(), seed: plan.seed(), elements };
    Ok((ChiMatrix::from_entries(design.n(), chi)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{builtin_channel, chi_from_kraus, ChannelParams};
    use crate::estimator::Shots;

    fn full_plan() -> SamplingPlan {
        SamplingPlan::new(20, Shots::Exact, 0, 20).unwrap()
    }

    fn max_diff(a: &ChiMatrix, b: &ChiMatrix) -> f64 {
        (a.entries() - b.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_reconstruction() {
        let d = MubDesign::build(2).unwrap();
        let (chi, report) = full_tomography(&QuantumChannel::identity(2).unwrap(), &full_plan(), &d).unwrap();
        assert!((chi.entries()[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-9);
        let rest = chi.entries().iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);
        assert!(rest < 1e-9);
        assert_eq!(report.elements.len(), 136);
        assert_eq!(chi.hermitian_deviation(), 0.0);
    }

    #[test]
    fn noisy_uc_reconstruction() {
        let d = MubDesign::build(2).unwrap();
        let ch = builtin_channel("noisy_uc", 2, &ChannelParams::from_pairs([("p", 0.3)])).unwrap();
        let (chi, report) = full_tomography(&ch, &full_plan(), &d).unwrap();
        assert!(max_diff(&chi, &chi_from_kraus(&ch).unwrap()) < 1e-9);
        assert_eq!(report.dedup.probabilities_measured, 560);
    }
}
