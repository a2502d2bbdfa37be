use nalgebra::DMatrix;
use serde::Serialize;

use super::element::{ElementTerms, Estimator, LinearTerm};
use super::plan::{error_bound, SamplingPlan, Shots};
use crate::channels::{QuantumChannel, TargetSupport};
use crate::design::MubDesign;
use crate::error::Result;
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub m_used: usize,
    pub k_total: usize,
    /// `(m, running estimate)`.
    pub trace: Vec<(usize, f64)>,
    pub seed: u64,
    /// Full-design value.
    pub center: f64,
    /// Population standard deviation of the per-state fidelity terms.
    pub sigma: f64,
    /// `(m, lower, upper)`: `center ± 3σ·error_bound(m, K)`, widened by shot noise.
    pub envelope: Vec<(usize, f64, f64)>,
    /// Distinct elements estimated (`a ≤ b`).
    pub elements_estimated: usize,
    pub support_size: usize,
}

/// Per-state fidelity terms: the overlap with the inverse target, built from
/// the `a ≤ b` elements and Hermiticity.
pub(crate) fn fidelity_terms(target: &TargetSupport, design: &MubDesign) -> Result<Vec<LinearTerm>> {
    let d = design.dim() as f64;
    let mut per_state = vec![LinearTerm::default(); design.k()];
    for (a, b) in target.required_elements() {
        let terms = ElementTerms::build(design, a, b)?;
        let w = target.entries()[&(a, b)];
        let mirror = (a != b).then(|| target.entries().get(&(b, a)).copied().unwrap_or_default());
        for (acc, t) in per_state.iter_mut().zip(&terms.per_state) {
            acc.add(&t.scaled(w));
            if let Some(wm) = mirror {
                acc.add(&t.conj().scaled(wm));
            }
        }
    }
    let (scale, offset) = (d / (d + 1.0), 1.0 / (d + 1.0));
    Ok(per_state
        .into_iter()
        .map(|t| {
            // p is real, so only the real part of each coefficient survives in Re(overlap).
            let mut t = t.finish().scaled(C64::new(scale, 0.0));
            t.constant = C64::new(t.constant.re + offset, 0.0);
            for c in &mut t.parts {
                c.coeff = C64::new(c.coeff.re, 0.0);
            }
            t.finish()
        })
        .collect())
}

/// Average fidelity of `channel` to the unitary `target`, estimating only the
/// elements in the inverse target's support.
pub fn fidelity_to_target(channel: &QuantumChannel, target: &DMatrix<C64>, plan: &SamplingPlan, design: &MubDesign) -> Result<FidelityEstimate> {
    let est = Estimator::new(channel, design)?;
    fidelity_with(&est, target, plan)
}

pub(crate) fn fidelity_with(est: &Estimator, target: &DMatrix<C64>, plan: &SamplingPlan) -> Result<FidelityEstimate> {
    let support = TargetSupport::for_unitary(target)?;
    let design = est.design();
    let terms = fidelity_terms(&support, design)?;
    let r = est.evaluate(&terms, plan)?;
    let k = design.k();

    let full = SamplingPlan::new(k, Shots::Exact, plan.seed(), k)?;
    let center = est.evaluate(&terms, &full)?.value.re;
    let mean_shot_var = match plan.shots() {
        Shots::Exact => 0.0,
        Shots::Finite(s) => {
            let mut total = 0.0;
            for t in &terms {
                for c in &t.parts {
                    let p = est.bank().exact(c.key)?[c.outcome];
                    total += c.coeff.norm_sqr() * p * (1.0 - p) / s as f64;
                }
            }
            total / k as f64
        }
    };
    let sigma = r.population_sigma;
    let envelope = (1..=plan.m())
        .map(|m| {
            let eb = error_bound(m, k)?;
            let half = 3.0 * (sigma * sigma * eb * eb + mean_shot_var / m as f64).sqrt();
            Ok((m, center - half, center + half))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityEstimate {
        value: r.value.re,
        std_error: r.std_error,
        m_used: r.m_used,
        k_total: k,
        trace: r.trace.iter().map(|&(m, v)| (m, v.re)).collect(),
        seed: plan.seed(),
        center,
        sigma,
        envelope,
        elements_estimated: support.required_elements().len(),
        support_size: support.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::uc_matrix;
    use crate::channels::{average_fidelity, builtin_channel, chi_from_kraus, ChannelParams};

    fn full(seed: u64) -> SamplingPlan {
        SamplingPlan::new(20, Shots::Exact, seed, 20).unwrap()
    }

    #[test]
    fn fidelity_examples() {
        let d = MubDesign::build(2).unwrap();
        let id = QuantumChannel::identity(2).unwrap();
        let eye = DMatrix::<C64>::identity(4, 4);
        let uc = builtin_channel("controlled_uc", 2, &ChannelParams::default()).unwrap();
        let noisy = builtin_channel("noisy_uc", 2, &ChannelParams::from_pairs([("p", 0.5)])).unwrap();

        let f = fidelity_to_target(&id, &eye, &full(0), &d).unwrap();
        assert!((f.value - 1.0).abs() < 1e-9);
        assert_eq!(f.elements_estimated, 1);
        assert!((fidelity_to_target(&uc, &eye, &full(0), &d).unwrap().value - 0.2).abs() < 1e-9);
        let f = fidelity_to_target(&noisy, &uc_matrix(), &full(0), &d).unwrap();
        assert!((f.value - 0.6).abs() < 1e-9);
        assert_eq!(f.support_size, 16);
        assert_eq!(f.elements_estimated, 10);
    }

    #[test]
    fn matches_matrix_formula_on_random_targets() {
        use crate::channels::random_channel;
        use crate::dense::haar_random_unitary;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let d = MubDesign::build(1).unwrap();
        for _ in 0..5 {
            let ch = random_channel(1, 2, &mut rng).unwrap();
            let u = haar_random_unitary(1, &mut rng).unwrap();
            let truth = average_fidelity(&chi_from_kraus(&ch).unwrap(), &TargetSupport::for_unitary(&u).unwrap()).unwrap();
            let f = fidelity_to_target(&ch, &u, &SamplingPlan::new(6, Shots::Exact, 1, 6).unwrap(), &d).unwrap();
            assert!((f.value - truth).abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_brackets_center_and_closes() {
        let d = MubDesign::build(2).unwrap();
        let noisy = builtin_channel("noisy_uc", 2, &ChannelParams::from_pairs([("p", 0.3)])).unwrap();
        let f = fidelity_to_target(&noisy, &uc_matrix(), &full(4), &d).unwrap();
        assert_eq!(f.envelope.len(), 20);
        let (_, lo, hi) = f.envelope[19];
        assert_eq!(lo, hi);
        assert!((f.center - 0.76).abs() < 1e-9);
        assert!(f.envelope[0].1 <= f.center && f.center <= f.envelope[0].2);
    }
}
