use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::bank::MeasurementBank;
use super::plan::{error_bound, EstimationResult, SamplingPlan, Shots};
use super::settings::SettingKey;
use crate::channels::QuantumChannel;
use crate::clifford::{compile_prep, PhaseTurn};
use crate::design::MubDesign;
use crate::error::{Error, Result};
use crate::pauli::{phase_value, PauliIndex};
use crate::C64;

/// One measured probability entering a per-state term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contribution {
    pub key: SettingKey,
    pub outcome: usize,
    pub coeff: C64,
    /// Raw squared norm of the preparation (1 for a translated design state).
    pub weight: f64,
}

/// Per design state, an affine function `constant + Σ coeff·p` of measured
/// probabilities whose design average is the target quantity.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct LinearTerm {
    pub constant: C64,
    pub parts: Vec<Contribution>,
}

impl LinearTerm {
    fn eval(&self, mut p: impl FnMut(&Contribution) -> Result<f64>) -> Result<C64> {
        let mut acc = self.constant;
        for c in &self.parts {
            acc += c.coeff * p(c)?;
        }
        Ok(acc)
    }

    /// Merges parts sharing a measured probability and drops cancelled ones.
    fn normalize(mut self) -> Self {
        let mut merged: BTreeMap<(SettingKey, usize), Contribution> = BTreeMap::new();
        for c in self.parts.drain(..) {
            merged
                .entry((c.key, c.outcome))
                .and_modify(|m| m.coeff += c.coeff)
                .or_insert(c);
        }
        self.parts = merged.into_values().filter(|c| c.coeff.norm() > 1e-15).collect();
        self
    }

    pub(crate) fn scaled(&self, s: C64) -> Self {
        LinearTerm {
            constant: self.constant * s,
            parts: self.parts.iter().map(|c| Contribution { coeff: c.coeff * s, ..*c }).collect(),
        }
    }

    pub(crate) fn conj(&self) -> Self {
        LinearTerm {
            constant: self.constant.conj(),
            parts: self.parts.iter().map(|c| Contribution { coeff: c.coeff.conj(), ..*c }).collect(),
        }
    }

    pub(crate) fn add(&mut self, other: &LinearTerm) {
        self.constant += other.constant;
        self.parts.extend_from_slice(&other.parts);
    }

    pub(crate) fn finish(self) -> Self {
        self.normalize()
    }
}

/// The measurements behind one element `χ_ab`, grouped by design state.
#[derive(Clone, Debug)]
pub struct ElementTerms {
    a: PauliIndex,
    b: PauliIndex,
    /// Per-state terms already mapped to `χ` units.
    pub(crate) per_state: Vec<LinearTerm>,
}

impl ElementTerms {
    pub fn build(design: &MubDesign, a: PauliIndex, b: PauliIndex) -> Result<Self> {
        for idx in [a, b] {
            if idx.n() != design.n() {
                return Err(Error::Dimension { expected: design.n(), found: idx.n() });
            }
        }
        let d = design.dim() as f64;
        let scale = C64::new((d + 1.0) / d, 0.0);
        let delta = if a == b { 1.0 / d } else { 0.0 };
        let per_state = (0..design.k())
            .map(|j| {
                let (alpha, i) = design.coords(j)?;
                let mut parts = Vec::new();
                if a == b {
                    let (ip, _) = design.translate(alpha, i, a)?;
                    parts.push(Contribution { key: SettingKey::new(alpha, ip, ip, 0), outcome: i, coeff: scale, weight: 1.0 });
                } else {
                    for beta in PhaseTurn::ALL {
                        let prog = compile_prep(design, alpha, i, a, b, beta)?;
                        let Some((lo, hi, g)) = prog.canonical_pair() else { continue };
                        let coeff = phase_value(beta.quarter_turns()) * (prog.squared_norm / 4.0) * scale;
                        parts.push(Contribution { key: SettingKey::new(alpha, lo, hi, g), outcome: i, coeff, weight: prog.squared_norm });
                    }
                }
                Ok(LinearTerm { constant: C64::new(-delta, 0.0), parts }.normalize())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { a, b, per_state })
    }

    pub fn a(&self) -> PauliIndex {
        self.a
    }

    pub fn b(&self) -> PauliIndex {
        self.b
    }

    /// Distinct settings touched, with the weight of their first preparation.
    pub fn settings(&self) -> impl Iterator<Item = (SettingKey, f64)> + '_ {
        self.per_state.iter().flat_map(|t| t.parts.iter().map(|c| (c.key, c.weight)))
    }

    pub fn keys(&self) -> impl Iterator<Item = SettingKey> + '_ {
        self.settings().map(|(k, _)| k)
    }
}

/// `χ_ab` from the full design sum `F_ab = (1/K) Σ_j ⟨φ_j|Λ(E_a†|φ_j⟩⟨φ_j|E_b)|φ_j⟩`,
/// evaluated by dense simulation.
pub fn exact_element(channel: &QuantumChannel, a: PauliIndex, b: PauliIndex, design: &MubDesign) -> Result<C64> {
    if channel.n() != design.n() || a.n() != design.n() || b.n() != design.n() {
        return Err(Error::Dimension { expected: design.n(), found: channel.n().max(a.n()).max(b.n()) });
    }
    let ea = a.operator().to_matrix()?;
    let eb = b.operator().to_matrix()?;
    let mut total = C64::new(0.0, 0.0);
    for phi in design.states()? {
        let v = phi.amplitudes();
        let proj: DMatrix<C64> = v * v.adjoint();
        let out = channel.apply_operator(&(ea.adjoint() * proj * &eb))?;
        total += v.dotc(&(out * v));
    }
    let d = design.dim() as f64;
    let f = total / design.k() as f64;
    let delta = if a == b { 1.0 } else { 0.0 };
    Ok((f * (d + 1.0) - delta) / d)
}

/// Evaluates per-state terms on a plan: the sampled average, its running
/// trace and the standard error.
///
/// Averages are accumulated in ascending design index so that the full plan
/// gives the same bits for every seed.
pub(crate) fn evaluate(terms: &[LinearTerm], plan: &SamplingPlan, bank: &MeasurementBank) -> Result<EstimationResult> {
    let k = terms.len();
    if plan.k() != k {
        return Err(Error::InvalidPlan(format!("plan covers {} states, design has {k}", plan.k())));
    }
    bank.prefetch(terms.iter().flat_map(|t| t.parts.iter().map(|c| c.key)))?;

    let exact_p = |c: &Contribution| -> Result<f64> { Ok(bank.exact(c.key)?[c.outcome]) };
    let population = terms.iter().map(|t| t.eval(exact_p)).collect::<Result<Vec<_>>>()?;
    let pop_mean = population.iter().sum::<C64>() / k as f64;
    let sigma = (population.iter().map(|v| (v - pop_mean).norm_sqr()).sum::<f64>() / k as f64).sqrt();

    let (shots, seed) = (plan.shots(), plan.seed());
    let sample = plan.sample();
    let mut values: BTreeMap<usize, C64> = BTreeMap::new();
    let mut shot_var = 0.0;
    let mut trace = Vec::with_capacity(sample.len());
    for (step, &j) in sample.iter().enumerate() {
        let v = match shots {
            Shots::Exact => population[j],
            Shots::Finite(_) => terms[j].eval(|c| bank.measured(c.key, c.outcome, shots, seed))?,
        };
        if let Shots::Finite(s) = shots {
            for c in &terms[j].parts {
                let p = bank.exact(c.key)?[c.outcome];
                shot_var += c.coeff.norm_sqr() * p * (1.0 - p) / s as f64;
            }
        }
        values.insert(j, v);
        trace.push((step + 1, values.values().sum::<C64>() / (step + 1) as f64));
    }
    let m = sample.len();
    let value = trace.last().map(|t| t.1).unwrap_or_default();
    let eb = error_bound(m, k)?;
    let std_error = (sigma * sigma * eb * eb + shot_var / (m * m) as f64).sqrt();
    Ok(EstimationResult { value, std_error, m_used: m, k_total: k, trace, seed, population_sigma: sigma })
}

/// Sampled estimation against one channel, sharing measured probabilities
/// across elements.
#[derive(Debug)]
pub struct Estimator {
    bank: Arc<MeasurementBank>,
}

impl Estimator {
    pub fn new(channel: &QuantumChannel, design: &MubDesign) -> Result<Self> {
        Ok(Self { bank: Arc::new(MeasurementBank::new(channel.clone(), design.clone())?) })
    }

    pub fn bank(&self) -> &MeasurementBank {
        &self.bank
    }

    pub fn design(&self) -> &MubDesign {
        self.bank.design()
    }

    pub fn element(&self, a: PauliIndex, b: PauliIndex, plan: &SamplingPlan) -> Result<EstimationResult> {
        let terms = ElementTerms::build(self.design(), a, b)?;
        evaluate(&terms.per_state, plan, &self.bank)
    }

    pub(crate) fn evaluate(&self, terms: &[LinearTerm], plan: &SamplingPlan) -> Result<EstimationResult> {
        evaluate(terms, plan, &self.bank)
    }
}

pub fn estimate_element(channel: &QuantumChannel, a: PauliIndex, b: PauliIndex, plan: &SamplingPlan, design: &MubDesign) -> Result<EstimationResult> {
    Estimator::new(channel, design)?.element(a, b, plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{builtin_channel, chi_from_kraus, random_channel, ChannelParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn idx(s: &str) -> PauliIndex {
        PauliIndex::parse(s).unwrap()
    }

    fn uc() -> QuantumChannel {
        builtin_channel("controlled_uc", 2, &ChannelParams::default()).unwrap()
    }

    #[test]
    fn exact_examples() {
        let d = MubDesign::build(2).unwrap();
        let id = QuantumChannel::identity(2).unwrap();
        assert!((exact_element(&id, idx("II"), idx("II"), &d).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(exact_element(&id, idx("XY"), idx("XY"), &d).unwrap().norm() < 1e-12);
        assert!((exact_element(&uc(), idx("IZ"), idx("ZZ"), &d).unwrap() - C64::new(-0.25, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn full_plan_matches_exact() {
        let d = MubDesign::build(2).unwrap();
        let est = Estimator::new(&uc(), &d).unwrap();
        let plan = SamplingPlan::new(20, Shots::Exact, 3, 20).unwrap();
        let r = est.element(idx("IZ"), idx("ZZ"), &plan).unwrap();
        assert!((r.value - C64::new(-0.25, 0.0)).norm() < 1e-9);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.trace.len(), 20);

        let id = Estimator::new(&QuantumChannel::identity(2).unwrap(), &d).unwrap();
        let r = id.element(idx("II"), idx("II"), &plan).unwrap();
        assert!((r.value - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn sampled_terms_match_dense_sum_on_random_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2] {
            let d = MubDesign::build(n).unwrap();
            let plan = SamplingPlan::new(d.k(), Shots::Exact, 0, d.k()).unwrap();
            for _ in 0..4 {
                let ch = random_channel(n, 2, &mut rng).unwrap();
                let chi = chi_from_kraus(&ch).unwrap();
                let est = Estimator::new(&ch, &d).unwrap();
                for _ in 0..6 {
                    let a = PauliIndex::new(rng.random_range(0..1 << (2 * n)), n).unwrap();
                    let b = PauliIndex::new(rng.random_range(0..1 << (2 * n)), n).unwrap();
                    let truth = chi.get(a, b);
                    assert!((exact_element(&ch, a, b, &d).unwrap() - truth).norm() < 1e-9);
                    assert!((est.element(a, b, &plan).unwrap().value - truth).norm() < 1e-9, "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn full_plan_is_seed_independent() {
        let d = MubDesign::build(2).unwrap();
        let ch = builtin_channel("noisy_uc", 2, &ChannelParams::from_pairs([("p", 0.3)])).unwrap();
        let est = Estimator::new(&ch, &d).unwrap();
        let first = est.element(idx("XZ"), idx("YI"), &SamplingPlan::new(20, Shots::Exact, 1, 20).unwrap()).unwrap();
        for seed in 2..6 {
            let r = est.element(idx("XZ"), idx("YI"), &SamplingPlan::new(20, Shots::Exact, seed, 20).unwrap()).unwrap();
            assert_eq!(r.value, first.value);
        }
    }

    #[test]
    fn partial_plans_report_scaled_error() {
        let d = MubDesign::build(2).unwrap();
        let est = Estimator::new(&uc(), &d).unwrap();
        let r = est.element(idx("IZ"), idx("ZZ"), &SamplingPlan::new(10, Shots::Exact, 5, 20).unwrap()).unwrap();
        let expected = r.population_sigma * error_bound(10, 20).unwrap();
        assert!((r.std_error - expected).abs() < 1e-15);
        assert!(r.population_sigma > 0.0);
    }

    #[test]
    fn finite_shots_add_variance() {
        let d = MubDesign::build(1).unwrap();
        let ch = builtin_channel("depolarizing", 1, &ChannelParams::from_pairs([("p", 0.4)])).unwrap();
        let est = Estimator::new(&ch, &d).unwrap();
        let plan = SamplingPlan::new(6, Shots::Finite(1000), 4, 6).unwrap();
        let r = est.element(idx("X"), idx("X"), &plan).unwrap();
        assert!(r.std_error > 0.0);
        let truth = exact_element(&ch, idx("X"), idx("X"), &d).unwrap();
        assert!((r.value - truth).norm() < 6.0 * r.std_error);
    }
}
