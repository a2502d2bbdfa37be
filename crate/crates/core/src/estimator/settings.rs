use std::collections::BTreeMap;

use serde::Serialize;

use crate::clifford::{superposition_circuit, CliffordCircuit};
use crate::design::MubDesign;
use crate::error::Result;
use crate::pauli::PauliIndex;

use super::element::ElementTerms;

/// Identifies a prepared state up to global phase together with the basis it
/// is measured in: `V^α (|lo⟩ + i^γ |hi⟩)` measured in basis `α`
/// (`γ = 0` when `lo == hi`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SettingKey {
    pub alpha: usize,
    pub lo: usize,
    pub hi: usize,
    pub gamma: u8,
}

impl SettingKey {
    pub fn new(alpha: usize, lo: usize, hi: usize, gamma: u8) -> Self {
        if lo == hi {
            Self { alpha, lo, hi, gamma: 0 }
        } else {
            Self { alpha, lo, hi, gamma: gamma % 4 }
        }
    }

    /// Preparation circuit (from `|0…0⟩`) for this setting.
    pub fn circuit(&self, design: &MubDesign) -> Result<CliffordCircuit> {
        let basis = design.basis(self.alpha)?;
        superposition_circuit(design.n(), self.lo, self.hi, self.gamma).then(basis.circuit())
    }

    pub fn stable_hash(&self) -> u64 {
        [self.alpha as u64, self.lo as u64, self.hi as u64, self.gamma as u64]
            .into_iter()
            .fold(0x243f_6a88_85a3_08d3, |h, v| splitmix64(h ^ v))
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One physical configuration: prepare, run the channel, measure basis `α`.
/// Each setting yields `D` outcome probabilities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSetting {
    pub key: SettingKey,
    pub measurement_basis: usize,
    /// Raw squared norm of the first preparation mapped to this setting.
    pub weight: f64,
    pub circuit: CliffordCircuit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DedupReport {
    /// Nominal probability count before deduplication.
    pub naive_probabilities: usize,
    pub settings_deduped: usize,
    pub outcomes_per_setting: usize,
    /// Settings × outcomes.
    pub probabilities_measured: usize,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SettingEnumeration {
    pub settings: Vec<ExperimentSetting>,
    pub report: DedupReport,
}

const FULL_TWO_QUBIT_REFERENCE: usize = 560;

/// Expands every element into its (preparation, basis) pairs and merges
/// those that describe the same physical experiment.
///
/// Element pairs are unordered: `(a, b)` and `(b, a)` describe the same
/// complex entry. The nominal count charges one probability per design state
/// for each diagonal element when only diagonal elements are requested, and
/// otherwise a ± pair of probabilities per design state for each real
/// parameter (one per diagonal, two per off-diagonal element).
pub fn enumerate_settings(elements: &[(PauliIndex, PauliIndex)], design: &MubDesign) -> Result<SettingEnumeration> {
    let mut unique: Vec<(PauliIndex, PauliIndex)> = elements.iter().map(|&(a, b)| if a <= b { (a, b) } else { (b, a) }).collect();
    unique.sort();
    unique.dedup();

    let mut found: BTreeMap<SettingKey, f64> = BTreeMap::new();
    for &(a, b) in &unique {
        let terms = ElementTerms::build(design, a, b)?;
        for (key, weight) in terms.settings() {
            found.entry(key).or_insert(weight);
        }
    }
    let settings = found
        .into_iter()
        .map(|(key, weight)| Ok(ExperimentSetting { key, measurement_basis: key.alpha, weight, circuit: key.circuit(design)? }))
        .collect::<Result<Vec<_>>>()?;

    let k = design.k();
    let diagonal = unique.iter().filter(|(a, b)| a == b).count();
    let off = unique.len() - diagonal;
    let naive_probabilities = if off == 0 { diagonal * k } else { (diagonal + 2 * off) * 2 * k };
    let d = design.dim();
    let probabilities_measured = settings.len() * d;

    let full = unique.len() == d * d * (d * d + 1) / 2;
    let note = (design.n() == 2 && full && probabilities_measured != FULL_TWO_QUBIT_REFERENCE).then(|| {
        format!("deduplicated count {probabilities_measured} differs from the reference {FULL_TWO_QUBIT_REFERENCE}; settings are keyed by (basis, unordered computational pair, relative phase)")
    });

    Ok(SettingEnumeration {
        report: DedupReport { naive_probabilities, settings_deduped: settings.len(), outcomes_per_setting: d, probabilities_measured, note },
        settings,
    })
}

/// All `(a, b)` with `a ≤ b`.
pub(crate) fn upper_triangle(n: usize) -> Vec<(PauliIndex, PauliIndex)> {
    let all: Vec<PauliIndex> = PauliIndex::all(n).collect();
    all.iter().enumerate().flat_map(|(i, &a)| all[i..].iter().map(move |&b| (a, b))).collect()
}
