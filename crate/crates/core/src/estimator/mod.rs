//! Estimation of process-matrix elements from survival probabilities of
//! 2-design states.
//!
//! For `a = b` the input state is `E_a|φ_j⟩`, itself a design state by the
//! translation rule. For `a ≠ b` four compiled preparations
//! `(E_a + i^β E_b)|φ_j⟩`, `β ∈ {0, 1, 2, 3}`, are weighted by their raw
//! squared norms `N_β`, giving the per-state term
//!
//! ```text
//! t_j = (N_0 p_0 − N_2 p_2)/4 + i (N_1 p_1 − N_3 p_3)/4
//! ```
//!
//! whose design average is `F_ab`, and `χ_ab = ((D+1) F_ab − δ_ab)/D`.

mod bank;
mod element;
mod fidelity;
mod plan;
mod settings;
mod tomography;

pub use bank::MeasurementBank;
pub use element::{exact_element, estimate_element, Contribution, ElementTerms, Estimator};
pub use fidelity::{fidelity_to_target, FidelityEstimate};
pub use plan::{error_bound, EstimationResult, SamplingPlan, Shots};
pub use settings::{enumerate_settings, DedupReport, ExperimentSetting, SettingEnumeration, SettingKey};
pub use tomography::{full_tomography, ElementRecord, TomographyReport};
