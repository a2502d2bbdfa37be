use std::fmt::Write as _;

use serde_json::{json, Value};

use super::{RunConfig, Task, TaskOutput};
use crate::channels::{average_fidelity, chi_comparison_fidelity, chi_from_kraus, kraus_from_chi, TargetSupport, TP_TOL};
use crate::clifford::{compile_prep, PhaseTurn};
use crate::dense::{RawState, StateVector};
use crate::design::MubDesign;
use crate::error::Result;
use crate::estimator::{enumerate_settings, exact_element, fidelity_to_target, full_tomography, Estimator};
use crate::pauli::{phase_value, PauliIndex};

pub(super) fn builtins() -> Vec<Box<dyn Task>> {
    vec![Box::new(Full), Box::new(Element), Box::new(Fidelity), Box::new(Convergence), Box::new(Validate), Box::new(DesignInfo)]
}

fn base_report(task: &str, config: &RunConfig) -> Result<serde_json::Map<String, Value>> {
    let mut m = serde_json::Map::new();
    m.insert("task".into(), json!(task));
    m.insert("config".into(), serde_json::to_value(config)?);
    Ok(m)
}

struct Full;

impl Task for Full {
    fn name(&self) -> &'static str {
        "full"
    }

    fn summary(&self) -> &'static str {
        "estimate every process-matrix element and compare with the exact matrix"
    }

    fn run(&self, config: &RunConfig) -> Result<TaskOutput> {
        let channel = config.build_channel()?;
        let design = MubDesign::build(config.n)?;
        let plan = config.plan(config.seed)?;
        let (chi, report) = full_tomography(&channel, &plan, &design)?;
        let truth = chi_from_kraus(&channel)?;
        let max_error = (chi.entries() - truth.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let comparison = chi_comparison_fidelity(&chi, &truth)?;

        let mut csv = String::from("a,b,re,im,abs\n");
        let labels: Vec<String> = PauliIndex::all(config.n).map(|p| p.label()).collect();
        for (i, a) in labels.iter().enumerate() {
            for (j, b) in labels.iter().enumerate() {
                let z = chi.entries()[(i, j)];
                writeln!(csv, "{a},{b},{},{},{}", z.re, z.im, z.norm()).expect("string write");
            }
        }

        let mut r = base_report(self.name(), config)?;
        r.insert("channel".into(), json!(config.channel.label()));
        r.insert("dedup".into(), serde_json::to_value(&report.dedup)?);
        r.insert("m".into(), json!(report.m));
        r.insert("k".into(), json!(report.k));
        r.insert("seed".into(), json!(report.seed));
        r.insert("hermitian_deviation".into(), json!(chi.hermitian_deviation()));
        r.insert("max_error_vs_exact".into(), json!(max_error));
        r.insert("comparison".into(), serde_json::to_value(&comparison)?);
        r.insert("elements".into(), serde_json::to_value(&report.elements)?);
        Ok(TaskOutput { report: Value::Object(r), files: vec![("chi.csv".into(), csv)], healthy: chi.hermitian_deviation() == 0.0 })
    }
}

struct Element;

impl Task for Element {
    fn name(&self) -> &'static str {
        "element"
    }

    fn summary(&self) -> &'static str {
        "estimate a single process-matrix element"
    }

    fn run(&self, config: &RunConfig) -> Result<TaskOutput> {
        let (a, b) = config.element()?;
        let channel = config.build_channel()?;
        let design = MubDesign::build(config.n)?;
        let plan = config.plan(config.seed)?;
        let est = Estimator::new(&channel, &design)?;
        let r = est.element(a, b, &plan)?;
        let dedup = enumerate_settings(&[(a, b)], &design)?.report;
        let exact = exact_element(&channel, a, b, &design)?;

        let mut out = base_report(self.name(), config)?;
        out.insert("element".into(), json!([a.label(), b.label()]));
        out.insert("value_re".into(), json!(r.value.re));
        out.insert("value_im".into(), json!(r.value.im));
        out.insert("std_error".into(), json!(r.std_error));
        out.insert("m".into(), json!(r.m_used));
        out.insert("k".into(), json!(r.k_total));
        out.insert("trace".into(), json!(r.trace.iter().map(|&(m, v)| json!([m, v.re, v.im])).collect::<Vec<_>>()));
        out.insert("settings_naive".into(), json!(dedup.naive_probabilities));
        out.insert("settings_deduped".into(), json!(dedup.settings_deduped));
        out.insert("probabilities_measured".into(), json!(dedup.probabilities_measured));
        out.insert("seed".into(), json!(r.seed));
        out.insert("population_sigma".into(), json!(r.population_sigma));
        out.insert("exact_re".into(), json!(exact.re));
        out.insert("exact_im".into(), json!(exact.im));
        Ok(TaskOutput { report: Value::Object(out), files: Vec::new(), healthy: true })
    }
}

struct Fidelity;

impl Task for Fidelity {
    fn name(&self) -> &'static str {
        "fidelity"
    }

    fn summary(&self) -> &'static str {
        "estimate the average fidelity to a unitary target"
    }

    fn run(&self, config: &RunConfig) -> Result<TaskOutput> {
        let channel = config.build_channel()?;
        let (target_name, u) = config.target_unitary()?;
        let design = MubDesign::build(config.n)?;
        let f = fidelity_to_target(&channel, &u, &config.plan(config.seed)?, &design)?;
        let exact = average_fidelity(&chi_from_kraus(&channel)?, &TargetSupport::for_unitary(&u)?)?;
        let mut out = base_report(self.name(), config)?;
        out.insert("channel".into(), json!(config.channel.label()));
        out.insert("target".into(), json!(target_name));
        out.insert("exact".into(), json!(exact));
        out.insert("estimate".into(), serde_json::to_value(&f)?);
        Ok(TaskOutput { report: Value::Object(out), files: Vec::new(), healthy: true })
    }
}

struct Convergence;

impl Task for Convergence {
    fn name(&self) -> &'static str {
        "convergence"
    }

    fn summary(&self) -> &'static str {
        "fidelity traces over several sampling orders with their error envelope"
    }

    fn run(&self, config: &RunConfig) -> Result<TaskOutput> {
        let channel = config.build_channel()?;
        let (target_name, u) = config.target_unitary()?;
        let design = MubDesign::build(config.n)?;
        let exact = average_fidelity(&chi_from_kraus(&channel)?, &TargetSupport::for_unitary(&u)?)?;
        let mut files = Vec::new();
        let mut orders = Vec::new();
        let (mut inside, mut points) = (0usize, 0usize);
        for o in 0..config.orders {
            let seed = config.seed.wrapping_add(o as u64);
            let f = fidelity_to_target(&channel, &u, &config.plan(seed)?, &design)?;
            let mut csv = String::from("m,estimate,lower_envelope,upper_envelope,seed\n");
            for (&(m, v), &(_, lo, hi)) in f.trace.iter().zip(&f.envelope) {
                writeln!(csv, "{m},{v},{lo},{hi},{seed}").expect("string write");
                if m < f.k_total {
                    points += 1;
                    inside += usize::from(v >= lo - 1e-12 && v <= hi + 1e-12);
                }
            }
            files.push((format!("convergence_order_{o:02}.csv"), csv));
            orders.push(json!({ "seed": seed, "final": f.value, "std_error": f.std_error, "order": o }));
        }
        let mut out = base_report(self.name(), config)?;
        out.insert("channel".into(), json!(config.channel.label()));
        out.insert("target".into(), json!(target_name));
        out.insert("exact".into(), json!(exact));
        out.insert("orders".into(), Value::Array(orders));
        out.insert("intermediate_points".into(), json!(points));
        out.insert("inside_envelope".into(), json!(inside));
        Ok(TaskOutput { report: Value::Object(out), files, healthy: true })
    }
}

struct Validate;

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.value.is_finite() && self.value <= self.tolerance
    }
}

impl Validate {
    fn prep_deviation(design: &MubDesign) -> Result<f64> {
        let n = design.n();
        let all: Vec<PauliIndex> = PauliIndex::all(n).collect();
        let pairs: Vec<(PauliIndex, PauliIndex)> = all.windows(2).map(|w| (w[0], w[1])).chain(all[1..].iter().map(|&b| (all[0], b))).collect();
        let mut worst = 0.0f64;
        for alpha in 0..design.bases().len() {
            for i in 0..design.dim() {
                let phi = design.state(alpha, i)?;
                for &(a, b) in &pairs {
                    for beta in PhaseTurn::ALL {
                        let p = compile_prep(design, alpha, i, a, b, beta)?;
                        let op = a.operator().to_matrix()? + b.operator().to_matrix()? * phase_value(beta.quarter_turns());
                        let raw = RawState::new(op * phi.amplitudes())?;
                        worst = worst.max((p.squared_norm - raw.squared_norm()).abs());
                        if let (Some(c), Some(t)) = (&p.circuit, raw.normalized()) {
                            worst = worst.max(1.0 - c.apply(&StateVector::basis(n, 0)?)?.overlap(&t));
                        }
                    }
                }
            }
        }
        Ok(worst)
    }
}

impl Task for Validate {
    fn name(&self) -> &'static str {
        "validate"
    }

    fn summary(&self) -> &'static str {
        "check channel, process-matrix, design and compiler invariants"
    }

    fn run(&self, config: &RunConfig) -> Result<TaskOutput> {
        let channel = config.build_channel()?;
        let design = MubDesign::build(config.n)?;
        let chi = chi_from_kraus(&channel)?;
        let round_trip = chi_from_kraus(&kraus_from_chi(&chi)?)?;
        let d = design.dim() as f64;
        let diag_gap = PauliIndex::all(config.n)
            .map(|a| exact_element(&channel, a, a, &design).map(|v| (v - chi.get(a, a)).norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let checks = [
            Check { name: "kraus_trace_preservation", value: channel.tp_deviation(), tolerance: TP_TOL },
            Check { name: "chi_hermitian", value: chi.hermitian_deviation(), tolerance: 1e-10 },
            Check { name: "chi_positive", value: (-chi.min_eigenvalue()).max(0.0), tolerance: 1e-9 },
            Check { name: "chi_trace_preservation", value: chi.tp_deviation()?, tolerance: 1e-10 },
            Check { name: "chi_unit_trace", value: (chi.trace().re - 1.0).abs() + chi.trace().im.abs(), tolerance: 1e-10 },
            Check {
                name: "chi_kraus_round_trip",
                value: (round_trip.entries() - chi.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max),
                tolerance: 1e-9,
            },
            Check { name: "frame_potential", value: (design.frame_potential()? - 2.0 / (d * (d + 1.0))).abs(), tolerance: 1e-12 },
            Check { name: "mutual_unbiasedness", value: design.unbiasedness_deviation()?, tolerance: 1e-10 },
            Check { name: "design_sum_diagonal", value: diag_gap, tolerance: 1e-9 },
            Check { name: "prep_compiler", value: Self::prep_deviation(&design)?, tolerance: 1e-9 },
        ];
        let healthy = checks.iter().all(Check::pass);
        let mut out = base_report(self.name(), config)?;
        out.insert("channel".into(), json!(config.channel.label()));
        out.insert(
            "checks".into(),
            Value::Array(checks.iter().map(|c| json!({ "check": c.name, "value": c.value, "tolerance": c.tolerance, "pass": c.pass() })).collect()),
        );
        out.insert("all_pass".into(), json!(healthy));
        Ok(TaskOutput { report: Value::Object(out), files: Vec::new(), healthy })
    }
}

struct DesignInfo;

impl Task for DesignInfo {
    fn name(&self) -> &'static str {
        "design-info"
    }

    fn summary(&self) -> &'static str {
        "list the mutually unbiased bases, their generators and circuits"
    }

    fn run(&self, config: &RunConfig) -> Result<TaskOutput> {
        let design = MubDesign::build(config.n)?;
        let mut out = base_report(self.name(), config)?;
        out.insert("design".into(), serde_json::to_value(design.report())?);
        out.insert("frame_potential".into(), json!(design.frame_potential()?));
        out.insert("unbiasedness_deviation".into(), json!(design.unbiasedness_deviation()?));
        Ok(TaskOutput { report: Value::Object(out), files: Vec::new(), healthy: true })
    }
}
