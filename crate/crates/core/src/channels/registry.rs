//! Named channel constructors. Each builtin is a [`ChannelFactory`] registered
//! under its name; configs and the CLI select one at runtime.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::QuantumChannel;
use crate::error::{Error, Result};
use crate::pauli::PauliIndex;
use crate::C64;

/// Free-form constructor parameters, e.g. `{"p": 0.3}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelParams(pub Map<String, Value>);

impl ChannelParams {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Self(pairs.into_iter().map(|(k, v)| (k.to_string(), Value::from(v))).collect())
    }

    pub fn f64_or(&self, name: &str, default: f64) -> Result<f64> {
        match self.0.get(name) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| Error::InvalidParameter { name: name.into(), reason: format!("expected a number, got {v}") }),
        }
    }

    pub fn str_or<'a>(&'a self, name: &str, default: &'a str) -> Result<&'a str> {
        match self.0.get(name) {
            None => Ok(default),
            Some(v) => v.as_str().ok_or_else(|| Error::InvalidParameter { name: name.into(), reason: format!("expected a string, got {v}") }),
        }
    }

    fn probability(&self, name: &str) -> Result<f64> {
        let p = self.f64_or(name, 0.0)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter { name: name.into(), reason: format!("{p} is outside [0, 1]") });
        }
        Ok(p)
    }
}

pub trait ChannelFactory: Send + Sync {
    fn name(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    fn build(&self, n: usize, params: &ChannelParams) -> Result<QuantumChannel>;
}

#[derive(Default)]
pub struct ChannelRegistry {
    factories: BTreeMap<&'static str, Box<dyn ChannelFactory>>,
}

impl ChannelRegistry {
    pub fn with_builtins() -> Self {
        let mut r = Self::default();
        r.register(Box::new(Identity));
        r.register(Box::new(PolarizationUnitary));
        r.register(Box::new(ControlledUc));
        r.register(Box::new(NoisyUc));
        r.register(Box::new(Depolarizing));
        r
    }

    /// Adds a factory, replacing any previous one with the same name.
    pub fn register(&mut self, factory: Box<dyn ChannelFactory>) {
        self.factories.insert(factory.name(), factory);
    }

    pub fn get(&self, name: &str) -> Option<&dyn ChannelFactory> {
        self.factories.get(name).map(|f| f.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn build(&self, name: &str, n: usize, params: &ChannelParams) -> Result<QuantumChannel> {
        self.get(name).ok_or_else(|| Error::UnknownChannel(name.to_string()))?.build(n, params)
    }
}

fn builtins() -> &'static ChannelRegistry {
    static REGISTRY: OnceLock<ChannelRegistry> = OnceLock::new();
    REGISTRY.get_or_init(ChannelRegistry::with_builtins)
}

/// Looks up `name` in the builtin registry.
pub fn builtin_channel(name: &str, n: usize, params: &ChannelParams) -> Result<QuantumChannel> {
    builtins().build(name, n, params)
}

fn require_two_qubits(name: &str, n: usize) -> Result<()> {
    if n != 2 {
        return Err(Error::InvalidParameter { name: "n".into(), reason: format!("{name} acts on 2 qubits, got {n}") });
    }
    Ok(())
}

fn pauli(label: &str) -> DMatrix<C64> {
    PauliIndex::parse(label).and_then(|a| a.operator().to_matrix()).expect("static label")
}

/// `U_c = (I−Z)⊗Z/2 + (I+Z)⊗X/2`: the path qubit (0) selects `X` or `Z` on
/// the polarization qubit (1).
pub fn uc_matrix() -> DMatrix<C64> {
    (pauli("IZ") - pauli("ZZ") + pauli("IX") + pauli("ZX")) * C64::new(0.5, 0.0)
}

struct Identity;

impl ChannelFactory for Identity {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn summary(&self) -> &'static str {
        "the identity process on n qubits"
    }

    fn build(&self, n: usize, _: &ChannelParams) -> Result<QuantumChannel> {
        QuantumChannel::identity(n)
    }
}

/// `I ⊗ exp(−iθσ/2)` on the polarization qubit; params `theta` (default π/2) and `axis` (x|y|z, default y).
struct PolarizationUnitary;

impl ChannelFactory for PolarizationUnitary {
    fn name(&self) -> &'static str {
        "polarization_unitary"
    }

    fn summary(&self) -> &'static str {
        "rotation exp(-i theta sigma/2) of the polarization qubit (params: theta, axis)"
    }

    fn build(&self, n: usize, params: &ChannelParams) -> Result<QuantumChannel> {
        require_two_qubits(self.name(), n)?;
        let theta = params.f64_or("theta", std::f64::consts::FRAC_PI_2)?;
        let axis = match params.str_or("axis", "y")? {
            "x" | "X" => "X",
            "y" | "Y" => "Y",
            "z" | "Z" => "Z",
            other => return Err(Error::InvalidParameter { name: "axis".into(), reason: format!("unknown axis {other:?}") }),
        };
        let rot = pauli("I") * C64::new((theta / 2.0).cos(), 0.0) - pauli(axis) * C64::new(0.0, (theta / 2.0).sin());
        QuantumChannel::unitary(pauli("I").kronecker(&rot))
    }
}

struct ControlledUc;

impl ChannelFactory for ControlledUc {
    fn name(&self) -> &'static str {
        "controlled_uc"
    }

    fn summary(&self) -> &'static str {
        "U_c = (I-Z)(x)Z/2 + (I+Z)(x)X/2"
    }

    fn build(&self, n: usize, _: &ChannelParams) -> Result<QuantumChannel> {
        require_two_qubits(self.name(), n)?;
        QuantumChannel::unitary(uc_matrix())
    }
}

/// `U_c` followed, with probability `p`, by a phase flip of the path qubit.
struct NoisyUc;

impl ChannelFactory for NoisyUc {
    fn name(&self) -> &'static str {
        "noisy_uc"
    }

    fn summary(&self) -> &'static str {
        "U_c with path-qubit dephasing of probability p (params: p)"
    }

    fn build(&self, n: usize, params: &ChannelParams) -> Result<QuantumChannel> {
        require_two_qubits(self.name(), n)?;
        let p = params.probability("p")?;
        let uc = uc_matrix();
        let mut kraus = vec![&uc * C64::new((1.0 - p).sqrt(), 0.0)];
        if p > 0.0 {
            kraus.push(pauli("ZI") * &uc * C64::new(p.sqrt(), 0.0));
        }
        QuantumChannel::new(kraus)
    }
}

/// `ρ ↦ (1−p)ρ + p·I/D`.
struct Depolarizing;

impl ChannelFactory for Depolarizing {
    fn name(&self) -> &'static str {
        "depolarizing"
    }

    fn summary(&self) -> &'static str {
        "rho -> (1-p) rho + p I/D on n qubits (params: p)"
    }

    fn build(&self, n: usize, params: &ChannelParams) -> Result<QuantumChannel> {
        let p = params.probability("p")?;
        crate::dense::check_dense(n)?;
        let d2 = (1usize << (2 * n)) as f64;
        let mut kraus = Vec::new();
        for a in PauliIndex::all(n) {
            let w = if a.value() == 0 { 1.0 - p + p / d2 } else { p / d2 };
            if w > 0.0 {
                kraus.push(a.operator().to_matrix()? * C64::new(w.sqrt(), 0.0));
            }
        }
        QuantumChannel::new(kraus)
    }
}

/// Channel description as it appears in config files: either a registered
/// name with parameters or explicit Kraus matrices of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Named {
        name: String,
        #[serde(default)]
        params: ChannelParams,
    },
    Kraus {
        kraus: Vec<Vec<Vec<[f64; 2]>>>,
    },
}

impl ChannelSpec {
    pub fn named(name: &str) -> Self {
        ChannelSpec::Named { name: name.to_string(), params: ChannelParams::default() }
    }

    pub fn label(&self) -> String {
        match self {
            ChannelSpec::Named { name, .. } => name.clone(),
            ChannelSpec::Kraus { .. } => "kraus".into(),
        }
    }

    pub fn build(&self, n: usize) -> Result<QuantumChannel> {
        match self {
            ChannelSpec::Named { name, params } => builtin_channel(name, n, params),
            ChannelSpec::Kraus { kraus } => {
                let mats = kraus
                    .iter()
                    .map(|rows| {
                        let dim = rows.len();
                        if rows.iter().any(|r| r.len() != dim) {
                            return Err(Error::Config("Kraus matrix must be square".into()));
                        }
                        Ok(DMatrix::from_fn(dim, dim, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let ch = QuantumChannel::new(mats)?;
                if ch.n() != n {
                    return Err(Error::Dimension { expected: n, found: ch.n() });
                }
                Ok(ch)
            }
        }
    }
}
