use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::channels::{ChannelSpec, QuantumChannel};
use crate::design::PARTITION_LIMIT;
use crate::error::{Error, Result};
use crate::estimator::{SamplingPlan, Shots};
use crate::pauli::PauliIndex;
use crate::C64;
use nalgebra::DMatrix;

fn default_n() -> usize {
    2
}

fn default_channel() -> ChannelSpec {
    ChannelSpec::named("controlled_uc")
}

fn default_shots() -> Shots {
    Shots::Exact
}

fn default_orders() -> usize {
    10
}

/// One run of the harness. Every field has a default so that the resolved
/// config can be echoed into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: String,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_channel")]
    pub channel: ChannelSpec,
    /// Samples per element; the full design when absent.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "default_shots")]
    pub shots: Shots,
    #[serde(default)]
    pub seed: u64,
    /// Sampling orders for the convergence task.
    #[serde(default = "default_orders")]
    pub orders: usize,
    #[serde(default)]
    pub a: Option<String>,
    #[serde(default)]
    pub b: Option<String>,
    #[serde(default)]
    pub target: Option<ChannelSpec>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn for_task(task: &str) -> Self {
        Self::from_value(Value::Object(Map::from_iter([("task".to_string(), Value::String(task.into()))]))).expect("defaults are valid")
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        Ok(cfg)
    }

    /// Reads a JSON config (if any) and lays `overrides` over its top-level keys.
    /// A `channel_params` override is merged into the configured channel parameters.
    pub fn load(path: Option<&Path>, overrides: Map<String, Value>) -> Result<Self> {
        Self::load_with_fallbacks(path, overrides, Map::new())
    }

    /// Like [`RunConfig::load`], with `fallbacks` filling keys that neither the
    /// file nor the overrides set.
    pub fn load_with_fallbacks(path: Option<&Path>, overrides: Map<String, Value>, fallbacks: Map<String, Value>) -> Result<Self> {
        let mut base = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
                match serde_json::from_str::<Value>(&text).map_err(|e| Error::Config(format!("config {} is not JSON: {e}", p.display())))? {
                    Value::Object(m) => m,
                    _ => return Err(Error::Config("config must be a JSON object".into())),
                }
            }
            None => Map::new(),
        };
        for (k, v) in overrides {
            match (k.as_str(), base.get_mut("channel"), v) {
                ("channel_params", Some(Value::Object(ch)), Value::Object(params)) => {
                    let slot = ch.entry("params").or_insert_with(|| Value::Object(Map::new()));
                    if let Value::Object(existing) = slot {
                        existing.extend(params);
                    }
                }
                ("channel_params", _, Value::Object(params)) => {
                    base.insert("channel".into(), serde_json::json!({ "name": "controlled_uc", "params": params }));
                }
                (_, _, v) => {
                    base.insert(k, v);
                }
            }
        }
        for (k, v) in fallbacks {
            base.entry(k).or_insert(v);
        }
        let cfg = Self::from_value(Value::Object(base))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn k(&self) -> usize {
        let d = 1usize << self.n;
        d * (d + 1)
    }

    pub fn check(&self) -> Result<()> {
        if self.n == 0 || self.n > PARTITION_LIMIT {
            return Err(Error::UnsupportedSize { n: self.n, limit: PARTITION_LIMIT });
        }
        if let Some(m) = self.m {
            if m == 0 || m > self.k() {
                return Err(Error::Config(format!("m = {m} must lie in [1, {}] for n = {}", self.k(), self.n)));
            }
        }
        if self.orders == 0 {
            return Err(Error::Config("orders must be positive".into()));
        }
        Ok(())
    }

    pub fn plan(&self, seed: u64) -> Result<SamplingPlan> {
        SamplingPlan::new(self.m.unwrap_or(self.k()), self.shots, seed, self.k())
    }

    pub fn build_channel(&self) -> Result<QuantumChannel> {
        self.channel.build(self.n)
    }

    pub fn element(&self) -> Result<(PauliIndex, PauliIndex)> {
        let get = |v: &Option<String>, flag: &str| -> Result<PauliIndex> {
            let label = v.as_deref().ok_or_else(|| Error::Config(format!("the element task needs `{flag}`")))?;
            let idx = PauliIndex::parse(label)?;
            if idx.n() != self.n {
                return Err(Error::Config(format!("label {label:?} has {} qubits, config has n = {}", idx.n(), self.n)));
            }
            Ok(idx)
        };
        Ok((get(&self.a, "a")?, get(&self.b, "b")?))
    }

    pub fn target_unitary(&self) -> Result<(String, DMatrix<C64>)> {
        let spec = self.target.clone().unwrap_or_else(|| ChannelSpec::named("controlled_uc"));
        let ch = spec.build(self.n)?;
        let u = ch.as_unitary().cloned().ok_or_else(|| Error::Config(format!("target {} is not a unitary channel", spec.label())))?;
        Ok((spec.label(), u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn overrides(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::for_task("full");
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.shots, Shots::Exact);
        assert_eq!(cfg.plan(0).unwrap().m(), 20);
    }

    #[test]
    fn flags_override_file_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"task": "element", "m": 5, "seed": 3, "channel": {"name": "noisy_uc", "params": {"p": 0.1}}}"#).unwrap();
        let cfg = RunConfig::load(Some(&path), overrides(json!({"m": 8, "channel_params": {"p": 0.4}}))).unwrap();
        assert_eq!(cfg.m, Some(8));
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.channel, serde_json::from_value(json!({"name": "noisy_uc", "params": {"p": 0.4}})).unwrap());
    }

    #[test]
    fn fallbacks_only_fill_gaps() {
        let fb = overrides(json!({"seed": 9}));
        let cfg = RunConfig::load_with_fallbacks(None, overrides(json!({"task": "full"})), fb.clone()).unwrap();
        assert_eq!(cfg.seed, 9);
        let cfg = RunConfig::load_with_fallbacks(None, overrides(json!({"task": "full", "seed": 4})), fb).unwrap();
        assert_eq!(cfg.seed, 4);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(RunConfig::load(None, overrides(json!({"task": "full", "m": 21}))), Err(Error::Config(_))));
        assert!(matches!(RunConfig::load(None, overrides(json!({"task": "full", "bogus": 1}))), Err(Error::Config(_))));
        assert!(RunConfig::load(None, overrides(json!({"task": "full", "n": 9}))).is_err());
        assert!(RunConfig::load(None, overrides(json!({"task": "full", "shots": 0}))).is_err());
        let cfg = RunConfig::load(None, overrides(json!({"task": "element", "a": "XY"}))).unwrap();
        assert!(cfg.element().is_err());
        let cfg = RunConfig::load(None, overrides(json!({"task": "fidelity", "target": {"name": "noisy_uc", "params": {"p": 0.2}}}))).unwrap();
        assert!(matches!(cfg.target_unitary(), Err(Error::Config(_))));
    }
}
