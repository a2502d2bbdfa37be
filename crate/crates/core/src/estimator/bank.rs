use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use super::plan::Shots;
use super::settings::{splitmix64, SettingKey};
use crate::channels::QuantumChannel;
use crate::design::MubDesign;
use crate::error::{Error, Result};
use crate::dense::StateVector;

/// Outcome probabilities per setting for one channel, computed once and shared
/// by every element, seed and thread.
#[derive(Debug)]
pub struct MeasurementBank {
    channel: QuantumChannel,
    design: MubDesign,
    cache: Mutex<HashMap<SettingKey, Arc<[f64]>>>,
}

impl MeasurementBank {
    pub fn new(channel: QuantumChannel, design: MubDesign) -> Result<Self> {
        if channel.n() != design.n() {
            return Err(Error::Dimension { expected: design.n(), found: channel.n() });
        }
        Ok(Self { channel, design, cache: Mutex::new(HashMap::new()) })
    }

    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    pub fn design(&self) -> &MubDesign {
        &self.design
    }

    fn compute(&self, key: SettingKey) -> Result<Arc<[f64]>> {
        let n = self.design.n();
        let psi = key.circuit(&self.design)?.apply(&StateVector::basis(n, 0)?)?;
        let undo = self.design.basis(key.alpha)?.circuit().inverse();
        let mut probs = vec![0.0; self.design.dim()];
        for k in self.channel.kraus() {
            let mut v = k * psi.amplitudes();
            undo.apply_in_place(&mut v)?;
            for (p, a) in probs.iter_mut().zip(v.iter()) {
                *p += a.norm_sqr();
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 || probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::NumericalIntegrity(format!("outcome probabilities for {key:?} sum to {total}")));
        }
        Ok(probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect())
    }

    /// Exact outcome distribution of a setting.
    pub fn exact(&self, key: SettingKey) -> Result<Arc<[f64]>> {
        if let Some(p) = self.cache.lock().expect("bank lock").get(&key) {
            return Ok(p.clone());
        }
        let p = self.compute(key)?;
        self.cache.lock().expect("bank lock").insert(key, p.clone());
        Ok(p)
    }

    /// Fills the cache for `keys` in parallel.
    pub fn prefetch(&self, keys: impl IntoIterator<Item = SettingKey>) -> Result<()> {
        let missing: Vec<SettingKey> = {
            let cache = self.cache.lock().expect("bank lock");
            let mut v: Vec<_> = keys.into_iter().filter(|k| !cache.contains_key(k)).collect();
            v.sort();
            v.dedup();
            v
        };
        let computed = missing.par_iter().map(|&k| self.compute(k).map(|p| (k, p))).collect::<Result<Vec<_>>>()?;
        self.cache.lock().expect("bank lock").extend(computed);
        Ok(())
    }

    /// Probability of `outcome` as reported by the experiment: exact, or a
    /// binomial frequency whose stream depends only on `(seed, key, outcome)`.
    pub fn measured(&self, key: SettingKey, outcome: usize, shots: Shots, seed: u64) -> Result<f64> {
        let p = *self.exact(key)?.get(outcome).ok_or(Error::IndexOutOfRange { index: outcome, bound: self.design.dim() })?;
        match shots {
            Shots::Exact => Ok(p),
            Shots::Finite(s) => {
                let stream = splitmix64(seed ^ key.stable_hash() ^ splitmix64(outcome as u64));
                let mut rng = ChaCha8Rng::seed_from_u64(stream);
                let dist = Binomial::new(s, p).map_err(|e| Error::NumericalIntegrity(format!("binomial draw: {e}")))?;
                Ok(dist.sample(&mut rng) as f64 / s as f64)
            }
        }
    }

    pub fn cached_settings(&self) -> usize {
        self.cache.lock().expect("bank lock").len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::builtin_channel;
    use crate::channels::ChannelParams;

    #[test]
    fn identity_is_deterministic_on_design_states() {
        let design = MubDesign::build(2).unwrap();
        let bank = MeasurementBank::new(QuantumChannel::identity(2).unwrap(), design).unwrap();
        for alpha in 0..5 {
            let p = bank.exact(SettingKey::new(alpha, 2, 2, 0)).unwrap();
            assert!((p[2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_shots_are_reproducible() {
        let design = MubDesign::build(2).unwrap();
        let ch = builtin_channel("noisy_uc", 2, &ChannelParams::from_pairs([("p", 0.3)])).unwrap();
        let bank = MeasurementBank::new(ch, design).unwrap();
        let key = SettingKey::new(3, 0, 3, 1);
        let a = bank.measured(key, 1, Shots::Finite(500), 9).unwrap();
        assert_eq!(a, bank.measured(key, 1, Shots::Finite(500), 9).unwrap());
        assert!((0.0..=1.0).contains(&a));
        let draws: Vec<f64> = (0..20).map(|s| bank.measured(key, 1, Shots::Finite(500), s).unwrap()).collect();
        assert!(draws.iter().any(|&d| d != draws[0]));
    }

    #[test]
    fn prefetch_matches_lazy() {
        let design = MubDesign::build(1).unwrap();
        let ch = builtin_channel("depolarizing", 1, &ChannelParams::from_pairs([("p", 0.2)])).unwrap();
        let bank = MeasurementBank::new(ch.clone(), design.clone()).unwrap();
        let keys = [SettingKey::new(1, 0, 1, 1), SettingKey::new(2, 1, 1, 0)];
        bank.prefetch(keys).unwrap();
        assert_eq!(bank.cached_settings(), 2);
        let lazy = MeasurementBank::new(ch, design).unwrap();
        for k in keys {
            assert_eq!(bank.exact(k).unwrap(), lazy.exact(k).unwrap());
        }
    }
}
