use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Shot budget per (setting, outcome): exact probabilities or binomial sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shots {
    Exact,
    Finite(u64),
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Finite(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(Shots::Exact);
        }
        match s.parse::<u64>() {
            Ok(0) | Err(_) => Err(Error::Config(format!("shots must be \"exact\" or a positive integer, got {s:?}"))),
            Ok(v) => Ok(Shots::Finite(v)),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Finite(v) => s.serialize_u64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(v) => v.to_string().parse(),
            Raw::Str(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Which design states to visit, in which order, and how they are measured.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingPlan {
    m: usize,
    shots: Shots,
    seed: u64,
    order: Vec<usize>,
}

impl SamplingPlan {
    /// Seed-derived permutation of `[0, k)`; the first `m` entries are used.
    pub fn new(m: usize, shots: Shots, seed: u64, k: usize) -> Result<Self> {
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self::with_order(m, shots, seed, order)
    }

    pub fn with_order(m: usize, shots: Shots, seed: u64, order: Vec<usize>) -> Result<Self> {
        let k = order.len();
        if m == 0 || m > k {
            return Err(Error::InvalidPlan(format!("m = {m} must lie in [1, {k}]")));
        }
        let mut seen = vec![false; k];
        for &j in &order {
            if j >= k || std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidPlan("order is not a permutation".into()));
            }
        }
        Ok(Self { m, shots, seed, order })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.order.len()
    }

    pub fn shots(&self) -> Shots {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Visited design indices, in visiting order.
    pub fn sample(&self) -> &[usize] {
        &self.order[..self.m]
    }
}

/// Finite-population scaling `√((1/m)(1 − (m−1)/(k−1)))` of the sampling error.
pub fn error_bound(m: usize, k: usize) -> Result<f64> {
    if m == 0 || m > k {
        return Err(Error::InvalidPlan(format!("error bound needs 1 <= m <= k, got m = {m}, k = {k}")));
    }
    if k == 1 {
        return Ok(0.0);
    }
    let (m, k) = (m as f64, k as f64);
    Ok(((1.0 / m) * (1.0 - (m - 1.0) / (k - 1.0))).max(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationResult {
    pub value: C64,
    pub std_error: f64,
    pub m_used: usize,
    pub k_total: usize,
    /// `(m, running estimate)` after each visited design state.
    pub trace: Vec<(usize, C64)>,
    pub seed: u64,
    /// Population standard deviation of the per-state terms, in the units of `value`.
    pub population_sigma: f64,
}
