//! Mutually unbiased bases from a partition of the Pauli group into commuting
//! subgroups, and the `D(D+1)`-state 2-design they form.

use serde::Serialize;

use crate::clifford::{synthesize_basis_circuit, CliffordCircuit, Direction};
use crate::dense::StateVector;
use crate::error::{Error, Result};
use crate::pauli::{PauliIndex, PauliOperator};

/// Largest qubit count for which the partition search is attempted.
pub const PARTITION_LIMIT: usize = 3;

#[derive(Clone, Debug)]
pub struct MubBasis {
    alpha: usize,
    generators: Vec<PauliOperator>,
    circuit: CliffordCircuit,
    elements: Vec<PauliIndex>,
}

impl MubBasis {
    fn new(alpha: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        let circuit = synthesize_basis_circuit(&generators)?;
        let elements = subgroup(&generators).into_iter().skip(1).collect();
        Ok(Self { alpha, generators, circuit, elements })
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    /// Change-of-basis circuit: `circuit · Z_k · circuit† = generators[k]`.
    pub fn circuit(&self) -> &CliffordCircuit {
        &self.circuit
    }

    /// The `D − 1` non-identity members of the commuting subgroup.
    pub fn elements(&self) -> &[PauliIndex] {
        &self.elements
    }
}

/// Phaseless members of the group generated by `gens`, identity first, in
/// the order of the binary expansion over the generators.
fn subgroup(gens: &[PauliOperator]) -> Vec<PauliIndex> {
    let n = gens[0].n();
    (0..1usize << gens.len())
        .map(|mask| {
            gens.iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .fold(PauliOperator::identity(n), |acc, (_, g)| acc.multiply(g).expect("equal sizes"))
                .to_index()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct MubDesign {
    n: usize,
    bases: Vec<MubBasis>,
}

impl MubDesign {
    /// Builds the `D + 1` bases. Basis 0 is always the computational basis.
    pub fn build(n: usize) -> Result<Self> {
        if n == 0 || n > PARTITION_LIMIT {
            return Err(Error::UnsupportedSize { n, limit: PARTITION_LIMIT });
        }
        let generator_sets = if n == 2 { two_qubit_partition() } else { search_partition(n)? };
        let bases = generator_sets
            .into_iter()
            .enumerate()
            .map(|(alpha, g)| MubBasis::new(alpha, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, bases })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Number of design states, `D(D+1)`.
    pub fn k(&self) -> usize {
        self.dim() * (self.dim() + 1)
    }

    pub fn bases(&self) -> &[MubBasis] {
        &self.bases
    }

    pub fn basis(&self, alpha: usize) -> Result<&MubBasis> {
        self.bases.get(alpha).ok_or(Error::IndexOutOfRange { index: alpha, bound: self.bases.len() })
    }

    /// Flat design index `j = α·D + i` split into `(α, i)`.
    pub fn coords(&self, j: usize) -> Result<(usize, usize)> {
        if j >= self.k() {
            return Err(Error::IndexOutOfRange { index: j, bound: self.k() });
        }
        Ok((j / self.dim(), j % self.dim()))
    }

    /// `|φ_i^(α)⟩ = V^α |i⟩`.
    pub fn state(&self, alpha: usize, i: usize) -> Result<StateVector> {
        let basis = self.basis(alpha)?;
        basis.circuit.apply(&StateVector::basis(self.n, i)?)
    }

    /// All design states in flat order.
    pub fn states(&self) -> Result<Vec<StateVector>> {
        (0..self.k()).map(|j| self.coords(j).and_then(|(a, i)| self.state(a, i))).collect()
    }

    /// `E_a|φ_i^(α)⟩ = i^phase |φ_{i'}^(α)⟩`, returning `(i', phase)`.
    ///
    /// `i'` flips bit `k` of `i` for every generator `k` that anticommutes with
    /// `E_a`; the phase comes from pulling `E_a` back through the basis circuit.
    pub fn translate(&self, alpha: usize, i: usize, a: PauliIndex) -> Result<(usize, u8)> {
        let basis = self.basis(alpha)?;
        if i >= self.dim() {
            return Err(Error::IndexOutOfRange { index: i, bound: self.dim() });
        }
        if a.n() != self.n {
            return Err(Error::Dimension { expected: self.n, found: a.n() });
        }
        let e = a.operator();
        let mut i_prime = i;
        for (k, g) in basis.generators.iter().enumerate() {
            if !g.commutes(&e)? {
                i_prime ^= 1 << (self.n - 1 - k);
            }
        }
        let pulled = basis.circuit.conjugate(&e, Direction::Reverse)?;
        let (j, phase) = pulled.apply_to_basis(i);
        if j != i_prime {
            return Err(Error::NumericalIntegrity(format!("translation rule disagrees with tableau for {e} in basis {alpha}")));
        }
        Ok((i_prime, phase))
    }

    /// `(1/K²) Σ_{jk} |⟨φ_j|φ_k⟩|⁴`; equals `2/(D(D+1))` for a 2-design.
    pub fn frame_potential(&self) -> Result<f64> {
        frame_potential_of(&self.states()?)
    }

    /// Largest deviation of `|⟨φ_i^(α)|φ_j^(β)⟩|²` from `1/D` (α ≠ β) or `δ_ij` (α = β).
    pub fn unbiasedness_deviation(&self) -> Result<f64> {
        let states = self.states()?;
        let d = self.dim();
        let mut worst = 0.0f64;
        for (j, sj) in states.iter().enumerate() {
            for (k, sk) in states.iter().enumerate() {
                let expect = if j / d != k / d {
                    1.0 / d as f64
                } else if j == k {
                    1.0
                } else {
                    0.0
                };
                worst = worst.max((sj.overlap(sk) - expect).abs());
            }
        }
        Ok(worst)
    }

    pub fn report(&self) -> DesignReport {
        DesignReport {
            n: self.n,
            k: self.k(),
            bases: self
                .bases
                .iter()
                .map(|b| BasisReport {
                    alpha: b.alpha,
                    generators: b.generators.iter().map(ToString::to_string).collect(),
                    elements: b.elements.iter().map(|e| e.label()).collect(),
                    circuit: b.circuit.to_lines(),
                })
                .collect(),
        }
    }
}

pub fn frame_potential_of(states: &[StateVector]) -> Result<f64> {
    let k = states.len() as f64;
    let mut total = 0.0;
    for a in states {
        for b in states {
            if a.n() != b.n() {
                return Err(Error::Dimension { expected: a.n(), found: b.n() });
            }
            total += a.overlap(b).powi(2);
        }
    }
    Ok(total / (k * k))
}

#[derive(Clone, Debug, Serialize)]
pub struct DesignReport {
    pub n: usize,
    pub k: usize,
    pub bases: Vec<BasisReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisReport {
    pub alpha: usize,
    pub generators: Vec<String>,
    pub elements: Vec<String>,
    pub circuit: Vec<String>,
}

fn labels(sets: &[&[&str]]) -> Vec<Vec<PauliOperator>> {
    sets.iter()
        .map(|s| s.iter().map(|l| l.parse().expect("static label")).collect())
        .collect()
}

/// Three separable bases (Z, X, Y on each qubit) plus the two entangled ones.
fn two_qubit_partition() -> Vec<Vec<PauliOperator>> {
    labels(&[
        &["ZI", "IZ"],
        &["XI", "IX"],
        &["YI", "IY"],
        &["XY", "YZ"],
        &["YX", "ZY"],
    ])
}

fn computational_generators(n: usize) -> Vec<PauliOperator> {
    (0..n).map(|k| PauliOperator::single(n, k, 'Z').expect("k < n")).collect()
}

/// Deterministic backtracking partition of the non-identity Paulis into
/// `D + 1` maximal commuting subgroups, the first being the Z subgroup. Each
/// new subgroup is seeded by the lowest unassigned index and extended with the
/// lowest admissible generators.
fn search_partition(n: usize) -> Result<Vec<Vec<PauliOperator>>> {
    let total = 1usize << (2 * n);
    let mut assigned = vec![false; total];
    assigned[0] = true;
    let first = computational_generators(n);
    for e in subgroup(&first) {
        assigned[e.value()] = true;
    }
    let mut sets = vec![first];
    if fill(n, &mut assigned, &mut sets) {
        Ok(sets)
    } else {
        Err(Error::InvalidBasis(format!("no commuting partition found for n = {n}")))
    }
}

fn fill(n: usize, assigned: &mut [bool], sets: &mut Vec<Vec<PauliOperator>>) -> bool {
    let Some(seed) = assigned.iter().position(|a| !a) else { return true };
    let seed_op = PauliIndex::new(seed, n).expect("in range").operator();
    let mut gens = vec![seed_op];
    let mut members = vec![0, seed];
    extend(n, assigned, sets, &mut gens, &mut members)
}

fn extend(n: usize, assigned: &mut [bool], sets: &mut Vec<Vec<PauliOperator>>, gens: &mut Vec<PauliOperator>, members: &mut Vec<usize>) -> bool {
    if gens.len() == n {
        for &m in members.iter() {
            assigned[m] = true;
        }
        sets.push(gens.clone());
        if fill(n, assigned, sets) {
            return true;
        }
        sets.pop();
        for &m in members.iter().skip(1) {
            assigned[m] = false;
        }
        return false;
    }
    for cand in 1..assigned.len() {
        if assigned[cand] || members.contains(&cand) {
            continue;
        }
        let op = PauliIndex::new(cand, n).expect("in range").operator();
        if !gens.iter().all(|g| g.commutes(&op).expect("equal sizes")) {
            continue;
        }
        let new: Vec<usize> = members
            .iter()
            .map(|&m| PauliIndex::new(m, n).expect("in range").operator().multiply(&op).expect("equal sizes").to_index().value())
            .collect();
        if new.iter().any(|&v| assigned[v]) {
            continue;
        }
        let before = members.len();
        members.extend(new);
        gens.push(op);
        if extend(n, assigned, sets, gens, members) {
            return true;
        }
        gens.pop();
        members.truncate(before);
    }
    false
}
