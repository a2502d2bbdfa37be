use super::{CliffordCircuit, Direction, Gate};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// Gaussian-elimination rank of the symplectic rows `(x | z)`.
pub(crate) fn symplectic_rank(paulis: &[PauliOperator]) -> usize {
    let mut rows: Vec<Vec<bool>> = paulis
        .iter()
        .map(|p| p.x_bits().iter().chain(p.z_bits()).copied().collect())
        .collect();
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col]) else { continue };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] {
                let src = rows[rank].clone();
                rows[r].iter_mut().zip(src).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

/// Working tableau: the circuit built so far plus the generator rows it has
/// been conjugated through.
struct Reducer {
    circuit: CliffordCircuit,
    rows: Vec<PauliOperator>,
}

impl Reducer {
    fn gate(&mut self, g: Gate) {
        self.circuit.push(g).expect("qubit indices are in range by construction");
        for r in &mut self.rows {
            g.conjugate(r, false);
        }
    }

    fn row_mul(&mut self, target: usize, source: usize) {
        let prod = self.rows[target].multiply(&self.rows[source]).expect("equal sizes");
        self.rows[target] = prod.phaseless();
    }
}

/// Builds `C` with `C Z_k C† = generators[k]` exactly (sign included).
///
/// The generators must be `n` pairwise commuting, independent, Hermitian
/// Paulis on `n` qubits. The result uses `O(n²)` gates: a GF(2) reduction of
/// the X block with CNOTs, `S`/`CZ` to clear the symmetric Z block, Hadamards,
/// a CNOT network fixing the Z pattern, and `X` gates for signs.
pub fn synthesize_basis_circuit(generators: &[PauliOperator]) -> Result<CliffordCircuit> {
    let n = generators.first().map(PauliOperator::n).ok_or_else(|| Error::InvalidBasis("no generators".into()))?;
    if generators.len() != n {
        return Err(Error::InvalidBasis(format!("{} generators for {n} qubits", generators.len())));
    }
    for (k, g) in generators.iter().enumerate() {
        if g.n() != n {
            return Err(Error::Dimension { expected: n, found: g.n() });
        }
        if g.phase_power() % 2 == 1 {
            return Err(Error::InvalidBasis(format!("generator {g} is not Hermitian")));
        }
        for h in &generators[..k] {
            if !g.commutes(h)? {
                return Err(Error::InvalidBasis(format!("generators {h} and {g} anticommute")));
            }
        }
    }
    if symplectic_rank(generators) != n {
        return Err(Error::InvalidBasis("generators are not independent".into()));
    }

    let mut red = Reducer { circuit: CliffordCircuit::new(n), rows: generators.iter().map(PauliOperator::phaseless).collect() };

    // 1. Row-reduce the X block, lowest qubit first.
    let mut pivots = Vec::new();
    for q in 0..n {
        let r0 = pivots.len();
        let Some(pivot) = (r0..n).find(|&r| red.rows[r].x_bits()[q]) else { continue };
        red.rows.swap(r0, pivot);
        for r in 0..n {
            if r != r0 && red.rows[r].x_bits()[q] {
                red.row_mul(r, r0);
            }
        }
        pivots.push(q);
    }
    let rank = pivots.len();

    // 2. CNOTs from each pivot clear the rest of its X row.
    for (j, &p) in pivots.iter().enumerate() {
        for c in 0..n {
            if c != p && !pivots.contains(&c) && red.rows[j].x_bits()[c] {
                red.gate(Gate::Cnot { control: p, target: c });
            }
        }
    }

    // 3. The Z-only rows are full rank on the non-pivot qubits; use them to
    //    clear the X rows' Z support there.
    let free: Vec<usize> = (0..n).filter(|q| !pivots.contains(q)).collect();
    for (zrow, &c) in (rank..).zip(&free) {
        let Some(pivot) = (zrow..n).find(|&r| red.rows[r].z_bits()[c]) else {
            return Err(Error::InvalidBasis("degenerate Z block".into()));
        };
        red.rows.swap(zrow, pivot);
        for r in 0..n {
            if r != zrow && red.rows[r].z_bits()[c] {
                red.row_mul(r, zrow);
            }
        }
    }

    // 4. X rows now read (e_p | A) on the pivot qubits with A symmetric.
    for (j, &p) in pivots.iter().enumerate() {
        if red.rows[j].z_bits()[p] {
            red.gate(Gate::S(p));
        }
        for &p2 in &pivots[j + 1..] {
            if red.rows[j].z_bits()[p2] {
                red.gate(Gate::H(p2));
                red.gate(Gate::Cnot { control: p, target: p2 });
                red.gate(Gate::H(p2));
            }
        }
    }
    for &p in &pivots {
        red.gate(Gate::H(p));
    }
    debug_assert!(red.rows.iter().all(|r| !r.has_x_part()));

    // 5. Work on the actual generators from here: map their Z patterns to Z_k.
    red.rows = generators.iter().map(|g| red.circuit.conjugate(g, Direction::Forward)).collect::<Result<_>>()?;
    for k in 0..n {
        if !red.rows[k].z_bits()[k] {
            let j = (k + 1..n)
                .find(|&j| red.rows[k].z_bits()[j])
                .ok_or_else(|| Error::InvalidBasis("singular Z pattern".into()))?;
            red.gate(Gate::Cnot { control: k, target: j });
        }
        for c in 0..n {
            if c != k && red.rows[k].z_bits()[c] {
                red.gate(Gate::Cnot { control: c, target: k });
            }
        }
    }

    // D g_k D† = ±Z_k, so C = D† maps Z_k to ±g_k; X_k in front flips the sign.
    let mut out = CliffordCircuit::new(n);
    for (k, row) in red.rows.iter().enumerate() {
        debug_assert!(row.phaseless() == PauliOperator::single(n, k, 'Z').expect("k < n"));
        if row.phase_power() == 2 {
            out.push(Gate::X(k))?;
        }
    }
    let out = out.then(&red.circuit.inverse())?;

    for (k, g) in generators.iter().enumerate() {
        let image = out.conjugate(&PauliOperator::single(n, k, 'Z')?, Direction::Forward)?;
        if &image != g {
            return Err(Error::NumericalIntegrity(format!("synthesized circuit maps Z{k} to {image}, expected {g}")));
        }
    }
    Ok(out)
}
