//! Independent classical references: dense exact diagonalization, a
//! self-contained classical MPS/DMRG implementation, Schmidt spectra,
//! fidelity, the full-scale VQE baseline, and cached fixture files.
//!
//! The MPS machinery here deliberately shares no contraction code with the
//! qMPS modules so cross-checks between the two paths stay meaningful.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::PauliSum;
use crate::sim::{C64, StateVector, inner};
use crate::variational::{Observable, OptimizerConfig, VqeResult, vqe_ground};

/// Dense eigensolver cap; keeps oracle runtimes desk-scale.
pub const EXACT_LIMIT: usize = 12;

/// Minimum eigenvalue and eigenvector of the dense Hamiltonian.
pub fn exact_ground(h: &PauliSum) -> Result<(f64, StateVector)> {
    if h.n_qubits() > EXACT_LIMIT {
        return Err(Error::TooLarge {
            n: h.n_qubits(),
            limit: EXACT_LIMIT,
        });
    }
    let d = h.dense()?;
    let eig = d.symmetric_eigen();
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    let col = eig.eigenvectors.column(best);
    let state = StateVector::from_amplitudes(h.n_qubits(), col.iter().copied().collect())?;
    Ok((eig.eigenvalues[best], state))
}

/// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(inner(a, b)?.norm_sqr() / (na * nb))
}

/// Exact Schmidt coefficients across the `(n_a, n_b)` bipartition,
/// descending, normalized for a normalized input.
pub fn schmidt(state: &StateVector, n_a: usize, n_b: usize) -> Result<Vec<f64>> {
    if n_a + n_b != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            left: n_a + n_b,
            right: state.n_qubits(),
        });
    }
    let rows = 1usize << n_a;
    let cols = 1usize << n_b;
    let m = DMatrix::<C64>::from_fn(rows, cols, |r, c| state.amplitude(r * cols + c));
    let svd = m.svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(s)
}

/// Full-system VQE with depth `N` and single-`R_y` layers: the comparison
/// baseline for the sweep method.
pub fn full_vqe_baseline(h: &PauliSum, config: &OptimizerConfig) -> Result<VqeResult> {
    if h.n_qubits() > EXACT_LIMIT {
        return Err(Error::TooLarge {
            n: h.n_qubits(),
            limit: EXACT_LIMIT,
        });
    }
    vqe_ground(
        &Observable::Paulis(h.clone()),
        h.n_qubits(),
        Some(h.n_qubits()),
        config,
    )
}

/// Classical MPS with per-site tensors `[A^σ]_{α,α'}`, one physical qubit
/// per site, stored per physical index.
#[derive(Clone, Debug)]
pub struct ClassicalMps {
    /// `tensors[site][σ]` is a `dl × dr` matrix.
    pub tensors: Vec<[DMatrix<C64>; 2]>,
}

impl ClassicalMps {
    /// Bond dimension profile `min(χ, 2^i, 2^{N-i})`.
    pub fn bond_dims(n: usize, chi: usize) -> Vec<usize> {
        (0..=n)
            .map(|i| {
                let left = 1usize.checked_shl(i as u32).unwrap_or(usize::MAX);
                let right = 1usize.checked_shl((n - i) as u32).unwrap_or(usize::MAX);
                chi.min(left).min(right)
            })
            .collect()
    }

    pub fn random(n: usize, chi: usize, seed: u64) -> Self {
        let dims = Self::bond_dims(n, chi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tensors = (0..n)
            .map(|i| {
                let mk = |rng: &mut ChaCha8Rng| {
                    DMatrix::from_fn(dims[i], dims[i + 1], |_, _| {
                        C64::new(rng.random_range(-1.0..1.0), 0.0)
                    })
                };
                [mk(&mut rng), mk(&mut rng)]
            })
            .collect();
        ClassicalMps { tensors }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Contract to a dense state (small systems only; cross-check support).
    pub fn to_state(&self) -> Result<StateVector> {
        let n = self.len();
        if n > 14 {
            return Err(Error::TooLarge { n, limit: 14 });
        }
        let mut amps = Vec::with_capacity(1 << n);
        for idx in 0..1usize << n {
            let mut m = DMatrix::<C64>::identity(1, 1);
            for site in 0..n {
                let sigma = (idx >> (n - 1 - site)) & 1;
                m = m * &self.tensors[site][sigma];
            }
            amps.push(m[(0, 0)]);
        }
        StateVector::from_amplitudes(n, amps)
    }

    /// Canonical-form residual of one site tensor against the requested form.
    pub fn canonical_residual(&self, site: usize, left: bool) -> f64 {
        let a = &self.tensors[site];
        if left {
            let dr = a[0].ncols();
            let mut gram = DMatrix::<C64>::zeros(dr, dr);
            for m in a {
                gram += m.adjoint() * m;
            }
            (gram - DMatrix::<C64>::identity(dr, dr)).norm()
        } else {
            let dl = a[0].nrows();
            let mut gram = DMatrix::<C64>::zeros(dl, dl);
            for m in a {
                gram += m * m.adjoint();
            }
            (gram - DMatrix::<C64>::identity(dl, dl)).norm()
        }
    }
}

/// Per-term 2×2 site operators of the Hamiltonian (the classical MPO view).
fn term_ops(h: &PauliSum) -> (Vec<Vec<DMatrix<C64>>>, Vec<f64>) {
    let ops = h
        .terms()
        .iter()
        .map(|t| t.ops.iter().map(|p| p.matrix()).collect())
        .collect();
    let coeffs = h.terms().iter().map(|t| t.coefficient).collect();
    (ops, coeffs)
}

fn transfer_left(
    l: &DMatrix<C64>,
    a: &[DMatrix<C64>; 2],
    op: &DMatrix<C64>,
) -> DMatrix<C64> {
    let dr = a[0].ncols();
    let mut out = DMatrix::<C64>::zeros(dr, dr);
    for sigma in 0..2 {
        for sigma_p in 0..2 {
            let w = op[(sigma_p, sigma)];
            if w == C64::ZERO {
                continue;
            }
            out += a[sigma].transpose() * l * a[sigma_p].conjugate() * w;
        }
    }
    out
}

fn transfer_right(
    r: &DMatrix<C64>,
    a: &[DMatrix<C64>; 2],
    op: &DMatrix<C64>,
) -> DMatrix<C64> {
    let dl = a[0].nrows();
    let mut out = DMatrix::<C64>::zeros(dl, dl);
    for sigma in 0..2 {
        for sigma_p in 0..2 {
            let w = op[(sigma_p, sigma)];
            if w == C64::ZERO {
                continue;
            }
            out += &a[sigma] * r * a[sigma_p].adjoint() * w;
        }
    }
    out
}

/// Standard one-site classical DMRG with SVD gauge moves.
pub struct DmrgOutcome {
    pub energy: f64,
    pub energies_per_update: Vec<f64>,
    pub sweeps_run: usize,
    pub mps: ClassicalMps,
}

pub fn classical_dmrg(h: &PauliSum, chi: usize, max_sweeps: usize, seed: u64) -> Result<DmrgOutcome> {
    classical_dmrg_tol(h, chi, max_sweeps, seed, 1e-10)
}

pub fn classical_dmrg_tol(
    h: &PauliSum,
    chi: usize,
    max_sweeps: usize,
    seed: u64,
    tol: f64,
) -> Result<DmrgOutcome> {
    let n = h.n_qubits();
    if n < 2 {
        return Err(Error::ChainTooShort(n));
    }
    let (ops, coeffs) = term_ops(h);
    let k = ops.len();
    let mut mps = ClassicalMps::random(n, chi, seed);

    // bring into right-canonical form so the first sweep starts at site 0
    for i in (1..n).rev() {
        right_canonicalize_step(&mut mps, i);
    }
    normalize_center(&mut mps, 0);

    let mut energies = Vec::new();
    let mut last_sweep_energy = f64::INFINITY;
    let mut sweeps_run = 0;

    for sweep in 0..max_sweeps {
        sweeps_run = sweep + 1;
        let mut sweep_energy = f64::INFINITY;

        // left-to-right
        for i in 0..n {
            let e = optimize_site(&mut mps, i, &ops, &coeffs, k);
            energies.push(e);
            sweep_energy = sweep_energy.min(e);
            if i + 1 < n {
                left_canonicalize_step(&mut mps, i);
            } else {
                normalize_center(&mut mps, i);
            }
        }
        // right-to-left
        for i in (0..n).rev() {
            let e = optimize_site(&mut mps, i, &ops, &coeffs, k);
            energies.push(e);
            sweep_energy = sweep_energy.min(e);
            if i > 0 {
                right_canonicalize_step(&mut mps, i);
            } else {
                normalize_center(&mut mps, i);
            }
        }

        if (last_sweep_energy - sweep_energy).abs() < tol {
            break;
        }
        last_sweep_energy = sweep_energy;
    }
    let energy = energies
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(DmrgOutcome {
        energy,
        energies_per_update: energies,
        sweeps_run,
        mps,
    })
}

fn normalize_center(mps: &mut ClassicalMps, i: usize) {
    let norm: f64 = mps.tensors[i].iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
    if norm > 0.0 {
        let inv = C64::new(1.0 / norm, 0.0);
        for m in &mut mps.tensors[i] {
            *m *= inv;
        }
    }
}

/// SVD site `i` grouped as (left, phys) × right, keep the isometry, push
/// `S V†` into site `i+1`.
fn left_canonicalize_step(mps: &mut ClassicalMps, i: usize) {
    let dl = mps.tensors[i][0].nrows();
    let dr = mps.tensors[i][0].ncols();
    let mut m = DMatrix::<C64>::zeros(dl * 2, dr);
    for sigma in 0..2 {
        for g in 0..dl {
            for d in 0..dr {
                m[(g * 2 + sigma, d)] = mps.tensors[i][sigma][(g, d)];
            }
        }
    }
    let svd = m.svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let rank = svd.singular_values.len().min(dr);
    for sigma in 0..2 {
        let mut t = DMatrix::<C64>::zeros(dl, dr);
        for g in 0..dl {
            for d in 0..rank {
                t[(g, d)] = u[(g * 2 + sigma, d)];
            }
        }
        mps.tensors[i][sigma] = t;
    }
    let mut carry = DMatrix::<C64>::zeros(dr, dr);
    for r in 0..rank {
        let s = C64::new(svd.singular_values[r], 0.0);
        carry.row_mut(r).copy_from(&(vt.row(r) * s));
    }
    for sigma in 0..2 {
        mps.tensors[i + 1][sigma] = &carry * &mps.tensors[i + 1][sigma];
    }
}

/// Mirror move: SVD site `i` grouped as left × (phys, right), keep the
/// co-isometry, push `U S` into site `i-1`.
fn right_canonicalize_step(mps: &mut ClassicalMps, i: usize) {
    let dl = mps.tensors[i][0].nrows();
    let dr = mps.tensors[i][0].ncols();
    let mut m = DMatrix::<C64>::zeros(dl, 2 * dr);
    for sigma in 0..2 {
        for g in 0..dl {
            for d in 0..dr {
                m[(g, sigma * dr + d)] = mps.tensors[i][sigma][(g, d)];
            }
        }
    }
    let svd = m.svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let rank = svd.singular_values.len().min(dl);
    for sigma in 0..2 {
        let mut t = DMatrix::<C64>::zeros(dl, dr);
        for g in 0..rank {
            for d in 0..dr {
                t[(g, d)] = vt[(g, sigma * dr + d)];
            }
        }
        mps.tensors[i][sigma] = t;
    }
    let mut carry = DMatrix::<C64>::zeros(dl, dl);
    for c in 0..rank {
        let s = C64::new(svd.singular_values[c], 0.0);
        carry.column_mut(c).copy_from(&(u.column(c) * s));
    }
    for sigma in 0..2 {
        mps.tensors[i - 1][sigma] = &mps.tensors[i - 1][sigma] * &carry;
    }
}

fn optimize_site(
    mps: &mut ClassicalMps,
    i: usize,
    ops: &[Vec<DMatrix<C64>>],
    coeffs: &[f64],
    k: usize,
) -> f64 {
    let n = mps.len();
    let dl = mps.tensors[i][0].nrows();
    let dr = mps.tensors[i][0].ncols();
    let dim = dl * 2 * dr;

    // environments per term
    let mut h_eff = DMatrix::<C64>::zeros(dim, dim);
    for b in 0..k {
        let mut l = DMatrix::<C64>::identity(1, 1);
        for site in 0..i {
            l = transfer_left(&l, &mps.tensors[site], &ops[b][site]);
        }
        let mut r = DMatrix::<C64>::identity(1, 1);
        for site in (i + 1..n).rev() {
            r = transfer_right(&r, &mps.tensors[site], &ops[b][site]);
        }
        let c = C64::new(coeffs[b], 0.0);
        let op = &ops[b][i];
        for g in 0..dl {
            for gp in 0..dl {
                for s in 0..2 {
                    for sp in 0..2 {
                        let w = op[(sp, s)];
                        if w == C64::ZERO {
                            continue;
                        }
                        for d in 0..dr {
                            for dp in 0..dr {
                                let row = gp * 2 * dr + sp * dr + dp;
                                let col = g * 2 * dr + s * dr + d;
                                h_eff[(row, col)] += c * l[(g, gp)] * w * r[(d, dp)];
                            }
                        }
                    }
                }
            }
        }
    }
    let h_eff = (h_eff.clone() + h_eff.adjoint()) * C64::new(0.5, 0.0);
    let eig = h_eff.symmetric_eigen();
    let mut best = 0;
    for e in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[e] < eig.eigenvalues[best] {
            best = e;
        }
    }
    let v = eig.eigenvectors.column(best);
    for sigma in 0..2 {
        let mut t = DMatrix::<C64>::zeros(dl, dr);
        for g in 0..dl {
            for d in 0..dr {
                t[(g, d)] = v[g * 2 * dr + sigma * dr + d];
            }
        }
        mps.tensors[i][sigma] = t;
    }
    eig.eigenvalues[best]
}

/// Cached oracle energies keyed by model parameters.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FixtureEntry {
    pub model: String,
    pub n: usize,
    pub j: f64,
    pub delta: f64,
    pub h: f64,
    pub chi: usize,
    pub seed: u64,
    pub energy: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FixtureSet {
    pub entries: Vec<FixtureEntry>,
}

impl FixtureSet {
    pub fn load(path: &std::path::Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("serializable"))
    }

    pub fn lookup(&self, key: &FixtureEntry) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| {
                e.model == key.model
                    && e.n == key.n
                    && e.j == key.j
                    && e.delta == key.delta
                    && e.h == key.h
                    && e.chi == key.chi
                    && e.seed == key.seed
            })
            .map(|e| e.energy)
    }

    pub fn insert(&mut self, entry: FixtureEntry) {
        self.entries.push(entry);
    }
}

/// Dense `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
pub fn rayleigh_quotient(h: &DMatrix<C64>, state: &StateVector) -> f64 {
    let v = state.as_dvector();
    let num = (v.adjoint() * h * &v)[(0, 0)].re;
    num / state.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_xxz;
    use crate::sim::{Pauli, PauliString};
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_ground_single_z() {
        let h = PauliSum::new(1, vec![PauliString::new(1.0, vec![Pauli::Z])]).unwrap();
        let (e, state) = exact_ground(&h).unwrap();
        assert_abs_diff_eq!(e, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(state.amplitude(1).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_ground_xxz_two_sites() {
        // singlet energy of the 4×4 matrix is -3
        let h = build_xxz(2, 1.0, 1.0, 0.0).unwrap();
        let (e, _) = exact_ground(&h).unwrap();
        assert_abs_diff_eq!(e, -3.0, epsilon = 1e-10);
    }

    #[test]
    fn fidelity_basics() {
        let zero = StateVector::zero_state(1);
        let one = StateVector::basis_state(1, 1);
        assert_abs_diff_eq!(fidelity(&zero, &zero).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&zero, &one).unwrap(), 0.0, epsilon = 1e-12);
        let mut phased = zero.clone();
        phased.scale(C64::from_polar(1.0, 0.7));
        assert_abs_diff_eq!(fidelity(&zero, &phased).unwrap(), 1.0, epsilon = 1e-12);
        let z = StateVector::from_amplitudes(1, vec![C64::ZERO, C64::ZERO]).unwrap();
        assert!(fidelity(&zero, &z).is_err());
    }

    #[test]
    fn schmidt_product_and_bell() {
        let s = StateVector::zero_state(2);
        let sv = schmidt(&s, 1, 1).unwrap();
        assert_abs_diff_eq!(sv[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sv[1], 0.0, epsilon = 1e-12);

        let mut bell = StateVector::zero_state(2);
        bell.apply_gate_mut(&crate::sim::Gate::Hadamard { target: 0 }).unwrap();
        bell.apply_gate_mut(&crate::sim::Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        let sv = schmidt(&bell, 1, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(sv[0], h, epsilon = 1e-12);
        assert_abs_diff_eq!(sv[1], h, epsilon = 1e-12);
    }

    #[test]
    fn mps_canonical_after_init_moves() {
        let h = build_xxz(5, 1.0, 1.0, 0.0).unwrap();
        let out = classical_dmrg(&h, 2, 1, 7).unwrap();
        // after a full sweep pair the interior sites carry gauge structure;
        // just sanity-check the state is normalized.
        let psi = out.mps.to_state().unwrap();
        assert_abs_diff_eq!(psi.norm_sqr(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn dmrg_untruncated_matches_exact() {
        for n in [4usize, 6] {
            let h = build_xxz(n, 1.0, 1.0, 0.0).unwrap();
            let chi = 1 << n.div_ceil(2);
            let out = classical_dmrg(&h, chi, 20, 3).unwrap();
            let (e, _) = exact_ground(&h).unwrap();
            assert!(
                (out.energy - e).abs() <= 1e-8,
                "N={n}: dmrg {} vs exact {e}",
                out.energy
            );
        }
    }

    #[test]
    fn dmrg_two_sites_exact_for_any_chi() {
        let h = build_xxz(2, 1.0, 1.0, 0.0).unwrap();
        let out = classical_dmrg(&h, 2, 10, 1).unwrap();
        assert_abs_diff_eq!(out.energy, -3.0, epsilon = 1e-9);
    }

    #[test]
    fn dmrg_energy_monotone_per_update() {
        let h = build_xxz(6, 1.0, 0.5, 0.0).unwrap();
        let out = classical_dmrg(&h, 2, 6, 11).unwrap();
        for w in out.energies_per_update.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "update energies not monotone: {w:?}");
        }
    }

    #[test]
    fn baseline_respects_variational_bound() {
        let h = build_xxz(3, 1.0, 1.0, 0.0).unwrap();
        let cfg = OptimizerConfig {
            seed: 9,
            learning_rate: 0.1,
            ..Default::default()
        };
        let res = full_vqe_baseline(&h, &cfg).unwrap();
        let (e, _) = exact_ground(&h).unwrap();
        assert!(res.energy >= e - 1e-9);
    }

    #[test]
    fn fixture_round_trip() {
        let mut set = FixtureSet::default();
        set.insert(FixtureEntry {
            model: "xxz".into(),
            n: 8,
            j: 1.0,
            delta: 0.5,
            h: 0.0,
            chi: 2,
            seed: 1,
            energy: -9.5,
        });
        let dir = std::env::temp_dir().join("vqmps_fixture_test.json");
        set.save(&dir).unwrap();
        let loaded = FixtureSet::load(&dir).unwrap();
        assert_eq!(loaded.entries, set.entries);
        std::fs::remove_file(&dir).ok();
    }
}
