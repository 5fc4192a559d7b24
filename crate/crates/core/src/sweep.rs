//! The alternating-sweep ground-state search over a qMPS chain: environment
//! contraction, effective site operators, the generalized site eigenproblem,
//! its variational (Rayleigh-quotient VQE) counterpart, and the sweep driver.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::canonical::{
    CanonicalizeOutcome, Side, canonicalize_site_classical, canonicalize_site_variational,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{MpoForm, PauliSum, to_mpo};
use crate::qmps::{LocalTensor, QmpsChain, QmpsSite, contract_expectation, local_tensor};
use crate::sim::{C64, Pauli, StateVector};
use crate::variational::{
    AdjGate, AnsatzCircuit, Loss, MinimizeResult, OptimizerConfig, adjoint_gradient,
    minimize_from,
};

/// Left/right environments of one site, one vector per Hamiltonian term plus
/// the identity-operator pair used for the norm.
#[derive(Clone, Debug)]
pub struct Environment {
    /// `left[β][γ·dl + γ']`, length `dl²`.
    pub left: Vec<RowDVector<C64>>,
    /// `right[β][δ·dr + δ']`, length `dr²`.
    pub right: Vec<DVector<C64>>,
    pub left_norm: RowDVector<C64>,
    pub right_norm: DVector<C64>,
}

/// Per-site local-tensor cache; invalidated whenever a site is replaced.
pub struct EnvCache {
    h_tensors: Vec<Option<LocalTensor>>,
    id_tensors: Vec<Option<LocalTensor>>,
}

impl EnvCache {
    pub fn new(n_sites: usize) -> Self {
        EnvCache {
            h_tensors: (0..n_sites).map(|_| None).collect(),
            id_tensors: (0..n_sites).map(|_| None).collect(),
        }
    }

    pub fn invalidate(&mut self, site: usize) {
        self.h_tensors[site] = None;
        self.id_tensors[site] = None;
    }

    fn ensure(&mut self, chain: &QmpsChain, mpo: &MpoForm, i: usize) -> Result<()> {
        if self.h_tensors[i].is_none() {
            self.h_tensors[i] = Some(local_tensor(chain.site(i), mpo.site_ops(i))?);
        }
        if self.id_tensors[i].is_none() {
            self.id_tensors[i] = Some(local_tensor(chain.site(i), &[Pauli::I])?);
        }
        Ok(())
    }

    /// Environments of `site`, built by contracting all other sites.
    pub fn environment(
        &mut self,
        chain: &QmpsChain,
        mpo: &MpoForm,
        site: usize,
    ) -> Result<Environment> {
        let n = chain.len();
        let k = mpo.bond_size();
        for j in 0..n {
            if j != site {
                self.ensure(chain, mpo, j)?;
            }
        }
        let mut left: Vec<RowDVector<C64>> =
            (0..k).map(|_| RowDVector::from_element(1, C64::ONE)).collect();
        let mut left_norm = RowDVector::from_element(1, C64::ONE);
        for j in 0..site {
            let t = self.h_tensors[j].as_ref().unwrap();
            for (b, row) in left.iter_mut().enumerate() {
                *row = &*row * t.block(b);
            }
            let idt = self.id_tensors[j].as_ref().unwrap();
            left_norm = &left_norm * idt.block(0);
        }
        let mut right: Vec<DVector<C64>> =
            (0..k).map(|_| DVector::from_element(1, C64::ONE)).collect();
        let mut right_norm = DVector::from_element(1, C64::ONE);
        for j in (site + 1..n).rev() {
            let t = self.h_tensors[j].as_ref().unwrap();
            for (b, col) in right.iter_mut().enumerate() {
                *col = t.block(b) * &*col;
            }
            let idt = self.id_tensors[j].as_ref().unwrap();
            right_norm = idt.block(0) * &right_norm;
        }
        Ok(Environment {
            left,
            right,
            left_norm,
            right_norm,
        })
    }
}

/// Effective Hamiltonian and norm operator on one site's qubit space.
#[derive(Clone, Debug)]
pub struct SiteProblem {
    pub h_eff: DMatrix<C64>,
    pub n_eff: DMatrix<C64>,
    pub dim_left: usize,
    pub dim_right: usize,
}

fn hermitize(m: DMatrix<C64>) -> DMatrix<C64> {
    let adj = m.adjoint();
    (m + adj) * C64::new(0.5, 0.0)
}

/// Assemble `H_eff` and `N_eff` for a one-physical-qubit site from its
/// environments: `H[(γ'σ'δ'),(γσδ)] = Σ_β c_β L_β[γ,γ'] P_β[σ',σ] R_β[δ,δ']`,
/// and the same contraction with identity operators for `N_eff`.
pub fn site_problem(
    chain: &QmpsChain,
    mpo: &MpoForm,
    env: &Environment,
    site: usize,
) -> Result<SiteProblem> {
    let s = chain.site(site);
    if s.n_p != 1 {
        return Err(Error::DimensionMismatch {
            left: s.n_p,
            right: 1,
        });
    }
    let dl = s.dim_left();
    let dr = s.dim_right();
    let dim = dl * 2 * dr;
    let mut h_eff = DMatrix::<C64>::zeros(dim, dim);
    for b in 0..mpo.bond_size() {
        let c = C64::new(mpo.coefficients()[b], 0.0);
        let op = mpo.site_ops(site)[b].matrix();
        for g in 0..dl {
            for gp in 0..dl {
                let l = env.left[b][g * dl + gp];
                if l == C64::ZERO {
                    continue;
                }
                for sp in 0..2 {
                    for sv in 0..2 {
                        let w = op[(sp, sv)];
                        if w == C64::ZERO {
                            continue;
                        }
                        for d in 0..dr {
                            for dp in 0..dr {
                                let row = gp * 2 * dr + sp * dr + dp;
                                let col = g * 2 * dr + sv * dr + d;
                                h_eff[(row, col)] += c * l * w * env.right[b][d * dr + dp];
                            }
                        }
                    }
                }
            }
        }
    }
    let mut n_eff = DMatrix::<C64>::zeros(dim, dim);
    for g in 0..dl {
        for gp in 0..dl {
            let l = env.left_norm[g * dl + gp];
            if l == C64::ZERO {
                continue;
            }
            for sv in 0..2 {
                for d in 0..dr {
                    for dp in 0..dr {
                        let row = gp * 2 * dr + sv * dr + dp;
                        let col = g * 2 * dr + sv * dr + d;
                        n_eff[(row, col)] += l * env.right_norm[d * dr + dp];
                    }
                }
            }
        }
    }
    Ok(SiteProblem {
        h_eff: hermitize(h_eff),
        n_eff: hermitize(n_eff),
        dim_left: dl,
        dim_right: dr,
    })
}

/// Smallest generalized eigenpair of `H v = λ N v` with `N ⪰ 0`, via the
/// spectral square root of `N` restricted above a relative cutoff.
pub fn generalized_ground(
    h: &DMatrix<C64>,
    n: &DMatrix<C64>,
    cutoff: f64,
) -> Result<(f64, DVector<C64>)> {
    let eig_n = n.clone().symmetric_eigen();
    let lambda_max = eig_n
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(lambda_max > 0.0) {
        return Err(Error::ZeroVector);
    }
    let kept: Vec<usize> = (0..eig_n.eigenvalues.len())
        .filter(|&i| eig_n.eigenvalues[i] > cutoff * lambda_max)
        .collect();
    let dim = h.nrows();
    let mut b = DMatrix::<C64>::zeros(dim, kept.len());
    for (j, &i) in kept.iter().enumerate() {
        let scale = C64::new(1.0 / eig_n.eigenvalues[i].sqrt(), 0.0);
        b.column_mut(j)
            .copy_from(&(eig_n.eigenvectors.column(i) * scale));
    }
    let a = hermitize(b.adjoint() * h * &b);
    let eig_a = a.symmetric_eigen();
    let mut best = 0;
    for i in 1..eig_a.eigenvalues.len() {
        if eig_a.eigenvalues[i] < eig_a.eigenvalues[best] {
            best = i;
        }
    }
    let mut v: DVector<C64> = &b * eig_a.eigenvectors.column(best);
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    v /= C64::new(norm, 0.0);
    Ok((eig_a.eigenvalues[best], v))
}

/// Rayleigh-quotient loss `⟨φ|H|φ⟩ / ⟨φ|N|φ⟩` over the ansatz manifold, with
/// the quotient-rule gradient built from adjoint-mode derivatives of the
/// numerator and denominator separately.
pub struct RayleighLoss {
    pub h: DMatrix<C64>,
    pub n: DMatrix<C64>,
    pub ansatz: AnsatzCircuit,
    gates: Vec<AdjGate>,
}

impl RayleighLoss {
    pub fn new(h: DMatrix<C64>, n: DMatrix<C64>, ansatz: AnsatzCircuit) -> Self {
        let gates = ansatz.adjoint_gates(0, 0);
        RayleighLoss { h, n, ansatz, gates }
    }

    fn quad(m: &DMatrix<C64>, s: &StateVector) -> f64 {
        let v = s.as_dvector();
        (v.adjoint() * m * &v)[(0, 0)].re
    }

    fn pair(&self, params: &[f64]) -> (f64, f64) {
        let s = self
            .ansatz
            .prepare(params, &StateVector::zero_state(self.ansatz.n_qubits))
            .expect("param count fixed");
        (Self::quad(&self.h, &s), Self::quad(&self.n, &s))
    }
}

fn matvec(m: &DMatrix<C64>, s: &StateVector) -> StateVector {
    let v = m * s.as_dvector();
    StateVector::from_amplitudes(s.n_qubits(), v.iter().copied().collect())
        .expect("dimension preserved")
}

impl Loss for RayleighLoss {
    fn n_params(&self) -> usize {
        self.ansatz.n_params()
    }

    fn eval(&self, params: &[f64]) -> f64 {
        let (hv, nv) = self.pair(params);
        if nv.abs() < 1e-14 {
            return f64::MAX / 4.0;
        }
        hv / nv
    }

    fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let input = StateVector::zero_state(self.ansatz.n_qubits);
        let (hv, gh) = adjoint_gradient(&self.gates, params, params.len(), &input, &|s| {
            matvec(&self.h, s)
        })
        .expect("targets fixed");
        let (nv, gn) = adjoint_gradient(&self.gates, params, params.len(), &input, &|s| {
            matvec(&self.n, s)
        })
        .expect("targets fixed");
        if nv.abs() < 1e-14 {
            return vec![0.0; params.len()];
        }
        gh.iter()
            .zip(&gn)
            .map(|(dh, dn)| (dh * nv - hv * dn) / (nv * nv))
            .collect()
    }
}

/// Site-update strategy of the sweep.
#[derive(Clone, Debug)]
pub enum SiteSolver {
    /// Dense generalized eigensolver on `(H_eff, N_eff)`.
    DenseEigen,
    /// Gradient-descent VQE on the Rayleigh quotient; `depth_factor × qubits`
    /// ansatz layers, warm-started from the previous visit of the same site.
    Vqe {
        depth_factor: usize,
        config: OptimizerConfig,
    },
}

/// How sites are restored to canonical form after an update.
#[derive(Clone, Debug)]
pub enum CanonMode {
    /// Classical SVD of the site matrix.
    Classical,
    /// Variational qSVD with `depth_factor × qubits` layers per subsystem;
    /// `loss_threshold` marks a move as converged.
    Variational {
        depth_factor: usize,
        config: OptimizerConfig,
        loss_threshold: f64,
    },
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub solver: SiteSolver,
    pub canon: CanonMode,
    pub max_sweeps: usize,
    /// Stop when the per-sweep best energy improves by less than this.
    pub energy_tol: f64,
    /// Relative eigenvalue cutoff of `N_eff` in the dense solver.
    pub eig_cutoff: f64,
}

impl SweepOptions {
    /// Exact site solver and classical canonicalization: isolates the sweep
    /// machinery itself and converges to the best fixed-χ state.
    pub fn exact() -> Self {
        SweepOptions {
            solver: SiteSolver::DenseEigen,
            canon: CanonMode::Classical,
            max_sweeps: 10,
            energy_tol: 1e-10,
            eig_cutoff: 1e-12,
        }
    }

    /// Fully variational pipeline: VQE site updates and qSVD gauge moves.
    pub fn variational(seed: u64) -> Self {
        SweepOptions {
            solver: SiteSolver::Vqe {
                depth_factor: 2,
                config: OptimizerConfig {
                    learning_rate: 0.1,
                    max_iterations: 200,
                    seed,
                    ..Default::default()
                },
            },
            canon: CanonMode::Variational {
                depth_factor: 2,
                config: OptimizerConfig {
                    learning_rate: 0.1,
                    max_iterations: 200,
                    seed: seed.wrapping_add(101),
                    ..Default::default()
                },
                loss_threshold: 5e-2,
            },
            max_sweeps: 4,
            energy_tol: 1e-4,
            eig_cutoff: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    /// Best site-update energy seen anywhere in the run.
    pub energy: f64,
    /// Rayleigh quotient of the final chain.
    pub final_energy: f64,
    pub energies_per_update: Vec<f64>,
    pub sweep_energies: Vec<f64>,
    pub sweeps_run: usize,
    pub canonicalization_failures: usize,
    pub chain: QmpsChain,
}

/// `⟨Ψ|H|Ψ⟩ / ⟨Ψ|Ψ⟩` of the chain via local-tensor contraction.
pub fn chain_energy(chain: &QmpsChain, h: &PauliSum) -> Result<f64> {
    let mpo = to_mpo(h);
    let h_tensors: Vec<LocalTensor> = (0..chain.len())
        .map(|i| local_tensor(chain.site(i), mpo.site_ops(i)))
        .collect::<Result<_>>()?;
    let num = contract_expectation(&h_tensors, mpo.coefficients())?;
    let id_tensors: Vec<LocalTensor> = (0..chain.len())
        .map(|i| local_tensor(chain.site(i), &[Pauli::I]))
        .collect::<Result<_>>()?;
    let den = contract_expectation(&id_tensors, &[1.0])?;
    if den <= 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(num / den)
}

fn canonicalize_in_chain(
    chain: &mut QmpsChain,
    i: usize,
    side: Side,
    canon: &CanonMode,
) -> Result<bool> {
    let site = chain.site(i).clone();
    let outcome: CanonicalizeOutcome = match canon {
        CanonMode::Classical => {
            canonicalize_site_classical(&site.state, site.n_l, site.n_p, site.n_r, side)?
        }
        CanonMode::Variational {
            depth_factor,
            config,
            loss_threshold,
        } => canonicalize_site_variational(
            &site.state,
            site.n_l,
            site.n_p,
            site.n_r,
            side,
            depth_factor * site.n_qubits(),
            config,
            *loss_threshold,
        )?,
    };
    let converged = outcome.converged;
    chain.replace_site(i, outcome.site)?;
    Ok(converged)
}

fn solve_site(
    problem: &SiteProblem,
    site: &QmpsSite,
    site_index: usize,
    solver: &SiteSolver,
    warm: &mut HashMap<usize, Vec<f64>>,
    eig_cutoff: f64,
) -> Result<(f64, StateVector)> {
    let n_qubits = site.n_qubits();
    match solver {
        SiteSolver::DenseEigen => {
            let (energy, v) = generalized_ground(&problem.h_eff, &problem.n_eff, eig_cutoff)?;
            let state = StateVector::from_amplitudes(n_qubits, v.iter().copied().collect())?;
            Ok((energy, state))
        }
        SiteSolver::Vqe {
            depth_factor,
            config,
        } => {
            let ansatz = AnsatzCircuit::new(n_qubits, depth_factor * n_qubits);
            let loss = RayleighLoss::new(problem.h_eff.clone(), problem.n_eff.clone(), ansatz);
            let init = warm
                .get(&site_index)
                .filter(|p| p.len() == ansatz.n_params())
                .cloned()
                .unwrap_or_else(|| {
                    ansatz.random_params(
                        config.seed.wrapping_add(7919 * (site_index as u64 + 1)),
                    )
                });
            let res: MinimizeResult = minimize_from(&loss, init, config)?;
            warm.insert(site_index, res.params.clone());
            let state = ansatz.prepare(&res.params, &StateVector::zero_state(n_qubits))?;
            Ok((loss.eval(&res.params), state))
        }
    }
}

/// Alternating-sweep ground-state search: random chain, initial
/// right-canonicalization, then left-right / right-left passes updating one
/// site at a time until the per-sweep best energy stops improving.
pub fn run_vqmps(
    h: &PauliSum,
    n_chi: usize,
    seed: u64,
    options: &SweepOptions,
) -> Result<SweepReport> {
    let n = h.n_qubits();
    let mpo = to_mpo(h);
    let mut chain = QmpsChain::random(n, n_chi, seed)?;
    let mut cache = EnvCache::new(n);
    let mut failures = 0usize;

    for i in (1..n).rev() {
        if !canonicalize_in_chain(&mut chain, i, Side::Right, &options.canon)? {
            failures += 1;
        }
        cache.invalidate(i);
    }

    let mut warm: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut energies = Vec::new();
    let mut sweep_energies = Vec::new();
    let mut sweeps_run = 0;
    let mut prev_best = f64::INFINITY;

    for sweep in 0..options.max_sweeps {
        sweeps_run = sweep + 1;
        let mut sweep_best = f64::INFINITY;
        let update = |chain: &mut QmpsChain,
                          cache: &mut EnvCache,
                          warm: &mut HashMap<usize, Vec<f64>>,
                          i: usize,
                          side: Option<Side>,
                          failures: &mut usize|
         -> Result<f64> {
            let env = cache.environment(chain, &mpo, i)?;
            let problem = site_problem(chain, &mpo, &env, i)?;
            let (energy, state) =
                solve_site(&problem, chain.site(i), i, &options.solver, warm, options.eig_cutoff)?;
            let old = chain.site(i);
            let new_site = QmpsSite::new(state, old.n_l, old.n_p, old.n_r)?;
            chain.replace_site(i, new_site)?;
            cache.invalidate(i);
            if let Some(side) = side {
                if !canonicalize_in_chain(chain, i, side, &options.canon)? {
                    *failures += 1;
                }
                cache.invalidate(i);
            }
            Ok(energy)
        };
        for i in 0..n {
            let side = (i + 1 < n).then_some(Side::Left);
            let e = update(&mut chain, &mut cache, &mut warm, i, side, &mut failures)?;
            energies.push(e);
            sweep_best = sweep_best.min(e);
        }
        for i in (0..n).rev() {
            let side = (i > 0).then_some(Side::Right);
            let e = update(&mut chain, &mut cache, &mut warm, i, side, &mut failures)?;
            energies.push(e);
            sweep_best = sweep_best.min(e);
        }
        sweep_energies.push(sweep_best);
        if (prev_best - sweep_best).abs() < options.energy_tol {
            break;
        }
        prev_best = sweep_best;
    }

    let final_energy = chain_energy(&chain, h)?;
    let energy = energies.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SweepReport {
        energy,
        final_energy,
        energies_per_update: energies,
        sweep_energies,
        sweeps_run,
        canonicalization_failures: failures,
        chain,
    })
}
