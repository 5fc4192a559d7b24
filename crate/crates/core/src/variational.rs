//! Hardware-efficient ansatz, parameter-shift gradients, and the
//! gradient-descent loop shared by qSVD, reshape, site updates, and the
//! full-scale VQE baseline.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::PauliSum;
use crate::sim::{C64, Gate, StateVector, pauli_expectation};

/// One `R_y` per qubit per layer followed by an interlacing CNOT ladder:
/// even layers couple (0,1),(2,3),…, odd layers couple (1,2),(3,4),….
#[derive(Clone, Copy, Debug)]
pub struct AnsatzCircuit {
    pub n_qubits: usize,
    pub depth: usize,
}

impl AnsatzCircuit {
    pub fn new(n_qubits: usize, depth: usize) -> Self {
        AnsatzCircuit { n_qubits, depth }
    }

    pub fn n_params(&self) -> usize {
        self.n_qubits * self.depth
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::ParamCountMismatch {
                expected: self.n_params(),
                got: params.len(),
            });
        }
        Ok(())
    }

    /// Apply the circuit to `input`, acting on qubits
    /// `offset..offset + n_qubits` of the carrier state.
    pub fn apply_offset(
        &self,
        params: &[f64],
        state: &mut StateVector,
        offset: usize,
    ) -> Result<()> {
        self.check_params(params)?;
        for layer in 0..self.depth {
            for q in 0..self.n_qubits {
                state.apply_gate_mut(&Gate::RotationY {
                    angle: params[layer * self.n_qubits + q],
                    target: offset + q,
                })?;
            }
            let start = layer % 2;
            let mut q = start;
            while q + 1 < self.n_qubits {
                state.apply_gate_mut(&Gate::Cnot {
                    control: offset + q,
                    target: offset + q + 1,
                })?;
                q += 2;
            }
        }
        Ok(())
    }

    /// Apply the inverse circuit on the same qubit range. The CNOT ladder of a
    /// layer is made of disjoint pairs, so it is its own inverse.
    pub fn apply_inverse_offset(
        &self,
        params: &[f64],
        state: &mut StateVector,
        offset: usize,
    ) -> Result<()> {
        self.check_params(params)?;
        for layer in (0..self.depth).rev() {
            let start = layer % 2;
            let mut q = start;
            while q + 1 < self.n_qubits {
                state.apply_gate_mut(&Gate::Cnot {
                    control: offset + q,
                    target: offset + q + 1,
                })?;
                q += 2;
            }
            for q in 0..self.n_qubits {
                state.apply_gate_mut(&Gate::RotationY {
                    angle: -params[layer * self.n_qubits + q],
                    target: offset + q,
                })?;
            }
        }
        Ok(())
    }

    /// Circuit output for a given input state.
    pub fn prepare(&self, params: &[f64], input: &StateVector) -> Result<StateVector> {
        if input.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: input.n_qubits(),
                right: self.n_qubits,
            });
        }
        let mut out = input.clone();
        self.apply_offset(params, &mut out, 0)?;
        Ok(out)
    }

    /// Dense unitary realized by the circuit (column-by-column).
    pub fn unitary(&self, params: &[f64]) -> Result<DMatrix<C64>> {
        self.check_params(params)?;
        let dim = 1usize << self.n_qubits;
        let mut u = DMatrix::<C64>::zeros(dim, dim);
        for col in 0..dim {
            let out = self.prepare(params, &StateVector::basis_state(self.n_qubits, col))?;
            for row in 0..dim {
                u[(row, col)] = out.amplitude(row);
            }
        }
        Ok(u)
    }

    /// Uniform-random parameters in `[0, 2π)`, deterministic per seed.
    pub fn random_params(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..self.n_params()).map(|_| rng.random_range(0.0..TAU)).collect()
    }

    /// The circuit as a flat differentiable gate list acting on qubits
    /// `qubit_offset..` and reading parameters from `param_offset..`.
    /// Mirrors [`AnsatzCircuit::apply_offset`] gate for gate.
    pub fn adjoint_gates(&self, qubit_offset: usize, param_offset: usize) -> Vec<AdjGate> {
        let mut gates = Vec::with_capacity(self.n_params() + self.depth * self.n_qubits / 2);
        for layer in 0..self.depth {
            for q in 0..self.n_qubits {
                gates.push(AdjGate::Ry {
                    target: qubit_offset + q,
                    param: param_offset + layer * self.n_qubits + q,
                });
            }
            let mut q = layer % 2;
            while q + 1 < self.n_qubits {
                gates.push(AdjGate::Fixed(Gate::Cnot {
                    control: qubit_offset + q,
                    target: qubit_offset + q + 1,
                }));
                q += 2;
            }
        }
        gates
    }
}

/// One gate of a differentiable circuit: a parameterized `R_y` bound to a
/// parameter slot, or a fixed gate.
#[derive(Clone, Copy, Debug)]
pub enum AdjGate {
    Ry { target: usize, param: usize },
    Fixed(Gate),
}

impl AdjGate {
    fn apply(&self, params: &[f64], state: &mut StateVector) -> Result<()> {
        match *self {
            AdjGate::Ry { target, param } => state.apply_gate_mut(&Gate::RotationY {
                angle: params[param],
                target,
            }),
            AdjGate::Fixed(g) => state.apply_gate_mut(&g),
        }
    }

    fn apply_inverse(&self, params: &[f64], state: &mut StateVector) -> Result<()> {
        let inv = match *self {
            AdjGate::Ry { target, param } => Gate::RotationY {
                angle: -params[param],
                target,
            },
            // Hadamard, CNOT, and the Paulis are involutions.
            AdjGate::Fixed(g) => g,
        };
        state.apply_gate_mut(&inv)
    }
}

/// Run the gate list forward: `G_P … G_1 |input⟩`.
pub fn apply_adj_gates(
    gates: &[AdjGate],
    params: &[f64],
    input: &StateVector,
) -> Result<StateVector> {
    let mut s = input.clone();
    for g in gates {
        g.apply(params, &mut s)?;
    }
    Ok(s)
}

/// Expectation `⟨φ|O|φ⟩` with `φ = G_P…G_1|input⟩` and its full gradient in
/// one forward plus one backward pass (reverse-mode differentiation).
/// `apply_obs` must apply the Hermitian observable `O` to a state. The
/// gradient is mathematically identical to the parameter-shift rule, at
/// O(circuit) instead of O(params × circuit) cost.
pub fn adjoint_gradient(
    gates: &[AdjGate],
    params: &[f64],
    n_params: usize,
    input: &StateVector,
    apply_obs: &dyn Fn(&StateVector) -> StateVector,
) -> Result<(f64, Vec<f64>)> {
    let mut phi = apply_adj_gates(gates, params, input)?;
    let mut lambda = apply_obs(&phi);
    let value = crate::sim::inner(&phi, &lambda)?.re;
    let mut grad = vec![0.0; n_params];
    for g in gates.iter().rev() {
        g.apply_inverse(params, &mut phi)?;
        if let AdjGate::Ry { target, param } = *g {
            // dR_y(θ)/dθ = ½ R_y(θ+π)
            let mut mu = phi.clone();
            mu.apply_gate_mut(&Gate::RotationY {
                angle: params[param] + std::f64::consts::PI,
                target,
            })?;
            grad[param] += crate::sim::inner(&lambda, &mu)?.re;
        }
        g.apply_inverse(params, &mut lambda)?;
    }
    Ok((value, grad))
}

/// Loss of the form `offset + ⟨φ(θ)|O|φ(θ)⟩` with adjoint-mode gradients.
pub struct CircuitExpectationLoss<F: Fn(&StateVector) -> StateVector> {
    pub gates: Vec<AdjGate>,
    pub n_params: usize,
    pub input: StateVector,
    pub apply_obs: F,
    pub offset: f64,
}

impl<F: Fn(&StateVector) -> StateVector> Loss for CircuitExpectationLoss<F> {
    fn n_params(&self) -> usize {
        self.n_params
    }

    fn eval(&self, params: &[f64]) -> f64 {
        let phi = apply_adj_gates(&self.gates, params, &self.input).expect("targets fixed");
        let obs = (self.apply_obs)(&phi);
        self.offset + crate::sim::inner(&phi, &obs).expect("dims fixed").re
    }

    fn gradient(&self, params: &[f64]) -> Vec<f64> {
        adjoint_gradient(&self.gates, params, self.n_params, &self.input, &self.apply_obs)
            .expect("targets fixed")
            .1
    }
}

/// A deterministic map from a parameter vector to a real loss.
pub trait Loss {
    fn n_params(&self) -> usize;

    fn eval(&self, params: &[f64]) -> f64;

    /// Gradient; defaults to the parameter-shift rule, exact whenever the
    /// loss is an expectation of the ansatz state (every parameter enters
    /// through a single `R_y`).
    fn gradient(&self, params: &[f64]) -> Vec<f64> {
        parameter_shift_gradient(self, params)
    }
}

/// `(loss(θ_k + π/2) − loss(θ_k − π/2)) / 2` per component.
pub fn parameter_shift_gradient<L: Loss + ?Sized>(loss: &L, params: &[f64]) -> Vec<f64> {
    let mut shifted = params.to_vec();
    (0..params.len())
        .map(|k| {
            let orig = shifted[k];
            shifted[k] = orig + FRAC_PI_2;
            let plus = loss.eval(&shifted);
            shifted[k] = orig - FRAC_PI_2;
            let minus = loss.eval(&shifted);
            shifted[k] = orig;
            (plus - minus) / 2.0
        })
        .collect()
}

/// Closure-backed loss with an evaluation counter.
pub struct FnLoss<F: Fn(&[f64]) -> f64> {
    n_params: usize,
    f: F,
    evals: Cell<u64>,
}

impl<F: Fn(&[f64]) -> f64> FnLoss<F> {
    pub fn new(n_params: usize, f: F) -> Self {
        FnLoss {
            n_params,
            f,
            evals: Cell::new(0),
        }
    }

    pub fn evals(&self) -> u64 {
        self.evals.get()
    }
}

impl<F: Fn(&[f64]) -> f64> Loss for FnLoss<F> {
    fn n_params(&self) -> usize {
        self.n_params
    }

    fn eval(&self, params: &[f64]) -> f64 {
        self.evals.set(self.evals.get() + 1);
        (self.f)(params)
    }
}

/// Plain gradient-descent settings. The learning rate and tolerance are
/// calibration choices; iteration count defaults to 300.
#[derive(Clone, Copy, Debug)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    pub learning_rate: f64,
    pub convergence_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iterations: 300,
            learning_rate: 0.05,
            convergence_tol: 0.0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig {
                field: "max_iterations",
                reason: "must be at least 1".into(),
            });
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig {
                field: "learning_rate",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    /// Best-seen parameters (not necessarily the last iterate).
    pub params: Vec<f64>,
    pub best_loss: f64,
    /// Loss at the current iterate, one entry per iteration plus the initial.
    pub history: Vec<f64>,
}

/// `θ ← θ − η ∇L` from uniform-random initial parameters in `[0, 2π)`.
pub fn minimize<L: Loss + ?Sized>(loss: &L, config: &OptimizerConfig) -> Result<MinimizeResult> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init: Vec<f64> = (0..loss.n_params())
        .map(|_| rng.random_range(0.0..TAU))
        .collect();
    minimize_from(loss, init, config)
}

/// Same descent loop with a caller-provided starting point (warm starts).
pub fn minimize_from<L: Loss + ?Sized>(
    loss: &L,
    init: Vec<f64>,
    config: &OptimizerConfig,
) -> Result<MinimizeResult> {
    config.validate()?;
    let mut params = init;
    let mut current = loss.eval(&params);
    let mut history = vec![current];
    let mut best = current;
    let mut best_params = params.clone();
    for _ in 0..config.max_iterations {
        let grad = loss.gradient(&params);
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= config.learning_rate * g;
        }
        let prev = current;
        current = loss.eval(&params);
        history.push(current);
        if current < best {
            best = current;
            best_params = params.clone();
        }
        if (prev - current).abs() < config.convergence_tol {
            break;
        }
    }
    Ok(MinimizeResult {
        params: best_params,
        best_loss: best,
        history,
    })
}

/// Two-stage descent schedule: an exploration phase at twice the configured
/// learning rate (60% of the iteration budget), then refinement at half the
/// configured rate from the best-seen exploration point. Both phases are plain
/// fixed-rate gradient descent; the high-rate phase hops shallow local minima
/// that trap a single-rate run, and best-seen tracking keeps its progress even
/// when individual steps overshoot.
pub fn minimize_scheduled<L: Loss + ?Sized>(
    loss: &L,
    config: &OptimizerConfig,
) -> Result<MinimizeResult> {
    config.validate()?;
    let explore_iters = (config.max_iterations * 3) / 5;
    let refine_iters = config.max_iterations - explore_iters;
    let explore = OptimizerConfig {
        learning_rate: 2.0 * config.learning_rate,
        max_iterations: explore_iters.max(1),
        ..*config
    };
    let stage1 = minimize(loss, &explore)?;
    let refine = OptimizerConfig {
        learning_rate: config.learning_rate / 2.0,
        max_iterations: refine_iters.max(1),
        ..*config
    };
    let stage2 = minimize_from(loss, stage1.params.clone(), &refine)?;
    Ok(if stage2.best_loss <= stage1.best_loss {
        stage2
    } else {
        stage1
    })
}

/// Observable for a VQE run: dense Hermitian matrix or Pauli sum.
#[derive(Clone, Debug)]
pub enum Observable {
    Dense(DMatrix<C64>),
    Paulis(PauliSum),
}

impl Observable {
    fn check_hermitian(&self, dim: usize) -> Result<()> {
        match self {
            Observable::Dense(m) => {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(Error::DimensionMismatch {
                        left: m.nrows(),
                        right: dim,
                    });
                }
                let residual = (m - m.adjoint()).norm();
                if residual > 1e-8 {
                    return Err(Error::NotHermitian { residual });
                }
                Ok(())
            }
            // Real coefficients make a Pauli sum Hermitian by construction.
            Observable::Paulis(_) => Ok(()),
        }
    }

    /// `O|ψ⟩` — the observable applied as an operator.
    pub fn apply(&self, state: &StateVector) -> StateVector {
        match self {
            Observable::Dense(m) => {
                let v = m * state.as_dvector();
                StateVector::from_amplitudes(state.n_qubits(), v.iter().copied().collect())
                    .expect("dimension preserved")
            }
            Observable::Paulis(h) => {
                let mut amps = vec![C64::ZERO; 1 << state.n_qubits()];
                for t in h.terms() {
                    let applied = t.apply(state).expect("term matches state");
                    let c = C64::new(t.coefficient, 0.0);
                    for (a, b) in amps.iter_mut().zip(applied.amplitudes()) {
                        *a += c * b;
                    }
                }
                StateVector::from_amplitudes(state.n_qubits(), amps).expect("length fixed")
            }
        }
    }

    pub fn expectation(&self, state: &StateVector) -> f64 {
        match self {
            Observable::Dense(m) => {
                let v = state.as_dvector();
                (v.adjoint() * m * &v)[(0, 0)].re
            }
            Observable::Paulis(h) => h
                .terms()
                .iter()
                .map(|t| pauli_expectation(state, t).expect("term matches state"))
                .sum(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VqeResult {
    pub energy: f64,
    pub state: StateVector,
    pub params: Vec<f64>,
    pub history: Vec<f64>,
}

/// VQE ground-state search with the hardware-efficient ansatz starting from
/// `|0…0⟩`. `depth` defaults to `n_qubits`.
pub fn vqe_ground(
    observable: &Observable,
    n_qubits: usize,
    depth: Option<usize>,
    config: &OptimizerConfig,
) -> Result<VqeResult> {
    observable.check_hermitian(1 << n_qubits)?;
    let ansatz = AnsatzCircuit::new(n_qubits, depth.unwrap_or(n_qubits));
    let input = StateVector::zero_state(n_qubits);
    let loss = CircuitExpectationLoss {
        gates: ansatz.adjoint_gates(0, 0),
        n_params: ansatz.n_params(),
        input: input.clone(),
        apply_obs: |s: &StateVector| observable.apply(s),
        offset: 0.0,
    };
    let res = minimize(&loss, config)?;
    let state = ansatz.prepare(&res.params, &input)?;
    Ok(VqeResult {
        energy: observable.expectation(&state),
        state,
        params: res.params,
        history: res.history,
    })
}
