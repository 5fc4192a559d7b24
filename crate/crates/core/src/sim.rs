//! Dense state-vector simulation.
//!
//! Conventions fixed once for the whole crate:
//! - qubit 0 is the most-significant bit of the amplitude index;
//! - `RotationY(θ)` is `exp(-iθY/2)`, i.e. `[[cos θ/2, -sin θ/2], [sin θ/2, cos θ/2]]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hard cap on qubits per simulated state; sites need at most `2n_χ + 1 = 7`.
pub const MAX_QUBITS: usize = 16;

/// Dense complex amplitude vector over `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// The all-zeros computational basis state `|0...0⟩`.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "state too large");
        assert!(index < (1 << n_qubits));
        let mut amps = vec![C64::ZERO; 1 << n_qubits];
        amps[index] = C64::ONE;
        StateVector { n_qubits, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::BadAmplitudeLength {
                n_qubits,
                got: amps.len(),
            });
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Rescale to unit norm, returning the previous norm.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        let inv = 1.0 / n;
        for a in &mut self.amps {
            *a *= inv;
        }
        Ok(n)
    }

    pub fn scale(&mut self, factor: C64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// Bit position (shift) of qubit `q` in the amplitude index.
    #[inline]
    fn shift(&self, q: usize) -> usize {
        self.n_qubits - 1 - q
    }

    fn check_target(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            Err(Error::TargetOutOfRange {
                target: q,
                n_qubits: self.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Apply a gate in place.
    pub fn apply_gate_mut(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::RotationY { angle, target } => {
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                self.apply_1q(target, [
                    [C64::new(c, 0.0), C64::new(-s, 0.0)],
                    [C64::new(s, 0.0), C64::new(c, 0.0)],
                ])
            }
            Gate::Hadamard { target } => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                self.apply_1q(target, [
                    [C64::new(h, 0.0), C64::new(h, 0.0)],
                    [C64::new(h, 0.0), C64::new(-h, 0.0)],
                ])
            }
            Gate::PauliX { target } => self.apply_1q(target, [
                [C64::ZERO, C64::ONE],
                [C64::ONE, C64::ZERO],
            ]),
            Gate::PauliY { target } => self.apply_1q(target, [
                [C64::ZERO, C64::new(0.0, -1.0)],
                [C64::new(0.0, 1.0), C64::ZERO],
            ]),
            Gate::PauliZ { target } => self.apply_1q(target, [
                [C64::ONE, C64::ZERO],
                [C64::ZERO, -C64::ONE],
            ]),
            Gate::Cnot { control, target } => {
                self.check_target(control)?;
                self.check_target(target)?;
                if control == target {
                    return Err(Error::DuplicateTargets);
                }
                let cs = self.shift(control);
                let ts = self.shift(target);
                for i in 0..self.amps.len() {
                    if (i >> cs) & 1 == 1 && (i >> ts) & 1 == 0 {
                        self.amps.swap(i, i | (1 << ts));
                    }
                }
                Ok(())
            }
        }
    }

    /// Pure variant of [`apply_gate_mut`].
    pub fn apply_gate(&self, gate: &Gate) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_gate_mut(gate)?;
        Ok(out)
    }

    fn apply_1q(&mut self, target: usize, m: [[C64; 2]; 2]) -> Result<()> {
        self.check_target(target)?;
        let s = 1usize << self.shift(target);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for off in base..base + s {
                let i0 = off;
                let i1 = off + s;
                let a0 = self.amps[i0];
                let a1 = self.amps[i1];
                self.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * s;
        }
        Ok(())
    }

    /// Apply a dense unitary acting on the listed qubits (in the given order,
    /// first listed qubit = most significant sub-index bit).
    pub fn apply_unitary(&mut self, u: &DMatrix<C64>, qubits: &[usize]) -> Result<()> {
        let k = qubits.len();
        let sub_dim = 1usize << k;
        if u.nrows() != sub_dim || u.ncols() != sub_dim {
            return Err(Error::DimensionMismatch {
                left: u.nrows(),
                right: sub_dim,
            });
        }
        for &q in qubits {
            self.check_target(q)?;
        }
        let shifts: Vec<usize> = qubits.iter().map(|&q| self.shift(q)).collect();
        let mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
        let dim = self.amps.len();
        let mut out = vec![C64::ZERO; dim];
        for i in 0..dim {
            let rest = i & !mask;
            let mut row = 0usize;
            for (b, &s) in shifts.iter().enumerate() {
                row |= ((i >> s) & 1) << (k - 1 - b);
            }
            let mut acc = C64::ZERO;
            for col in 0..sub_dim {
                let mut j = rest;
                for (b, &s) in shifts.iter().enumerate() {
                    j |= ((col >> (k - 1 - b)) & 1) << s;
                }
                acc += u[(row, col)] * self.amps[j];
            }
            out[i] = acc;
        }
        self.amps = out;
        Ok(())
    }

    /// Project the listed qubits onto the computational bitstring `bits`
    /// (one entry per listed qubit, in order), returning the UNNORMALIZED
    /// state over the surviving qubits with their relative order preserved.
    pub fn project(&self, qubits: &[usize], bits: &[u8]) -> Result<StateVector> {
        if qubits.len() != bits.len() {
            return Err(Error::DimensionMismatch {
                left: qubits.len(),
                right: bits.len(),
            });
        }
        for &q in qubits {
            self.check_target(q)?;
        }
        let mut seen = vec![false; self.n_qubits];
        for &q in qubits {
            if seen[q] {
                return Err(Error::DuplicateTargets);
            }
            seen[q] = true;
        }
        let mut want = 0usize;
        let mut mask = 0usize;
        for (&q, &b) in qubits.iter().zip(bits) {
            let s = self.shift(q);
            mask |= 1 << s;
            if b != 0 {
                want |= 1 << s;
            }
        }
        let n_out = self.n_qubits - qubits.len();
        let survivors: Vec<usize> = (0..self.n_qubits).filter(|q| !seen[*q]).collect();
        let mut amps = vec![C64::ZERO; 1 << n_out];
        for i in 0..self.amps.len() {
            if i & mask != want {
                continue;
            }
            let mut j = 0usize;
            for (b, &q) in survivors.iter().enumerate() {
                j |= ((i >> self.shift(q)) & 1) << (n_out - 1 - b);
            }
            amps[j] = self.amps[i];
        }
        StateVector::from_amplitudes(n_out, amps)
    }

    /// Tensor product `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let n = self.n_qubits + other.n_qubits;
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { n_qubits: n, amps }
    }

    pub fn as_dvector(&self) -> nalgebra::DVector<C64> {
        nalgebra::DVector::from_column_slice(&self.amps)
    }
}

/// Inner product `⟨a|b⟩`.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<C64> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::DimensionMismatch {
            left: a.n_qubits,
            right: b.n_qubits,
        });
    }
    Ok(a
        .amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Gate set used throughout: the ansatz gates plus the Paulis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    RotationY { angle: f64, target: usize },
    Hadamard { target: usize },
    PauliX { target: usize },
    PauliY { target: usize },
    PauliZ { target: usize },
    Cnot { control: usize, target: usize },
}

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> DMatrix<C64> {
        let (a, b, c, d) = match self {
            Pauli::I => (C64::ONE, C64::ZERO, C64::ZERO, C64::ONE),
            Pauli::X => (C64::ZERO, C64::ONE, C64::ONE, C64::ZERO),
            Pauli::Y => (
                C64::ZERO,
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::ZERO,
            ),
            Pauli::Z => (C64::ONE, C64::ZERO, C64::ZERO, -C64::ONE),
        };
        DMatrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    pub fn label(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// One weighted Pauli product `c · ⊗_j P_j` over a fixed qubit count.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    pub coefficient: f64,
    pub ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(coefficient: f64, ops: Vec<Pauli>) -> Self {
        PauliString { coefficient, ops }
    }

    /// Identity string with a given weight.
    pub fn identity(coefficient: f64, n_qubits: usize) -> Self {
        PauliString {
            coefficient,
            ops: vec![Pauli::I; n_qubits],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.ops.len()
    }

    /// Apply the Pauli product (without the coefficient) to a state.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.ops.len() != state.n_qubits() {
            return Err(Error::DimensionMismatch {
                left: self.ops.len(),
                right: state.n_qubits(),
            });
        }
        let mut out = state.clone();
        for (q, op) in self.ops.iter().enumerate() {
            match op {
                Pauli::I => {}
                Pauli::X => out.apply_gate_mut(&Gate::PauliX { target: q })?,
                Pauli::Y => out.apply_gate_mut(&Gate::PauliY { target: q })?,
                Pauli::Z => out.apply_gate_mut(&Gate::PauliZ { target: q })?,
            }
        }
        Ok(out)
    }
}

/// `coefficient × ⟨ψ|P|ψ⟩` for a normalized state.
pub fn pauli_expectation(state: &StateVector, p: &PauliString) -> Result<f64> {
    if !state.is_normalized(1e-8) {
        return Err(Error::NotNormalized {
            norm_sqr: state.norm_sqr(),
        });
    }
    Ok(p.coefficient * raw_pauli_expectation(state, &p.ops)?)
}

/// `⟨ψ|⊗P|ψ⟩` without coefficient or normalization checks.
pub fn raw_pauli_expectation(state: &StateVector, ops: &[Pauli]) -> Result<f64> {
    let applied = PauliString::new(1.0, ops.to_vec()).apply(state)?;
    Ok(inner(state, &applied)?.re)
}

/// `⟨Z_q⟩` on a (not necessarily normalized) state; diagonal, so a single pass.
pub fn z_expectation(state: &StateVector, q: usize) -> Result<f64> {
    state.check_target(q)?;
    let s = state.shift(q);
    Ok(state
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let sign = if (i >> s) & 1 == 0 { 1.0 } else { -1.0 };
            sign * a.norm_sqr()
        })
        .sum())
}

/// `⟨Z_q Z_p⟩` on a state; diagonal parity observable.
pub fn zz_expectation(state: &StateVector, q: usize, p: usize) -> Result<f64> {
    state.check_target(q)?;
    state.check_target(p)?;
    let sq = state.shift(q);
    let sp = state.shift(p);
    Ok(state
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let parity = ((i >> sq) & 1) ^ ((i >> sp) & 1);
            let sign = if parity == 0 { 1.0 } else { -1.0 };
            sign * a.norm_sqr()
        })
        .sum())
}
