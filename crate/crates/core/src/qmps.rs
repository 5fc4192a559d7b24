//! The qMPS data model: sites with (left-aux | physical | right-aux) qubit
//! groups, chain assembly, auxiliary-basis projection, rank-6 local
//! expectation tensors, and the classical contraction of those tensors.

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sim::{C64, Pauli, PauliString, StateVector, inner};
use crate::variational::AnsatzCircuit;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CanonicalFlag {
    None,
    Left,
    Right,
}

/// One simulated quantum state of `n_l + n_p + n_r` qubits, ordered
/// `[left-aux | physical | right-aux]`. `log_scale` accumulates classical
/// normalization factors dropped to keep the stored state at unit norm.
#[derive(Clone, Debug)]
pub struct QmpsSite {
    pub state: StateVector,
    pub n_l: usize,
    pub n_p: usize,
    pub n_r: usize,
    pub canonical: CanonicalFlag,
    pub log_scale: f64,
}

impl QmpsSite {
    pub fn new(state: StateVector, n_l: usize, n_p: usize, n_r: usize) -> Result<Self> {
        if n_l + n_p + n_r != state.n_qubits() {
            return Err(Error::DimensionMismatch {
                left: n_l + n_p + n_r,
                right: state.n_qubits(),
            });
        }
        if !state.is_normalized(1e-10) {
            return Err(Error::NotNormalized {
                norm_sqr: state.norm_sqr(),
            });
        }
        Ok(QmpsSite {
            state,
            n_l,
            n_p,
            n_r,
            canonical: CanonicalFlag::None,
            log_scale: 0.0,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_l + self.n_p + self.n_r
    }

    /// Left and right auxiliary basis dimensions.
    pub fn dim_left(&self) -> usize {
        1 << self.n_l
    }

    pub fn dim_right(&self) -> usize {
        1 << self.n_r
    }

    /// Pseudo-random site: the ansatz at depth `2(n_l + n_p + n_r)` with
    /// seeded uniform parameters applied to `|0…0⟩`.
    pub fn random(n_l: usize, n_p: usize, n_r: usize, seed: u64) -> Self {
        let n = n_l + n_p + n_r;
        let ansatz = AnsatzCircuit::new(n, 2 * n);
        let params = ansatz.random_params(seed);
        let state = ansatz
            .prepare(&params, &StateVector::zero_state(n))
            .expect("param count matches");
        QmpsSite {
            state,
            n_l,
            n_p,
            n_r,
            canonical: CanonicalFlag::None,
            log_scale: 0.0,
        }
    }

    fn aux_bits(value: usize, width: usize) -> Vec<u8> {
        (0..width)
            .map(|b| ((value >> (width - 1 - b)) & 1) as u8)
            .collect()
    }

    /// `⟨j|_l ⟨k|_r |ψ_i⟩`: the unnormalized physical-qubit state obtained by
    /// projecting the auxiliary groups onto computational basis states.
    pub fn project_aux(&self, j: usize, k: usize) -> Result<StateVector> {
        if j >= self.dim_left() || k >= self.dim_right() {
            return Err(Error::TargetOutOfRange {
                target: j.max(k),
                n_qubits: self.n_qubits(),
            });
        }
        let mut qubits: Vec<usize> = (0..self.n_l).collect();
        qubits.extend(self.n_l + self.n_p..self.n_qubits());
        let mut bits = Self::aux_bits(j, self.n_l);
        bits.extend(Self::aux_bits(k, self.n_r));
        self.state.project(&qubits, &bits)
    }

    /// Site amplitudes as a matrix with rows = (left-aux, physical) and
    /// columns = right-aux.
    pub fn as_matrix_left(&self) -> DMatrix<C64> {
        let rows = 1 << (self.n_l + self.n_p);
        let cols = self.dim_right();
        DMatrix::from_fn(rows, cols, |r, c| self.state.amplitude(r * cols + c))
    }

    /// Site amplitudes as a matrix with rows = left-aux and
    /// columns = (physical, right-aux).
    pub fn as_matrix_right(&self) -> DMatrix<C64> {
        let rows = self.dim_left();
        let cols = 1 << (self.n_p + self.n_r);
        DMatrix::from_fn(rows, cols, |r, c| self.state.amplitude(r * cols + c))
    }
}

/// Chain of qMPS sites; adjacent auxiliary widths must match and the chain
/// is open at both ends.
#[derive(Clone, Debug)]
pub struct QmpsChain {
    sites: Vec<QmpsSite>,
    pub n_chi: usize,
}

impl QmpsChain {
    pub fn new(sites: Vec<QmpsSite>, n_chi: usize) -> Result<Self> {
        if sites.len() < 1 {
            return Err(Error::ChainTooShort(0));
        }
        if sites[0].n_l != 0 || sites[sites.len() - 1].n_r != 0 {
            return Err(Error::BondMismatch {
                left: sites[0].n_l,
                right: sites[sites.len() - 1].n_r,
            });
        }
        for w in sites.windows(2) {
            if w[0].n_r != w[1].n_l {
                return Err(Error::BondMismatch {
                    left: w[0].n_r,
                    right: w[1].n_l,
                });
            }
        }
        Ok(QmpsChain { sites, n_chi })
    }

    /// Random chain with one physical qubit per site and `n_chi` auxiliary
    /// qubits per interior bond.
    pub fn random(n_sites: usize, n_chi: usize, seed: u64) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::ChainTooShort(n_sites));
        }
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let sites = (0..n_sites)
            .map(|i| {
                let n_l = if i == 0 { 0 } else { n_chi };
                let n_r = if i == n_sites - 1 { 0 } else { n_chi };
                QmpsSite::random(n_l, 1, n_r, master.random())
            })
            .collect();
        QmpsChain::new(sites, n_chi)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[QmpsSite] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> &QmpsSite {
        &self.sites[i]
    }

    pub fn replace_site(&mut self, i: usize, site: QmpsSite) -> Result<()> {
        if i >= self.sites.len() {
            return Err(Error::SiteIndexOutOfRange {
                index: i,
                len: self.sites.len(),
            });
        }
        if site.n_l != self.sites[i].n_l || site.n_r != self.sites[i].n_r {
            return Err(Error::BondMismatch {
                left: site.n_l,
                right: site.n_r,
            });
        }
        self.sites[i] = site;
        Ok(())
    }

    pub fn global_n(&self) -> usize {
        self.sites.iter().map(|s| s.n_p).sum()
    }
}

/// Bond contraction of two adjacent sites: `Σ_α ⟨α|_r·|a⟩ ⊗ ⟨α|_l·|b⟩`,
/// renormalized with the dropped norm absorbed into `log_scale`.
pub fn contract_sites(a: &QmpsSite, b: &QmpsSite) -> Result<QmpsSite> {
    if a.n_r != b.n_l {
        return Err(Error::BondMismatch {
            left: a.n_r,
            right: b.n_l,
        });
    }
    let bond_dim = a.dim_right();
    let n_out = a.n_l + a.n_p + b.n_p + b.n_r;
    let mut acc = StateVector::from_amplitudes(n_out, vec![C64::ZERO; 1 << n_out])?;
    for alpha in 0..bond_dim {
        // project the shared bond on both sides
        let right_qubits: Vec<usize> = (a.n_l + a.n_p..a.n_qubits()).collect();
        let left_qubits: Vec<usize> = (0..b.n_l).collect();
        let bits = QmpsSite::aux_bits(alpha, a.n_r);
        let va = a.state.project(&right_qubits, &bits)?;
        let vb = b.state.project(&left_qubits, &bits)?;
        let term = va.tensor(&vb);
        let mut amps: Vec<C64> = acc.amplitudes().to_vec();
        for (x, y) in amps.iter_mut().zip(term.amplitudes()) {
            *x += y;
        }
        acc = StateVector::from_amplitudes(n_out, amps)?;
    }
    let mut state = acc;
    let norm = state.normalize()?;
    let mut site = QmpsSite::new(state, a.n_l, a.n_p + b.n_p, b.n_r)?;
    site.log_scale = a.log_scale + b.log_scale + norm.ln();
    Ok(site)
}

/// Global state assembled from a chain: unnormalized amplitudes plus the
/// norm, computed by repeated bond contraction.
#[derive(Clone, Debug)]
pub struct GlobalState {
    /// Unnormalized amplitude vector (scale factors applied).
    pub state: StateVector,
    pub norm: f64,
}

pub fn assemble_global(chain: &QmpsChain) -> Result<GlobalState> {
    if chain.global_n() > 14 {
        return Err(Error::TooLarge {
            n: chain.global_n(),
            limit: 14,
        });
    }
    let mut acc = chain.site(0).clone();
    for i in 1..chain.len() {
        acc = contract_sites(&acc, chain.site(i))?;
    }
    let scale = acc.log_scale.exp();
    let mut state = acc.state;
    state.scale(C64::new(scale, 0.0));
    Ok(GlobalState { norm: scale, state })
}

/// Rank-6 local expectation tensor, stored per bond index as a
/// `(dl·dl) × (dr·dr)` block since a diagonal MPO only populates `β = β'`.
/// Boundary sites degenerate to rank 3 via unit auxiliary dimensions.
#[derive(Clone, Debug)]
pub struct LocalTensor {
    pub dim_left: usize,
    pub dim_right: usize,
    pub bond: usize,
    blocks: Vec<DMatrix<C64>>,
}

impl LocalTensor {
    /// Entry `(γ, β, γ'; δ, β', δ')`; zero off the bond diagonal.
    pub fn entry(&self, g: usize, b: usize, gp: usize, d: usize, bp: usize, dp: usize) -> C64 {
        if b != bp {
            return C64::ZERO;
        }
        self.blocks[b][(g * self.dim_left + gp, d * self.dim_right + dp)]
    }

    pub fn block(&self, b: usize) -> &DMatrix<C64> {
        &self.blocks[b]
    }
}

/// Transfer tensor: `entry(γ,β,γ'; δ,β,δ') = ⟨ψ(γ',δ')|P_β|ψ(γ,δ)⟩`
/// over the site's projected physical states.
pub fn local_tensor(site: &QmpsSite, mpo_ops: &[Pauli]) -> Result<LocalTensor> {
    let dl = site.dim_left();
    let dr = site.dim_right();
    let k = mpo_ops.len();
    if site.n_p != 1 {
        return Err(Error::DimensionMismatch {
            left: site.n_p,
            right: 1,
        });
    }
    let mut projected = Vec::with_capacity(dl * dr);
    for g in 0..dl {
        for d in 0..dr {
            projected.push(site.project_aux(g, d)?);
        }
    }
    let mut blocks = Vec::with_capacity(k);
    for &op in mpo_ops {
        let applied: Vec<StateVector> = projected
            .iter()
            .map(|p| PauliString::new(1.0, vec![op]).apply(p))
            .collect::<Result<_>>()?;
        let mut block = DMatrix::<C64>::zeros(dl * dl, dr * dr);
        for g in 0..dl {
            for gp in 0..dl {
                for d in 0..dr {
                    for dp in 0..dr {
                        let bra = &projected[gp * dr + dp];
                        let ket = &applied[g * dr + d];
                        block[(g * dl + gp, d * dr + dp)] = inner(bra, ket)?;
                    }
                }
            }
        }
        blocks.push(block);
    }
    Ok(LocalTensor {
        dim_left: dl,
        dim_right: dr,
        bond: k,
        blocks,
    })
}

/// Contract a chain of local tensors with per-term coefficients into the
/// scalar global expectation. The bond index is constant along the chain
/// (diagonal MPO), so each term contracts independently.
pub fn contract_expectation(tensors: &[LocalTensor], coefficients: &[f64]) -> Result<f64> {
    let v = contract_expectation_complex(tensors, coefficients)?;
    debug_assert!(v.im.abs() <= 1e-9 * v.re.abs().max(1.0));
    Ok(v.re)
}

pub fn contract_expectation_complex(
    tensors: &[LocalTensor],
    coefficients: &[f64],
) -> Result<C64> {
    let first = tensors.first().ok_or(Error::ChainTooShort(0))?;
    let k = first.bond;
    if coefficients.len() != k {
        return Err(Error::DimensionMismatch {
            left: coefficients.len(),
            right: k,
        });
    }
    for w in tensors.windows(2) {
        if w[0].dim_right != w[1].dim_left || w[1].bond != k {
            return Err(Error::DimensionMismatch {
                left: w[0].dim_right,
                right: w[1].dim_left,
            });
        }
    }
    let last = tensors.last().unwrap();
    if first.dim_left != 1 || last.dim_right != 1 {
        return Err(Error::DimensionMismatch {
            left: first.dim_left,
            right: last.dim_right,
        });
    }
    let mut total = C64::ZERO;
    for b in 0..k {
        let mut row: RowDVector<C64> = tensors[0].blocks[b].row(0).into();
        for t in &tensors[1..] {
            row = &row * &t.blocks[b];
        }
        total += C64::new(coefficients[b], 0.0) * row[0];
    }
    Ok(total)
}

/// Right-to-left accumulation of the same contraction (order-irrelevance
/// cross-check).
pub fn contract_expectation_rtl(tensors: &[LocalTensor], coefficients: &[f64]) -> Result<f64> {
    let first = tensors.first().ok_or(Error::ChainTooShort(0))?;
    let k = first.bond;
    let mut total = C64::ZERO;
    for b in 0..k {
        let last = tensors.last().unwrap();
        let mut col: DVector<C64> = last.blocks[b].column(0).into();
        for t in tensors[..tensors.len() - 1].iter().rev() {
            col = &t.blocks[b] * &col;
        }
        total += C64::new(coefficients[b], 0.0) * col[0];
    }
    Ok(total.re)
}
