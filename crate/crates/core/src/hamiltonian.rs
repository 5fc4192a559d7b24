//! Pauli-sum Hamiltonians, their diagonal MPO view, and dense assembly.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sim::{C64, Pauli, PauliString};

/// Dense-matrix size cap: 2^14 × 2^14 is the largest we ever materialize.
pub const DENSE_LIMIT: usize = 14;

/// Hermitian operator as a merged list of real-weighted Pauli strings.
#[derive(Clone, Debug)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    /// Merge duplicate operator patterns and drop exact-zero coefficients.
    /// First-seen term order is kept for determinism.
    pub fn new(n_qubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        let mut index: HashMap<Vec<Pauli>, usize> = HashMap::new();
        let mut merged: Vec<PauliString> = Vec::new();
        for t in terms {
            if t.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch {
                    left: t.n_qubits(),
                    right: n_qubits,
                });
            }
            match index.get(&t.ops) {
                Some(&i) => merged[i].coefficient += t.coefficient,
                None => {
                    index.insert(t.ops.clone(), merged.len());
                    merged.push(t);
                }
            }
        }
        merged.retain(|t| t.coefficient != 0.0);
        Ok(PauliSum {
            n_qubits,
            terms: merged,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Dense `2^N × 2^N` Hermitian matrix.
    pub fn dense(&self) -> Result<DMatrix<C64>> {
        if self.n_qubits > DENSE_LIMIT {
            return Err(Error::TooLarge {
                n: self.n_qubits,
                limit: DENSE_LIMIT,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for t in &self.terms {
            let mut m = DMatrix::<C64>::identity(1, 1);
            for op in &t.ops {
                m = m.kronecker(&op.matrix());
            }
            out += m * C64::new(t.coefficient, 0.0);
        }
        Ok(out)
    }
}

/// Heisenberg XXZ chain:
/// `Σ_i [J(X_i X_{i+1} + Y_i Y_{i+1}) + Δ Z_i Z_{i+1}] + h Σ_i Z_i`.
pub fn build_xxz(n: usize, j: f64, delta: f64, h: f64) -> Result<PauliSum> {
    if n < 2 {
        return Err(Error::ChainTooShort(n));
    }
    let mut terms = Vec::new();
    let mut string = |c: f64, paulis: &[(usize, Pauli)]| {
        let mut ops = vec![Pauli::I; n];
        for &(q, p) in paulis {
            ops[q] = p;
        }
        terms.push(PauliString::new(c, ops));
    };
    for i in 0..n - 1 {
        string(j, &[(i, Pauli::X), (i + 1, Pauli::X)]);
        string(j, &[(i, Pauli::Y), (i + 1, Pauli::Y)]);
        string(delta, &[(i, Pauli::Z), (i + 1, Pauli::Z)]);
    }
    for i in 0..n {
        string(h, &[(i, Pauli::Z)]);
    }
    PauliSum::new(n, terms)
}

/// Diagonal MPO: per site and bond index a single Pauli, with term
/// coefficients attached at the last site. Off-diagonal bond entries are
/// implicitly zero, so only the bond-diagonal is stored.
#[derive(Clone, Debug)]
pub struct MpoForm {
    n_sites: usize,
    bond_size: usize,
    /// `site_ops[site][bond]`
    site_ops: Vec<Vec<Pauli>>,
    coefficients: Vec<f64>,
}

impl MpoForm {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn bond_size(&self) -> usize {
        self.bond_size
    }

    pub fn site_ops(&self, site: usize) -> &[Pauli] {
        &self.site_ops[site]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Contract all sites back to a dense matrix (test/oracle support).
    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        if self.n_sites > DENSE_LIMIT {
            return Err(Error::TooLarge {
                n: self.n_sites,
                limit: DENSE_LIMIT,
            });
        }
        let dim = 1usize << self.n_sites;
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for b in 0..self.bond_size {
            let mut m = DMatrix::<C64>::identity(1, 1);
            for site in 0..self.n_sites {
                m = m.kronecker(&self.site_ops[site][b].matrix());
            }
            out += m * C64::new(self.coefficients[b], 0.0);
        }
        Ok(out)
    }
}

/// Transcribe a Pauli sum into its diagonal MPO form; bond size = term count.
pub fn to_mpo(h: &PauliSum) -> MpoForm {
    let n = h.n_qubits();
    let k = h.n_terms();
    let mut site_ops = vec![Vec::with_capacity(k); n];
    let mut coefficients = Vec::with_capacity(k);
    for t in h.terms() {
        for (site, &op) in t.ops.iter().enumerate() {
            site_ops[site].push(op);
        }
        coefficients.push(t.coefficient);
    }
    MpoForm {
        n_sites: n,
        bond_size: k,
        site_ops,
        coefficients,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn xxz_term_counts() {
        for n in 2..=10 {
            let with_field = build_xxz(n, 1.0, 0.5, 0.3).unwrap();
            assert_eq!(with_field.n_terms(), 3 * (n - 1) + n);
            let no_field = build_xxz(n, 1.0, 0.5, 0.0).unwrap();
            assert_eq!(no_field.n_terms(), 3 * (n - 1));
        }
        assert!(build_xxz(1, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn xxz_field_only() {
        let h = build_xxz(2, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(h.n_terms(), 2);
        let d = h.dense().unwrap();
        // Z₁+Z₂ = diag(2, 0, 0, -2); ground state |11⟩ with energy -2.
        assert_abs_diff_eq!(d[(0, 0)].re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[(3, 3)].re, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn dense_single_z() {
        let h = PauliSum::new(1, vec![PauliString::new(1.0, vec![Pauli::Z])]).unwrap();
        let d = h.dense().unwrap();
        assert_eq!(d[(0, 0)], C64::ONE);
        assert_eq!(d[(1, 1)], -C64::ONE);
    }

    #[test]
    fn dense_hermiticity() {
        let h = build_xxz(4, 0.7, 1.3, 0.2).unwrap();
        let d = h.dense().unwrap();
        let res = (&d - d.adjoint()).norm();
        assert!(res <= 1e-12);
    }

    #[test]
    fn merging_duplicates() {
        let z = PauliString::new(1.0, vec![Pauli::Z, Pauli::I]);
        let z2 = PauliString::new(2.0, vec![Pauli::Z, Pauli::I]);
        let s = PauliSum::new(2, vec![z, z2]).unwrap();
        assert_eq!(s.n_terms(), 1);
        assert_abs_diff_eq!(s.terms()[0].coefficient, 3.0);
    }

    #[test]
    fn mpo_single_term() {
        let h = PauliSum::new(2, vec![PauliString::new(1.5, vec![Pauli::Z, Pauli::Z])]).unwrap();
        let mpo = to_mpo(&h);
        assert_eq!(mpo.bond_size(), 1);
        assert_eq!(mpo.site_ops(0), &[Pauli::Z]);
        assert_eq!(mpo.site_ops(1), &[Pauli::Z]);
        assert_abs_diff_eq!(mpo.coefficients()[0], 1.5);
    }

    #[test]
    fn mpo_field_transcription() {
        let h = build_xxz(2, 0.0, 0.0, 1.0).unwrap();
        let mpo = to_mpo(&h);
        assert_eq!(mpo.bond_size(), 2);
        assert_eq!(mpo.site_ops(0), &[Pauli::Z, Pauli::I]);
        assert_eq!(mpo.site_ops(1), &[Pauli::I, Pauli::Z]);
    }

    #[test]
    fn mpo_round_trip() {
        for n in 2..=6 {
            let h = build_xxz(n, 1.0, 0.5, 0.25).unwrap();
            let a = h.dense().unwrap();
            let b = to_mpo(&h).to_dense().unwrap();
            assert!((a - b).norm() <= 1e-12);
        }
    }
}
