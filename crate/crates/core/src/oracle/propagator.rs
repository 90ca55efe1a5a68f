//! Exact time evolution `U(t) = exp(−itH)` of a Hermitian matrix via its
//! eigendecomposition. Decoupled blocks (connected components of the nonzero
//! pattern) are diagonalised separately, so conserved excitation number keeps
//! large truncations cheap and the eigenvectors exactly block-sparse.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;
use num_complex::Complex64;

use super::operators::{hermiticity_defect, norm_inf, CMatrix};
use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;

/// Tolerance (relative to `‖H‖_∞`) on the anti-Hermitian part of an input.
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
struct EigenBlock {
    /// Basis indices spanned by the block, ascending.
    basis: Vec<usize>,
    /// First eigen index of the block; eigen indices of a block are contiguous.
    offset: usize,
    vectors: CMatrix,
}

#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    eigenvalues: Vec<f64>,
    blocks: Vec<EigenBlock>,
    /// Block of each eigen index.
    block_of: Vec<usize>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl Propagator {
    pub fn new(h: &CMatrix) -> Result<Self> {
        let dim = h.nrows();
        if h.ncols() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: h.ncols() });
        }
        if dim == 0 {
            return Err(Error::domain("empty Hamiltonian"));
        }
        let defect = hermiticity_defect(h);
        if !(defect <= HERMITIAN_TOL * norm_inf(h).max(1.0)) {
            return Err(Error::validation(alloc::format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }

        let mut parent: Vec<usize> = (0..dim).collect();
        for i in 0..dim {
            for j in (i + 1)..dim {
                if h[(i, j)] != Complex64::from(0.0) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); dim];
        for i in 0..dim {
            let root = find(&mut parent, i);
            members[root].push(i);
        }

        let mut eigenvalues = Vec::with_capacity(dim);
        let mut blocks = Vec::new();
        let mut block_of = Vec::with_capacity(dim);
        for basis in members.into_iter().filter(|m| !m.is_empty()) {
            let size = basis.len();
            let sub = CMatrix::from_fn(size, size, |r, c| h[(basis[r], basis[c])]);
            let eig = sub.symmetric_eigen();
            let offset = eigenvalues.len();
            eigenvalues.extend(eig.eigenvalues.iter().copied());
            block_of.extend(core::iter::repeat_n(blocks.len(), size));
            blocks.push(EigenBlock {
                basis,
                offset,
                vectors: eig.eigenvectors,
            });
        }
        Ok(Self {
            dim,
            eigenvalues,
            blocks,
            block_of,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Eigenvalues in eigen-index order (grouped by block, unsorted).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut e = self.eigenvalues.clone();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block id of an eigen index; operators that conserve the block
    /// structure only couple eigen indices within one block.
    pub fn block_of(&self, eigen_index: usize) -> usize {
        self.block_of[eigen_index]
    }

    /// Eigen-index range of a block.
    pub fn block_range(&self, block: usize) -> core::ops::Range<usize> {
        let b = &self.blocks[block];
        b.offset..b.offset + b.basis.len()
    }

    /// Dense eigenvector matrix `V` with `H = V diag(E) V†`.
    pub fn eigenvectors(&self) -> CMatrix {
        let mut v = CMatrix::zeros(self.dim, self.dim);
        for b in &self.blocks {
            for (r, &i) in b.basis.iter().enumerate() {
                for c in 0..b.basis.len() {
                    v[(i, b.offset + c)] = b.vectors[(r, c)];
                }
            }
        }
        v
    }

    /// `V† v`.
    pub fn to_eigenbasis(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim);
        for b in &self.blocks {
            for c in 0..b.basis.len() {
                let mut acc = Complex64::from(0.0);
                for (r, &i) in b.basis.iter().enumerate() {
                    acc += b.vectors[(r, c)].conj() * v[i];
                }
                out[b.offset + c] = acc;
            }
        }
        out
    }

    /// `V ṽ`.
    pub fn from_eigenbasis(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim);
        for b in &self.blocks {
            for (r, &i) in b.basis.iter().enumerate() {
                let mut acc = Complex64::from(0.0);
                for c in 0..b.basis.len() {
                    acc += b.vectors[(r, c)] * v[b.offset + c];
                }
                out[i] = acc;
            }
        }
        out
    }

    /// `V† A V`, skipping block pairs on which `A` vanishes.
    pub fn operator_to_eigenbasis(&self, op: &CMatrix) -> Result<CMatrix> {
        if op.nrows() != self.dim || op.ncols() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: op.nrows() });
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for left in &self.blocks {
            for right in &self.blocks {
                let sub = CMatrix::from_fn(left.basis.len(), right.basis.len(), |r, c| {
                    op[(left.basis[r], right.basis[c])]
                });
                if sub.iter().all(|z| *z == Complex64::from(0.0)) {
                    continue;
                }
                let t = left.vectors.adjoint() * sub * &right.vectors;
                out.view_mut((left.offset, right.offset), t.shape()).copy_from(&t);
            }
        }
        Ok(out)
    }

    /// `exp(−itE)` on the eigen indices.
    pub fn phases(&self, t: f64) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -t * e))
            .collect()
    }

    /// Dense `U(t) = V exp(−itE) V†`.
    pub fn evaluate(&self, t: f64) -> CMatrix {
        let mut u = CMatrix::zeros(self.dim, self.dim);
        let phases = self.phases(t);
        for b in &self.blocks {
            let scaled = CMatrix::from_fn(b.basis.len(), b.basis.len(), |r, c| {
                b.vectors[(r, c)] * phases[b.offset + c]
            });
            let ub = scaled * b.vectors.adjoint();
            for (r, &i) in b.basis.iter().enumerate() {
                for (c, &j) in b.basis.iter().enumerate() {
                    u[(i, j)] = ub[(r, c)];
                }
            }
        }
        u
    }

    /// `U(t) v` without forming `U`.
    pub fn apply(&self, t: f64, v: &CVector) -> Result<CVector> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: v.len() });
        }
        let mut w = self.to_eigenbasis(v);
        for (x, p) in w.iter_mut().zip(self.phases(t)) {
            *x *= p;
        }
        Ok(self.from_eigenbasis(&w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::hamiltonian::{build_full_hamiltonian, build_hse, StarkForm};
    use crate::oracle::operators::{max_abs, Basis};
    use crate::params::{NearbyLevelSet, SystemParams};

    fn identity_defect(m: &CMatrix) -> f64 {
        max_abs(&(m - CMatrix::identity(m.nrows(), m.ncols())))
    }

    fn hse(n_max: usize) -> CMatrix {
        let p = SystemParams::with_detuning(10.0, 0.3, 1.0, 0.1).unwrap();
        build_hse(&Basis::new(n_max, 0).unwrap(), &p, 0.9, StarkForm::ShiftedField)
    }

    #[test]
    fn identity_at_zero_and_unitary_long_times() {
        let h = hse(30);
        let prop = Propagator::new(&h).unwrap();
        assert!(identity_defect(&prop.evaluate(0.0)) < 1e-13);
        for t in [0.1, 1.0, 17.0, 250.0, 1000.0] {
            let u = prop.evaluate(t);
            assert!(identity_defect(&(&u * u.adjoint())) < 1e-11, "t = {t}");
        }
    }

    #[test]
    fn blocks_follow_excitation_number() {
        let prop = Propagator::new(&hse(10)).unwrap();
        // |0,g⟩, ten doublets, and the isolated edge state |10,e⟩
        assert_eq!(prop.n_blocks(), 12);
        let v = prop.eigenvectors();
        let h = hse(10);
        let recon = &v * CMatrix::from_diagonal(&DVector::from_iterator(
            prop.dim(),
            prop.eigenvalues().iter().map(|&e| Complex64::from(e)),
        )) * v.adjoint();
        assert!(max_abs(&(recon - &h)) < 1e-12);
    }

    #[test]
    fn apply_matches_dense_and_round_trips() {
        let p = SystemParams::with_detuning(10.0, 0.3, 1.0, 0.1).unwrap();
        let nearby = NearbyLevelSet::from_pairs(&[(14.0, 0.2)]).unwrap();
        let h = build_full_hamiltonian(&p, &nearby, 8).unwrap();
        let prop = Propagator::new(&h).unwrap();
        let v = CVector::from_fn(h.nrows(), |i, _| Complex64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.03));
        let a = prop.apply(3.7, &v).unwrap();
        let b = prop.evaluate(3.7) * &v;
        assert!((a - b).camax() < 1e-12);
        let back = prop.from_eigenbasis(&prop.to_eigenbasis(&v));
        assert!((back - &v).camax() < 1e-13);
        assert!(prop.apply(1.0, &CVector::zeros(3)).is_err());
    }

    #[test]
    fn operator_transform_matches_dense() {
        let h = hse(6);
        let prop = Propagator::new(&h).unwrap();
        let ops = crate::oracle::operators::OperatorSet::new(Basis::new(6, 0).unwrap());
        let v = prop.eigenvectors();
        let dense = v.adjoint() * &ops.sigma_minus * &v;
        assert!(max_abs(&(prop.operator_to_eigenbasis(&ops.sigma_minus).unwrap() - dense)) < 1e-14);
        let diag = prop.operator_to_eigenbasis(&h).unwrap();
        for i in 0..prop.dim() {
            assert!((diag[(i, i)].re - prop.eigenvalues()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = hse(3);
        h[(0, 1)] = Complex64::new(0.0, 1.0);
        assert!(Propagator::new(&h).is_err());
        assert!(Propagator::new(&CMatrix::zeros(2, 3)).is_err());
    }
}
