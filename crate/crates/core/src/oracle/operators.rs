use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const LEVEL_G: usize = 0;
pub const LEVEL_E: usize = 1;

/// Truncated Fock space ⊗ atom with levels ordered `(g, e, k_1..k_N)`.
///
/// Basis index is Fock-major: `index(n, level) = n·(N+2) + level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    pub n_max: usize,
    pub n_nearby: usize,
}

impl Basis {
    pub fn new(n_max: usize, n_nearby: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::domain("Fock truncation must be at least 1"));
        }
        Ok(Self { n_max, n_nearby })
    }

    pub fn n_levels(&self) -> usize {
        self.n_nearby + 2
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1) * self.n_levels()
    }

    pub fn index(&self, n: usize, level: usize) -> usize {
        debug_assert!(n <= self.n_max && level < self.n_levels());
        n * self.n_levels() + level
    }

    pub fn nearby_level(k: usize) -> usize {
        2 + k
    }

    /// `(n, level)` of a basis index.
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.n_levels(), index % self.n_levels())
    }

    pub fn zeros(&self) -> CMatrix {
        CMatrix::zeros(self.dim(), self.dim())
    }
}

/// Explicit matrices of the field and atom operators on a [`Basis`].
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub basis: Basis,
    pub a: CMatrix,
    pub a_dag: CMatrix,
    pub n: CMatrix,
    pub sigma_z: CMatrix,
    pub sigma_plus: CMatrix,
    pub sigma_minus: CMatrix,
}

impl OperatorSet {
    pub fn new(basis: Basis) -> Self {
        let mut a = basis.zeros();
        let mut n = basis.zeros();
        let mut sigma_z = basis.zeros();
        let mut sigma_plus = basis.zeros();
        for m in 0..=basis.n_max {
            for level in 0..basis.n_levels() {
                let i = basis.index(m, level);
                n[(i, i)] = Complex64::from(m as f64);
                if m > 0 {
                    a[(basis.index(m - 1, level), i)] = Complex64::from((m as f64).sqrt());
                }
            }
            sigma_z[(basis.index(m, LEVEL_E), basis.index(m, LEVEL_E))] = Complex64::from(1.0);
            sigma_z[(basis.index(m, LEVEL_G), basis.index(m, LEVEL_G))] = Complex64::from(-1.0);
            sigma_plus[(basis.index(m, LEVEL_E), basis.index(m, LEVEL_G))] = Complex64::from(1.0);
        }
        Self {
            basis,
            a_dag: a.adjoint(),
            a,
            n,
            sigma_z,
            sigma_minus: sigma_plus.adjoint(),
            sigma_plus,
        }
    }

    /// `|i⟩⟨j| ⊗ 1_field` for atomic levels `i`, `j`.
    pub fn transition(&self, i: usize, j: usize) -> CMatrix {
        let b = self.basis;
        let mut out = b.zeros();
        for m in 0..=b.n_max {
            out[(b.index(m, i), b.index(m, j))] = Complex64::from(1.0);
        }
        out
    }
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest absolute row sum; bounds the spectral norm of a Hermitian matrix.
pub fn norm_inf(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest entry of `m − m†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_algebra() {
        let ops = OperatorSet::new(Basis::new(8, 2).unwrap());
        let b = ops.basis;
        assert_eq!(b.dim(), 36);
        assert_eq!(max_abs(&(ops.a.adjoint() - &ops.a_dag)), 0.0);
        assert_eq!(max_abs(&(ops.sigma_plus.adjoint() - &ops.sigma_minus)), 0.0);
        assert!(max_abs(&(&ops.a_dag * &ops.a - &ops.n)) < 1e-14);
        let comm = &ops.a * &ops.a_dag - &ops.a_dag * &ops.a;
        for i in 0..b.dim() {
            let (n, _) = b.split(i);
            for j in 0..b.dim() {
                let expected = if i == j && n < b.n_max { 1.0 } else { 0.0 };
                if n < b.n_max && b.split(j).0 < b.n_max {
                    assert!((comm[(i, j)] - expected).norm() < 1e-14);
                }
            }
        }
        for (i, j) in [(0, 0), (1, 1), (2, 2), (3, 3)] {
            let p = ops.transition(i, j);
            assert!(max_abs(&(&p * &p - &p)) < 1e-14);
            assert_eq!(hermiticity_defect(&p), 0.0);
        }
        // σ_z is null on nearby levels
        let k = b.index(3, Basis::nearby_level(1));
        assert_eq!(ops.sigma_z[(k, k)], Complex64::from(0.0));
    }

    #[test]
    fn index_layout() {
        let b = Basis::new(5, 1).unwrap();
        assert_eq!(b.index(2, LEVEL_E), 7);
        assert_eq!(b.split(7), (2, LEVEL_E));
        assert!(Basis::new(0, 0).is_err());
    }
}
