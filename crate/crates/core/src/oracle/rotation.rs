//! The small unitary rotation that removes the direct `g ↔ k` couplings, and a
//! numerical check that it reduces the full Hamiltonian to second order in ξ.

use num_complex::Complex64;

use super::hamiltonian::{build_full_hamiltonian, build_rotated_reference};
use super::operators::{Basis, CMatrix, LEVEL_G};
use super::propagator::Propagator;
use crate::dressed::{effective_model, EffectiveModel, DEFAULT_XI_LIMIT};
use crate::error::{Error, Result};
use crate::params::{NearbyLevelSet, SystemParams};

/// Manifolds this close to the truncation edge are excluded from residuals.
pub const GUARD_BAND: usize = 5;

/// Accepted window for `ε(η/2)/ε(η)`: quadratic scaling with room for cubic terms.
pub const REDUCTION_RATIO_WINDOW: (f64, f64) = (0.19, 0.32);

/// `G = Σ_j ξ_j (â|j⟩⟨g| − â†|g⟩⟨j|)`, real and antisymmetric.
pub fn rotation_generator(basis: &Basis, xi: &[f64]) -> Result<CMatrix> {
    if xi.len() != basis.n_nearby {
        return Err(Error::DimensionMismatch { left: basis.n_nearby, right: xi.len() });
    }
    if xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("rotation parameters must be finite"));
    }
    let mut g = basis.zeros();
    for (k, &x) in xi.iter().enumerate() {
        for n in 1..=basis.n_max {
            let v = x * (n as f64).sqrt();
            let (up, down) = (basis.index(n - 1, Basis::nearby_level(k)), basis.index(n, LEVEL_G));
            g[(up, down)] = Complex64::from(v);
            g[(down, up)] = Complex64::from(-v);
        }
    }
    Ok(g)
}

/// `R = exp(G)`, evaluated as `exp(−i·(iG))` through the eigendecomposition of
/// the Hermitian matrix `iG`.
pub fn rotation_operator(effective: &EffectiveModel, n_max: usize) -> Result<CMatrix> {
    let basis = Basis::new(n_max, effective.xi.len())?;
    let g = rotation_generator(&basis, &effective.xi)?;
    let ig = g * Complex64::new(0.0, 1.0);
    Ok(Propagator::new(&ig)?.evaluate(1.0))
}

/// Largest entries of `R H R† − H_rot` on manifolds `n ≤ n_max − guard`:
/// overall and on the `g ↔ k` exchange block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationResidual {
    pub total: f64,
    pub ground_exchange: f64,
}

pub fn rotation_residual(
    params: &SystemParams,
    nearby: &NearbyLevelSet,
    n_max: usize,
    guard: usize,
) -> Result<RotationResidual> {
    if n_max <= guard {
        return Err(Error::TruncationTooSmall { n_max, required: guard + 1 });
    }
    let effective = effective_model(nearby, params, DEFAULT_XI_LIMIT)?;
    let basis = Basis::new(n_max, nearby.len())?;
    let h = build_full_hamiltonian(params, nearby, n_max)?;
    let r = rotation_operator(&effective, n_max)?;
    let reference = build_rotated_reference(params, nearby, &effective, n_max)?;
    let diff = &r * h * r.adjoint() - reference;
    let mut out = RotationResidual { total: 0.0, ground_exchange: 0.0 };
    for i in 0..basis.dim() {
        let (ni, li) = basis.split(i);
        if ni > n_max - guard {
            continue;
        }
        for j in 0..basis.dim() {
            let (nj, lj) = basis.split(j);
            if nj > n_max - guard {
                continue;
            }
            let x = diff[(i, j)].norm();
            out.total = out.total.max(x);
            if (li == LEVEL_G && lj >= 2) || (lj == LEVEL_G && li >= 2) {
                out.ground_exchange = out.ground_exchange.max(x);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub full: RotationResidual,
    pub half: RotationResidual,
    /// `ε(η/2)/ε(η)`; `None` when `ε(η) = 0`.
    pub ratio: Option<f64>,
    /// Same ratio restricted to the `g ↔ k` block.
    pub exchange_ratio: Option<f64>,
    pub window: (f64, f64),
    /// Largest |ξ_j| at the full couplings; the check is only meaningful when small.
    pub xi_max: f64,
    pub smallness_ok: bool,
    pub passed: bool,
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (a > 0.0).then(|| b / a)
}

/// Residual of the rotation at the given couplings and at half of them; the
/// reduction is correct to first order iff the residual scales as η².
pub fn verify_rotation_reduction(
    params: &SystemParams,
    nearby: &NearbyLevelSet,
    n_max: usize,
) -> Result<ReductionReport> {
    let effective = effective_model(nearby, params, DEFAULT_XI_LIMIT)?;
    let full = rotation_residual(params, nearby, n_max, GUARD_BAND)?;
    let half = rotation_residual(params, &nearby.scaled_couplings(0.5)?, n_max, GUARD_BAND)?;
    let ratio_total = ratio(full.total, half.total);
    let exchange_ratio = ratio(full.ground_exchange, half.ground_exchange);
    let window = REDUCTION_RATIO_WINDOW;
    let passed = match ratio_total {
        None => half.total == 0.0,
        Some(r) => {
            r >= window.0 && r <= window.1 && exchange_ratio.is_none_or(|e| e < window.0)
        }
    };
    Ok(ReductionReport {
        full,
        half,
        ratio: ratio_total,
        exchange_ratio,
        window,
        xi_max: effective.xi_max_observed,
        smallness_ok: effective.is_valid(),
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::operators::max_abs;
    use alloc::vec::Vec;

    fn params() -> SystemParams {
        SystemParams::with_detuning(10.0, 0.0, 1.0, 0.1).unwrap()
    }

    fn model(xi: &[f64]) -> EffectiveModel {
        EffectiveModel {
            chi: 0.0,
            omega_shifted: 10.0,
            xi: xi.to_vec(),
            xi_max_observed: 0.0,
            xi_limit: DEFAULT_XI_LIMIT,
            violations: Vec::new(),
        }
    }

    fn identity_defect(m: &CMatrix) -> f64 {
        max_abs(&(m - CMatrix::identity(m.nrows(), m.ncols())))
    }

    #[test]
    fn zero_rotation_is_identity() {
        let r = rotation_operator(&model(&[0.0, 0.0]), 6).unwrap();
        assert!(identity_defect(&r) < 1e-15);
    }

    #[test]
    fn rotation_is_unitary() {
        for xi in [[0.01, 0.03], [0.07, -0.02], [0.09, 0.09]] {
            let r = rotation_operator(&model(&xi), 10).unwrap();
            assert!(identity_defect(&(&r * r.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn rotation_matches_first_order_series() {
        let n_max = 10;
        let r = rotation_operator(&model(&[0.05]), n_max).unwrap();
        let basis = Basis::new(n_max, 1).unwrap();
        let g = rotation_generator(&basis, &[0.05]).unwrap();
        let remainder = max_abs(&(r - CMatrix::identity(basis.dim(), basis.dim()) - g));
        assert!(remainder <= 0.05 * 0.05 * basis.dim() as f64);
        assert!(remainder > 0.0);
    }

    #[test]
    fn no_coupling_no_residual() {
        let nearby = NearbyLevelSet::from_pairs(&[(12.0, 0.0)]).unwrap();
        let res = rotation_residual(&params(), &nearby, 12, GUARD_BAND).unwrap();
        assert!(res.total < 1e-13);
        let report = verify_rotation_reduction(&params(), &nearby, 12).unwrap();
        assert!(report.passed);
    }

    #[test]
    fn residual_scales_quadratically() {
        let nearby = NearbyLevelSet::from_pairs(&[(12.0, 0.1)]).unwrap();
        let report = verify_rotation_reduction(&params(), &nearby, 12).unwrap();
        let r = report.ratio.unwrap();
        assert!(report.passed, "{report:?}");
        assert!((r - 0.25).abs() < 0.02, "ratio {r}");
        assert!(report.exchange_ratio.unwrap() < 0.19);
    }

    #[test]
    fn two_levels_scale_quadratically() {
        let nearby = NearbyLevelSet::from_pairs(&[(12.0, 0.1), (13.0, 0.07)]).unwrap();
        assert!(verify_rotation_reduction(&params(), &nearby, 12).unwrap().passed);
    }

    #[test]
    fn flags_strong_coupling_and_rejects_small_truncation() {
        let nearby = NearbyLevelSet::from_pairs(&[(12.0, 0.5)]).unwrap();
        let report = verify_rotation_reduction(&params(), &nearby, 12).unwrap();
        assert!(!report.smallness_ok && report.xi_max == 0.5);
        let weak = NearbyLevelSet::from_pairs(&[(12.0, 0.1)]).unwrap();
        assert!(rotation_residual(&params(), &weak, 4, GUARD_BAND).is_err());
        assert!(rotation_generator(&Basis::new(3, 1).unwrap(), &[f64::NAN]).is_err());
    }
}
