//! Numerical checks of the closed-form dressed-state results.

use alloc::vec::Vec;

use nalgebra::DVector;
use num_complex::Complex64;

use super::hamiltonian::{build_h_script, build_hse, check_commutator, StarkForm};
use super::operators::{norm_inf, Basis, CMatrix, LEVEL_E, LEVEL_G};
use super::propagator::{CVector, Propagator};
use crate::dressed::{dressed_quantities, effective_model, evolution_coeffs, DEFAULT_XI_LIMIT};
use crate::error::Result;
use crate::params::{NearbyLevelSet, SystemParams};

pub const EIGEN_RESIDUAL_TOL: f64 = 1e-11;
pub const CLOSURE_TOL: f64 = 1e-12;
pub const EVOLUTION_TOL: f64 = 1e-10;
pub const COMMUTATOR_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenReport {
    /// Largest `‖Hψ − Eψ‖` over the dressed states, relative to `‖H‖_∞`.
    pub max_residual: f64,
    /// Doublet and branch of the largest residual.
    pub worst: Option<(usize, Branch)>,
    /// `‖H|0,g⟩ + (ω₀/2)|0,g⟩‖`, relative to `‖H‖_∞`.
    pub ground_residual: f64,
    /// Largest entry of the closure sum minus the identity.
    pub closure_defect: f64,
    pub passed: bool,
}

fn dressed_pair(basis: &Basis, n: usize, phi: f64) -> (CVector, CVector) {
    let (s, c) = phi.sin_cos();
    let (e, g) = (basis.index(n, LEVEL_E), basis.index(n + 1, LEVEL_G));
    let mut plus = CVector::zeros(basis.dim());
    let mut minus = CVector::zeros(basis.dim());
    plus[e] = Complex64::from(c);
    plus[g] = Complex64::from(s);
    minus[e] = Complex64::from(-s);
    minus[g] = Complex64::from(c);
    (plus, minus)
}

/// Checks the closed-form dressed states and energies against the matrix of
/// the chosen Hamiltonian form for every complete doublet.
pub fn verify_eigensystem(
    params: &SystemParams,
    chi: f64,
    n_max: usize,
    form: StarkForm,
) -> Result<EigenReport> {
    let basis = Basis::new(n_max, 0)?;
    let h = build_hse(&basis, params, chi, form);
    let scale = norm_inf(&h).max(f64::MIN_POSITIVE);
    let mut max_residual = 0.0f64;
    let mut worst = None;
    let mut closure = CMatrix::zeros(basis.dim(), basis.dim());

    let ground = basis.index(0, LEVEL_G);
    let mut g0 = CVector::zeros(basis.dim());
    g0[ground] = Complex64::from(1.0);
    let ground_residual = (&h * &g0 + &g0 * Complex64::from(0.5 * params.omega0)).norm() / scale;
    closure += &g0 * g0.adjoint();

    for n in 0..n_max {
        let q = dressed_quantities(n, params, chi);
        let (plus, minus) = dressed_pair(&basis, n, q.phi_n);
        for (v, e, branch) in [(&plus, q.e_plus, Branch::Plus), (&minus, q.e_minus, Branch::Minus)] {
            let r = (&h * v - v * Complex64::from(e)).norm() / scale;
            if r > max_residual || worst.is_none() {
                max_residual = max_residual.max(r);
                worst = Some((n, branch));
            }
            closure += v * v.adjoint();
        }
    }
    // every basis state except the unpaired edge state |n_max, e⟩
    let edge = basis.index(n_max, LEVEL_E);
    let mut identity = CMatrix::identity(basis.dim(), basis.dim());
    identity[(edge, edge)] = Complex64::from(0.0);
    let closure_defect = super::operators::max_abs(&(closure - identity));

    Ok(EigenReport {
        passed: max_residual < EIGEN_RESIDUAL_TOL
            && ground_residual < EIGEN_RESIDUAL_TOL
            && closure_defect < CLOSURE_TOL,
        max_residual,
        worst,
        ground_residual,
        closure_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionReport {
    /// Largest deviation of the closed-form `D, F, G` from propagator elements.
    pub max_deviation: f64,
    /// `|⟨0,g|U(t)|0,g⟩ − e^{itω₀/2}|`, maximised over times.
    pub ground_phase_deviation: f64,
    /// `EVOLUTION_TOL`, widened to the rounding expected in phases `t·E`.
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares the closed-form evolution coefficients with `exp(−itH)` built by
/// eigendecomposition, on doublets away from the truncation edge.
pub fn verify_evolution(
    params: &SystemParams,
    chi: f64,
    n_max: usize,
    times: &[f64],
) -> Result<EvolutionReport> {
    let basis = Basis::new(n_max, 0)?;
    let prop = Propagator::new(&build_hse(&basis, params, chi, StarkForm::BareField))?;
    let e_max = prop.eigenvalues().iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let t_max = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let tolerance = EVOLUTION_TOL.max(64.0 * f64::EPSILON * t_max * e_max);
    let mut max_deviation = 0.0f64;
    let mut ground_phase_deviation = 0.0f64;
    for &t in times {
        let u = prop.evaluate(t);
        let g0 = basis.index(0, LEVEL_G);
        let expected = Complex64::from_polar(1.0, 0.5 * t * params.omega0);
        ground_phase_deviation = ground_phase_deviation.max((u[(g0, g0)] - expected).norm());
        for n in 0..n_max.saturating_sub(1) {
            let c = evolution_coeffs(n, t, params, chi);
            let (e, g) = (basis.index(n, LEVEL_E), basis.index(n + 1, LEVEL_G));
            for (numeric, analytic) in [
                (u[(e, e)], c.d),
                (u[(e, g)], c.f),
                (u[(g, e)], c.f),
                (u[(g, g)], c.g),
            ] {
                max_deviation = max_deviation.max((numeric - analytic).norm());
            }
        }
    }
    Ok(EvolutionReport {
        max_deviation,
        ground_phase_deviation,
        tolerance,
        passed: max_deviation < tolerance && ground_phase_deviation < tolerance,
    })
}

/// Largest relative commutator `‖[H_SE, 𝓗(t)]‖_max / (‖H_SE‖_F ‖𝓗‖_F)` over `times`.
pub fn commutator_residual(
    params: &SystemParams,
    nearby: &NearbyLevelSet,
    n_max: usize,
    times: &[f64],
) -> Result<f64> {
    let basis = Basis::new(n_max, nearby.len())?;
    let effective = effective_model(nearby, params, DEFAULT_XI_LIMIT)?;
    let h_se = build_hse(&basis, params, effective.chi, StarkForm::ShiftedField);
    let mut worst = 0.0f64;
    for &t in times {
        let h_script = build_h_script(&basis, nearby, &effective, t)?;
        worst = worst.max(check_commutator(&h_se, &h_script)?.relative());
    }
    Ok(worst)
}

/// Sorted eigenvalues of each two-state excitation block of `H_SE`.
pub fn doublet_eigenvalues(params: &SystemParams, chi: f64, n_max: usize, form: StarkForm) -> Result<Vec<(f64, f64)>> {
    let basis = Basis::new(n_max, 0)?;
    let h = build_hse(&basis, params, chi, form);
    Ok((0..n_max)
        .map(|n| {
            let (e, g) = (basis.index(n, LEVEL_E), basis.index(n + 1, LEVEL_G));
            let block = CMatrix::from_fn(2, 2, |r, c| h[([e, g][r], [e, g][c])]);
            let vals: DVector<f64> = block.symmetric_eigenvalues();
            (vals.max(), vals.min())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(delta: f64) -> SystemParams {
        SystemParams::with_detuning(10.0, delta, 1.0, 0.1).unwrap()
    }

    #[test]
    fn resonant_dressed_states_are_symmetric() {
        let p = params(0.0);
        let q = dressed_quantities(3, &p, 0.0);
        assert!((q.phi_n - core::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let r = verify_eigensystem(&p, 0.0, 12, StarkForm::BareField).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn stark_shifted_eigensystem() {
        let r = verify_eigensystem(&params(0.3), 0.9, 11, StarkForm::BareField).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.max_residual < 1e-13);
        assert!(r.closure_defect < 1e-14);
    }

    #[test]
    fn shifted_field_form_departs_from_closed_form() {
        let r = verify_eigensystem(&params(0.3), 0.9, 11, StarkForm::ShiftedField).unwrap();
        assert!(!r.passed);
        assert!(r.max_residual > 1e-3);
        // the ground state carries no photons, so it is unaffected
        assert!(r.ground_residual < 1e-15);
    }

    #[test]
    fn doublet_energies_match_closed_form() {
        let p = params(0.3);
        let blocks = doublet_eigenvalues(&p, 0.9, 10, StarkForm::BareField).unwrap();
        for (n, (hi, lo)) in blocks.into_iter().enumerate() {
            let q = dressed_quantities(n, &p, 0.9);
            assert!((hi - q.e_plus).abs() < 1e-12 && (lo - q.e_minus).abs() < 1e-12);
        }
    }

    #[test]
    fn evolution_coefficients_match_propagator() {
        let times = [0.0, 0.37, 2.9, 15.2, 101.0];
        for (delta, chi) in [(0.0, 0.0), (0.3, 0.9), (-1.2, 0.4)] {
            let r = verify_evolution(&params(delta), chi, 12, &times).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn commutator_vanishes() {
        let p = params(0.3);
        assert_eq!(commutator_residual(&p, &NearbyLevelSet::empty(), 10, &[0.0]).unwrap(), 0.0);
        let one = NearbyLevelSet::from_pairs(&[(30.0, 0.5)]).unwrap();
        assert!(commutator_residual(&p, &one, 10, &[0.0, 3.0]).unwrap() < COMMUTATOR_TOL);
        let two = NearbyLevelSet::from_pairs(&[(30.0, 0.5), (38.0, 0.6)]).unwrap();
        assert!(commutator_residual(&p, &two, 10, &[0.0, 1.0, 7.3]).unwrap() < COMMUTATOR_TOL);
    }
}
