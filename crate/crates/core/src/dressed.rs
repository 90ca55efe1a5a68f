//! Effective Stark parameter and the closed-form dressed states of the
//! Jaynes-Cummings Hamiltonian with an intensity-dependent level shift `χ n̂ σ_z`.
//!
//! Manifold `n` is spanned by `|n,e⟩` and `|n+1,g⟩`; its dressed states are
//! `|ψ_n^+⟩ = cos Φ_n |n,e⟩ + sin Φ_n |n+1,g⟩` and
//! `|ψ_n^-⟩ = −sin Φ_n |n,e⟩ + cos Φ_n |n+1,g⟩`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{NearbyLevelSet, SystemParams};

/// Default threshold on the rotation parameters ξ_j; "much smaller than one"
/// is read as one order of magnitude.
pub const DEFAULT_XI_LIMIT: f64 = 0.1;

/// Result of eliminating the nearby levels by a small rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveModel {
    /// χ = Σ ξ_j η_j.
    pub chi: f64,
    /// Ω = ω − χ.
    pub omega_shifted: f64,
    /// ξ_j = 2η_j / (Δ + Δ_j).
    pub xi: Vec<f64>,
    pub xi_max_observed: f64,
    pub xi_limit: f64,
    /// Indices of levels with ξ_j ≥ `xi_limit`; the reduction is not trustworthy there.
    pub violations: Vec<usize>,
}

impl EffectiveModel {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn effective_model(
    nearby: &NearbyLevelSet,
    params: &SystemParams,
    xi_limit: f64,
) -> Result<EffectiveModel> {
    if !(xi_limit > 0.0) {
        return Err(Error::domain(format!("xi limit must be positive, got {xi_limit}")));
    }
    let mut xi = Vec::with_capacity(nearby.len());
    let mut chi = 0.0;
    let mut violations = Vec::new();
    for (j, level) in nearby.levels().iter().enumerate() {
        let denominator = params.delta + (level.omega_k - params.omega);
        if !(denominator > 0.0) {
            return Err(Error::SingularRotation { level: j, denominator });
        }
        let x = 2.0 * level.eta_k / denominator;
        if x.abs() >= xi_limit {
            violations.push(j);
        }
        chi += x * level.eta_k;
        xi.push(x);
    }
    let xi_max_observed = xi.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    Ok(EffectiveModel {
        chi,
        omega_shifted: params.omega - chi,
        xi,
        xi_max_observed,
        xi_limit,
        violations,
    })
}

/// Closed-form quantities of the `n`-th dressed doublet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedQuantities {
    pub n: usize,
    /// Mixing angle Φ_n.
    pub phi_n: f64,
    /// Ω_n = 2λ√(n+1).
    pub omega_n: f64,
    /// δ_n = Δ + χ(2n+1).
    pub delta_n: f64,
    /// μ_n = √(δ_n² + Ω_n²), the doublet splitting.
    pub mu_n: f64,
    pub e_plus: f64,
    pub e_minus: f64,
}

impl DressedQuantities {
    pub fn cos2(&self) -> f64 {
        self.phi_n.cos().powi(2)
    }

    pub fn sin2(&self) -> f64 {
        self.phi_n.sin().powi(2)
    }
}

pub fn dressed_quantities(n: usize, params: &SystemParams, chi: f64) -> DressedQuantities {
    let nf = n as f64;
    let omega_n = 2.0 * params.lambda_c * (nf + 1.0).sqrt();
    let delta_n = params.delta + chi * (2.0 * nf + 1.0);
    let mu_n = delta_n.hypot(omega_n);
    // μ+δ cancels for large negative δ; use the conjugate form there.
    let denom = if delta_n >= 0.0 {
        mu_n + delta_n
    } else {
        omega_n * omega_n / (mu_n - delta_n)
    };
    let phi_n = omega_n.atan2(denom);
    let centre = params.omega * (nf + 0.5) - 0.5 * chi;
    DressedQuantities {
        n,
        phi_n,
        omega_n,
        delta_n,
        mu_n,
        e_plus: centre + 0.5 * mu_n,
        e_minus: centre - 0.5 * mu_n,
    }
}

/// Λ_m = √([(Δ + χ(2m+1)) / 2λ]² + (m+1)), in units of λ.
pub fn lambda_m(m: usize, params: &SystemParams, chi: f64) -> f64 {
    let mf = m as f64;
    let x = (params.delta + chi * (2.0 * mf + 1.0)) / (2.0 * params.lambda_c);
    (x * x + mf + 1.0).sqrt()
}

/// Positions `(c_+, c_-)` of the two lines ending on `|0,g⟩`, in units of λ.
pub fn vacuum_line_positions(params: &SystemParams, chi: f64) -> (f64, f64) {
    let two_l = 2.0 * params.lambda_c;
    let offset = (params.delta - chi) / two_l;
    let half = ((params.delta + chi) / two_l).hypot(1.0);
    (offset + half, offset - half)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePositions {
    pub lambda_m: f64,
    /// `(c_+, c_-)`, only for `m = 0`.
    pub vacuum: Option<(f64, f64)>,
}

pub fn line_positions(m: usize, params: &SystemParams, chi: f64) -> LinePositions {
    LinePositions {
        lambda_m: lambda_m(m, params, chi),
        vacuum: (m == 0).then(|| vacuum_line_positions(params, chi)),
    }
}

/// Matrix elements of the propagator inside manifold `n`:
/// `d = ⟨n,e|U|n,e⟩`, `f = ⟨n,e|U|n+1,g⟩ = ⟨n+1,g|U|n,e⟩`, `g = ⟨n+1,g|U|n+1,g⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionCoeffs {
    pub d: Complex64,
    pub f: Complex64,
    pub g: Complex64,
}

impl EvolutionCoeffs {
    /// Largest violation of the three 2×2 unitarity relations.
    pub fn unitarity_defect(&self) -> f64 {
        let a = (self.d.norm_sqr() + self.f.norm_sqr() - 1.0).abs();
        let b = (self.g.norm_sqr() + self.f.norm_sqr() - 1.0).abs();
        let c = (self.d * self.f.conj() + self.f * self.g.conj()).norm();
        a.max(b).max(c)
    }
}

pub fn evolution_coeffs(n: usize, t: f64, params: &SystemParams, chi: f64) -> EvolutionCoeffs {
    let q = dressed_quantities(n, params, chi);
    let (s, c) = q.phi_n.sin_cos();
    let up = Complex64::from_polar(1.0, -t * q.e_plus);
    let down = Complex64::from_polar(1.0, -t * q.e_minus);
    EvolutionCoeffs {
        d: up * (c * c) + down * (s * s),
        f: (up - down) * (c * s),
        g: up * (s * s) + down * (c * c),
    }
}
