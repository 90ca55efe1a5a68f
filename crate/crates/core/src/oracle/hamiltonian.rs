//! Explicit Hamiltonian matrices on a truncated basis.

use num_complex::Complex64;

use super::operators::{Basis, CMatrix, LEVEL_E, LEVEL_G};
use crate::dressed::EffectiveModel;
use crate::error::{Error, Result};
use crate::params::{NearbyLevelSet, SystemParams};

/// Which photon-energy term accompanies `χ n̂ σ_z` in the effective Hamiltonian.
///
/// `ShiftedField` is the reduced Hamiltonian as derived, `Ω n̂ + ω₀σ_z/2 +
/// λ(âσ₊ + â†σ₋) + χ n̂ σ_z` with `Ω = ω − χ`. `BareField` keeps `ω n̂`; it is the
/// Hamiltonian whose eigensystem the closed-form dressed energies, angles and
/// line positions describe exactly (see [`crate::dressed`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StarkForm {
    #[default]
    BareField,
    ShiftedField,
}

impl StarkForm {
    pub fn name(self) -> &'static str {
        match self {
            StarkForm::BareField => "bare_field",
            StarkForm::ShiftedField => "shifted_field",
        }
    }
}

fn add_jc_coupling(h: &mut CMatrix, basis: &Basis, lambda_c: f64) {
    for n in 1..=basis.n_max {
        let v = Complex64::from(lambda_c * (n as f64).sqrt());
        let (e, g) = (basis.index(n - 1, LEVEL_E), basis.index(n, LEVEL_G));
        h[(e, g)] += v;
        h[(g, e)] += v;
    }
}

fn atomic_sign(level: usize) -> f64 {
    match level {
        LEVEL_E => 1.0,
        LEVEL_G => -1.0,
        _ => 0.0,
    }
}

fn check_levels(basis: &Basis, nearby: &NearbyLevelSet) -> Result<()> {
    if basis.n_nearby != nearby.len() {
        return Err(Error::DimensionMismatch {
            left: basis.n_nearby,
            right: nearby.len(),
        });
    }
    Ok(())
}

/// `ω n̂ + ω₀σ_z/2 + ½Σω_k|k⟩⟨k| + λ(âσ₊ + â†σ₋) + Ση_k(â|k⟩⟨g| + â†|g⟩⟨k|)`.
pub fn build_full_hamiltonian(
    params: &SystemParams,
    nearby: &NearbyLevelSet,
    n_max: usize,
) -> Result<CMatrix> {
    let basis = Basis::new(n_max, nearby.len())?;
    let mut h = basis.zeros();
    for n in 0..=n_max {
        let nf = n as f64;
        for level in 0..basis.n_levels() {
            let i = basis.index(n, level);
            let atom = match level {
                LEVEL_E | LEVEL_G => 0.5 * params.omega0 * atomic_sign(level),
                k => 0.5 * nearby.levels()[k - 2].omega_k,
            };
            h[(i, i)] = Complex64::from(params.omega * nf + atom);
        }
    }
    add_jc_coupling(&mut h, &basis, params.lambda_c);
    for (k, level) in nearby.levels().iter().enumerate() {
        for n in 1..=n_max {
            let v = Complex64::from(level.eta_k * (n as f64).sqrt());
            let (up, g) = (basis.index(n - 1, Basis::nearby_level(k)), basis.index(n, LEVEL_G));
            h[(up, g)] += v;
            h[(g, up)] += v;
        }
    }
    Ok(h)
}

/// The Stark-effect Hamiltonian on `basis`; σ_z vanishes on nearby levels while
/// the photon-energy term acts on every atomic level.
pub fn build_hse(basis: &Basis, params: &SystemParams, chi: f64, form: StarkForm) -> CMatrix {
    let photon = match form {
        StarkForm::BareField => params.omega,
        StarkForm::ShiftedField => params.omega - chi,
    };
    let mut h = basis.zeros();
    for n in 0..=basis.n_max {
        let nf = n as f64;
        for level in 0..basis.n_levels() {
            let s = atomic_sign(level);
            let i = basis.index(n, level);
            h[(i, i)] = Complex64::from(photon * nf + 0.5 * params.omega0 * s + chi * nf * s);
        }
    }
    add_jc_coupling(&mut h, basis, params.lambda_c);
    h
}

/// The nearby-level part left over after the reduction, at time `t`:
/// `χ n̂ Σ|k⟩⟨k| + (n̂+1) Σ_{j,k} ξ_k η_j [e^{it(ω_j−ω_k)/2}|j⟩⟨k| + h.c.]`.
pub fn build_h_script(
    basis: &Basis,
    nearby: &NearbyLevelSet,
    effective: &EffectiveModel,
    t: f64,
) -> Result<CMatrix> {
    check_levels(basis, nearby)?;
    let levels = nearby.levels();
    let mut h = basis.zeros();
    for n in 0..=basis.n_max {
        let nf = n as f64;
        for k in 0..levels.len() {
            let i = basis.index(n, Basis::nearby_level(k));
            h[(i, i)] += Complex64::from(effective.chi * nf);
        }
        for (j, lj) in levels.iter().enumerate() {
            for (k, lk) in levels.iter().enumerate() {
                let amp = (nf + 1.0) * effective.xi[k] * lj.eta_k;
                let phase = Complex64::from_polar(amp, 0.5 * t * (lj.omega_k - lk.omega_k));
                let (ij, ik) = (
                    basis.index(n, Basis::nearby_level(j)),
                    basis.index(n, Basis::nearby_level(k)),
                );
                h[(ij, ik)] += phase;
                h[(ik, ij)] += phase.conj();
            }
        }
    }
    Ok(h)
}

/// The rotated Hamiltonian kept to the order of the reduction (before the
/// second rotating-wave step):
/// `Ω n̂ + ω₀σ_z/2 + ½Σω_k|k⟩⟨k| + λ(âσ₊ + h.c.) + χ n̂ σ_z + χ n̂ Σ|k⟩⟨k|
///  + λ(n̂+1)Σξ_k(|e⟩⟨k| + h.c.) + (n̂+1)Σ_{j,k} ξ_j η_k(|k⟩⟨j| + |j⟩⟨k|)`.
pub fn build_rotated_reference(
    params: &SystemParams,
    nearby: &NearbyLevelSet,
    effective: &EffectiveModel,
    n_max: usize,
) -> Result<CMatrix> {
    let basis = Basis::new(n_max, nearby.len())?;
    let levels = nearby.levels();
    let chi = effective.chi;
    let mut h = build_hse(&basis, params, chi, StarkForm::ShiftedField);
    for n in 0..=n_max {
        let nf = n as f64;
        let e = basis.index(n, LEVEL_E);
        for (k, level) in levels.iter().enumerate() {
            let ik = basis.index(n, Basis::nearby_level(k));
            h[(ik, ik)] += Complex64::from(0.5 * level.omega_k + chi * nf);
            let v = Complex64::from(params.lambda_c * (nf + 1.0) * effective.xi[k]);
            h[(e, ik)] += v;
            h[(ik, e)] += v;
        }
        for j in 0..levels.len() {
            for (k, lk) in levels.iter().enumerate() {
                let v = Complex64::from((nf + 1.0) * effective.xi[j] * lk.eta_k);
                let (ij, ik) = (
                    basis.index(n, Basis::nearby_level(j)),
                    basis.index(n, Basis::nearby_level(k)),
                );
                h[(ik, ij)] += v;
                h[(ij, ik)] += v;
            }
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorCheck {
    /// Largest entry of `AB − BA`.
    pub max_entry: f64,
    /// `‖A‖_F ‖B‖_F`.
    pub scale: f64,
}

impl CommutatorCheck {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.max_entry / self.scale
        }
    }
}

pub fn check_commutator(a: &CMatrix, b: &CMatrix) -> Result<CommutatorCheck> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    let c = a * b - b * a;
    Ok(CommutatorCheck {
        max_entry: super::operators::max_abs(&c),
        scale: a.norm() * b.norm(),
    })
}
