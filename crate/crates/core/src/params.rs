//! Physical parameters of the atom-field system.
//!
//! All frequencies are angular frequencies in a common (arbitrary) time unit.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Field, atom and detector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Field mode frequency ω.
    pub omega: f64,
    /// `g`-`e` transition frequency ω₀.
    pub omega0: f64,
    /// Atom-field coupling λ.
    pub lambda_c: f64,
    /// Detector half-width γ.
    pub gamma: f64,
    /// Detuning Δ = ω₀ − ω, always derived from the two frequencies.
    pub delta: f64,
}

impl SystemParams {
    pub fn new(omega: f64, omega0: f64, lambda_c: f64, gamma: f64) -> Result<Self> {
        if !(omega.is_finite() && omega0.is_finite()) {
            return Err(Error::domain("frequencies must be finite"));
        }
        if !(lambda_c > 0.0 && lambda_c.is_finite()) {
            return Err(Error::domain(format!("coupling must be positive, got {lambda_c}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::domain(format!("detector width must be positive, got {gamma}")));
        }
        Ok(Self {
            omega,
            omega0,
            lambda_c,
            gamma,
            delta: omega0 - omega,
        })
    }

    /// Builds parameters from the field frequency and a detuning. The stored Δ
    /// is recomputed as `omega0 - omega`, so it can differ from `delta` by one ulp
    /// of `omega`.
    pub fn with_detuning(omega: f64, delta: f64, lambda_c: f64, gamma: f64) -> Result<Self> {
        Self::new(omega, omega + delta, lambda_c, gamma)
    }
}

/// One off-resonant level `|k⟩`: its frequency ω_k and its coupling η_k to `|g⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearbyLevel {
    pub omega_k: f64,
    pub eta_k: f64,
}

/// The ordered set of nearby levels, `k = 1..N` (stored zero-based).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NearbyLevelSet {
    levels: Vec<NearbyLevel>,
}

impl NearbyLevelSet {
    pub fn new(levels: Vec<NearbyLevel>) -> Result<Self> {
        for (k, l) in levels.iter().enumerate() {
            if !(l.omega_k.is_finite() && l.eta_k.is_finite()) {
                return Err(Error::validation(format!("nearby level {k} is not finite")));
            }
            if l.eta_k < 0.0 {
                return Err(Error::validation(format!(
                    "nearby level {k} has negative coupling {}",
                    l.eta_k
                )));
            }
        }
        Ok(Self { levels })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(omega_k, eta_k)| NearbyLevel { omega_k, eta_k })
                .collect(),
        )
    }

    /// Checks the levels lie above the `g`-`e` transition and above the field.
    pub fn check_against(&self, params: &SystemParams) -> Result<()> {
        for (k, l) in self.levels.iter().enumerate() {
            if l.omega_k <= params.omega0 {
                return Err(Error::validation(format!(
                    "nearby level {k}: omega_k = {} must exceed omega0 = {}",
                    l.omega_k, params.omega0
                )));
            }
            if l.omega_k - params.omega <= 0.0 {
                return Err(Error::validation(format!(
                    "nearby level {k}: detuning from the field must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn levels(&self) -> &[NearbyLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Same frequencies with every coupling multiplied by `factor`.
    pub fn scaled_couplings(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.levels
                .iter()
                .map(|l| NearbyLevel {
                    omega_k: l.omega_k,
                    eta_k: l.eta_k * factor,
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn detuning_is_derived() {
        let p = SystemParams::new(10.0, 10.3, 1.0, 0.1).unwrap();
        assert_eq!(p.delta, p.omega0 - p.omega);
        let q = SystemParams::with_detuning(10.0, 0.0, 1.0, 0.1).unwrap();
        assert_eq!(q.delta, 0.0);
    }

    #[test]
    fn rejects_bad_coupling_and_width() {
        assert!(SystemParams::new(1.0, 1.0, 0.0, 0.1).is_err());
        assert!(SystemParams::new(1.0, 1.0, 1.0, -0.1).is_err());
        assert!(SystemParams::new(f64::NAN, 1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn nearby_levels_validated() {
        assert!(NearbyLevelSet::from_pairs(&[(30.0, -0.1)]).is_err());
        let p = SystemParams::new(10.0, 10.0, 1.0, 0.1).unwrap();
        let below = NearbyLevelSet::from_pairs(&[(9.0, 0.1)]).unwrap();
        assert!(below.check_against(&p).is_err());
        let ok = NearbyLevelSet::new(vec![NearbyLevel { omega_k: 30.0, eta_k: 0.1 }]).unwrap();
        assert!(ok.check_against(&p).is_ok());
        assert_eq!(ok.scaled_couplings(0.5).unwrap().levels()[0].eta_k, 0.05);
    }
}
