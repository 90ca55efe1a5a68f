//! Photon-number distributions of the initial field.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};

/// Default bound on the discarded probability mass.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Allowed deviation of a custom distribution's sum from one before it is rejected.
pub const CUSTOM_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Vacuum,
    Coherent,
    Thermal,
    Custom,
}

/// A truncated photon-number distribution `p_0..p_M`.
///
/// For coherent and thermal fields the truncation index is the smallest `M` for
/// which the discarded probability is below the tolerance *and* the discarded
/// first and second moments are small enough that the stored mean and variance
/// reproduce the closed forms (see [`PhotonStatistics::tail`]).
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStatistics {
    kind: FieldKind,
    nbar: f64,
    probs: Vec<f64>,
    tail: f64,
}

struct Tails {
    p: f64,
    m1: f64,
    m2: f64,
}

impl Tails {
    fn acceptable(&self, tol: f64, nbar: f64) -> bool {
        self.p < tol && self.m1 <= tol * (nbar + 1.0) && self.m2 <= tol * (nbar + 1.0).powi(2)
    }
}

fn check_args(nbar: f64, tail_tol: f64) -> Result<()> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::domain(format!("mean photon number must be >= 0, got {nbar}")));
    }
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::domain(format!("tail tolerance must lie in (0,1), got {tail_tol}")));
    }
    Ok(())
}

impl PhotonStatistics {
    pub fn vacuum() -> Self {
        Self {
            kind: FieldKind::Vacuum,
            nbar: 0.0,
            probs: vec![1.0],
            tail: 0.0,
        }
    }

    /// Poisson statistics `p_m = e^{-n̄} n̄^m / m!`.
    pub fn coherent(nbar: f64, tail_tol: f64) -> Result<Self> {
        check_args(nbar, tail_tol)?;
        if nbar == 0.0 {
            return Ok(Self { kind: FieldKind::Coherent, ..Self::vacuum() });
        }
        let ln_nbar = nbar.ln();
        // Generate until the remaining geometric tail of m² p_m is negligible.
        let mut log_p = -nbar;
        let mut terms = vec![log_p.exp()];
        let mut m = 0usize;
        loop {
            m += 1;
            log_p += ln_nbar - (m as f64).ln();
            let p = log_p.exp();
            terms.push(p);
            let mf = m as f64;
            if mf > nbar + 1.0 {
                let ratio = nbar / (mf + 1.0);
                let bound = p * (mf + 2.0).powi(2) * ratio / (1.0 - ratio);
                if bound < 1e-6 * tail_tol || p == 0.0 {
                    break;
                }
            }
        }
        // Suffix sums accumulate smallest terms first.
        let len = terms.len();
        let mut suffix = Vec::with_capacity(len);
        let (mut sp, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (i, &p) in terms.iter().enumerate().rev() {
            suffix.push(Tails { p: sp, m1: s1, m2: s2 });
            let x = i as f64;
            sp += p;
            s1 += x * p;
            s2 += x * x * p;
        }
        suffix.reverse();
        let m_max = suffix
            .iter()
            .position(|t| t.acceptable(tail_tol, nbar))
            .unwrap_or(len - 1);
        let tail = suffix[m_max].p;
        terms.truncate(m_max + 1);
        Ok(Self {
            kind: FieldKind::Coherent,
            nbar,
            probs: terms,
            tail,
        })
    }

    /// Bose-Einstein statistics `p_m = n̄^m / (n̄+1)^{m+1}`.
    pub fn thermal(nbar: f64, tail_tol: f64) -> Result<Self> {
        check_args(nbar, tail_tol)?;
        if nbar == 0.0 {
            return Ok(Self { kind: FieldKind::Thermal, ..Self::vacuum() });
        }
        let ln_r = nbar.ln() - nbar.ln_1p();
        let ln_norm = nbar.ln_1p();
        // The tail beyond M is itself geometric: mass r^{M+1}, shifted by M+1.
        let tails = |m_max: usize| {
            let k = (m_max + 1) as f64;
            let p = (k * ln_r).exp();
            Tails {
                p,
                m1: p * (k + nbar),
                m2: p * (k * k + 2.0 * k * nbar + 2.0 * nbar * nbar + nbar),
            }
        };
        let closed = (tail_tol.ln() / ln_r).ceil() - 1.0;
        let mut m_max = if closed > 0.0 { closed as usize } else { 0 };
        while !tails(m_max).acceptable(tail_tol, nbar) {
            m_max += 1;
        }
        let probs = (0..=m_max)
            .map(|m| (m as f64 * ln_r - ln_norm).exp())
            .collect();
        Ok(Self {
            kind: FieldKind::Thermal,
            nbar,
            probs,
            tail: tails(m_max).p,
        })
    }

    /// Arbitrary diagonal statistics. Sums within [`CUSTOM_SUM_TOL`] of one are
    /// renormalized silently; larger deviations need `renormalize`.
    pub fn custom(probs: &[f64], renormalize: bool) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::validation("custom distribution is empty"));
        }
        if let Some((m, &p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::validation(format!("p_{m} = {p} is not a valid probability")));
        }
        let sum: f64 = probs.iter().sum();
        if sum <= 0.0 {
            return Err(Error::validation("custom distribution has zero mass"));
        }
        if (sum - 1.0).abs() > CUSTOM_SUM_TOL && !renormalize {
            return Err(Error::validation(format!(
                "custom distribution sums to {sum}, deviation exceeds {CUSTOM_SUM_TOL}"
            )));
        }
        let probs: Vec<f64> = probs.iter().map(|p| p / sum).collect();
        let nbar = probs.iter().enumerate().map(|(m, p)| m as f64 * p).sum();
        Ok(Self {
            kind: FieldKind::Custom,
            nbar,
            probs,
            tail: 0.0,
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Mean photon number: as requested for coherent/thermal, first moment otherwise.
    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Truncation index `M`.
    pub fn m_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// Probability mass discarded beyond `M`.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.moment(2) - mean * mean
    }

    fn moment(&self, k: i32) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(m, p)| (m as f64).powi(k) * p)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_limits() {
        for d in [
            PhotonStatistics::coherent(0.0, DEFAULT_TAIL_TOL).unwrap(),
            PhotonStatistics::thermal(0.0, DEFAULT_TAIL_TOL).unwrap(),
        ] {
            assert_eq!(d.probs(), &[1.0]);
            assert_eq!(d.m_max(), 0);
            assert_eq!(d.tail(), 0.0);
        }
    }

    #[test]
    fn coherent_values() {
        let d = PhotonStatistics::coherent(1.0, DEFAULT_TAIL_TOL).unwrap();
        assert!((d.probs()[0] - 0.36787944117144233).abs() < 1e-15);
        // e^{-1}/3! by direct evaluation
        assert!((d.probs()[3] - 0.36787944117144233 / 6.0).abs() < 1e-15);
        let d10 = PhotonStatistics::coherent(10.0, DEFAULT_TAIL_TOL).unwrap();
        assert!((d10.mean() - 10.0).abs() < 1e-9);
        assert!(d10.tail() < DEFAULT_TAIL_TOL);
    }

    #[test]
    fn thermal_values() {
        let d = PhotonStatistics::thermal(1.0, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(d.probs()[0], 0.5);
        assert!((d.probs()[3] - 0.0625).abs() < 1e-16);
        let d10 = PhotonStatistics::thermal(10.0, DEFAULT_TAIL_TOL).unwrap();
        assert!(d10.total() >= 1.0 - 1e-10);
        // closed-form starting index ceil(ln tol / ln r) - 1 is a lower bound
        let r: f64 = 10.0 / 11.0;
        let closed = ((1e-10f64).ln() / r.ln()).ceil() as usize - 1;
        assert!(d10.m_max() >= closed);
    }

    #[test]
    fn argument_errors() {
        assert!(matches!(PhotonStatistics::coherent(-1.0, 1e-10), Err(Error::Domain(_))));
        assert!(matches!(PhotonStatistics::thermal(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(PhotonStatistics::thermal(1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn custom_distributions() {
        let v = PhotonStatistics::custom(&[1.0], false).unwrap();
        assert_eq!(v.nbar(), 0.0);
        let one = PhotonStatistics::custom(&[0.0, 1.0], false).unwrap();
        assert_eq!(one.nbar(), 1.0);
        let half = PhotonStatistics::custom(&[0.5, 0.5], false).unwrap();
        assert_eq!(half.nbar(), 0.5);
        assert!(PhotonStatistics::custom(&[0.5, -0.1], false).is_err());
        assert!(PhotonStatistics::custom(&[0.5, 0.4], false).is_err());
        let renorm = PhotonStatistics::custom(&[0.5, 0.4], true).unwrap();
        assert!((renorm.total() - 1.0).abs() < 1e-15);
        let close = PhotonStatistics::custom(&[0.5, 0.5 + 5e-10], false).unwrap();
        assert!((close.total() - 1.0).abs() < 1e-15);
    }
}
