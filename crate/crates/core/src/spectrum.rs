//! Analytic physical spectrum: the time-averaged dipole correlation and its
//! detector-filtered transform, a sum of Lorentzians at the dressed-state
//! transition frequencies.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dressed::{dressed_quantities, lambda_m, vacuum_line_positions, DressedQuantities};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::photon::PhotonStatistics;

/// Radiative transitions between dressed states. `m` is the upper manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// `|ψ_0^+⟩ → |0,g⟩`
    VacuumPlus,
    /// `|ψ_0^-⟩ → |0,g⟩`
    VacuumMinus,
    /// `|ψ_m^+⟩ → |ψ_{m-1}^+⟩`
    PlusToPlus,
    /// `|ψ_m^+⟩ → |ψ_{m-1}^-⟩`
    PlusToMinus,
    /// `|ψ_m^-⟩ → |ψ_{m-1}^+⟩`
    MinusToPlus,
    /// `|ψ_m^-⟩ → |ψ_{m-1}^-⟩`
    MinusToMinus,
}

impl Transition {
    pub const ALL: [Transition; 6] = [
        Transition::VacuumPlus,
        Transition::VacuumMinus,
        Transition::PlusToPlus,
        Transition::PlusToMinus,
        Transition::MinusToPlus,
        Transition::MinusToMinus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Transition::VacuumPlus => "psi0+ -> 0g",
            Transition::VacuumMinus => "psi0- -> 0g",
            Transition::PlusToPlus => "psi_m+ -> psi_m-1+",
            Transition::PlusToMinus => "psi_m+ -> psi_m-1-",
            Transition::MinusToPlus => "psi_m- -> psi_m-1+",
            Transition::MinusToMinus => "psi_m- -> psi_m-1-",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.label() == label)
    }

    /// Line centre in units of λ relative to the field frequency.
    pub fn center(self, m: usize, params: &SystemParams, chi: f64) -> f64 {
        match self {
            Transition::VacuumPlus => vacuum_line_positions(params, chi).0,
            Transition::VacuumMinus => vacuum_line_positions(params, chi).1,
            _ => {
                let upper = lambda_m(m, params, chi);
                let lower = lambda_m(m - 1, params, chi);
                match self {
                    Transition::PlusToPlus => upper - lower,
                    Transition::PlusToMinus => upper + lower,
                    Transition::MinusToPlus => -(upper + lower),
                    _ => -(upper - lower),
                }
            }
        }
    }
}

/// How the photon distribution weights each manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// `w_m = p_m`: the diagonal of the initial density matrix.
    #[default]
    Probability,
    /// `w_m = p_m²`, reproducing the printed formula literally.
    SquaredLiteral,
}

impl WeightMode {
    pub fn weight(self, p: f64) -> f64 {
        match self {
            WeightMode::Probability => p,
            WeightMode::SquaredLiteral => p * p,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightMode::Probability => "probability",
            WeightMode::SquaredLiteral => "squared_literal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub transition: Transition,
    pub m: usize,
    /// Position δ = (ν − ω)/λ.
    pub center: f64,
    pub weight: f64,
}

/// Uniform grid in δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for DeltaGrid {
    fn default() -> Self {
        Self { min: -10.0, max: 10.0, points: 4001 }
    }
}

impl DeltaGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::domain(format!("grid needs at least 2 points, got {points}")));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::domain(format!("grid range [{min}, {max}] is invalid")));
        }
        Ok(Self { min, max, points })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    /// Grid values. `x_i = (min·(n−1−i) + max·i)/(n−1)` is exactly antisymmetric
    /// under `i → n−1−i` when `min = −max`.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let i = i as f64;
                (self.min * (last - i) + self.max * i) / last
            })
            .collect()
    }
}

/// Parameters a spectrum was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEcho {
    pub params: SystemParams,
    pub chi: f64,
    pub weight_mode: WeightMode,
    pub field: PhotonStatistics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub lines: Vec<SpectralLine>,
    pub gamma: f64,
    pub lambda_c: f64,
    pub echo: Option<SpectrumEcho>,
}

impl SpectrumResult {
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn step(&self) -> f64 {
        if self.grid.len() < 2 {
            return 0.0;
        }
        (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1) as f64
    }
}

fn manifold_factors(q: &DressedQuantities) -> (f64, f64) {
    (q.cos2(), q.sin2())
}

/// The spectral lines of the multiplet, two for `m = 0` then four per `m = 1..=M`.
pub fn transition_lines(
    dist: &PhotonStatistics,
    params: &SystemParams,
    chi: f64,
    mode: WeightMode,
) -> Vec<SpectralLine> {
    let probs = dist.probs();
    let mut lines = Vec::with_capacity(2 + 4 * (probs.len() - 1));
    let mut lower = dressed_quantities(0, params, chi);
    let (c0, s0) = manifold_factors(&lower);
    let w0 = mode.weight(probs[0]);
    for (transition, trig) in [
        (Transition::VacuumPlus, c0 * c0),
        (Transition::VacuumMinus, s0 * s0),
    ] {
        lines.push(SpectralLine {
            transition,
            m: 0,
            center: transition.center(0, params, chi),
            weight: w0 * trig,
        });
    }
    for (m, &p) in probs.iter().enumerate().skip(1) {
        let upper = dressed_quantities(m, params, chi);
        let (c, s) = manifold_factors(&upper);
        let (cl, sl) = manifold_factors(&lower);
        let w = mode.weight(p);
        for (transition, trig) in [
            (Transition::PlusToPlus, c * c * sl),
            (Transition::PlusToMinus, c * c * cl),
            (Transition::MinusToPlus, s * s * sl),
            (Transition::MinusToMinus, s * s * cl),
        ] {
            lines.push(SpectralLine {
                transition,
                m,
                center: transition.center(m, params, chi),
                weight: w * trig,
            });
        }
        lower = upper;
    }
    lines
}

/// Sum in a fixed binary tree; the result is independent of thread count.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn lorentzian(delta: f64, center: f64, gamma: f64, lambda_c: f64) -> f64 {
    let x = lambda_c * (delta - center);
    gamma / (gamma * gamma + x * x)
}

pub fn evaluate_spectrum(
    lines: &[SpectralLine],
    grid: &[f64],
    gamma: f64,
    lambda_c: f64,
) -> Result<SpectrumResult> {
    if lines.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if !(gamma > 0.0) || !(lambda_c > 0.0) {
        return Err(Error::domain("gamma and lambda must be positive"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("grid must be strictly ascending"));
    }
    let mut scratch = Vec::with_capacity(lines.len());
    let values = grid
        .iter()
        .map(|&delta| {
            scratch.clear();
            scratch.extend(
                lines
                    .iter()
                    .map(|l| l.weight * lorentzian(delta, l.center, gamma, lambda_c)),
            );
            pairwise_sum(&scratch)
        })
        .collect();
    Ok(SpectrumResult {
        grid: grid.to_vec(),
        values,
        lines: lines.to_vec(),
        gamma,
        lambda_c,
        echo: None,
    })
}

/// Lines plus evaluation on `grid`, with the inputs echoed in the result.
pub fn physical_spectrum(
    dist: &PhotonStatistics,
    params: &SystemParams,
    chi: f64,
    mode: WeightMode,
    grid: &DeltaGrid,
) -> Result<SpectrumResult> {
    let lines = transition_lines(dist, params, chi, mode);
    let mut result = evaluate_spectrum(&lines, &grid.values(), params.gamma, params.lambda_c)?;
    result.echo = Some(SpectrumEcho {
        params: *params,
        chi,
        weight_mode: mode,
        field: dist.clone(),
    });
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationAvg {
    pub tau: f64,
    pub value: Complex64,
}

/// Time-averaged correlation `Γ̄(τ)`, built from the dressed energies directly
/// (not from the line table), so its transform is an independent check on it.
pub fn correlation_avg(
    tau: f64,
    dist: &PhotonStatistics,
    params: &SystemParams,
    chi: f64,
    mode: WeightMode,
) -> Result<CorrelationAvg> {
    if !(tau >= 0.0) {
        return Err(Error::domain(format!("tau must be non-negative, got {tau}")));
    }
    let probs = dist.probs();
    let phase = |freq: f64| Complex64::from_polar(1.0, tau * freq);
    let mut lower = dressed_quantities(0, params, chi);
    let (c0, s0) = manifold_factors(&lower);
    let ground = 0.5 * params.omega0;
    let mut value = (phase(lower.e_plus + ground) * (c0 * c0)
        + phase(lower.e_minus + ground) * (s0 * s0))
        * mode.weight(probs[0]);
    for (m, &p) in probs.iter().enumerate().skip(1) {
        let upper = dressed_quantities(m, params, chi);
        let (c, s) = manifold_factors(&upper);
        let (cl, sl) = manifold_factors(&lower);
        let bracket = phase(upper.e_plus - lower.e_plus) * (c * c * sl)
            + phase(upper.e_minus - lower.e_plus) * (s * s * sl)
            + phase(upper.e_plus - lower.e_minus) * (c * c * cl)
            + phase(upper.e_minus - lower.e_minus) * (s * s * cl);
        value += bracket * mode.weight(p);
        lower = upper;
    }
    Ok(CorrelationAvg { tau, value })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakSearch {
    /// `(δ, S)` of each local maximum, ascending in δ.
    pub peaks: Vec<(f64, f64)>,
    /// Set when the grid step exceeds γ/(2λ) and narrow peaks may be missed.
    pub resolution_warning: bool,
}

/// Interior local maxima with `S ≥ prominence · max S`.
pub fn peak_find(result: &SpectrumResult, prominence: f64) -> PeakSearch {
    let s = &result.values;
    let threshold = prominence * result.max_value();
    let peaks = (1..s.len().saturating_sub(1))
        .filter(|&i| s[i] > s[i - 1] && s[i] >= s[i + 1] && s[i] >= threshold)
        .map(|i| (result.grid[i], s[i]))
        .collect();
    PeakSearch {
        peaks,
        resolution_warning: result.step() > result.gamma / (2.0 * result.lambda_c),
    }
}

fn trapezoid(x: &[f64], y: impl Fn(usize) -> f64) -> f64 {
    let parts: Vec<f64> = x
        .windows(2)
        .enumerate()
        .map(|(i, w)| 0.5 * (w[1] - w[0]) * (y(i) + y(i + 1)))
        .collect();
    pairwise_sum(&parts)
}

/// Spectral centroid `∫δ S dδ / ∫S dδ` over a grid symmetric about zero.
pub fn asymmetry_metric(result: &SpectrumResult) -> Result<f64> {
    let g = &result.grid;
    if g.len() < 2 {
        return Err(Error::domain("grid too short"));
    }
    let scale = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mismatch = (0..g.len())
        .map(|i| (g[i] + g[g.len() - 1 - i]).abs())
        .fold(0.0, f64::max);
    if mismatch > 1e-12 * scale {
        return Err(Error::AsymmetricGrid { mismatch });
    }
    let s = &result.values;
    let mass = trapezoid(g, |i| s[i]);
    if !(mass > 0.0) {
        return Err(Error::EmptySpectrum);
    }
    Ok(trapezoid(g, |i| g[i] * s[i]) / mass)
}
