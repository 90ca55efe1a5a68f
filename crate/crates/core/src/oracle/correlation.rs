//! Numerical dipole correlation functions and the detector-filtered spectrum
//! of a truncated model, with no effective-model approximations.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::hamiltonian::{build_full_hamiltonian, build_hse, StarkForm};
use super::operators::{Basis, CMatrix, LEVEL_E, LEVEL_G};
use super::propagator::{CVector, Propagator};
use super::rotation::GUARD_BAND;
use crate::error::{Error, Result};
use crate::params::{NearbyLevelSet, SystemParams};
use crate::photon::PhotonStatistics;
use crate::spectrum::CorrelationAvg;

pub const DEFAULT_T_WINDOW: f64 = 1e4;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-5;
pub const MAX_DOUBLINGS: usize = 8;
/// Lines more than this many `λ` beyond the grid edge are not sampled.
pub const BAND_MARGIN: f64 = 10.0;
/// Correlation samples must reach `TAU_DECAY_LENGTHS / γ`.
pub const TAU_DECAY_LENGTHS: f64 = 40.0;
const TRACE_TOL: f64 = 1e-12;
/// Terms of `Γ̄` below this fraction of the total weight are dropped.
const PRUNE_REL: f64 = 1e-14;
const REPORTED_FREQUENCIES: usize = 5;
/// Phase `ωT` below which a pair is treated as non-oscillating.
const STATIC_PHASE: f64 = 1e-8;

/// `ρ₀ = Σ_m p_m |m,e⟩⟨m,e|`: atom excited, field diagonal in photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    basis: Basis,
    probs: Vec<f64>,
}

impl InitialState {
    /// Excited atom in the field `dist`, renormalised to unit trace.
    pub fn excited(basis: Basis, dist: &PhotonStatistics) -> Result<Self> {
        let total = dist.total();
        let probs: Vec<f64> = dist.probs().iter().map(|p| p / total).collect();
        Self::from_probs(basis, &probs)
    }

    pub fn from_probs(basis: Basis, probs: &[f64]) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::validation("populations must be non-negative"));
        }
        let deviation = (probs.iter().sum::<f64>() - 1.0).abs();
        if deviation > TRACE_TOL {
            return Err(Error::InvalidState { deviation });
        }
        let required = probs.len() - 1 + GUARD_BAND;
        if basis.n_max < required {
            return Err(Error::TruncationTooSmall { n_max: basis.n_max, required });
        }
        Ok(Self {
            basis,
            probs: probs.to_vec(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn trace(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn density_matrix(&self) -> CMatrix {
        let mut rho = self.basis.zeros();
        for (m, &p) in self.probs.iter().enumerate() {
            let i = self.basis.index(m, LEVEL_E);
            rho[(i, i)] = Complex64::from(p);
        }
        rho
    }
}

/// `σ_− = Σ_n |n,g⟩⟨n,e|` on `basis`.
pub fn sigma_minus(basis: &Basis) -> CMatrix {
    let mut s = basis.zeros();
    for n in 0..=basis.n_max {
        s[(basis.index(n, LEVEL_G), basis.index(n, LEVEL_E))] = Complex64::from(1.0);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageConfig {
    /// Initial averaging window.
    pub t_window: f64,
    /// Bound on the summed change of the averaged state when the window doubles.
    pub convergence_tol: f64,
}

impl Default for AverageConfig {
    fn default() -> Self {
        Self {
            t_window: DEFAULT_T_WINDOW,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
        }
    }
}

impl AverageConfig {
    pub fn new(t_window: f64, convergence_tol: f64) -> Result<Self> {
        if !(t_window > 0.0 && t_window.is_finite()) {
            return Err(Error::domain("averaging window must be positive"));
        }
        if !(convergence_tol > 0.0) {
            return Err(Error::domain("convergence tolerance must be positive"));
        }
        Ok(Self { t_window, convergence_tol })
    }
}

/// One oscillating component `weight · e^{i frequency τ}` of `Γ̄(τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTerm {
    pub frequency: f64,
    pub weight: Complex64,
}

/// `Γ̄(τ)` as a finite sum of oscillating terms.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedCorrelation {
    pub terms: Vec<CorrelationTerm>,
    /// Window length at convergence.
    pub window: f64,
    pub doublings: usize,
    /// Larger of the last doubling's change in the averaged state and the bound
    /// on its remaining distance from the infinite-time mean.
    pub residual: f64,
}

impl AveragedCorrelation {
    pub fn value(&self, tau: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.weight * Complex64::from_polar(1.0, t.frequency * tau))
            .sum()
    }

    pub fn sample(&self, taus: &[f64]) -> Vec<CorrelationAvg> {
        taus.iter()
            .map(|&tau| CorrelationAvg { tau, value: self.value(tau) })
            .collect()
    }

    /// Largest `|frequency − carrier|` among the terms.
    pub fn max_relative_frequency(&self, carrier: f64) -> f64 {
        self.terms
            .iter()
            .fold(0.0, |acc, t| acc.max((t.frequency - carrier).abs()))
    }

    /// Samples of `Γ̄(τ) e^{−i carrier τ}` on a uniform grid fine enough for
    /// detunings up to `bandwidth` and long enough for decay rate `gamma`.
    pub fn samples(&self, carrier: f64, bandwidth: f64, gamma: f64) -> Result<CorrelationSamples> {
        if !(gamma > 0.0) || !(bandwidth >= 0.0) {
            return Err(Error::domain("gamma must be positive and bandwidth non-negative"));
        }
        let max_frequency = self.max_relative_frequency(carrier);
        let tau_max = TAU_DECAY_LENGTHS / gamma;
        let span = max_frequency + bandwidth;
        let mut intervals = if span > 0.0 {
            (tau_max / sampling_limit(span)).ceil() as usize
        } else {
            2
        };
        intervals = (intervals + intervals % 2).max(2);
        let dtau = tau_max / intervals as f64;

        let mut values = vec![Complex64::from(0.0); intervals + 1];
        const REANCHOR: usize = 512;
        for term in &self.terms {
            let nu = term.frequency - carrier;
            let step = Complex64::from_polar(1.0, nu * dtau);
            let mut phasor = term.weight;
            for (j, v) in values.iter_mut().enumerate() {
                if j % REANCHOR == 0 {
                    phasor = term.weight * Complex64::from_polar(1.0, nu * dtau * j as f64);
                }
                *v += phasor;
                phasor *= step;
            }
        }
        Ok(CorrelationSamples {
            dtau,
            values,
            max_frequency,
        })
    }

    /// Splits off terms with `|frequency − carrier| > cutoff`. Such lines sit
    /// far outside the grid and only contribute smooth Lorentzian tails, but
    /// would force a much finer sampling step.
    pub fn split_band(&self, carrier: f64, cutoff: f64) -> (Self, Self) {
        let (near, far) = self
            .terms
            .iter()
            .partition(|t| (t.frequency - carrier).abs() <= cutoff);
        (
            Self { terms: near, ..self.clone() },
            Self { terms: far, ..self.clone() },
        )
    }

    /// Closed-form transform of the terms, `Re Σ W / (γ + i(ν − ν_ab))` with
    /// `ν = carrier + λδ`; the quadrature in [`spectrum_numeric`] must agree.
    pub fn exact_spectrum(&self, deltas: &[f64], carrier: f64, gamma: f64, lambda_c: f64) -> Vec<f64> {
        deltas
            .iter()
            .map(|&d| {
                let nu = carrier + lambda_c * d;
                self.terms
                    .iter()
                    .map(|t| (t.weight / Complex64::new(gamma, nu - t.frequency)).re)
                    .sum()
            })
            .collect()
    }
}

fn sampling_limit(span: f64) -> f64 {
    core::f64::consts::PI / (10.0 * span)
}

/// Uniform samples `Γ̄(jΔτ) e^{−i carrier jΔτ}`, `j = 0..`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSamples {
    pub dtau: f64,
    pub values: Vec<Complex64>,
    /// Largest frequency present in the samples, relative to the carrier.
    pub max_frequency: f64,
}

impl CorrelationSamples {
    pub fn tau_max(&self) -> f64 {
        self.dtau * self.values.len().saturating_sub(1) as f64
    }
}

/// `S(δ) = Re ∫₀^∞ e^{−iλδτ} e^{−γτ} Γ̄(τ) dτ` by composite Simpson quadrature.
pub fn spectrum_numeric(
    deltas: &[f64],
    samples: &CorrelationSamples,
    gamma: f64,
    lambda_c: f64,
) -> Result<Vec<f64>> {
    if !(gamma > 0.0) || !(lambda_c > 0.0) {
        return Err(Error::domain("gamma and lambda must be positive"));
    }
    if samples.values.len() < 3 || !(samples.dtau > 0.0) {
        return Err(Error::domain("need at least three correlation samples"));
    }
    let bandwidth = lambda_c * deltas.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let span = samples.max_frequency + bandwidth;
    if span > 0.0 {
        let limit = sampling_limit(span);
        if samples.dtau > limit * (1.0 + 1e-12) {
            return Err(Error::Aliasing { step: samples.dtau, limit });
        }
    }
    let n = samples.values.len() - 1 + samples.values.len() % 2;
    let values = &samples.values[..n];
    let tau_max = samples.dtau * (n - 1) as f64;
    let required = TAU_DECAY_LENGTHS / gamma;
    if tau_max < required * (1.0 - 1e-12) {
        return Err(Error::TauRangeTooShort { tau_max, required });
    }
    let weighted: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let w = if j == 0 || j == n - 1 {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            v * w
        })
        .collect();
    Ok(deltas
        .iter()
        .map(|&d| {
            let z = Complex64::new(-gamma * samples.dtau, -lambda_c * d * samples.dtau).exp();
            let acc = weighted.iter().rev().fold(Complex64::from(0.0), |acc, w| acc * z + w);
            acc.re * samples.dtau / 3.0
        })
        .collect())
}

/// A Hamiltonian diagonalised together with the lowering operator in its
/// eigenbasis, kept as a sparse list because it only links adjacent blocks.
#[derive(Debug, Clone)]
pub struct DipoleDynamics {
    basis: Basis,
    propagator: Propagator,
    sigma: Vec<(usize, usize, Complex64)>,
}

impl DipoleDynamics {
    pub fn new(h: &CMatrix, basis: Basis) -> Result<Self> {
        if h.nrows() != basis.dim() {
            return Err(Error::DimensionMismatch { left: basis.dim(), right: h.nrows() });
        }
        let propagator = Propagator::new(h)?;
        let dense = propagator.operator_to_eigenbasis(&sigma_minus(&basis))?;
        let mut sigma = Vec::new();
        for c in 0..dense.ncols() {
            for r in 0..dense.nrows() {
                let z = dense[(r, c)];
                if z != Complex64::from(0.0) {
                    sigma.push((r, c, z));
                }
            }
        }
        Ok(Self { basis, propagator, sigma })
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    fn check_state(&self, rho0: &InitialState) -> Result<()> {
        if rho0.basis != self.basis {
            return Err(Error::DimensionMismatch {
                left: self.basis.dim(),
                right: rho0.basis.dim(),
            });
        }
        Ok(())
    }

    fn lower(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(v.len());
        for &(r, c, s) in &self.sigma {
            out[r] += s * v[c];
        }
        out
    }

    fn evolve(&self, t: f64, v: &CVector) -> CVector {
        let mut out = v.clone();
        for (x, p) in out.iter_mut().zip(self.propagator.phases(t)) {
            *x *= p;
        }
        out
    }

    fn excited_state(&self, m: usize) -> CVector {
        let mut v = CVector::zeros(self.basis.dim());
        v[self.basis.index(m, LEVEL_E)] = Complex64::from(1.0);
        self.propagator.to_eigenbasis(&v)
    }

    /// `Γ(t, τ) = Tr[ρ₀ σ₊(t+τ) σ₋(t)]`.
    pub fn correlation(&self, t: f64, tau: f64, rho0: &InitialState) -> Result<Complex64> {
        self.check_state(rho0)?;
        let mut total = Complex64::from(0.0);
        for (m, &p) in rho0.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let psi = self.excited_state(m);
            let inner = self.evolve(tau, &self.lower(&self.evolve(t, &psi)));
            let outer = self.lower(&self.evolve(t + tau, &psi));
            total += outer.dotc(&inner) * p;
        }
        Ok(total)
    }

    /// `ρ₀` in the eigenbasis, one dense matrix per block it touches.
    fn initial_blocks(&self, rho0: &InitialState) -> Vec<(usize, CMatrix)> {
        let mut blocks: Vec<(usize, CMatrix)> = Vec::new();
        for (m, &p) in rho0.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let psi = self.excited_state(m);
            let block = (0..psi.len())
                .find(|&a| psi[a] != Complex64::from(0.0))
                .map(|a| self.propagator.block_of(a));
            let Some(block) = block else { continue };
            let range = self.propagator.block_range(block);
            let local = psi.rows(range.start, range.len()).into_owned();
            let contribution = &local * local.adjoint() * Complex64::from(p);
            match blocks.iter_mut().find(|(b, _)| *b == block) {
                Some((_, acc)) => *acc += contribution,
                None => blocks.push((block, contribution)),
            }
        }
        blocks
    }

    fn windowed(&self, blocks: &[(usize, CMatrix)], window: f64) -> Vec<(usize, CMatrix)> {
        let e = self.propagator.eigenvalues();
        blocks
            .iter()
            .map(|(block, rho)| {
                let start = self.propagator.block_range(*block).start;
                let avg = CMatrix::from_fn(rho.nrows(), rho.ncols(), |a, b| {
                    rho[(a, b)] * window_mean(e[start + a] - e[start + b], window)
                });
                (*block, avg)
            })
            .collect()
    }

    /// Exact mean of `Γ(t, τ)` over `t ∈ [0, T]`, with `T` doubled until the
    /// averaged state stops changing and is provably within tolerance of the
    /// infinite-time mean.
    pub fn time_average(&self, rho0: &InitialState, cfg: &AverageConfig) -> Result<AveragedCorrelation> {
        self.check_state(rho0)?;
        let blocks = self.initial_blocks(rho0);
        let mut window = cfg.t_window;
        let mut current = self.windowed(&blocks, window);
        let mut residual = f64::INFINITY;
        for doubling in 1..=MAX_DOUBLINGS {
            window *= 2.0;
            let next = self.windowed(&blocks, window);
            let change: f64 = current
                .iter()
                .zip(&next)
                .map(|((_, a), (_, b))| (a - b).iter().map(|z| z.norm()).sum::<f64>())
                .sum();
            residual = change.max(self.remainder_bound(&blocks, window));
            current = next;
            if residual < cfg.convergence_tol {
                return Ok(AveragedCorrelation {
                    terms: self.terms(&current),
                    window,
                    doublings: doubling,
                    residual,
                });
            }
        }
        Err(Error::NoConvergence {
            doublings: MAX_DOUBLINGS,
            window,
            residual,
            frequencies: self.slowest_frequencies(&blocks, cfg.convergence_tol),
        })
    }

    /// Upper bound on the distance of the windowed state from its infinite-time
    /// mean: `Σ |ρ_ab| min(1, 2/|ω_ab T|)` over oscillating pairs.
    fn remainder_bound(&self, blocks: &[(usize, CMatrix)], window: f64) -> f64 {
        let e = self.propagator.eigenvalues();
        let mut bound = 0.0;
        for (block, rho) in blocks {
            let start = self.propagator.block_range(*block).start;
            for a in 0..rho.nrows() {
                for b in 0..rho.ncols() {
                    let x = ((e[start + a] - e[start + b]) * window).abs();
                    if x >= STATIC_PHASE {
                        bound += rho[(a, b)].norm() * (2.0 / x).min(1.0);
                    }
                }
            }
        }
        bound
    }

    fn slowest_frequencies(&self, blocks: &[(usize, CMatrix)], tol: f64) -> Vec<f64> {
        let e = self.propagator.eigenvalues();
        let mut freqs = Vec::new();
        for (block, rho) in blocks {
            let start = self.propagator.block_range(*block).start;
            for a in 0..rho.nrows() {
                for b in (a + 1)..rho.ncols() {
                    if rho[(a, b)].norm() > 1e-3 * tol {
                        freqs.push((e[start + a] - e[start + b]).abs());
                    }
                }
            }
        }
        freqs.sort_by(f64::total_cmp);
        freqs.truncate(REPORTED_FREQUENCIES);
        freqs
    }

    /// `Γ̄(τ) = Σ_{ab} conj(σ̃_{ba}) (σ̃ ρ̄)_{ba} e^{i(E_a − E_b)τ}`.
    fn terms(&self, rho_bar: &[(usize, CMatrix)]) -> Vec<CorrelationTerm> {
        let e = self.propagator.eigenvalues();
        let dim = self.basis.dim();
        let mut lowered = CMatrix::zeros(dim, dim);
        for &(b, c, s) in &self.sigma {
            let block = self.propagator.block_of(c);
            let Some((_, rho)) = rho_bar.iter().find(|(k, _)| *k == block) else {
                continue;
            };
            let range = self.propagator.block_range(block);
            for (local_a, a) in range.clone().enumerate() {
                lowered[(b, a)] += s * rho[(c - range.start, local_a)];
            }
        }
        let mut terms: Vec<CorrelationTerm> = self
            .sigma
            .iter()
            .filter_map(|&(b, a, s)| {
                let weight = s.conj() * lowered[(b, a)];
                (weight != Complex64::from(0.0)).then(|| CorrelationTerm {
                    frequency: e[a] - e[b],
                    weight,
                })
            })
            .collect();
        let scale: f64 = terms.iter().map(|t| t.weight.norm()).sum();
        terms.retain(|t| t.weight.norm() > PRUNE_REL * scale);
        terms
    }
}

/// `(1/T)∫₀ᵀ e^{−iωt} dt`.
fn window_mean(omega: f64, window: f64) -> Complex64 {
    let x = omega * window;
    if x.abs() < STATIC_PHASE {
        Complex64::new(1.0, -0.5 * x)
    } else {
        (Complex64::from(1.0) - Complex64::from_polar(1.0, -x)) / Complex64::new(0.0, x)
    }
}

pub fn correlation_numeric(
    t: f64,
    tau: f64,
    dynamics: &DipoleDynamics,
    rho0: &InitialState,
) -> Result<Complex64> {
    dynamics.correlation(t, tau, rho0)
}

pub fn time_average_numeric(
    taus: &[f64],
    dynamics: &DipoleDynamics,
    rho0: &InitialState,
    cfg: &AverageConfig,
) -> Result<Vec<CorrelationAvg>> {
    Ok(dynamics.time_average(rho0, cfg)?.sample(taus))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NumericConfig {
    /// Fock truncation; defaults to the field truncation plus twice the guard band.
    pub n_max: Option<usize>,
    pub average: AverageConfig,
}

impl NumericConfig {
    pub fn n_max_for(&self, dist: &PhotonStatistics) -> usize {
        self.n_max.unwrap_or(dist.m_max() + 2 * GUARD_BAND)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericSpectrum {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub n_max: usize,
    pub correlation: AveragedCorrelation,
    /// Terms far outside the grid, transformed in closed form instead of sampled.
    pub out_of_band_terms: usize,
}

fn numeric_pipeline(
    h: &CMatrix,
    basis: Basis,
    dist: &PhotonStatistics,
    params: &SystemParams,
    grid: &[f64],
    cfg: &NumericConfig,
) -> Result<NumericSpectrum> {
    let rho0 = InitialState::excited(basis, dist)?;
    let dynamics = DipoleDynamics::new(h, basis)?;
    let correlation = dynamics.time_average(&rho0, &cfg.average)?;
    let bandwidth = params.lambda_c * grid.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let cutoff = bandwidth + BAND_MARGIN * params.lambda_c;
    let (near, far) = correlation.split_band(params.omega, cutoff);
    let samples = near.samples(params.omega, bandwidth, params.gamma)?;
    let mut values = spectrum_numeric(grid, &samples, params.gamma, params.lambda_c)?;
    let tails = far.exact_spectrum(grid, params.omega, params.gamma, params.lambda_c);
    for (v, t) in values.iter_mut().zip(tails) {
        *v += t;
    }
    Ok(NumericSpectrum {
        grid: grid.to_vec(),
        values,
        n_max: basis.n_max,
        correlation,
        out_of_band_terms: far.terms.len(),
    })
}

/// Numerical spectrum of the effective Stark Hamiltonian.
pub fn hse_spectrum(
    dist: &PhotonStatistics,
    params: &SystemParams,
    chi: f64,
    form: StarkForm,
    grid: &[f64],
    cfg: &NumericConfig,
) -> Result<NumericSpectrum> {
    let basis = Basis::new(cfg.n_max_for(dist), 0)?;
    let h = build_hse(&basis, params, chi, form);
    numeric_pipeline(&h, basis, dist, params, grid, cfg)
}

/// Numerical spectrum of the full model with the nearby levels kept explicitly.
pub fn full_model_spectrum(
    params: &SystemParams,
    nearby: &NearbyLevelSet,
    dist: &PhotonStatistics,
    grid: &[f64],
    cfg: &NumericConfig,
) -> Result<NumericSpectrum> {
    let n_max = cfg.n_max_for(dist);
    let basis = Basis::new(n_max, nearby.len())?;
    let h = build_full_hamiltonian(params, nearby, n_max)?;
    numeric_pipeline(&h, basis, dist, params, grid, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dressed::{effective_model, DEFAULT_XI_LIMIT};
    use crate::photon::DEFAULT_TAIL_TOL;
    use crate::spectrum::{correlation_avg, physical_spectrum, DeltaGrid, WeightMode};

    fn params(delta: f64) -> SystemParams {
        SystemParams::with_detuning(10.0, delta, 1.0, 0.1).unwrap()
    }

    fn dynamics(p: &SystemParams, chi: f64, n_max: usize) -> DipoleDynamics {
        let basis = Basis::new(n_max, 0).unwrap();
        DipoleDynamics::new(&build_hse(&basis, p, chi, StarkForm::BareField), basis).unwrap()
    }

    fn rel_linf(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
    }

    #[test]
    fn initial_state_validation() {
        let basis = Basis::new(8, 0).unwrap();
        assert!(InitialState::from_probs(basis, &[0.5, 0.5]).is_ok());
        assert!(matches!(
            InitialState::from_probs(basis, &[0.5, 0.4]),
            Err(Error::InvalidState { .. })
        ));
        assert!(InitialState::from_probs(basis, &[1.5, -0.5]).is_err());
        assert!(matches!(
            InitialState::from_probs(basis, &[0.0, 0.0, 0.0, 0.0, 1.0]),
            Err(Error::TruncationTooSmall { required: 9, .. })
        ));
        let coherent = PhotonStatistics::coherent(1.0, DEFAULT_TAIL_TOL).unwrap();
        let rho = InitialState::excited(Basis::new(coherent.m_max() + 5, 0).unwrap(), &coherent).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert!((rho.density_matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn correlation_starts_at_unit_population() {
        let p = params(0.3);
        let dist = PhotonStatistics::coherent(1.0, DEFAULT_TAIL_TOL).unwrap();
        let dy = dynamics(&p, 0.9, dist.m_max() + 5);
        let rho = InitialState::excited(dy.basis(), &dist).unwrap();
        assert!((dy.correlation(0.0, 0.0, &rho).unwrap() - 1.0).norm() < 1e-12);
        for t in [0.3, 2.0, 11.0] {
            assert!(dy.correlation(t, 0.0, &rho).unwrap().im.abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_rabi_population() {
        // Δ = χ = 0: P_e(t) = cos²(λt)
        let p = params(0.0);
        let dy = dynamics(&p, 0.0, 6);
        let rho = InitialState::from_probs(dy.basis(), &[1.0]).unwrap();
        for t in [0.0, 0.4, 1.3, 5.0] {
            let g = dy.correlation(t, 0.0, &rho).unwrap();
            assert!((g.re - t.cos().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_average_has_two_frequencies() {
        let p = params(0.0);
        let dy = dynamics(&p, 0.0, 6);
        let rho = InitialState::from_probs(dy.basis(), &[1.0]).unwrap();
        let avg = dy.time_average(&rho, &AverageConfig::default()).unwrap();
        let strong: Vec<_> = avg.terms.iter().filter(|t| t.weight.norm() > 1e-4).collect();
        assert_eq!(strong.len(), 2);
        assert!((avg.value(0.0).re - 0.5).abs() < 1e-5, "{avg:?}");
        let dist = PhotonStatistics::vacuum();
        for tau in [0.0, 0.7, 3.1, 20.0] {
            let a = correlation_avg(tau, &dist, &p, 0.0, WeightMode::Probability).unwrap();
            assert!((avg.value(tau) - a.value).norm() < DEFAULT_CONVERGENCE_TOL);
        }
    }

    #[test]
    fn thermal_average_matches_closed_form() {
        let p = params(0.3);
        let dist = PhotonStatistics::thermal(1.0, DEFAULT_TAIL_TOL).unwrap();
        let dy = dynamics(&p, 0.9, dist.m_max() + 10);
        let rho = InitialState::excited(dy.basis(), &dist).unwrap();
        let taus = [0.0, 0.5, 1.7, 4.0, 13.0, 60.0];
        let numeric = time_average_numeric(&taus, &dy, &rho, &AverageConfig::default()).unwrap();
        for (n, &tau) in numeric.iter().zip(&taus) {
            let a = correlation_avg(tau, &dist, &p, 0.9, WeightMode::Probability).unwrap();
            assert!((n.value - a.value).norm() < 1e-4, "tau {tau}");
        }
    }

    #[test]
    fn averaged_matches_direct_time_mean() {
        let p = params(0.3);
        let dy = dynamics(&p, 0.9, 8);
        let rho = InitialState::from_probs(dy.basis(), &[0.6, 0.4]).unwrap();
        let cfg = AverageConfig::new(400.0, 1e-3).unwrap();
        let avg = dy.time_average(&rho, &cfg).unwrap();
        // trapezoid mean over the converged window
        let n = 40_000;
        let h = avg.window / n as f64;
        let tau = 1.3;
        let mut sum = Complex64::from(0.0);
        for j in 0..=n {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            sum += dy.correlation(j as f64 * h, tau, &rho).unwrap() * w;
        }
        let direct = sum / n as f64;
        assert!((direct - avg.value(tau)).norm() < 1e-5);
    }

    #[test]
    fn non_convergence_reports_frequencies() {
        let p = params(0.3);
        let dy = dynamics(&p, 0.9, 8);
        let rho = InitialState::from_probs(dy.basis(), &[0.6, 0.4]).unwrap();
        let cfg = AverageConfig::new(1e-3, 1e-14).unwrap();
        match dy.time_average(&rho, &cfg) {
            Err(Error::NoConvergence { doublings, frequencies, .. }) => {
                assert_eq!(doublings, MAX_DOUBLINGS);
                assert!(!frequencies.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_tone_transform_is_lorentzian() {
        let nu1 = 1.5;
        let gamma = 0.1;
        let dtau = sampling_limit(nu1 + 4.0);
        let n = (TAU_DECAY_LENGTHS / gamma / dtau).ceil() as usize + 1;
        let samples = CorrelationSamples {
            dtau,
            values: (0..=n).map(|j| Complex64::from_polar(1.0, nu1 * dtau * j as f64)).collect(),
            max_frequency: nu1,
        };
        let deltas = [-4.0, -1.0, 0.0, 1.4, 1.5, 2.0, 4.0];
        let s = spectrum_numeric(&deltas, &samples, gamma, 1.0).unwrap();
        for (&d, v) in deltas.iter().zip(&s) {
            let want = gamma / (gamma * gamma + (d - nu1).powi(2));
            assert!((v - want).abs() < 1e-4 * want.max(1.0), "{d}: {v} vs {want}");
        }
        let zero = CorrelationSamples { values: vec![Complex64::from(0.0); n + 1], ..samples.clone() };
        assert!(spectrum_numeric(&deltas, &zero, gamma, 1.0).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sampling_errors() {
        let samples = CorrelationSamples {
            dtau: 0.5,
            values: vec![Complex64::from(1.0); 2001],
            max_frequency: 1.0,
        };
        assert!(matches!(
            spectrum_numeric(&[0.0, 3.0], &samples, 0.1, 1.0),
            Err(Error::Aliasing { .. })
        ));
        let short = CorrelationSamples { dtau: 0.01, values: vec![Complex64::from(1.0); 101], max_frequency: 1.0 };
        assert!(matches!(
            spectrum_numeric(&[0.0], &short, 0.1, 1.0),
            Err(Error::TauRangeTooShort { .. })
        ));
    }

    #[test]
    fn quadrature_matches_closed_form_transform() {
        let p = params(0.3);
        let dist = PhotonStatistics::coherent(1.0, DEFAULT_TAIL_TOL).unwrap();
        let grid = DeltaGrid::new(-6.0, 6.0, 241).unwrap().values();
        let out = hse_spectrum(&dist, &p, 0.9, StarkForm::BareField, &grid, &NumericConfig::default()).unwrap();
        let exact = out.correlation.exact_spectrum(&grid, p.omega, p.gamma, p.lambda_c);
        assert!(rel_linf(&out.values, &exact) < 1e-6);
    }

    #[test]
    fn numeric_matches_analytic_spectrum() {
        for (dist, delta, chi) in [
            (PhotonStatistics::coherent(1.0, DEFAULT_TAIL_TOL).unwrap(), 0.3, 0.9),
            (PhotonStatistics::thermal(1.0, DEFAULT_TAIL_TOL).unwrap(), 0.0, 0.9),
            (PhotonStatistics::vacuum(), 0.3, 0.0),
        ] {
            let p = params(delta);
            let grid = DeltaGrid::new(-10.0, 10.0, 401).unwrap();
            let analytic = physical_spectrum(&dist, &p, chi, WeightMode::Probability, &grid).unwrap();
            let numeric = hse_spectrum(&dist, &p, chi, StarkForm::BareField, &grid.values(), &NumericConfig::default()).unwrap();
            assert!(rel_linf(&numeric.values, &analytic.values) < 1e-3);
        }
    }

    #[test]
    fn no_nearby_levels_full_model_is_plain_jc() {
        let p = params(0.3);
        let dist = PhotonStatistics::coherent(1.0, DEFAULT_TAIL_TOL).unwrap();
        let grid = DeltaGrid::new(-5.0, 5.0, 101).unwrap().values();
        let cfg = NumericConfig::default();
        let full = full_model_spectrum(&p, &NearbyLevelSet::empty(), &dist, &grid, &cfg).unwrap();
        let hse = hse_spectrum(&dist, &p, 0.0, StarkForm::ShiftedField, &grid, &cfg).unwrap();
        assert!(rel_linf(&full.values, &hse.values) < 1e-10);
    }

    #[test]
    fn full_model_reduces_to_effective_model() {
        let p = params(0.0);
        let dist = PhotonStatistics::coherent(1.0, DEFAULT_TAIL_TOL).unwrap();
        let grid = DeltaGrid::new(-5.0, 5.0, 201).unwrap().values();
        let cfg = NumericConfig::default();
        let mut devs = Vec::new();
        for eta in [0.5, 0.25] {
            let nearby = NearbyLevelSet::from_pairs(&[(30.0, eta)]).unwrap();
            let chi = effective_model(&nearby, &p, DEFAULT_XI_LIMIT).unwrap().chi;
            let full = full_model_spectrum(&p, &nearby, &dist, &grid, &cfg).unwrap();
            let eff = hse_spectrum(&dist, &p, chi, StarkForm::ShiftedField, &grid, &cfg).unwrap();
            devs.push(full.values.iter().zip(&eff.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
        }
        let ratio = devs[1] / devs[0];
        assert!(ratio > 0.19 && ratio < 0.32, "{devs:?}");
    }

    #[test]
    fn truncation_is_stable() {
        let p = params(0.3);
        let dist = PhotonStatistics::coherent(1.0, DEFAULT_TAIL_TOL).unwrap();
        let grid = DeltaGrid::new(-10.0, 10.0, 201).unwrap().values();
        let run = |n| {
            let cfg = NumericConfig { n_max: Some(dist.m_max() + n), ..Default::default() };
            hse_spectrum(&dist, &p, 0.9, StarkForm::BareField, &grid, &cfg).unwrap().values
        };
        assert!(rel_linf(&run(5), &run(10)) < 1e-8);
    }
}
