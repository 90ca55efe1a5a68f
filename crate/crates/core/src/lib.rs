//! Resonance fluorescence spectrum of the Jaynes-Cummings model with an
//! intensity-dependent Stark shift from off-resonant atomic levels.
//!
//! The analytic pipeline ([`dressed`], [`spectrum`]) is checked against
//! explicit truncated-space numerics in [`oracle`].

#![no_std]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dressed;
pub mod error;
pub mod oracle;
pub mod params;
pub mod photon;
pub mod spectrum;

pub use dressed::{
    dressed_quantities, effective_model, evolution_coeffs, lambda_m, line_positions,
    DressedQuantities, EffectiveModel, EvolutionCoeffs, LinePositions, DEFAULT_XI_LIMIT,
};
pub use error::{Error, Result};
pub use params::{NearbyLevel, NearbyLevelSet, SystemParams};
pub use photon::{FieldKind, PhotonStatistics, DEFAULT_TAIL_TOL};
pub use spectrum::{
    asymmetry_metric, correlation_avg, evaluate_spectrum, peak_find, physical_spectrum,
    transition_lines, CorrelationAvg, DeltaGrid, PeakSearch, SpectralLine, SpectrumResult,
    Transition, WeightMode,
};
