//! Brute-force numerics on a truncated Fock space, used to cross-check every
//! closed-form result of the crate.

pub mod correlation;
pub mod hamiltonian;
pub mod operators;
pub mod propagator;
pub mod rotation;
pub mod verify;

pub use correlation::{
    correlation_numeric, full_model_spectrum, hse_spectrum, spectrum_numeric, time_average_numeric,
    AverageConfig, AveragedCorrelation, CorrelationSamples, DipoleDynamics, InitialState,
    NumericConfig, NumericSpectrum,
};
pub use hamiltonian::{
    build_full_hamiltonian, build_h_script, build_hse, build_rotated_reference, check_commutator,
    StarkForm,
};
pub use operators::{Basis, CMatrix, OperatorSet};
pub use propagator::Propagator;
pub use rotation::{rotation_operator, verify_rotation_reduction, ReductionReport, GUARD_BAND};
pub use verify::{commutator_residual, verify_eigensystem, verify_evolution, EigenReport, EvolutionReport};
