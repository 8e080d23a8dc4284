//! Driven spin-1/2 chains: state-vector evolution and Floquet spectra.

pub mod diagnostics;
pub mod floquet;
pub mod params;
pub mod spectrum;
pub mod state;

pub use diagnostics::{
    averaged_autocorrelator, echo_benchmark, magnetization_trajectory, return_fidelity,
    variance_peak_scan, windowed_subharmonic, AveragedAutocorrelator, MagnetizationTrajectory,
    VarianceScan,
};
pub use floquet::{
    build_mbl_floquet, build_sycamore_floquet, chain_step, dense_operator, DenseKicked,
    EvolutionPath, FloquetStep, KickedDiagonal, StepOrder, SycamoreFloquet,
};
pub use params::{IonChain, MblDisorder, SpinChainParams, SycamoreDisorder};
pub use spectrum::{
    floquet_spectrum, floquet_spectrum_of, median, wrap_phase, FloquetOperator,
    QuasienergySpectrum,
};
pub use state::{Axis, StateVector};
