//! Classical parametrically driven pendula: Hamiltonian and Langevin chains,
//! Mathieu stability, and lifetime diagnostics.

pub mod analysis;
pub mod chain;
pub mod mathieu;
pub mod params;

pub use analysis::{
    arrhenius_from_lifetimes, arrhenius_scan, domain_wall_extract, envelope_lifetime,
    heating_time, lifetime_at, midpoint_crossing, rotating_frame, stroboscopic_autocorrelation,
    ttsb_autocorrelation, ArrheniusScan, Binarization, DomainWalls, HeatingOptions, HeatingRun,
    HeatingTime, LifetimeSetup, RotatingCoordinate,
};
pub use chain::{
    energy, forces, integrate_chain_hamiltonian, integrate_chain_langevin, period_doubled_orbit,
    undriven_energy, BlowUp, ChainTrajectory, IntegrationOptions, StroboscopicRecord,
};
pub use mathieu::{
    first_tongue_asymptote, instability_onset, mathieu_monodromy, tongue_boundary_scan,
    tongue_edge, GridSpec, Monodromy, StabilityChart,
};
pub use params::{BathParams, Boundary, ChainParams, DriveParams, PhaseState};
