//! Probabilistic cellular automata on the square lattice: Toom's NEC rule,
//! its period-doubling negation, rotated `Z_m` rules and a Glauber baseline.

pub mod lattice;
pub mod rules;
pub mod run;

pub use lattice::{SpinLattice2D, ZmLattice};
pub use rules::{
    apply_noise, apply_zm_noise, make_rotated_rule, matched_glauber, step_rule, step_stochastic,
    step_zm, GlauberSweeper, NoiseParams, PcaRule,
};
pub use run::{
    memory_lifetime, phase_scan, retains, run_pca, run_zm, scan_cell_dynamics, MemoryLifetime,
    PcaRun, PhaseCell, PhaseMap, ScanModel, ZmRun,
};
