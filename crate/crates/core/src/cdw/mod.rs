//! Damped driven phase dynamics for sliding charge density waves and shunted
//! Josephson junctions: I-V staircases and fractional plateaus.

pub mod integrate;
pub mod params;
pub mod staircase;

pub use integrate::{integrate_chain, integrate_phase, CdwState, PhaseOptions, PhaseRun};
pub use params::{rcsj_map, ChainCdwParams, JunctionParams, PhaseEomParams};
pub use staircase::{
    chain_iv, default_candidates, detect_plateaus, iv_curve, IvOptions, Plateau, StaircasePoint,
    StaircaseResult,
};
