//! Simulation kernels for periodically driven many-body systems that break
//! discrete time-translation symmetry.

pub mod cdw;
pub mod ensemble;
pub mod error;
pub mod fit;
pub mod oscillator;
pub mod pca;
pub mod quantum;
pub mod rng;
pub mod series;
pub mod spectral;

pub use ensemble::{aggregate, ensemble_run, run_replicas, EnsembleResult, Experiment, Observables, Replica};
pub use error::{Error, Result};
pub use fit::{arrhenius_fit, fit_exponential_decay, fit_exponential_decay_in, FitResult, FitWindow, Lifetime};
pub use rng::RandomSource;
pub use series::StroboscopicSeries;
pub use spectral::{amplitude_at, dft_subharmonic, per_series_subharmonic, SpectralSummary};
