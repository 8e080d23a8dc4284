//! Stroboscopic observables, echoes and the subharmonic variance scan.

use serde::Serialize;

use super::floquet::{build_mbl_floquet, EvolutionPath, FloquetStep};
use super::params::MblDisorder;
use super::state::{Axis, StateVector};
use crate::ensemble::run_replicas;
use crate::error::{invalid, precondition, Error, Result};
use crate::rng::RandomSource;
use crate::series::StroboscopicSeries;
use crate::spectral::amplitude_at;

/// Per-site expectations and the normalized autocorrelator `M(n)`.
#[derive(Debug, Clone)]
pub struct MagnetizationTrajectory {
    pub axis: Axis,
    /// `<sigma^a_i(nT)>` for each site, `n = 0..=n_periods`.
    pub per_site: Vec<StroboscopicSeries>,
    /// `(1/L) sum_i <sigma^a_i(nT)> <sigma^a_i(0)>`.
    pub autocorrelator: StroboscopicSeries,
}

impl MagnetizationTrajectory {
    /// `<sigma^a_i(nT)> <sigma^a_i(0)>` for one site.
    pub fn site_correlator(&self, site: usize) -> Vec<f64> {
        let v = self.per_site[site].values();
        v.iter().map(|x| x * v[0]).collect()
    }

    /// Subharmonic amplitude of each site correlator.
    pub fn site_subharmonics(&self) -> Vec<f64> {
        (0..self.per_site.len())
            .map(|i| amplitude_at(&self.site_correlator(i), 0.5))
            .collect()
    }
}

pub fn magnetization_trajectory(
    step: &dyn FloquetStep,
    initial: &StateVector,
    n_periods: usize,
    axis: Axis,
) -> Result<MagnetizationTrajectory> {
    if n_periods == 0 {
        return Err(precondition("n_periods must be at least 1"));
    }
    if initial.sites() != step.sites() {
        return Err(invalid("initial", "state size does not match the propagator"));
    }
    let l = step.sites();
    let mut state = initial.clone();
    let mut profiles = Vec::with_capacity(n_periods + 1);
    profiles.push(state.magnetization_profile(axis));
    for n in 0..n_periods {
        step.apply(&mut state);
        let p = state.magnetization_profile(axis);
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("magnetization at period {}", n + 1)));
        }
        profiles.push(p);
    }
    let label = |i: usize| format!("sigma_{axis:?}_{i}").to_lowercase();
    let per_site = (0..l)
        .map(|i| {
            StroboscopicSeries::new(profiles.iter().map(|p| p[i]).collect(), step.period(), label(i))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = profiles
        .iter()
        .map(|p| (0..l).map(|i| p[i] * profiles[0][i]).sum::<f64>() / l as f64)
        .collect();
    Ok(MagnetizationTrajectory {
        axis,
        per_site,
        autocorrelator: StroboscopicSeries::new(m, step.period(), "autocorrelator")?,
    })
}

/// `|<initial| U^-n U^n |initial>|^2`.
pub fn echo_benchmark(step: &dyn FloquetStep, initial: &StateVector, n_periods: usize) -> f64 {
    let mut s = initial.clone();
    for _ in 0..n_periods {
        step.apply(&mut s);
    }
    for _ in 0..n_periods {
        step.apply_inverse(&mut s);
    }
    initial.inner(&s).norm_sqr().min(1.0)
}

/// `|<initial| U^n |initial>|^2` without the reversal.
pub fn return_fidelity(step: &dyn FloquetStep, initial: &StateVector, n_periods: usize) -> f64 {
    let mut s = initial.clone();
    for _ in 0..n_periods {
        step.apply(&mut s);
    }
    initial.inner(&s).norm_sqr().min(1.0)
}

/// Disorder average of the `sigma^z` autocorrelator.
#[derive(Debug, Clone)]
pub struct AveragedAutocorrelator {
    pub seeds: Vec<u64>,
    pub per_realization: Vec<StroboscopicSeries>,
    pub mean: StroboscopicSeries,
}

/// Builds one propagator and initial state per seed and averages `M(n)`.
pub fn averaged_autocorrelator<F>(
    seeds: &[u64],
    n_periods: usize,
    workers: usize,
    make: F,
) -> Result<AveragedAutocorrelator>
where
    F: Fn(&mut RandomSource) -> Result<(Box<dyn FloquetStep>, StateVector)> + Sync,
{
    if seeds.is_empty() {
        return Err(precondition("need at least one realization"));
    }
    let run = |rng: &mut RandomSource| -> Result<StroboscopicSeries> {
        let (step, init) = make(rng)?;
        Ok(magnetization_trajectory(step.as_ref(), &init, n_periods, Axis::Z)?.autocorrelator)
    };
    let replicas = run_replicas(&run, seeds, workers)?;
    let mut out_seeds = Vec::with_capacity(replicas.len());
    let mut per = Vec::with_capacity(replicas.len());
    for r in replicas {
        out_seeds.push(r.seed);
        per.push(r.result?);
    }
    let len = per[0].len();
    let mean: Vec<f64> = (0..len)
        .map(|n| per.iter().map(|s| s.values()[n]).sum::<f64>() / per.len() as f64)
        .collect();
    let period = per[0].period();
    Ok(AveragedAutocorrelator {
        seeds: out_seeds,
        per_realization: per,
        mean: StroboscopicSeries::new(mean, period, "mean_autocorrelator")?,
    })
}

/// Subharmonic amplitude over the `window` samples ending at period `n`.
pub fn windowed_subharmonic(series: &StroboscopicSeries, n: usize, window: usize) -> Result<f64> {
    if n >= series.len() || window == 0 || window > n + 1 {
        return Err(precondition("window does not fit inside the series"));
    }
    Ok(amplitude_at(&series.values()[n + 1 - window..=n], 0.5))
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceScan {
    pub epsilons: Vec<f64>,
    pub variances: Vec<f64>,
    pub mean_amplitudes: Vec<f64>,
    pub argmax_epsilon: f64,
}

/// Variance of per-site `nu = 1/2` amplitudes across sites and realizations.
///
/// Realization `r` uses seed `seeds[r]` at every grid point, so disorder and
/// the random initial bit-string are shared along the scan.
pub fn variance_peak_scan(
    grid: &[f64],
    template: &MblDisorder,
    seeds: &[u64],
    n_periods: usize,
    workers: usize,
) -> Result<VarianceScan> {
    if grid.is_empty() {
        return Err(precondition("epsilon grid is empty"));
    }
    if seeds.is_empty() {
        return Err(precondition("need at least one realization"));
    }
    let mut variances = Vec::with_capacity(grid.len());
    let mut means = Vec::with_capacity(grid.len());
    for &eps in grid {
        let disorder = MblDisorder {
            epsilon: eps,
            ..template.clone()
        };
        let run = |rng: &mut RandomSource| -> Result<Vec<f64>> {
            let step = build_mbl_floquet(&disorder, EvolutionPath::Auto, rng)?;
            let init = StateVector::random_bitstring(disorder.sites, rng);
            Ok(magnetization_trajectory(step.as_ref(), &init, n_periods, Axis::Z)?.site_subharmonics())
        };
        let mut amps = Vec::new();
        for r in run_replicas(&run, seeds, workers)? {
            amps.extend(r.result?);
        }
        let n = amps.len() as f64;
        let mean = amps.iter().sum::<f64>() / n;
        let var = amps.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
        variances.push(var);
        means.push(mean);
    }
    let best = variances
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > variances[b] { i } else { b });
    Ok(VarianceScan {
        epsilons: grid.to_vec(),
        variances,
        mean_amplitudes: means,
        argmax_epsilon: grid[best],
    })
}
