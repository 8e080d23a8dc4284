//! Seeded replica execution with an order-independent reduction.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// One unit of stochastic work, run once per seed.
pub trait Experiment: Sync {
    type Output: Send;

    fn run(&self, rng: &mut RandomSource) -> Self::Output;
}

impl<F, R> Experiment for F
where
    F: Fn(&mut RandomSource) -> R + Sync,
    R: Send,
{
    type Output = R;

    fn run(&self, rng: &mut RandomSource) -> R {
        self(rng)
    }
}

/// Scalars extracted from a replica result for averaging.
pub trait Observables {
    fn observables(&self) -> Vec<f64>;
}

impl Observables for f64 {
    fn observables(&self) -> Vec<f64> {
        vec![*self]
    }
}

impl Observables for bool {
    fn observables(&self) -> Vec<f64> {
        vec![if *self { 1.0 } else { 0.0 }]
    }
}

impl Observables for Vec<f64> {
    fn observables(&self) -> Vec<f64> {
        self.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replica<R> {
    pub seed: u64,
    pub result: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult<R> {
    /// Sorted by ascending seed.
    pub replicas: Vec<Replica<R>>,
    pub mean: Vec<f64>,
    /// Standard error of the mean (sample standard deviation / sqrt(n)).
    pub std_error: Vec<f64>,
}

/// Run `experiment` once per seed with `RandomSource::from_seed(seed)`.
///
/// `workers` only sets the thread count; results and the aggregate are
/// reduced sequentially in ascending seed order and are bit-identical for
/// every worker count.
pub fn ensemble_run<E>(
    experiment: &E,
    seeds: &[u64],
    workers: usize,
) -> Result<EnsembleResult<E::Output>>
where
    E: Experiment,
    E::Output: Observables,
{
    let replicas = run_replicas(experiment, seeds, workers)?;
    let (mean, std_error) = aggregate(replicas.iter().map(|r| r.result.observables()));
    Ok(EnsembleResult {
        replicas,
        mean,
        std_error,
    })
}

/// Replica execution without aggregation, for outputs that are not scalar.
pub fn run_replicas<E: Experiment>(
    experiment: &E,
    seeds: &[u64],
    workers: usize,
) -> Result<Vec<Replica<E::Output>>> {
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    let mut seen = BTreeSet::new();
    for &s in &sorted {
        if !seen.insert(s) {
            return Err(Error::DuplicateSeed(s));
        }
    }
    let job = |&seed: &u64| Replica {
        seed,
        result: experiment.run(&mut RandomSource::from_seed(seed)),
    };
    if workers <= 1 {
        return Ok(sorted.iter().map(job).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    // indexed collect keeps seed order
    Ok(pool.install(|| sorted.par_iter().map(job).collect()))
}

/// Column-wise mean and standard error, reduced in iteration order.
pub fn aggregate(rows: impl Iterator<Item = Vec<f64>>) -> (Vec<f64>, Vec<f64>) {
    let rows: Vec<Vec<f64>> = rows.collect();
    let Some(width) = rows.iter().map(|r| r.len()).min() else {
        return (Vec::new(), Vec::new());
    };
    let n = rows.len() as f64;
    let mut mean = vec![0.0; width];
    for r in &rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; width];
    for r in &rows {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std_error = var
        .into_iter()
        .map(|s| {
            if rows.len() > 1 {
                (s / (n - 1.0)).sqrt() / n.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    (mean, std_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_experiment_has_zero_error() {
        let exp = |_: &mut RandomSource| 3.5_f64;
        let out = ensemble_run(&exp, &[5, 1, 9], 1).unwrap();
        assert_eq!(out.replicas.len(), 3);
        assert_eq!(
            out.replicas.iter().map(|r| r.seed).collect::<Vec<_>>(),
            vec![1, 5, 9]
        );
        assert_eq!(out.mean, vec![3.5]);
        assert_eq!(out.std_error, vec![0.0]);
    }

    #[test]
    fn duplicate_seeds_rejected() {
        let exp = |_: &mut RandomSource| 0.0_f64;
        assert_eq!(
            ensemble_run(&exp, &[1, 2, 1], 1).unwrap_err(),
            Error::DuplicateSeed(1)
        );
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let exp = |rng: &mut RandomSource| (0..100).map(|_| rng.normal()).sum::<f64>();
        let seeds: Vec<u64> = (0..16).rev().collect();
        let a = ensemble_run(&exp, &seeds, 1).unwrap();
        let b = ensemble_run(&exp, &seeds, 4).unwrap();
        assert_eq!(a.mean[0].to_bits(), b.mean[0].to_bits());
        assert_eq!(a.std_error[0].to_bits(), b.std_error[0].to_bits());
        for (x, y) in a.replicas.iter().zip(&b.replicas) {
            assert_eq!(x.result.to_bits(), y.result.to_bits());
        }
    }

    #[test]
    fn bernoulli_mean_within_three_sigma() {
        let exp = |rng: &mut RandomSource| rng.bernoulli(0.5);
        let seeds: Vec<u64> = (100..150).collect();
        let out = ensemble_run(&exp, &seeds, 2).unwrap();
        // binomial oracle: sigma of the mean of 50 fair coins
        let sigma = (0.25_f64 / 50.0).sqrt();
        assert!((out.mean[0] - 0.5).abs() < 3.0 * sigma, "mean {}", out.mean[0]);
    }
}
