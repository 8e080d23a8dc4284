//! Stroboscopic Fourier analysis.
//!
//! Amplitudes are `|X_k| = |(1/N) sum_n x_n e^{-2 pi i k n / N}|` at `nu = k/N`
//! (in units of the drive frequency). With this normalization a pure
//! `(-1)^n` signal has amplitude exactly 1 at `nu = 1/2`, a constant signal
//! has amplitude 1 at `nu = 0`, and `sum_k |X_k|^2` equals the mean square of
//! the signal.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::series::StroboscopicSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// `nu_k = k/N` for `k = 0..N`.
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Subharmonic order the summary was requested for.
    pub order: usize,
    /// Amplitude evaluated exactly at `nu = 1/order`.
    pub subharmonic: f64,
}

impl SpectralSummary {
    /// Amplitude at the bin nearest to `nu` (taken modulo 1).
    pub fn peak_at(&self, nu: f64) -> f64 {
        let n = self.amplitudes.len();
        let nu = nu.rem_euclid(1.0);
        let k = (nu * n as f64).round() as usize % n;
        self.amplitudes[k]
    }

    pub fn total_power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    /// Bin in `(0, 1/2]` with the largest amplitude. Real input has a
    /// mirror-symmetric spectrum, so the upper half carries no extra peaks.
    pub fn dominant_frequency(&self) -> Option<f64> {
        let half = self.amplitudes.len() / 2;
        self.amplitudes
            .iter()
            .enumerate()
            .take(half + 1)
            .skip(1)
            .rev()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| self.frequencies[k])
    }
}

pub fn dft_subharmonic(series: &StroboscopicSeries, m: usize) -> Result<SpectralSummary> {
    if m == 0 {
        return Err(precondition("subharmonic order must be positive"));
    }
    let n = series.len();
    if n < 2 * m {
        return Err(precondition(format!(
            "series of length {n} too short for order {m} (need at least {})",
            2 * m
        )));
    }
    let mut buf: Vec<Complex64> = series
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let amplitudes = buf.iter().map(|z| z.norm() * scale).collect();
    let frequencies = (0..n).map(|k| k as f64 / n as f64).collect();
    Ok(SpectralSummary {
        frequencies,
        amplitudes,
        order: m,
        subharmonic: amplitude_at(series.values(), 1.0 / m as f64),
    })
}

/// Normalized amplitude `|(1/N) sum_n x_n e^{-2 pi i nu n}|` at an arbitrary `nu`.
pub fn amplitude_at(values: &[f64], nu: f64) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    // exact phases for the common rational cases keep period-2 sums exact
    let (mut re, mut im) = (0.0, 0.0);
    if (nu - 0.5).abs() < 1e-15 {
        for (k, v) in values.iter().enumerate() {
            re += if k % 2 == 0 { *v } else { -*v };
        }
    } else if nu.abs() < 1e-15 {
        re = values.iter().sum();
    } else {
        for (k, v) in values.iter().enumerate() {
            let phase = -2.0 * PI * nu * k as f64;
            re += v * phase.cos();
            im += v * phase.sin();
        }
    }
    (re * re + im * im).sqrt() / n as f64
}

/// Subharmonic amplitude of each series separately.
pub fn per_series_subharmonic(series: &[StroboscopicSeries], m: usize) -> Result<Vec<f64>> {
    series
        .iter()
        .map(|s| dft_subharmonic(s, m).map(|x| x.subharmonic))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: Vec<f64>) -> StroboscopicSeries {
        StroboscopicSeries::unit(v, "x").unwrap()
    }

    #[test]
    fn constant_signal() {
        let s = dft_subharmonic(&series(vec![1.0; 64]), 2).unwrap();
        assert!(s.subharmonic.abs() < 1e-15);
        assert!((s.peak_at(0.0) - 1.0).abs() < 1e-12);
        assert!(s.peak_at(0.5).abs() < 1e-12);
    }

    #[test]
    fn alternating_signal() {
        let v = (0..64).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = dft_subharmonic(&series(v), 2).unwrap();
        assert!((s.subharmonic - 1.0).abs() < 1e-15);
        assert!((s.peak_at(0.5) - 1.0).abs() < 1e-12);
        assert_eq!(s.dominant_frequency(), Some(0.5));
    }

    #[test]
    fn too_short_is_rejected() {
        assert!(dft_subharmonic(&series(vec![1.0, 2.0, 3.0]), 2).is_err());
        assert!(dft_subharmonic(&series(vec![1.0, 2.0, 3.0]), 0).is_err());
    }

    #[test]
    fn peak_at_wraps() {
        let v = (0..8).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = dft_subharmonic(&series(v), 2).unwrap();
        assert_eq!(s.peak_at(1.5), s.peak_at(0.5));
    }
}
