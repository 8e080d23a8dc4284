//! Log-space least-squares fits for lifetimes and activation barriers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::series::StroboscopicSeries;

/// A decay time that may not exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Lifetime {
    Finite(f64),
    /// Fitted decay rate was zero or negative.
    Divergent,
}

impl Lifetime {
    pub fn finite(self) -> Option<f64> {
        match self {
            Lifetime::Finite(t) => Some(t),
            Lifetime::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, Lifetime::Divergent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: BTreeMap<String, f64>,
    /// Root-mean-square residual in the fitted (log) space.
    pub residual: f64,
    pub r_squared: f64,
    /// Set when the fitted decay rate is non-positive; `tau` is then absent.
    pub divergent: bool,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn lifetime(&self) -> Lifetime {
        match (self.divergent, self.param("tau")) {
            (false, Some(t)) => Lifetime::Finite(t),
            _ => Lifetime::Divergent,
        }
    }
}

/// Samples `[start, end)` used by a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitWindow {
    pub start: usize,
    pub end: usize,
}

impl FitWindow {
    /// Skips the first 10% of samples as transient.
    pub fn default_for(len: usize) -> Self {
        Self {
            start: len / 10,
            end: len,
        }
    }

    pub fn all(len: usize) -> Self {
        Self { start: 0, end: len }
    }
}

struct Line {
    slope: f64,
    intercept: f64,
    rms: f64,
    r_squared: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Line {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let scale = ys.iter().map(|y| y * y).sum::<f64>().max(1.0);
    let r_squared = if syy <= 1e-24 * scale {
        if ss_res <= 1e-24 * scale {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Line {
        slope,
        intercept,
        rms: (ss_res / n).sqrt(),
        r_squared,
    }
}

/// Fit `values[n] = A exp(-n / tau)` over the default window.
pub fn fit_exponential_decay(envelope: &StroboscopicSeries) -> Result<FitResult> {
    fit_exponential_decay_in(envelope, FitWindow::default_for(envelope.len()))
}

/// Fit `values[n] = A exp(-n / tau)` for `n` in `window`; `tau` is in periods.
pub fn fit_exponential_decay_in(
    envelope: &StroboscopicSeries,
    window: FitWindow,
) -> Result<FitResult> {
    let values = envelope.values();
    if window.start >= window.end || window.end > values.len() {
        return Err(precondition(format!(
            "fit window {}..{} invalid for {} samples",
            window.start,
            window.end,
            values.len()
        )));
    }
    let slice = &values[window.start..window.end];
    if slice.len() < 4 {
        return Err(precondition("exponential fit needs at least 4 samples"));
    }
    if let Some(i) = slice.iter().position(|&v| v <= 0.0) {
        return Err(precondition(format!(
            "sample {} is not strictly positive",
            window.start + i
        )));
    }
    let xs: Vec<f64> = (window.start..window.end).map(|n| n as f64).collect();
    let ys: Vec<f64> = slice.iter().map(|v| v.ln()).collect();
    let line = least_squares(&xs, &ys);
    let rate = -line.slope;
    let mut params = BTreeMap::new();
    params.insert("rate".to_string(), rate);
    params.insert("amplitude".to_string(), line.intercept.exp());
    // relative threshold separates a flat envelope from a genuinely slow decay
    let divergent = rate <= 1e-12;
    if !divergent {
        params.insert("tau".to_string(), 1.0 / rate);
    }
    Ok(FitResult {
        params,
        residual: line.rms,
        r_squared: line.r_squared,
        divergent,
    })
}

/// Fit `ln tau = ln A + delta / T` to `(temperature, lifetime)` points.
pub fn arrhenius_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(precondition(format!(
            "Arrhenius fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some((t, tau)) = points.iter().find(|(t, tau)| !(*t > 0.0 && *tau > 0.0)) {
        return Err(precondition(format!(
            "point (T={t}, tau={tau}) must have positive temperature and lifetime"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|(t, _)| 1.0 / t).collect();
    let ys: Vec<f64> = points.iter().map(|(_, tau)| tau.ln()).collect();
    let line = least_squares(&xs, &ys);
    let mut params = BTreeMap::new();
    params.insert("delta".to_string(), line.slope);
    params.insert("prefactor".to_string(), line.intercept.exp());
    Ok(FitResult {
        params,
        residual: line.rms,
        r_squared: line.r_squared,
        divergent: false,
    })
}
