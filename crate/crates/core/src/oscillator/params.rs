use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Single shaken pendulum:
/// `H = p^2/2 + (omega0^2/2)(1 + delta cos(omega_d t + phase)) q^2 + (kappa/4) q^4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveParams {
    pub omega0: f64,
    pub delta: f64,
    pub omega_d: f64,
    pub kappa: f64,
    #[serde(default)]
    pub phase: f64,
}

impl DriveParams {
    pub fn new(omega0: f64, delta: f64, omega_d: f64, kappa: f64) -> Self {
        Self {
            omega0,
            delta,
            omega_d,
            kappa,
            phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(invalid("omega0", "must be positive"));
        }
        if !(self.omega_d > 0.0 && self.omega_d.is_finite()) {
            return Err(invalid("omega_d", "must be positive"));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(invalid("kappa", "must be non-negative"));
        }
        if !self.delta.is_finite() || !self.phase.is_finite() {
            return Err(invalid("delta", "must be finite"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_d
    }

    /// Instantaneous spring constant `omega0^2 (1 + delta cos(omega_d t + phase))`.
    #[inline]
    pub fn stiffness(&self, t: f64) -> f64 {
        self.omega0 * self.omega0 * (1.0 + self.delta * (self.omega_d * t + self.phase).cos())
    }

    /// Same drive seen backwards in time from `t`: running the returned drive
    /// forward from `t` reproduces `stiffness(2t - s)` at time `s`.
    pub fn reversed_at(&self, t: f64) -> Self {
        Self {
            phase: (-(2.0 * self.omega_d * t + self.phase)).rem_euclid(2.0 * PI),
            ..*self
        }
    }

    /// Ratio `a = (2 omega0)^2 / omega_d^2`; `a = 1` is the 2:1 resonance.
    pub fn resonance_ratio(&self) -> f64 {
        (2.0 * self.omega0 / self.omega_d).powi(2)
    }

    pub fn undriven(&self) -> Self {
        Self {
            delta: 0.0,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

/// Chain of pendula with `-coupling * sum_<ij> (q_i - q_j)^2`.
///
/// The sign follows the Frenkel-Kontorova form as written, so a negative
/// `coupling` is an ordinary elastic spring between neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    pub sites: usize,
    pub coupling: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ChainParams {
    pub fn new(sites: usize, coupling: f64, boundary: Boundary) -> Self {
        Self {
            sites,
            coupling,
            boundary,
        }
    }

    pub fn single() -> Self {
        Self::new(1, 0.0, Boundary::Periodic)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 {
            return Err(invalid("sites", "need at least one site"));
        }
        if !self.coupling.is_finite() {
            return Err(invalid("coupling", "must be finite"));
        }
        Ok(())
    }

    /// Bonds as `(i, j)` pairs; a periodic chain of two sites has two bonds.
    pub fn bonds(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.sites;
        let count = match self.boundary {
            Boundary::Periodic if n > 1 => n,
            _ => n.saturating_sub(1),
        };
        (0..count).map(move |i| (i, (i + 1) % n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathParams {
    pub eta: f64,
    pub temperature: f64,
}

impl BathParams {
    pub fn new(eta: f64, temperature: f64) -> Self {
        Self { eta, temperature }
    }

    pub fn closed() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(invalid("eta", "must be non-negative"));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(invalid("temperature", "must be non-negative"));
        }
        if self.temperature > 0.0 && self.eta == 0.0 {
            return Err(invalid("eta", "a finite temperature needs positive friction"));
        }
        Ok(())
    }
}

/// Positions and momenta of the chain at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl PhaseState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() || q.is_empty() {
            return Err(invalid("state", "q and p must have equal nonzero length"));
        }
        let s = Self { q, p, t: 0.0 };
        if !s.is_finite() {
            return Err(invalid("state", "non-finite entries"));
        }
        Ok(s)
    }

    pub fn uniform(sites: usize, q: f64, p: f64) -> Self {
        Self {
            q: vec![q; sites],
            p: vec![p; sites],
            t: 0.0,
        }
    }

    pub fn sites(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.p).all(|x| x.is_finite()) && self.t.is_finite()
    }

    pub fn negate_momenta(&mut self) {
        self.p.iter_mut().for_each(|p| *p = -*p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bonds_by_boundary() {
        let b: Vec<_> = ChainParams::new(3, 1.0, Boundary::Periodic).bonds().collect();
        assert_eq!(b, vec![(0, 1), (1, 2), (2, 0)]);
        let b: Vec<_> = ChainParams::new(3, 1.0, Boundary::Open).bonds().collect();
        assert_eq!(b, vec![(0, 1), (1, 2)]);
        assert_eq!(ChainParams::single().bonds().count(), 0);
    }

    #[test]
    fn reversed_drive_mirrors_time() {
        let d = DriveParams {
            phase: 0.4,
            ..DriveParams::new(1.0, 0.3, 2.1, 0.1)
        };
        let t = 3.7;
        let r = d.reversed_at(t);
        for s in [0.0, 0.5, 2.0] {
            assert!((r.stiffness(t + s) - d.stiffness(t - s)).abs() < 1e-12);
        }
    }

    #[test]
    fn validation() {
        assert!(DriveParams::new(0.0, 0.1, 2.0, 0.0).validate().is_err());
        assert!(DriveParams::new(1.0, 0.1, 2.0, -1.0).validate().is_err());
        assert!(BathParams::new(0.0, 0.1).validate().is_err());
        assert!(BathParams::new(0.1, 0.1).validate().is_ok());
        assert!(ChainParams::new(0, 0.0, Boundary::Open).validate().is_err());
    }
}
