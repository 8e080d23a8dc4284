use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::RandomSource;

/// Damped driven pendulum in units where time is measured in `1/omega0`:
///
/// `theta'' + theta' / omega0_tau + sin(theta) = E(t) / E_T` (inertial), or the
/// overdamped reduction `theta' = omega0_tau (E(t)/E_T - sin(theta))`, with
/// `E(t) = e_dc + e_ac cos(omega_d t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseEomParams {
    pub omega0_tau: f64,
    pub e_threshold: f64,
    pub e_dc: f64,
    #[serde(default)]
    pub e_ac: f64,
    #[serde(default = "default_omega_d")]
    pub omega_d: f64,
    #[serde(default)]
    pub inertial: bool,
}

fn default_omega_d() -> f64 {
    1.0
}

impl PhaseEomParams {
    pub fn overdamped(omega0_tau: f64, e_dc: f64) -> Self {
        Self {
            omega0_tau,
            e_threshold: 1.0,
            e_dc,
            e_ac: 0.0,
            omega_d: 1.0,
            inertial: false,
        }
    }

    pub fn inertial(omega0_tau: f64, e_dc: f64) -> Self {
        Self {
            inertial: true,
            ..Self::overdamped(omega0_tau, e_dc)
        }
    }

    pub fn with_drive(self, e_ac: f64, omega_d: f64) -> Self {
        Self {
            e_ac,
            omega_d,
            ..self
        }
    }

    pub fn with_dc(self, e_dc: f64) -> Self {
        Self { e_dc, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0_tau > 0.0 && self.omega0_tau.is_finite()) {
            return Err(invalid("omega0_tau", "must be positive"));
        }
        if !(self.e_threshold > 0.0 && self.e_threshold.is_finite()) {
            return Err(invalid("e_threshold", "must be positive"));
        }
        if !self.e_dc.is_finite() || !self.e_ac.is_finite() {
            return Err(invalid("e_dc", "bias must be finite"));
        }
        if !(self.omega_d > 0.0 && self.omega_d.is_finite()) {
            return Err(invalid("omega_d", "must be positive"));
        }
        Ok(())
    }

    pub fn is_driven(&self) -> bool {
        self.e_ac != 0.0
    }

    pub fn drive_period(&self) -> f64 {
        2.0 * PI / self.omega_d
    }

    /// Reduced force `E(t) / E_T`.
    #[inline]
    pub fn force(&self, t: f64) -> f64 {
        (self.e_dc + self.e_ac * (self.omega_d * t).cos()) / self.e_threshold
    }

    pub fn damping(&self) -> f64 {
        1.0 / self.omega0_tau
    }

    /// Sliding-state estimate `omega0_tau E_dc / E_T`.
    pub fn sliding_rate(&self) -> f64 {
        self.omega0_tau * self.e_dc / self.e_threshold
    }
}

/// Overdamped ring of phases with elastic coupling and frozen pinning offsets:
/// `theta_i' = omega0_tau (-sin(theta_i + beta_i) + K (theta_{i+1} + theta_{i-1} - 2 theta_i) + E(t)/E_T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainCdwParams {
    pub stiffness: f64,
    pub pinning: Vec<f64>,
}

impl ChainCdwParams {
    pub fn uniform(sites: usize, stiffness: f64) -> Self {
        Self {
            stiffness,
            pinning: vec![0.0; sites],
        }
    }

    /// Pinning phases uniform on `[0, 2 pi)`.
    pub fn random(sites: usize, stiffness: f64, rng: &mut RandomSource) -> Self {
        Self {
            stiffness,
            pinning: (0..sites).map(|_| rng.uniform_in(0.0, 2.0 * PI)).collect(),
        }
    }

    pub fn sites(&self) -> usize {
        self.pinning.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.pinning.is_empty() {
            return Err(invalid("pinning", "chain needs at least one site"));
        }
        if !(self.stiffness >= 0.0 && self.stiffness.is_finite()) {
            return Err(invalid("stiffness", "must be non-negative"));
        }
        if self.pinning.iter().any(|b| !b.is_finite()) {
            return Err(invalid("pinning", "offsets must be finite"));
        }
        Ok(())
    }
}

/// McCumber junction `phi''/omega_p^2 + phi'/omega_c + sin(phi) = I(t)/I_c`
/// with `omega_p = sqrt(2 I_c / C)` and `omega_c = 2 I_c R_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionParams {
    pub critical_current: f64,
    pub normal_resistance: f64,
    pub capacitance: f64,
    pub i_dc: f64,
    #[serde(default)]
    pub i_ac: f64,
    pub omega_d: f64,
}

/// Dimensionless form of a junction.
///
/// With capacitance the time unit is `1/omega_p`, so `omega0_tau = omega_c / omega_p`.
/// Without it the time unit is `1/omega_c` and the overdamped equation has
/// `omega0_tau = 1`. The drive frequency is rescaled by the same unit.
pub fn rcsj_map(j: &JunctionParams) -> Result<PhaseEomParams> {
    let ic = j.critical_current;
    if !(ic > 0.0 && ic.is_finite()) {
        return Err(invalid("critical_current", "must be positive"));
    }
    if !(j.normal_resistance > 0.0 && j.normal_resistance.is_finite()) {
        return Err(invalid("normal_resistance", "must be positive"));
    }
    if !(j.capacitance >= 0.0 && j.capacitance.is_finite()) {
        return Err(invalid("capacitance", "must be non-negative"));
    }
    if !(j.omega_d > 0.0 && j.omega_d.is_finite()) {
        return Err(invalid("omega_d", "must be positive"));
    }
    let omega_c = 2.0 * ic * j.normal_resistance;
    let (omega0_tau, unit, inertial) = if j.capacitance == 0.0 {
        (1.0, omega_c, false)
    } else {
        let omega_p = (2.0 * ic / j.capacitance).sqrt();
        (omega_c / omega_p, omega_p, true)
    };
    let p = PhaseEomParams {
        omega0_tau,
        e_threshold: ic,
        e_dc: j.i_dc,
        e_ac: j.i_ac,
        omega_d: j.omega_d / unit,
        inertial,
    };
    p.validate()?;
    Ok(p)
}
