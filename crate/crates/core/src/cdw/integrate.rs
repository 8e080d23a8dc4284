//! Phase integrators: adaptive Dormand-Prince 5(4) for the noiseless equations
//! and fixed-step Euler-Maruyama when a temperature is set.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::params::{ChainCdwParams, PhaseEomParams};
use crate::error::{invalid, precondition, Error, Result};
use crate::rng::RandomSource;

/// Minimum number of drive periods for a driven run.
pub const MIN_DRIVEN_PERIODS: f64 = 200.0;
pub const DEFAULT_SUBSTEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseOptions {
    /// Run length in reduced time units.
    pub t_max: f64,
    /// Steps per drive period: the fixed step of the stochastic scheme and the
    /// step ceiling of the adaptive one.
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
}

fn default_substeps() -> usize {
    DEFAULT_SUBSTEPS
}

fn default_rtol() -> f64 {
    1e-10
}

impl PhaseOptions {
    pub fn new(t_max: f64) -> Self {
        Self {
            t_max,
            substeps: DEFAULT_SUBSTEPS,
            temperature: 0.0,
            rtol: default_rtol(),
        }
    }

    /// Run covering `periods` drive periods of `params`.
    pub fn periods(params: &PhaseEomParams, periods: f64) -> Self {
        Self::new(periods * params.drive_period())
    }

    pub fn with_temperature(self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self
        }
    }

    pub fn with_substeps(self, substeps: usize) -> Self {
        Self { substeps, ..self }
    }

    fn validate(&self, driven: bool, period: f64) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(invalid("t_max", "must be positive"));
        }
        if driven && self.t_max < MIN_DRIVEN_PERIODS * period * (1.0 - 1e-12) {
            return Err(precondition(format!(
                "driven run must cover at least {MIN_DRIVEN_PERIODS} drive periods"
            )));
        }
        if self.substeps < 4 {
            return Err(invalid("substeps", "need at least 4 steps per period"));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(invalid("temperature", "must be non-negative"));
        }
        if !(self.rtol > 0.0 && self.rtol < 1e-2) {
            return Err(invalid("rtol", "must lie in (0, 1e-2)"));
        }
        Ok(())
    }
}

/// Phases, their velocities and the clock. For overdamped models `velocity`
/// is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdwState {
    pub t: f64,
    pub theta: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl CdwState {
    pub fn at_rest(sites: usize, inertial: bool) -> Self {
        Self {
            t: 0.0,
            theta: vec![0.0; sites],
            velocity: if inertial { vec![0.0; sites] } else { Vec::new() },
        }
    }

    /// Removes whole turns common to every phase, leaving the dynamics unchanged.
    pub fn rewound(mut self) -> Self {
        let mean = self.theta.iter().sum::<f64>() / self.theta.len() as f64;
        let turns = (mean / (2.0 * PI)).round() * 2.0 * PI;
        for th in &mut self.theta {
            *th -= turns;
        }
        self
    }

    fn pack(&self) -> Vec<f64> {
        let mut y = self.theta.clone();
        y.extend_from_slice(&self.velocity);
        y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRun {
    /// Sample times, one per drive period from the start.
    pub times: Vec<f64>,
    /// Site-averaged phase at each sample time.
    pub theta: Vec<f64>,
    /// `<theta'>` from the phase advance over the second half of the run.
    pub winding_rate: f64,
    /// Time average of the instantaneous drift over the same window.
    pub mean_velocity: f64,
    pub final_state: CdwState,
}

trait PhaseSystem {
    fn phases(&self) -> usize;
    fn inertial(&self) -> bool;
    fn drift(&self, t: f64, y: &[f64], dy: &mut [f64]);
    /// Standard deviation of the thermal kick per unit sqrt(time).
    fn noise(&self, temperature: f64) -> f64;
}

struct Single<'a>(&'a PhaseEomParams);

impl PhaseSystem for Single<'_> {
    fn phases(&self) -> usize {
        1
    }

    fn inertial(&self) -> bool {
        self.0.inertial
    }

    fn drift(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let p = self.0;
        let f = p.force(t) - y[0].sin();
        if p.inertial {
            dy[0] = y[1];
            dy[1] = f - y[1] / p.omega0_tau;
        } else {
            dy[0] = p.omega0_tau * f;
        }
    }

    fn noise(&self, temperature: f64) -> f64 {
        let p = self.0;
        if p.inertial {
            (2.0 * temperature / p.omega0_tau).sqrt()
        } else {
            (2.0 * p.omega0_tau * temperature).sqrt()
        }
    }
}

struct Ring<'a> {
    drive: &'a PhaseEomParams,
    chain: &'a ChainCdwParams,
}

impl PhaseSystem for Ring<'_> {
    fn phases(&self) -> usize {
        self.chain.sites()
    }

    fn inertial(&self) -> bool {
        false
    }

    fn drift(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = y.len();
        let k = self.chain.stiffness;
        let f = self.drive.force(t);
        let w = self.drive.omega0_tau;
        for i in 0..n {
            let elastic = if n > 1 {
                let left = y[(i + n - 1) % n];
                let right = y[(i + 1) % n];
                k * (left + right - 2.0 * y[i])
            } else {
                0.0
            };
            dy[i] = w * (f - (y[i] + self.chain.pinning[i]).sin() + elastic);
        }
    }

    fn noise(&self, temperature: f64) -> f64 {
        (2.0 * self.drive.omega0_tau * temperature).sqrt()
    }
}

/// Integrates a single phase from `initial` (at rest at `theta = 0` if absent).
///
/// `rng` is required when `opts.temperature > 0`.
pub fn integrate_phase(
    params: &PhaseEomParams,
    opts: &PhaseOptions,
    initial: Option<&CdwState>,
    rng: Option<&mut RandomSource>,
) -> Result<PhaseRun> {
    params.validate()?;
    let start = match initial {
        Some(s) => {
            check_shape(s, 1, params.inertial)?;
            s.clone()
        }
        None => CdwState::at_rest(1, params.inertial),
    };
    run(&Single(params), params, opts, start, rng)
}

/// Integrates the overdamped ring driven by `drive` (whose `inertial` flag is ignored).
pub fn integrate_chain(
    chain: &ChainCdwParams,
    drive: &PhaseEomParams,
    opts: &PhaseOptions,
    initial: Option<&CdwState>,
    rng: Option<&mut RandomSource>,
) -> Result<PhaseRun> {
    chain.validate()?;
    drive.validate()?;
    let start = match initial {
        Some(s) => {
            check_shape(s, chain.sites(), false)?;
            s.clone()
        }
        None => CdwState::at_rest(chain.sites(), false),
    };
    run(&Ring { drive, chain }, drive, opts, start, rng)
}

fn check_shape(s: &CdwState, sites: usize, inertial: bool) -> Result<()> {
    let want_v = if inertial { sites } else { 0 };
    if s.theta.len() != sites || s.velocity.len() != want_v {
        return Err(precondition(format!(
            "initial state has {} phases and {} velocities, expected {sites} and {want_v}",
            s.theta.len(),
            s.velocity.len()
        )));
    }
    if !(s.t.is_finite() && s.theta.iter().chain(&s.velocity).all(|x| x.is_finite())) {
        return Err(Error::NonFinite("initial state".into()));
    }
    Ok(())
}

fn run<S: PhaseSystem>(
    sys: &S,
    params: &PhaseEomParams,
    opts: &PhaseOptions,
    start: CdwState,
    rng: Option<&mut RandomSource>,
) -> Result<PhaseRun> {
    let period = params.drive_period();
    opts.validate(params.is_driven(), period)?;
    let t0 = start.t;
    let t_end = t0 + opts.t_max;
    // Average over a whole number of drive periods when driven.
    let half = opts.t_max / 2.0;
    let window = if params.is_driven() {
        (half / period).floor() * period
    } else {
        half
    };
    let t_window = t_end - window;

    let mut marks: Vec<f64> = Vec::new();
    let mut k = 1usize;
    while t0 + k as f64 * period < t_end * (1.0 - 1e-14) - 1e-14 {
        marks.push(t0 + k as f64 * period);
        k += 1;
    }
    marks.push(t_end);
    marks.push(t_window);
    marks.sort_by(f64::total_cmp);
    marks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * t_end.abs().max(1.0));

    let n = sys.phases();
    let mut y = start.pack();
    let mut times = vec![t0];
    let mut theta = vec![mean(&y[..n])];
    let mut phase_at_window = None;
    let mut drift_integral = 0.0;
    let h_max = period / opts.substeps as f64;

    let mut stepper: Box<dyn FnMut(&mut [f64], f64, f64, &mut f64) -> Result<()> + '_> =
        if opts.temperature > 0.0 {
            let rng = rng.ok_or_else(|| precondition("a random source is required when temperature > 0"))?;
            let sigma = sys.noise(opts.temperature);
            Box::new(move |y, ta, tb, acc| euler_maruyama(sys, y, ta, tb, h_max, sigma, rng, acc))
        } else {
            let mut h = h_max;
            Box::new(move |y, ta, tb, acc| dopri(sys, y, ta, tb, h_max, &mut h, opts.rtol, acc))
        };

    let tol = 1e-12 * t_end.abs().max(1.0);
    let on_period = |m: f64| {
        let k = ((m - t0) / period).round();
        (t0 + k * period - m).abs() <= tol
    };
    let mut t = t0;
    for &mark in &marks {
        let mut acc = 0.0;
        stepper(&mut y, t, mark, &mut acc)?;
        if t >= t_window - tol {
            drift_integral += acc;
        }
        t = mark;
        if (mark - t_window).abs() <= tol {
            phase_at_window = Some(y[..n].to_vec());
        }
        if on_period(mark) || mark == t_end {
            times.push(mark);
            theta.push(mean(&y[..n]));
        }
    }
    let at_window = phase_at_window.expect("window start is a mark");
    let advance = y[..n].iter().zip(&at_window).map(|(a, b)| a - b).sum::<f64>() / n as f64;

    let final_state = CdwState {
        t: t_end,
        theta: y[..n].to_vec(),
        velocity: if sys.inertial() { y[n..].to_vec() } else { Vec::new() },
    };
    Ok(PhaseRun {
        times,
        theta,
        winding_rate: advance / window,
        mean_velocity: drift_integral / window,
        final_state,
    })
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Site-averaged phase velocity; for the inertial model this is the state's
/// velocity component.
fn phase_velocity<S: PhaseSystem>(sys: &S, y: &[f64], dy: &[f64]) -> f64 {
    let n = sys.phases();
    if sys.inertial() {
        mean(&y[n..])
    } else {
        mean(&dy[..n])
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand-Prince from `ta` to exactly `tb`. Adds the trapezoid
/// integral of the phase velocity to `acc`.
#[allow(clippy::too_many_arguments)]
fn dopri<S: PhaseSystem>(
    sys: &S,
    y: &mut [f64],
    ta: f64,
    tb: f64,
    h_max: f64,
    h: &mut f64,
    rtol: f64,
    acc: &mut f64,
) -> Result<()> {
    let d = y.len();
    let atol = rtol * 1e-2;
    let mut k = vec![vec![0.0; d]; 7];
    let mut tmp = vec![0.0; d];
    let mut y5 = vec![0.0; d];
    let mut t = ta;
    sys.drift(t, y, &mut k[0]);
    let mut rejects = 0usize;
    while t < tb {
        let mut step = h.min(h_max);
        let last = t + step >= tb;
        if last {
            step = tb - t;
        }
        let stages: [(f64, &[f64]); 5] = [
            (C2, &[A21]),
            (C3, &[A31, A32]),
            (C4, &[A41, A42, A43]),
            (C5, &[A51, A52, A53, A54]),
            (1.0, &[A61, A62, A63, A64, A65]),
        ];
        for (s, (c, a)) in stages.iter().enumerate() {
            for i in 0..d {
                let mut incr = 0.0;
                for (j, aj) in a.iter().enumerate() {
                    incr += aj * k[j][i];
                }
                tmp[i] = y[i] + step * incr;
            }
            let (_, tail) = k.split_at_mut(s + 1);
            sys.drift(t + c * step, &tmp, &mut tail[0]);
        }
        for i in 0..d {
            y5[i] = y[i]
                + step * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        sys.drift(t + step, &y5, &mut k[6]);
        let mut err = 0.0f64;
        for i in 0..d {
            let e = step
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let scale = atol + rtol * y[i].abs().max(y5[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() || y5.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("phase diverged near t = {t:.6}")));
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            *acc += 0.5 * step * (phase_velocity(sys, y, &k[0]) + phase_velocity(sys, &y5, &k[6]));
            y.copy_from_slice(&y5);
            k.swap(0, 6);
            t = if last { tb } else { t + step };
            if !last {
                *h = step * factor;
            }
            rejects = 0;
        } else {
            *h = step * factor.min(1.0);
            rejects += 1;
            if rejects > 60 || *h < 1e-14 * tb.abs().max(1.0) {
                return Err(Error::NonFinite(format!("step size underflow near t = {t:.6}")));
            }
        }
    }
    Ok(())
}

/// Fixed-step Euler-Maruyama from `ta` to `tb`; the inertial model updates the
/// velocity first and moves the phase with the new velocity.
#[allow(clippy::too_many_arguments)]
fn euler_maruyama<S: PhaseSystem>(
    sys: &S,
    y: &mut [f64],
    ta: f64,
    tb: f64,
    h_max: f64,
    sigma: f64,
    rng: &mut RandomSource,
    acc: &mut f64,
) -> Result<()> {
    let d = y.len();
    let n = sys.phases();
    let steps = ((tb - ta) / h_max).ceil().max(1.0) as usize;
    let dt = (tb - ta) / steps as f64;
    let kick = sigma * dt.sqrt();
    let mut dy = vec![0.0; d];
    for s in 0..steps {
        let t = ta + s as f64 * dt;
        sys.drift(t, y, &mut dy);
        if sys.inertial() {
            for i in 0..n {
                y[n + i] += dy[n + i] * dt + kick * rng.normal();
                y[i] += y[n + i] * dt;
            }
            *acc += mean(&y[n..]) * dt;
        } else {
            *acc += mean(&dy[..n]) * dt;
            for v in y.iter_mut() {
                *v += kick * rng.normal();
            }
            for i in 0..n {
                y[i] += dy[i] * dt;
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("phase diverged near t = {t:.6}")));
        }
    }
    Ok(())
}
