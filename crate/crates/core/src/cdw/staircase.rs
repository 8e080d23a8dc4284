use serde::{Deserialize, Serialize};

use super::integrate::{integrate_chain, integrate_phase, CdwState, PhaseOptions, PhaseRun};
use super::params::{ChainCdwParams, PhaseEomParams};
use crate::error::{invalid, precondition, Result};
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IvOptions {
    /// Drive periods integrated at each grid point.
    #[serde(default = "default_periods")]
    pub periods: f64,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default)]
    pub temperature: f64,
    /// Lock tolerance in units of `omega_d`.
    #[serde(default = "default_lock")]
    pub lock_tolerance: f64,
    /// Largest plateau denominator searched for.
    #[serde(default = "default_max_q")]
    pub max_denominator: u32,
    /// Start each grid point from the previous point's final state.
    #[serde(default = "default_warm")]
    pub warm_start: bool,
}

fn default_periods() -> f64 {
    200.0
}
fn default_substeps() -> usize {
    super::integrate::DEFAULT_SUBSTEPS
}
fn default_lock() -> f64 {
    1e-3
}
fn default_max_q() -> u32 {
    4
}
fn default_warm() -> bool {
    true
}

impl Default for IvOptions {
    fn default() -> Self {
        Self {
            periods: default_periods(),
            substeps: default_substeps(),
            temperature: 0.0,
            lock_tolerance: default_lock(),
            max_denominator: default_max_q(),
            warm_start: true,
        }
    }
}

impl IvOptions {
    pub fn with_temperature(self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self
        }
    }

    pub fn with_periods(self, periods: f64) -> Self {
        Self { periods, ..self }
    }

    pub fn cold(self) -> Self {
        Self {
            warm_start: false,
            ..self
        }
    }

    fn phase_options(&self, drive: &PhaseEomParams) -> PhaseOptions {
        PhaseOptions::periods(drive, self.periods)
            .with_substeps(self.substeps)
            .with_temperature(self.temperature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaircasePoint {
    pub e_dc: f64,
    pub winding_rate: f64,
    /// Centered-difference `d<theta'>/dE_dc`.
    pub slope: f64,
}

impl StaircasePoint {
    /// Differential resistance `dE_dc/d<theta'>`; infinite on a flat step.
    pub fn dv_di(&self) -> f64 {
        1.0 / self.slope
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub p: i64,
    pub q: u32,
    pub start: f64,
    pub end: f64,
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseResult {
    pub omega_d: f64,
    pub points: Vec<StaircasePoint>,
    pub plateaus: Vec<Plateau>,
}

impl StaircaseResult {
    /// Builds the staircase and its centered-difference slopes from raw rates.
    pub fn from_rates(omega_d: f64, e_dc: &[f64], rates: &[f64]) -> Self {
        let n = e_dc.len();
        let points = (0..n)
            .map(|i| {
                let (a, b) = match (i.checked_sub(1), (i + 1 < n).then_some(i + 1)) {
                    (Some(a), Some(b)) => (a, b),
                    (None, Some(b)) => (i, b),
                    (Some(a), None) => (a, i),
                    (None, None) => (i, i),
                };
                let slope = if a == b {
                    0.0
                } else {
                    (rates[b] - rates[a]) / (e_dc[b] - e_dc[a])
                };
                StaircasePoint {
                    e_dc: e_dc[i],
                    winding_rate: rates[i],
                    slope,
                }
            })
            .collect();
        Self {
            omega_d,
            points,
            plateaus: Vec::new(),
        }
    }

    pub fn grid_spacing(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].e_dc - w[0].e_dc).abs())
            .fold(0.0, f64::max)
    }

    pub fn plateau(&self, p: i64, q: u32) -> Option<&Plateau> {
        self.plateaus.iter().find(|pl| pl.p == p && pl.q == q)
    }

    /// Width of the `p/q` plateau, zero if absent.
    pub fn width(&self, p: i64, q: u32) -> f64 {
        self.plateau(p, q).map_or(0.0, |pl| pl.width)
    }

    /// Fills `plateaus` with every `p/q` (`q <= max_q`) inside the observed
    /// rate range; `lock_tolerance` is in units of `omega_d`.
    pub fn detect(&mut self, lock_tolerance: f64, max_q: u32) {
        let (lo, hi) = self
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                (a.min(p.winding_rate), b.max(p.winding_rate))
            });
        let w = self.omega_d;
        let candidates = default_candidates(lo / w - 1e-9, hi / w + 1e-9, max_q);
        self.plateaus = detect_plateaus(self, &candidates, lock_tolerance * w);
    }

    pub fn rates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.winding_rate).collect()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Reduced fractions `p/q` with `q <= max_q`, `p != 0` and `p/q` inside
/// `[lo, hi]`, ordered by value.
pub fn default_candidates(lo: f64, hi: f64, max_q: u32) -> Vec<(i64, u32)> {
    let mut out = Vec::new();
    for q in 1..=max_q.max(1) {
        let qf = q as f64;
        let p_lo = (lo * qf).floor() as i64;
        let p_hi = (hi * qf).ceil() as i64;
        for p in p_lo..=p_hi {
            let x = p as f64 / qf;
            if p != 0 && gcd(p, q as i64) == 1 && x >= lo && x <= hi {
                out.push((p, q));
            }
        }
    }
    out.sort_by(|a, b| (a.0 as f64 / a.1 as f64).total_cmp(&(b.0 as f64 / b.1 as f64)));
    out
}

/// For each candidate, the longest contiguous run of grid points with
/// `|<theta'> - (p/q) omega_d| < tolerance`. Runs of a single point have zero
/// width and are dropped.
pub fn detect_plateaus(
    staircase: &StaircaseResult,
    candidates: &[(i64, u32)],
    tolerance: f64,
) -> Vec<Plateau> {
    let pts = &staircase.points;
    let mut out = Vec::new();
    for &(p, q) in candidates {
        let target = p as f64 / q as f64 * staircase.omega_d;
        let mut best: Option<(usize, usize)> = None;
        let mut i = 0;
        while i < pts.len() {
            if (pts[i].winding_rate - target).abs() < tolerance {
                let mut j = i;
                while j + 1 < pts.len() && (pts[j + 1].winding_rate - target).abs() < tolerance {
                    j += 1;
                }
                let len = (pts[j].e_dc - pts[i].e_dc).abs();
                if best.is_none_or(|(a, b)| len > (pts[b].e_dc - pts[a].e_dc).abs()) {
                    best = Some((i, j));
                }
                i = j + 1;
            } else {
                i += 1;
            }
        }
        if let Some((a, b)) = best {
            let (start, end) = (pts[a].e_dc.min(pts[b].e_dc), pts[a].e_dc.max(pts[b].e_dc));
            if end > start {
                out.push(Plateau {
                    p,
                    q,
                    start,
                    end,
                    center: 0.5 * (start + end),
                    width: end - start,
                });
            }
        }
    }
    out
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(invalid("e_dc grid", "needs at least two points"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(invalid("e_dc grid", "must be finite"));
    }
    let up = grid.windows(2).all(|w| w[1] > w[0]);
    let down = grid.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(precondition("E_dc grid must be strictly monotone"));
    }
    Ok(())
}

fn sweep(
    grid: &[f64],
    drive: &PhaseEomParams,
    opts: &IvOptions,
    mut rng: Option<&mut RandomSource>,
    mut step: impl FnMut(&PhaseEomParams, &PhaseOptions, Option<&CdwState>, Option<&mut RandomSource>) -> Result<PhaseRun>,
) -> Result<StaircaseResult> {
    check_grid(grid)?;
    if !(opts.lock_tolerance > 0.0) {
        return Err(invalid("lock_tolerance", "must be positive"));
    }
    let mut rates = Vec::with_capacity(grid.len());
    let mut state: Option<CdwState> = None;
    for &e in grid {
        let p = drive.with_dc(e);
        let popts = opts.phase_options(&p);
        let start = if opts.warm_start { state.as_ref() } else { None };
        let run = step(&p, &popts, start, rng.as_deref_mut())?;
        rates.push(run.winding_rate);
        state = Some(run.final_state.rewound());
    }
    let mut result = StaircaseResult::from_rates(drive.omega_d, grid, &rates);
    result.detect(opts.lock_tolerance, opts.max_denominator);
    Ok(result)
}

/// I-V staircase of a single phase swept along `grid` at fixed drive.
pub fn iv_curve(
    template: &PhaseEomParams,
    grid: &[f64],
    opts: &IvOptions,
    rng: Option<&mut RandomSource>,
) -> Result<StaircaseResult> {
    template.validate()?;
    sweep(grid, template, opts, rng, |p, o, s, r| integrate_phase(p, o, s, r))
}

/// Staircase of the site-averaged winding rate of an overdamped ring.
pub fn chain_iv(
    chain: &ChainCdwParams,
    drive: &PhaseEomParams,
    grid: &[f64],
    opts: &IvOptions,
    rng: Option<&mut RandomSource>,
) -> Result<StaircaseResult> {
    chain.validate()?;
    drive.validate()?;
    sweep(grid, drive, opts, rng, |p, o, s, r| integrate_chain(chain, p, o, s, r))
}
