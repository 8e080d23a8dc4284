//! Rotating-frame coordinates, domain walls, lifetimes and heating times.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chain::{
    integrate_chain_hamiltonian, integrate_chain_langevin, undriven_energy, IntegrationOptions,
    StroboscopicRecord,
};
use super::params::{BathParams, Boundary, ChainParams, DriveParams, PhaseState};
use crate::ensemble::run_replicas;
use crate::error::{precondition, Error, Result};
use crate::fit::{arrhenius_fit, fit_exponential_decay_in, FitResult, FitWindow, Lifetime};
use crate::rng::RandomSource;
use crate::series::StroboscopicSeries;

/// Slow angle and action of one site. `angle` is `None` at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotatingCoordinate {
    pub angle: Option<f64>,
    pub action: f64,
}

/// `Q = arg[(q - i p) e^{-i omega_d t / 2}]`, `P = (q^2 + p^2) / 2`.
pub fn rotating_frame(state: &PhaseState, omega_d: f64) -> Vec<RotatingCoordinate> {
    let rot = Complex64::from_polar(1.0, -0.5 * omega_d * state.t);
    state
        .q
        .iter()
        .zip(&state.p)
        .map(|(&q, &p)| {
            let z = Complex64::new(q, -p);
            RotatingCoordinate {
                angle: (q != 0.0 || p != 0.0).then(|| (z * rot).arg()),
                action: 0.5 * (q * q + p * p),
            }
        })
        .collect()
}

/// How a continuous site is mapped to an Ising spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binarization {
    /// `sign(q(2nT))`, zero mapped to `+1`.
    #[default]
    SignQ,
    /// `sign(sin Q)`, zero or undefined mapped to `+1`.
    SignSinQ,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainWalls {
    /// `spins[n][i]` at even period `2n`.
    pub spins: Vec<Vec<i8>>,
    /// Bond indices `i` with `spins[n][i] != spins[n][i+1]`.
    pub walls: Vec<Vec<usize>>,
}

impl DomainWalls {
    pub fn wall_counts(&self) -> Vec<usize> {
        self.walls.iter().map(|w| w.len()).collect()
    }

    /// Walls per bond averaged over all records.
    pub fn mean_density(&self, bonds: usize) -> f64 {
        if self.walls.is_empty() || bonds == 0 {
            return 0.0;
        }
        let total: usize = self.walls.iter().map(|w| w.len()).sum();
        total as f64 / (self.walls.len() * bonds) as f64
    }
}

fn sign(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// Binarize even-period records and locate domain walls.
pub fn domain_wall_extract(
    record: &StroboscopicRecord,
    omega_d: f64,
    boundary: Boundary,
    mode: Binarization,
) -> Result<DomainWalls> {
    if record.is_empty() {
        return Err(precondition("record is empty"));
    }
    let mut spins = Vec::new();
    for n in (0..record.len()).step_by(2) {
        let row: Vec<i8> = match mode {
            Binarization::SignQ => record.q[n].iter().map(|q| sign(*q)).collect(),
            Binarization::SignSinQ => {
                let state = PhaseState {
                    q: record.q[n].clone(),
                    p: record.p[n].clone(),
                    t: record.time(n),
                };
                rotating_frame(&state, omega_d)
                    .iter()
                    .map(|c| c.angle.map_or(1, |a| sign(a.sin())))
                    .collect()
            }
        };
        spins.push(row);
    }
    let walls = spins.iter().map(|row| walls_of(row, boundary)).collect();
    Ok(DomainWalls { spins, walls })
}

pub fn walls_of(row: &[i8], boundary: Boundary) -> Vec<usize> {
    let n = row.len();
    let bonds = match boundary {
        Boundary::Periodic if n > 1 => n,
        _ => n.saturating_sub(1),
    };
    (0..bonds).filter(|&i| row[i] != row[(i + 1) % n]).collect()
}

pub const MIN_AUTOCORRELATION_PERIODS: usize = 20;

/// Site- and ensemble-averaged `C(n) = <q_i(nT) q_i(0)>`.
pub fn stroboscopic_autocorrelation(records: &[StroboscopicRecord]) -> Result<StroboscopicSeries> {
    let Some(first) = records.first() else {
        return Err(precondition("no records"));
    };
    let len = records.iter().map(|r| r.len()).min().unwrap_or(0);
    if len < MIN_AUTOCORRELATION_PERIODS {
        return Err(precondition(format!(
            "need at least {MIN_AUTOCORRELATION_PERIODS} periods, got {len}"
        )));
    }
    let mut c = vec![0.0; len];
    let mut count = 0usize;
    for r in records {
        let q0 = &r.q[0];
        for (n, cn) in c.iter_mut().enumerate() {
            *cn += r.q[n].iter().zip(q0).map(|(a, b)| a * b).sum::<f64>();
        }
        count += q0.len();
    }
    c.iter_mut().for_each(|x| *x /= count as f64);
    StroboscopicSeries::new(c, first.period, "autocorrelation")
}

/// Decay of the demodulated autocorrelation envelope.
///
/// The fit runs over the default window truncated at the first
/// non-positive envelope value.
pub fn ttsb_autocorrelation(records: &[StroboscopicRecord]) -> Result<FitResult> {
    let c = stroboscopic_autocorrelation(records)?;
    envelope_lifetime(&c)
}

/// Envelope level, relative to its first sample, below which samples are
/// treated as noise-dominated and left out of the lifetime fit.
pub const ENVELOPE_FLOOR: f64 = 0.135_335_283_236_612_7; // e^-2

/// Exponential fit to `(-1)^n C(n)`.
///
/// The fit covers the default window of the prefix that stays above
/// `ENVELOPE_FLOOR * C(0)`.
pub fn envelope_lifetime(c: &StroboscopicSeries) -> Result<FitResult> {
    let env = c.demodulated();
    let v = env.values();
    let floor = ENVELOPE_FLOOR * v[0];
    let usable = v.iter().take_while(|x| **x > 0.0 && **x > floor).count();
    let window = FitWindow::default_for(usable);
    if window.end.saturating_sub(window.start) < 4 {
        return Err(precondition("envelope decays before four usable samples"));
    }
    fit_exponential_decay_in(&env, window)
}

/// Arrhenius fit with the excluded temperatures listed.
#[derive(Debug, Clone)]
pub struct ArrheniusScan {
    pub points: Vec<(f64, Lifetime)>,
    pub excluded: Vec<f64>,
    pub warnings: Vec<String>,
    pub fit: FitResult,
}

/// Fit `ln tau = ln A + Delta / T` to the finite lifetimes.
pub fn arrhenius_from_lifetimes(points: &[(f64, Lifetime)]) -> Result<ArrheniusScan> {
    if points.len() < 3 {
        return Err(precondition("need at least 3 temperatures"));
    }
    let mut finite = Vec::new();
    let mut excluded = Vec::new();
    let mut warnings = Vec::new();
    for &(t, l) in points {
        match l {
            Lifetime::Finite(tau) => finite.push((t, tau)),
            Lifetime::Divergent => {
                excluded.push(t);
                warnings.push(format!("lifetime at T = {t} is divergent; point excluded"));
            }
        }
    }
    let fit = arrhenius_fit(&finite)?;
    Ok(ArrheniusScan {
        points: points.to_vec(),
        excluded,
        warnings,
        fit,
    })
}

/// Fixed parameters of a Langevin lifetime scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeSetup {
    pub drive: DriveParams,
    pub chain: ChainParams,
    pub eta: f64,
    pub initial: PhaseState,
    pub n_periods: usize,
    pub substeps: usize,
}

/// Lifetime at one temperature from an ensemble of seeded runs.
pub fn lifetime_at(
    setup: &LifetimeSetup,
    temperature: f64,
    seeds: &[u64],
    workers: usize,
) -> Result<(Lifetime, StroboscopicSeries)> {
    let bath = BathParams::new(setup.eta, temperature);
    let opts = IntegrationOptions::new(setup.n_periods).with_substeps(setup.substeps);
    let job = |rng: &mut RandomSource| {
        integrate_chain_langevin(&setup.drive, &setup.chain, &bath, &setup.initial, &opts, rng)
    };
    let mut records = Vec::with_capacity(seeds.len());
    for r in run_replicas(&job, seeds, workers)? {
        let traj = r.result?;
        if let Some(b) = traj.blow_up {
            return Err(Error::NonFinite(format!(
                "seed {} diverged at period {}",
                r.seed, b.period
            )));
        }
        records.push(traj.record);
    }
    let c = stroboscopic_autocorrelation(&records)?;
    let lifetime = envelope_lifetime(&c).map(|f| f.lifetime())?;
    Ok((lifetime, c))
}

/// Lifetime per temperature followed by the Arrhenius fit.
pub fn arrhenius_scan(
    setup: &LifetimeSetup,
    temperatures: &[f64],
    seeds: &[u64],
    workers: usize,
) -> Result<ArrheniusScan> {
    if temperatures.len() < 3 {
        return Err(precondition("need at least 3 temperatures"));
    }
    let mut points = Vec::with_capacity(temperatures.len());
    for &t in temperatures {
        let (l, _) = lifetime_at(setup, t, seeds, workers)?;
        points.push((t, l));
    }
    arrhenius_from_lifetimes(&points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum HeatingTime {
    Finite(f64),
    /// No midpoint crossing within the budget.
    Censored,
}

impl HeatingTime {
    pub fn finite(self) -> Option<f64> {
        match self {
            HeatingTime::Finite(t) => Some(t),
            HeatingTime::Censored => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatingOptions {
    /// Evolution budget measured in units of the natural period `2 pi / omega0`,
    /// so runs at different drive frequencies cover the same physical time.
    pub budget: f64,
    pub substeps: usize,
    /// Fraction of the budget at the end averaged for the plateau.
    pub plateau_fraction: f64,
    /// Relative change of `E_eff` below which the run counts as not heating.
    pub min_relative_change: f64,
}

impl Default for HeatingOptions {
    fn default() -> Self {
        Self {
            budget: 2000.0,
            substeps: 128,
            plateau_fraction: 0.2,
            min_relative_change: 1e-3,
        }
    }
}

/// Stroboscopic undriven energy and the extracted heating time.
#[derive(Debug, Clone, Serialize)]
pub struct HeatingRun {
    pub omega_d: f64,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub plateau: f64,
    pub t_star: HeatingTime,
}

/// Midpoint crossing of `E_eff` between its initial value and its plateau.
pub fn midpoint_crossing(times: &[f64], energy: &[f64], opts: &HeatingOptions) -> (f64, HeatingTime) {
    let n = energy.len();
    let tail = ((n as f64 * opts.plateau_fraction).ceil() as usize).clamp(1, n);
    let plateau = energy[n - tail..].iter().sum::<f64>() / tail as f64;
    let e0 = energy[0];
    if (plateau - e0).abs() <= opts.min_relative_change * e0.abs().max(1e-300) {
        return (plateau, HeatingTime::Censored);
    }
    let mid = 0.5 * (e0 + plateau);
    let up = plateau > e0;
    for k in 1..n {
        let crossed = if up { energy[k] >= mid } else { energy[k] <= mid };
        if crossed {
            let (a, b) = (energy[k - 1], energy[k]);
            let f = if b != a { (mid - a) / (b - a) } else { 1.0 };
            return (plateau, HeatingTime::Finite(times[k - 1] + f * (times[k] - times[k - 1])));
        }
    }
    (plateau, HeatingTime::Censored)
}

/// Heating time per drive frequency, closed dynamics.
pub fn heating_time(
    drive: &DriveParams,
    chain: &ChainParams,
    state: &PhaseState,
    omegas: &[f64],
    opts: &HeatingOptions,
) -> Result<Vec<HeatingRun>> {
    if drive.kappa <= 0.0 {
        return Err(precondition("heating measurement needs kappa > 0"));
    }
    if omegas.is_empty() {
        return Err(precondition("frequency grid is empty"));
    }
    let mut out = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let d = DriveParams { omega_d: w, ..*drive };
        let horizon = opts.budget * 2.0 * std::f64::consts::PI / drive.omega0;
        let n_periods = (horizon / d.period()).ceil() as usize;
        let traj = integrate_chain_hamiltonian(
            &d,
            chain,
            state,
            &IntegrationOptions::new(n_periods).with_substeps(opts.substeps),
        )?;
        let rec = &traj.record;
        let times: Vec<f64> = (0..rec.len()).map(|n| rec.time(n)).collect();
        let energy: Vec<f64> = (0..rec.len())
            .map(|n| {
                let s = PhaseState {
                    q: rec.q[n].clone(),
                    p: rec.p[n].clone(),
                    t: times[n],
                };
                undriven_energy(&d, chain, &s)
            })
            .collect();
        let (plateau, t_star) = midpoint_crossing(&times, &energy, opts);
        out.push(HeatingRun {
            omega_d: w,
            times,
            energy,
            plateau,
            t_star,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotating_frame_defining_relation() {
        let (w, p0, t): (f64, f64, f64) = (2.4, 0.7, 1.3);
        let z = Complex64::from_polar((2.0 * p0).sqrt(), 0.5 * w * t);
        let s = PhaseState {
            q: vec![z.re, 0.0],
            p: vec![-z.im, 0.0],
            t,
        };
        let c = rotating_frame(&s, w);
        assert!(c[0].angle.unwrap().abs() < 1e-12);
        assert!((c[0].action - p0).abs() < 1e-12);
        assert_eq!(c[1].angle, None);
    }

    fn record(rows: Vec<Vec<f64>>) -> StroboscopicRecord {
        StroboscopicRecord {
            period: 1.0,
            t0: 0.0,
            p: rows.iter().map(|r| vec![0.0; r.len()]).collect(),
            q: rows,
        }
    }

    #[test]
    fn walls_counted_with_boundary() {
        let r = record(vec![vec![1.0, 2.0, 0.5, 3.0], vec![0.0; 4]]);
        let w = domain_wall_extract(&r, 2.0, Boundary::Periodic, Binarization::SignQ).unwrap();
        assert_eq!(w.wall_counts(), vec![0]);
        let r = record(vec![vec![1.0, 1.0, -1.0, -1.0]]);
        let w = domain_wall_extract(&r, 2.0, Boundary::Periodic, Binarization::SignQ).unwrap();
        assert_eq!(w.walls[0], vec![1, 3]);
        let w = domain_wall_extract(&r, 2.0, Boundary::Open, Binarization::SignQ).unwrap();
        assert_eq!(w.walls[0], vec![1]);
        assert_eq!(sign(0.0), 1);
    }

    #[test]
    fn synthetic_envelope_lifetime() {
        let c: Vec<f64> = (0..200)
            .map(|n| (-1f64).powi(n) * (-(n as f64) / 30.0).exp())
            .collect();
        let fit = envelope_lifetime(&StroboscopicSeries::unit(c, "c").unwrap()).unwrap();
        assert!((fit.param("tau").unwrap() - 30.0).abs() < 1e-6);
    }

    #[test]
    fn locked_alternation_is_divergent() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|n| vec![if n % 2 == 0 { 0.8 } else { -0.8 }; 3])
            .collect();
        let fit = ttsb_autocorrelation(&[record(rows)]).unwrap();
        assert!(fit.lifetime().is_divergent());
    }

    #[test]
    fn short_record_rejected() {
        assert!(ttsb_autocorrelation(&[record(vec![vec![1.0]; 10])]).is_err());
    }

    #[test]
    fn arrhenius_plumbing() {
        let pts: Vec<(f64, Lifetime)> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&t| (t, Lifetime::Finite((2.0 / t as f64).exp())))
            .collect();
        let s = arrhenius_from_lifetimes(&pts).unwrap();
        assert!((s.fit.param("delta").unwrap() - 2.0).abs() < 1e-12);
        assert!(arrhenius_from_lifetimes(&pts[..1]).is_err());
        let mut with_div = pts.clone();
        with_div.push((8.0, Lifetime::Divergent));
        let s = arrhenius_from_lifetimes(&with_div).unwrap();
        assert_eq!(s.excluded, vec![8.0]);
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn undriven_energy_never_heats() {
        let drive = DriveParams::new(1.0, 0.0, 7.0, 0.5);
        let opts = HeatingOptions {
            budget: 20.0,
            ..Default::default()
        };
        let runs = heating_time(&drive, &ChainParams::single(), &PhaseState::uniform(1, 1.0, 0.0), &[7.0], &opts)
            .unwrap();
        assert_eq!(runs[0].t_star, HeatingTime::Censored);
    }
}
