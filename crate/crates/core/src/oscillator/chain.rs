//! Velocity-Verlet and BAOAB integration of the driven pendulum chain.

use serde::Serialize;

use super::params::{BathParams, ChainParams, DriveParams, PhaseState};
use crate::error::{invalid, precondition, Result};
use crate::rng::RandomSource;

pub const DEFAULT_SUBSTEPS: usize = 128;
pub const MIN_SUBSTEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationOptions {
    pub n_periods: usize,
    pub substeps: usize,
    /// Divergence threshold on `|q_i|`; `None` uses [`default_blowup_bound`].
    pub blowup_bound: Option<f64>,
}

impl IntegrationOptions {
    pub fn new(n_periods: usize) -> Self {
        Self {
            n_periods,
            substeps: DEFAULT_SUBSTEPS,
            blowup_bound: None,
        }
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps;
        self
    }
}

/// `(q, p)` sampled at `t0 + nT` for `n = 0..=n_periods`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StroboscopicRecord {
    pub period: f64,
    pub t0: f64,
    pub q: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
}

impl StroboscopicRecord {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.period
    }

    /// Positions at even periods `2n`.
    pub fn even_q(&self) -> Vec<Vec<f64>> {
        self.q.iter().step_by(2).cloned().collect()
    }

    pub fn even_p(&self) -> Vec<Vec<f64>> {
        self.p.iter().step_by(2).cloned().collect()
    }

    /// Time series of one site.
    pub fn site_q(&self, site: usize) -> Vec<f64> {
        self.q.iter().map(|row| row[site]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowUp {
    pub period: usize,
    pub time: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainTrajectory {
    pub final_state: PhaseState,
    pub record: StroboscopicRecord,
    /// Set when `|q_i|` exceeded the bound; the record stops there.
    pub blow_up: Option<BlowUp>,
}

/// Rough scale of a resonant orbit, used only to place the divergence bound
/// `1e3 * sqrt(2 P)` far outside any physical trajectory.
pub fn default_blowup_bound(drive: &DriveParams, state: &PhaseState) -> f64 {
    let p_init = state
        .q
        .iter()
        .zip(&state.p)
        .map(|(q, p)| 0.5 * (q * q + p * p))
        .fold(0.0, f64::max);
    let p_res = if drive.kappa > 0.0 {
        (0.25 * drive.omega_d * drive.omega_d + drive.omega0 * drive.omega0 * drive.delta.abs())
            / drive.kappa
    } else {
        0.0
    };
    1e3 * (2.0 * p_init.max(p_res).max(1.0)).sqrt()
}

/// `-dH/dq_i` at time `t`.
pub fn forces(drive: &DriveParams, chain: &ChainParams, q: &[f64], t: f64, out: &mut [f64]) {
    let k = drive.stiffness(t);
    for (f, &x) in out.iter_mut().zip(q) {
        *f = -k * x - drive.kappa * x * x * x;
    }
    if chain.coupling != 0.0 {
        for (i, j) in chain.bonds() {
            let f = 2.0 * chain.coupling * (q[i] - q[j]);
            out[i] += f;
            out[j] -= f;
        }
    }
}

/// Coupling energy `-G sum_<ij> (q_i - q_j)^2`.
fn coupling_energy(chain: &ChainParams, q: &[f64]) -> f64 {
    -chain.coupling
        * chain
            .bonds()
            .map(|(i, j)| (q[i] - q[j]) * (q[i] - q[j]))
            .sum::<f64>()
}

/// Instantaneous Hamiltonian at `state.t`.
pub fn energy(drive: &DriveParams, chain: &ChainParams, state: &PhaseState) -> f64 {
    let k = drive.stiffness(state.t);
    let local: f64 = state
        .q
        .iter()
        .zip(&state.p)
        .map(|(q, p)| 0.5 * p * p + 0.5 * k * q * q + 0.25 * drive.kappa * q.powi(4))
        .sum();
    local + coupling_energy(chain, &state.q)
}

/// Hamiltonian with the drive switched off.
pub fn undriven_energy(drive: &DriveParams, chain: &ChainParams, state: &PhaseState) -> f64 {
    energy(&drive.undriven(), chain, state)
}

fn check(drive: &DriveParams, chain: &ChainParams, state: &PhaseState, opts: &IntegrationOptions) -> Result<()> {
    drive.validate()?;
    chain.validate()?;
    if state.sites() != chain.sites {
        return Err(invalid("state", "site count does not match the chain"));
    }
    if !state.is_finite() {
        return Err(invalid("state", "non-finite initial state"));
    }
    if opts.substeps < MIN_SUBSTEPS {
        return Err(precondition(format!(
            "need at least {MIN_SUBSTEPS} substeps per period, got {}",
            opts.substeps
        )));
    }
    Ok(())
}

/// Closed-system evolution with velocity Verlet.
pub fn integrate_chain_hamiltonian(
    drive: &DriveParams,
    chain: &ChainParams,
    state: &PhaseState,
    opts: &IntegrationOptions,
) -> Result<ChainTrajectory> {
    check(drive, chain, state, opts)?;
    Ok(run(drive, chain, None, state, opts))
}

/// Langevin evolution with BAOAB splitting and an exact
/// Ornstein-Uhlenbeck momentum step. With `eta = T = 0` the update reduces
/// operation for operation to velocity Verlet.
pub fn integrate_chain_langevin(
    drive: &DriveParams,
    chain: &ChainParams,
    bath: &BathParams,
    state: &PhaseState,
    opts: &IntegrationOptions,
    rng: &mut RandomSource,
) -> Result<ChainTrajectory> {
    check(drive, chain, state, opts)?;
    bath.validate()?;
    Ok(run(drive, chain, Some((bath, rng)), state, opts))
}

fn run(
    drive: &DriveParams,
    chain: &ChainParams,
    mut bath: Option<(&BathParams, &mut RandomSource)>,
    state: &PhaseState,
    opts: &IntegrationOptions,
) -> ChainTrajectory {
    let n = chain.sites;
    let period = drive.period();
    let h = period / opts.substeps as f64;
    let bound = opts
        .blowup_bound
        .unwrap_or_else(|| default_blowup_bound(drive, state));
    let (damp, kick) = match &bath {
        Some((b, _)) if b.eta > 0.0 => {
            let c = (-b.eta * h).exp();
            (c, (b.temperature * (1.0 - c * c)).sqrt())
        }
        _ => (1.0, 0.0),
    };
    let thermostat = damp != 1.0 || kick != 0.0;

    let t0 = state.t;
    let mut q = state.q.clone();
    let mut p = state.p.clone();
    let mut f = vec![0.0; n];
    forces(drive, chain, &q, t0, &mut f);

    let mut record = StroboscopicRecord {
        period,
        t0,
        q: vec![q.clone()],
        p: vec![p.clone()],
    };
    let mut blow_up = None;
    let mut t = t0;
    'periods: for period_idx in 0..opts.n_periods {
        let base = t0 + period_idx as f64 * period;
        for k in 0..opts.substeps {
            for (pi, fi) in p.iter_mut().zip(&f) {
                *pi += 0.5 * h * fi;
            }
            if thermostat {
                let (_, rng) = bath.as_mut().expect("thermostat implies bath");
                for (qi, pi) in q.iter_mut().zip(&p) {
                    *qi += 0.5 * h * pi;
                }
                for pi in p.iter_mut() {
                    *pi = damp * *pi + if kick > 0.0 { kick * rng.normal() } else { 0.0 };
                }
                for (qi, pi) in q.iter_mut().zip(&p) {
                    *qi += 0.5 * h * pi;
                }
            } else {
                for (qi, pi) in q.iter_mut().zip(&p) {
                    *qi += h * pi;
                }
            }
            t = if k + 1 == opts.substeps {
                t0 + (period_idx + 1) as f64 * period
            } else {
                base + (k + 1) as f64 * h
            };
            forces(drive, chain, &q, t, &mut f);
            for (pi, fi) in p.iter_mut().zip(&f) {
                *pi += 0.5 * h * fi;
            }
        }
        if q.iter().chain(&p).any(|x| !x.is_finite()) || q.iter().any(|x| x.abs() > bound) {
            blow_up = Some(BlowUp {
                period: period_idx + 1,
                time: t,
                bound,
            });
            break 'periods;
        }
        record.q.push(q.clone());
        record.p.push(p.clone());
    }
    ChainTrajectory {
        final_state: PhaseState { q, p, t },
        record,
        blow_up,
    }
}

/// Stroboscopic map of a single damped pendulum over one period.
fn single_period_map(drive: &DriveParams, eta: f64, x: [f64; 2], substeps: usize) -> [f64; 2] {
    let chain = ChainParams::single();
    let state = PhaseState {
        q: vec![x[0]],
        p: vec![x[1]],
        t: 0.0,
    };
    let opts = IntegrationOptions::new(1).with_substeps(substeps);
    let traj = if eta > 0.0 {
        let bath = BathParams::new(eta, 0.0);
        let mut rng = RandomSource::from_seed(0);
        run(drive, &chain, Some((&bath, &mut rng)), &state, &opts)
    } else {
        run(drive, &chain, None, &state, &opts)
    };
    [traj.final_state.q[0], traj.final_state.p[0]]
}

/// Period-doubled orbit of a single pendulum: the point `x` at `t = 0` with
/// `Phi_T(x) = -x`, refined by Newton from `guess`.
pub fn period_doubled_orbit(
    drive: &DriveParams,
    eta: f64,
    guess: [f64; 2],
    substeps: usize,
) -> Result<[f64; 2]> {
    drive.validate()?;
    let residual = |x: [f64; 2]| {
        let y = single_period_map(drive, eta, x, substeps);
        [y[0] + x[0], y[1] + x[1]]
    };
    let mut x = guess;
    for _ in 0..60 {
        let r = residual(x);
        let scale = x[0].abs().max(x[1].abs()).max(1e-3);
        if r[0].abs().max(r[1].abs()) < 1e-12 * scale.max(1.0) {
            if x[0].hypot(x[1]) < 1e-8 {
                return Err(precondition("Newton converged to the trivial fixed point"));
            }
            return Ok(x);
        }
        let e = 1e-7 * scale;
        let r0 = residual([x[0] + e, x[1]]);
        let r1 = residual([x[0], x[1] + e]);
        let j = [
            [(r0[0] - r[0]) / e, (r1[0] - r[0]) / e],
            [(r0[1] - r[1]) / e, (r1[1] - r[1]) / e],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dx = [
            (j[1][1] * r[0] - j[0][1] * r[1]) / det,
            (-j[1][0] * r[0] + j[0][0] * r[1]) / det,
        ];
        x = [x[0] - dx[0], x[1] - dx[1]];
        if !(x[0].is_finite() && x[1].is_finite()) {
            break;
        }
    }
    Err(precondition("period-doubled orbit search did not converge"))
}
