//! Trajectories, memory lifetimes and retention maps.

use serde::Serialize;

use super::lattice::{SpinLattice2D, ZmLattice};
use super::rules::{
    apply_noise, apply_zm_noise, matched_glauber, step_stochastic, step_zm, GlauberSweeper,
    NoiseParams, PcaRule,
};
use crate::ensemble::run_replicas;
use crate::error::{invalid, precondition, Result};
use crate::rng::RandomSource;
use crate::series::StroboscopicSeries;
use crate::spectral::{dft_subharmonic, SpectralSummary};

#[derive(Debug, Clone)]
pub struct PcaRun {
    /// `m(t)` for `t = 0..=steps`.
    pub magnetization: StroboscopicSeries,
    /// `(-1)^t m(t)` for period-2 rules.
    pub demodulated: Option<StroboscopicSeries>,
    /// Spectrum of `m(t)` with the `nu = 1/2` amplitude, for period-2 rules
    /// with enough samples.
    pub spectrum: Option<SpectralSummary>,
    pub final_lattice: SpinLattice2D,
}

/// Evolves the lattice; Glauber rules advance through an unpacked sampler.
struct Stepper {
    rule: PcaRule,
    glauber: Option<(GlauberSweeper, bool)>,
}

impl Stepper {
    fn new(rule: &PcaRule, initial: &SpinLattice2D) -> Result<Self> {
        let glauber = match rule {
            PcaRule::Glauber { temperature, field } => {
                Some((GlauberSweeper::new(initial, *temperature, *field)?, false))
            }
            PcaRule::Rotated { base, m: 2 } => match base.as_ref() {
                PcaRule::Glauber { temperature, field } => {
                    Some((GlauberSweeper::new(initial, *temperature, *field)?, true))
                }
                _ => None,
            },
            PcaRule::Rotated { .. } => {
                return Err(precondition("rotated rules with m > 2 act on a Z_m lattice"))
            }
            _ => None,
        };
        Ok(Self {
            rule: rule.clone(),
            glauber,
        })
    }

    fn step(
        &mut self,
        lattice: &SpinLattice2D,
        noise: &NoiseParams,
        rng: &mut RandomSource,
    ) -> Result<SpinLattice2D> {
        match &mut self.glauber {
            Some((g, negate)) => {
                g.sweep(rng);
                if *negate {
                    g.negate();
                }
                let mut next = g.to_lattice();
                if !noise.is_zero() {
                    apply_noise(&mut next, noise, rng)?;
                    g.load(&next)?;
                }
                Ok(next)
            }
            None => {
                let mut next = step_stochastic(lattice, &self.rule, rng)?;
                apply_noise(&mut next, noise, rng)?;
                Ok(next)
            }
        }
    }
}

/// Magnetization trajectory under rule then noise.
pub fn run_pca(
    initial: &SpinLattice2D,
    rule: &PcaRule,
    noise: &NoiseParams,
    steps: usize,
    rng: &mut RandomSource,
) -> Result<PcaRun> {
    if steps == 0 {
        return Err(precondition("steps must be at least 1"));
    }
    noise.validate()?;
    let mut stepper = Stepper::new(rule, initial)?;
    let mut lattice = initial.clone();
    let mut m = Vec::with_capacity(steps + 1);
    m.push(lattice.magnetization());
    for _ in 0..steps {
        lattice = stepper.step(&lattice, noise, rng)?;
        m.push(lattice.magnetization());
    }
    let magnetization = StroboscopicSeries::new(m, 1.0, "magnetization")?;
    let (demodulated, spectrum) = if rule.period() == 2 {
        let spec = dft_subharmonic(&magnetization, 2).ok();
        (Some(magnetization.demodulated()), spec)
    } else {
        (None, None)
    };
    Ok(PcaRun {
        magnetization,
        demodulated,
        spectrum,
        final_lattice: lattice,
    })
}

#[derive(Debug, Clone)]
pub struct ZmRun {
    /// `Re mean exp(2 pi i s / m)`.
    pub order: StroboscopicSeries,
    pub spectrum: SpectralSummary,
    pub final_lattice: ZmLattice,
}

/// Rotated NEC rule on a `Z_m` lattice with uniform-replacement noise.
pub fn run_zm(initial: &ZmLattice, eps: f64, steps: usize, rng: &mut RandomSource) -> Result<ZmRun> {
    let m = initial.m() as usize;
    if steps + 1 < 2 * m {
        return Err(precondition("too few steps for the subharmonic spectrum"));
    }
    let mut l = initial.clone();
    let mut x = Vec::with_capacity(steps + 1);
    x.push(l.clock_order().0);
    for _ in 0..steps {
        l = step_zm(&l);
        apply_zm_noise(&mut l, eps, rng)?;
        x.push(l.clock_order().0);
    }
    let order = StroboscopicSeries::new(x, 1.0, "clock_order")?;
    let spectrum = dft_subharmonic(&order, m)?;
    Ok(ZmRun {
        order,
        spectrum,
        final_lattice: l,
    })
}

/// Order parameter with the period-2 rotation removed.
fn aligned(rule: &PcaRule, t: usize, m: f64) -> f64 {
    if rule.period() == 2 && t % 2 == 1 {
        -m
    } else {
        m
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MemoryLifetime {
    /// First step with a negative aligned magnetization; `None` if censored.
    pub per_seed: Vec<(u64, Option<usize>)>,
    pub max_steps: usize,
    /// Median over seeds with censored runs ranked last; `None` when the
    /// median itself is censored.
    pub median: Option<f64>,
    pub censored: usize,
}

/// First sign flip of the aligned magnetization from the all-up state.
pub fn memory_lifetime(
    rule: &PcaRule,
    noise: &NoiseParams,
    size: (usize, usize),
    max_steps: usize,
    seeds: &[u64],
    workers: usize,
) -> Result<MemoryLifetime> {
    noise.validate()?;
    let initial = SpinLattice2D::all_up(size.0, size.1)?;
    let job = |rng: &mut RandomSource| -> Result<Option<usize>> {
        let mut stepper = Stepper::new(rule, &initial)?;
        let mut l = initial.clone();
        for t in 1..=max_steps {
            l = stepper.step(&l, noise, rng)?;
            if aligned(rule, t, l.magnetization()) < 0.0 {
                return Ok(Some(t));
            }
        }
        Ok(None)
    };
    let mut per_seed = Vec::with_capacity(seeds.len());
    for r in run_replicas(&job, seeds, workers)? {
        per_seed.push((r.seed, r.result?));
    }
    let censored = per_seed.iter().filter(|(_, t)| t.is_none()).count();
    let mut ranked: Vec<f64> = per_seed
        .iter()
        .map(|(_, t)| t.map_or(f64::INFINITY, |v| v as f64))
        .collect();
    ranked.sort_by(f64::total_cmp);
    let n = ranked.len();
    let median = if n == 0 {
        None
    } else {
        let v = if n % 2 == 1 {
            ranked[n / 2]
        } else {
            0.5 * (ranked[n / 2 - 1] + ranked[n / 2])
        };
        v.is_finite().then_some(v)
    };
    Ok(MemoryLifetime {
        per_seed,
        max_steps,
        median,
        censored,
    })
}

/// Whether the aligned magnetization is still positive after `steps`.
pub fn retains(
    rule: &PcaRule,
    noise: &NoiseParams,
    size: (usize, usize),
    steps: usize,
    rng: &mut RandomSource,
) -> Result<bool> {
    let initial = SpinLattice2D::all_up(size.0, size.1)?;
    let mut stepper = Stepper::new(rule, &initial)?;
    let mut l = initial;
    for _ in 0..steps {
        l = stepper.step(&l, noise, rng)?;
    }
    Ok(aligned(rule, steps, l.magnetization()) > 0.0)
}

/// How a phase-map cell turns `(bias, amplitude)` into dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanModel {
    Toom,
    PiToom,
    /// Noiseless Glauber dynamics at the matched temperature and field.
    MatchedGlauber,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseCell {
    pub bias: f64,
    pub amplitude: f64,
    pub retention: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseMap {
    pub model: ScanModel,
    pub size: (usize, usize),
    pub steps: usize,
    pub cells: Vec<PhaseCell>,
}

impl PhaseMap {
    /// `bias,amplitude,retention` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bias,amplitude,retention\n");
        for c in &self.cells {
            s.push_str(&format!("{},{},{}\n", c.bias, c.amplitude, c.retention));
        }
        s
    }
}

/// Rule and noise for one cell of the map.
pub fn scan_cell_dynamics(model: ScanModel, noise: &NoiseParams) -> Result<(PcaRule, NoiseParams)> {
    Ok(match model {
        ScanModel::Toom => (PcaRule::ToomNec, *noise),
        ScanModel::PiToom => (PcaRule::PiToom, *noise),
        ScanModel::MatchedGlauber => {
            let (temperature, field) = matched_glauber(noise)?;
            (
                PcaRule::Glauber { temperature, field },
                NoiseParams::none(),
            )
        }
    })
}

/// Retention probability over a `bias x amplitude` grid.
pub fn phase_scan(
    model: ScanModel,
    biases: &[f64],
    amplitudes: &[f64],
    size: (usize, usize),
    steps: usize,
    seeds: &[u64],
    workers: usize,
) -> Result<PhaseMap> {
    if biases.is_empty() || amplitudes.is_empty() {
        return Err(precondition("bias and amplitude grids must be nonempty"));
    }
    if seeds.is_empty() {
        return Err(invalid("seeds", "need at least one seed"));
    }
    let mut cells = Vec::with_capacity(biases.len() * amplitudes.len());
    for &a in amplitudes {
        for &b in biases {
            let noise = NoiseParams::from_bias(b, a)?;
            let (rule, noise) = scan_cell_dynamics(model, &noise)?;
            let job = |rng: &mut RandomSource| retains(&rule, &noise, size, steps, rng);
            let mut kept = 0usize;
            for r in run_replicas(&job, seeds, workers)? {
                kept += r.result? as usize;
            }
            let n = seeds.len() as f64;
            let p = kept as f64 / n;
            cells.push(PhaseCell {
                bias: b,
                amplitude: a,
                retention: p,
                std_error: (p * (1.0 - p) / n).sqrt(),
            });
        }
    }
    Ok(PhaseMap {
        model,
        size,
        steps,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_toom_alternates_exactly() {
        let l = SpinLattice2D::all_up(16, 16).unwrap();
        let run = run_pca(&l, &PcaRule::PiToom, &NoiseParams::none(), 20, &mut RandomSource::from_seed(1))
            .unwrap();
        for (t, m) in run.magnetization.values().iter().enumerate() {
            assert_eq!(*m, if t % 2 == 0 { 1.0 } else { -1.0 });
        }
        assert!(run.demodulated.unwrap().values().iter().all(|x| *x == 1.0));
        assert!((run.spectrum.unwrap().subharmonic - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_toom_never_forgets() {
        let r = memory_lifetime(&PcaRule::ToomNec, &NoiseParams::none(), (16, 16), 50, &[1, 2, 3], 1)
            .unwrap();
        assert_eq!(r.censored, 3);
        assert_eq!(r.median, None);
    }

    #[test]
    fn zero_amplitude_row_retains() {
        let map = phase_scan(ScanModel::Toom, &[-0.5, 0.0, 0.5], &[0.0], (16, 16), 20, &[1, 2], 1)
            .unwrap();
        assert!(map.cells.iter().all(|c| c.retention == 1.0));
        assert!(map.to_csv().starts_with("bias,amplitude,retention\n"));
        assert!(phase_scan(ScanModel::Toom, &[], &[0.1], (8, 8), 5, &[1], 1).is_err());
    }

    #[test]
    fn zero_steps_rejected() {
        let l = SpinLattice2D::all_up(8, 8).unwrap();
        assert!(run_pca(&l, &PcaRule::ToomNec, &NoiseParams::none(), 0, &mut RandomSource::from_seed(1)).is_err());
    }
}
