//! Dispatch from a validated configuration to the simulation kernels.

use tcsim_core::cdw::{self, ChainCdwParams, IvOptions, PhaseEomParams, StaircaseResult};
use tcsim_core::oscillator::{
    self, integrate_chain_hamiltonian, integrate_chain_langevin, mathieu, BathParams, Boundary,
    ChainParams, DriveParams, IntegrationOptions, LifetimeSetup, PhaseState,
};
use tcsim_core::pca::{self, NoiseParams, ScanModel, SpinLattice2D};
use tcsim_core::quantum::{
    self, build_mbl_floquet, build_sycamore_floquet, chain_step, FloquetStep, IonChain, MblDisorder,
    StateVector, SycamoreDisorder,
};
use tcsim_core::{run_replicas, Lifetime, RandomSource};

use crate::config::*;
use crate::error::CliError;
use crate::output::{flag, num, Bundle, Plot, Table};
use crate::svg::{HeatMap, LinePlot};

/// Scalar reported by a run for scan aggregation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stat {
    Num(f64),
    Flag(bool),
}

impl Stat {
    pub fn as_f64(self) -> f64 {
        match self {
            Stat::Num(x) => x,
            Stat::Flag(b) => b as u8 as f64,
        }
    }

    pub fn to_csv(self) -> String {
        match self {
            Stat::Num(x) => num(x),
            Stat::Flag(b) => flag(b),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub bundle: Bundle,
    pub stats: Vec<(String, Stat)>,
}

impl Outcome {
    fn stat(&mut self, name: &str, value: f64) {
        self.stats.push((name.to_string(), Stat::Num(value)));
    }

    fn flag(&mut self, name: &str, value: bool) {
        self.stats.push((name.to_string(), Stat::Flag(value)));
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<Outcome, CliError> {
    let seeds = cfg.seeds();
    match cfg.experiment {
        ExperimentKind::Quantum => run_quantum(cfg, cfg.quantum.as_ref().expect("validated"), &seeds, workers),
        ExperimentKind::Oscillator => {
            run_oscillator(cfg, cfg.oscillator.as_ref().expect("validated"), &seeds, workers)
        }
        ExperimentKind::Pca => run_pca(cfg, cfg.pca.as_ref().expect("validated"), &seeds, workers),
        ExperimentKind::Cdw => run_cdw(cfg.cdw.as_ref().expect("validated"), &seeds, workers),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn line(name: &str, title: &str, x_label: &str, y_label: &str, x: Vec<f64>, series: Vec<(String, Vec<f64>)>) -> Plot {
    Plot::Line(LinePlot {
        name: name.into(),
        title: title.into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        x,
        series,
    })
}

// ---------------------------------------------------------------- quantum

type Built = (Box<dyn FloquetStep>, StateVector);

fn quantum_builder(q: &QuantumConfig) -> impl Fn(&mut RandomSource) -> tcsim_core::Result<Built> + Sync + '_ {
    move |rng: &mut RandomSource| {
        let step: Box<dyn FloquetStep> = match q.model {
            QuantumModel::Mbl => {
                let mut d = MblDisorder::strong(q.sites, q.epsilon);
                if !q.interacting {
                    d = d.non_interacting();
                }
                build_mbl_floquet(&d, q.path, rng)?
            }
            QuantumModel::Sycamore => Box::new(build_sycamore_floquet(&SycamoreDisorder::new(q.sites, q.g), rng)?),
            QuantumModel::Ion => {
                let ion = IonChain {
                    epsilon: q.epsilon,
                    ..IonChain::new(q.sites)
                };
                chain_step(&ion.params(), q.path)?
            }
        };
        let init = match q.initial {
            InitialSpins::Random => StateVector::random_bitstring(q.sites, rng),
            InitialSpins::Up => StateVector::all_up(q.sites),
            InitialSpins::Neel => StateVector::neel(q.sites),
        };
        Ok((step, init))
    }
}

fn run_quantum(cfg: &ExperimentConfig, q: &QuantumConfig, seeds: &[u64], workers: usize) -> Result<Outcome, CliError> {
    let make = quantum_builder(q);
    let mut out = Outcome::default();
    match cfg.name.as_str() {
        "magnetization" => {
            let avg = quantum::averaged_autocorrelator(seeds, q.periods, workers, &make)?;
            let mut header = vec!["n".to_string(), "magnetization".to_string()];
            header.extend(avg.seeds.iter().map(|s| format!("seed_{s}")));
            let mut t = Table {
                name: "magnetization".into(),
                header,
                rows: Vec::new(),
            };
            let mean = avg.mean.values();
            for n in 0..mean.len() {
                let mut row = vec![n.to_string(), num(mean[n])];
                row.extend(avg.per_realization.iter().map(|s| num(s.values()[n])));
                t.rows.push(row);
            }
            let window = q.window.min(mean.len());
            let amp = quantum::windowed_subharmonic(&avg.mean, mean.len() - 1, window)?;
            out.stat("final_magnetization", mean[mean.len() - 1]);
            out.stat("subharmonic_amplitude", amp);
            out.bundle.plots.push(line(
                "magnetization",
                "Disorder-averaged autocorrelator",
                "period n",
                "M(n)",
                (0..mean.len()).map(|n| n as f64).collect(),
                vec![("mean".into(), mean.to_vec())],
            ));
            out.bundle.tables.push(t);
        }
        "spectrum" => {
            let job = |rng: &mut RandomSource| -> tcsim_core::Result<quantum::QuasienergySpectrum> {
                let (step, _) = make(rng)?;
                quantum::floquet_spectrum_of(step.as_ref())
            };
            let mut t = Table::new("spectrum", &["seed", "index", "quasienergy", "partner", "splitting", "cat_overlap"]);
            let mut medians = Vec::new();
            let mut max_split: f64 = 0.0;
            let mut min_cat: f64 = f64::INFINITY;
            for r in run_replicas(&job, seeds, workers)? {
                let s = r.result?;
                let e = s.quasienergies();
                for j in 0..e.len() {
                    t.push(vec![
                        r.seed.to_string(),
                        j.to_string(),
                        num(e[j]),
                        s.pairing[j].to_string(),
                        num(s.splittings[j]),
                        num(s.cat_overlaps[j]),
                    ]);
                }
                medians.push(s.median_splitting());
                max_split = max_split.max(s.max_splitting());
                min_cat = min_cat.min(s.cat_overlaps.iter().copied().fold(f64::INFINITY, f64::min));
            }
            out.stat("median_splitting", quantum::median(&medians));
            out.stat("max_splitting", max_split);
            out.stat("min_cat_overlap", min_cat);
            out.bundle.tables.push(t);
        }
        "echo" => {
            let job = |rng: &mut RandomSource| -> tcsim_core::Result<f64> {
                let (step, init) = make(rng)?;
                Ok(quantum::echo_benchmark(step.as_ref(), &init, q.periods))
            };
            let mut t = Table::new("echo", &["seed", "fidelity"]);
            let mut worst: f64 = 1.0;
            for r in run_replicas(&job, seeds, workers)? {
                let f = r.result?;
                worst = worst.min(f);
                t.push(vec![r.seed.to_string(), num(f)]);
            }
            out.stat("min_fidelity", worst);
            out.bundle.tables.push(t);
        }
        "variance" => {
            if q.model != QuantumModel::Mbl {
                return Err(CliError::field("quantum.model", "the variance scan uses the mbl model"));
            }
            let mut template = MblDisorder::strong(q.sites, 0.0);
            if !q.interacting {
                template = template.non_interacting();
            }
            let grid = linspace(0.0, q.epsilon_max, q.epsilon_steps);
            let scan = quantum::variance_peak_scan(&grid, &template, seeds, q.periods, workers)?;
            let mut t = Table::new("variance", &["epsilon", "variance", "mean_amplitude"]);
            for i in 0..grid.len() {
                t.push_nums(&[scan.epsilons[i], scan.variances[i], scan.mean_amplitudes[i]]);
            }
            out.stat("argmax_epsilon", scan.argmax_epsilon);
            out.bundle.plots.push(line(
                "variance",
                "Variance of site subharmonic amplitudes",
                "pulse error",
                "variance",
                scan.epsilons.clone(),
                vec![("variance".into(), scan.variances.clone())],
            ));
            out.bundle.tables.push(t);
        }
        _ => unreachable!("name validated"),
    }
    Ok(out)
}

// ---------------------------------------------------------------- oscillator

fn drive_of(o: &OscillatorConfig) -> DriveParams {
    DriveParams {
        phase: o.phase,
        ..DriveParams::new(o.omega0, o.delta, o.omega_d, o.kappa)
    }
}

fn chain_of(o: &OscillatorConfig) -> ChainParams {
    let boundary = match o.boundary {
        BoundaryKind::Periodic => Boundary::Periodic,
        BoundaryKind::Open => Boundary::Open,
    };
    ChainParams::new(o.sites, o.coupling, boundary)
}

fn run_oscillator(cfg: &ExperimentConfig, o: &OscillatorConfig, seeds: &[u64], workers: usize) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let mathieu_substeps = o.substeps.max(mathieu::MIN_SUBSTEPS);
    match cfg.name.as_str() {
        "monodromy" => {
            let m = oscillator::mathieu_monodromy(o.a, o.delta, o.damping, mathieu_substeps)?;
            let mut t = Table::new(
                "monodromy",
                &["a", "delta", "damping", "m11", "m12", "m21", "m22", "max_multiplier", "determinant", "stable"],
            );
            let mut row: Vec<String> = [
                o.a,
                o.delta,
                o.damping,
                m.matrix[0][0],
                m.matrix[0][1],
                m.matrix[1][0],
                m.matrix[1][1],
                m.max_modulus(),
                m.determinant(),
            ]
            .iter()
            .map(|&x| num(x))
            .collect();
            row.push(flag(m.stable));
            t.push(row);
            out.stat("max_multiplier", m.max_modulus());
            out.flag("stable", m.stable);
            out.bundle.tables.push(t);
        }
        "chart" => {
            let c = &o.chart;
            let grid = oscillator::GridSpec {
                a_min: c.a_min,
                a_max: c.a_max,
                a_steps: c.a_steps,
                delta_min: c.delta_min,
                delta_max: c.delta_max,
                delta_steps: c.delta_steps,
            };
            let chart = oscillator::tongue_boundary_scan(&grid, o.damping, mathieu_substeps)?;
            let mut t = Table::new("chart", &["a", "delta", "max_multiplier", "stable"]);
            for (id, &d) in chart.delta_values.iter().enumerate() {
                for (ia, &a) in chart.a_values.iter().enumerate() {
                    let k = chart.index(id, ia);
                    t.push(vec![num(a), num(d), num(chart.max_multiplier[k]), flag(chart.stable[k])]);
                }
            }
            let cells = chart.stable.len() as f64;
            out.stat("unstable_fraction", chart.unstable_count() as f64 / cells);
            out.stat("max_determinant_error", chart.max_determinant_error);
            out.bundle.plots.push(Plot::Heat(HeatMap {
                name: "chart".into(),
                title: "Mathieu stability (1 = unstable)".into(),
                x_label: "a".into(),
                y_label: "delta".into(),
                xs: chart.a_values.clone(),
                ys: chart.delta_values.clone(),
                values: chart.stable.iter().map(|&s| if s { 0.0 } else { 1.0 }).collect(),
            }));
            out.bundle.tables.push(t);
        }
        "trajectory" => {
            let drive = drive_of(o);
            let chain = chain_of(o);
            let state = PhaseState::uniform(o.sites, o.q0, o.p0);
            let opts = IntegrationOptions::new(o.periods).with_substeps(o.substeps);
            let bath = BathParams::new(o.eta, o.temperature);
            let job = |rng: &mut RandomSource| {
                if bath.eta == 0.0 && bath.temperature == 0.0 {
                    integrate_chain_hamiltonian(&drive, &chain, &state, &opts)
                } else {
                    integrate_chain_langevin(&drive, &chain, &bath, &state, &opts, rng)
                }
            };
            let mut t = Table::new("trajectory", &["seed", "n", "t", "mean_q", "mean_p", "energy"]);
            let mut final_energy = 0.0;
            let mut blowups = Vec::new();
            let mut first_q = Vec::new();
            for r in run_replicas(&job, seeds, workers)? {
                let traj = r.result?;
                let rec = &traj.record;
                for n in 0..rec.len() {
                    let s = PhaseState {
                        q: rec.q[n].clone(),
                        p: rec.p[n].clone(),
                        t: rec.time(n),
                    };
                    let e = oscillator::energy(&drive, &chain, &s);
                    let mq = s.q.iter().sum::<f64>() / o.sites as f64;
                    let mp = s.p.iter().sum::<f64>() / o.sites as f64;
                    if first_q.len() < rec.len() && r.seed == seeds.iter().copied().min().unwrap_or(0) {
                        first_q.push(mq);
                    }
                    t.push(vec![r.seed.to_string(), n.to_string(), num(s.t), num(mq), num(mp), num(e)]);
                }
                final_energy += oscillator::energy(&drive, &chain, &traj.final_state) / seeds.len() as f64;
                if let Some(b) = traj.blow_up {
                    blowups.push(format!("seed {} exceeded |q| = {} at period {}", r.seed, b.bound, b.period));
                }
            }
            out.stat("mean_final_energy", final_energy);
            out.stat("blow_ups", blowups.len() as f64);
            if !blowups.is_empty() {
                out.bundle.blow_up = Some(blowups.join("; "));
            }
            out.bundle.plots.push(line(
                "trajectory",
                "Stroboscopic mean displacement (first seed)",
                "period n",
                "mean q",
                (0..first_q.len()).map(|n| n as f64).collect(),
                vec![("q".into(), first_q)],
            ));
            out.bundle.tables.push(t);
        }
        "lifetime" => {
            let drive = drive_of(o);
            let chain = chain_of(o);
            let orbit = oscillator::period_doubled_orbit(&drive, o.eta, [o.q0, o.p0], o.substeps)?;
            let setup = LifetimeSetup {
                drive,
                chain,
                eta: o.eta,
                initial: PhaseState::uniform(o.sites, orbit[0], orbit[1]),
                n_periods: o.periods,
                substeps: o.substeps,
            };
            let (lifetime, c) = oscillator::lifetime_at(&setup, o.temperature, seeds, workers)?;
            let mut t = Table::new("autocorrelation", &["n", "correlation"]);
            for (n, v) in c.values().iter().enumerate() {
                t.push(vec![n.to_string(), num(*v)]);
            }
            let tau = match lifetime {
                Lifetime::Finite(x) => x,
                Lifetime::Divergent => f64::INFINITY,
            };
            let mut l = Table::new("lifetime", &["temperature", "tau", "divergent"]);
            l.push(vec![num(o.temperature), num(tau), flag(lifetime.is_divergent())]);
            out.stat("tau", tau);
            out.bundle.plots.push(line(
                "autocorrelation",
                "Stroboscopic autocorrelation",
                "period n",
                "C(n)",
                (0..c.len()).map(|n| n as f64).collect(),
                vec![("C".into(), c.values().to_vec())],
            ));
            out.bundle.tables.push(t);
            out.bundle.tables.push(l);
        }
        _ => unreachable!("name validated"),
    }
    Ok(out)
}

// ---------------------------------------------------------------- pca

fn run_pca(cfg: &ExperimentConfig, p: &PcaConfig, seeds: &[u64], workers: usize) -> Result<Outcome, CliError> {
    let noise = NoiseParams::from_bias(p.bias, p.amplitude)?;
    let model = match p.rule {
        PcaRuleKind::Toom => ScanModel::Toom,
        PcaRuleKind::PiToom => ScanModel::PiToom,
        PcaRuleKind::Glauber => ScanModel::MatchedGlauber,
    };
    let (rule, noise) = pca::scan_cell_dynamics(model, &noise)?;
    let size = (p.size, p.size);
    let mut out = Outcome::default();
    match cfg.name.as_str() {
        "trajectory" => {
            let initial = SpinLattice2D::all_up(p.size, p.size)?;
            let job = |rng: &mut RandomSource| pca::run_pca(&initial, &rule, &noise, p.steps, rng);
            let runs: Vec<_> = run_replicas(&job, seeds, workers)?
                .into_iter()
                .map(|r| r.result.map(|v| (r.seed, v)))
                .collect::<Result<_, _>>()?;
            let mut header = vec!["step".to_string(), "mean".to_string()];
            header.extend(runs.iter().map(|(s, _)| format!("seed_{s}")));
            let mut t = Table {
                name: "magnetization".into(),
                header,
                rows: Vec::new(),
            };
            let len = p.steps + 1;
            let mut mean = vec![0.0; len];
            for (_, r) in &runs {
                for (m, v) in mean.iter_mut().zip(r.magnetization.values()) {
                    *m += v / runs.len() as f64;
                }
            }
            for n in 0..len {
                let mut row = vec![n.to_string(), num(mean[n])];
                row.extend(runs.iter().map(|(_, r)| num(r.magnetization.values()[n])));
                t.rows.push(row);
            }
            out.stat("final_magnetization", mean[len - 1]);
            let subs: Vec<f64> = runs.iter().filter_map(|(_, r)| r.spectrum.as_ref().map(|s| s.subharmonic)).collect();
            if !subs.is_empty() {
                out.stat("subharmonic_amplitude", subs.iter().sum::<f64>() / subs.len() as f64);
            }
            out.bundle.plots.push(line(
                "magnetization",
                "Magnetization",
                "step",
                "m",
                (0..len).map(|n| n as f64).collect(),
                vec![("mean".into(), mean)],
            ));
            out.bundle.tables.push(t);
        }
        "retention" => {
            let job = |rng: &mut RandomSource| pca::retains(&rule, &noise, size, p.steps, rng);
            let mut t = Table::new("retention", &["seed", "retained"]);
            let mut kept = 0usize;
            for r in run_replicas(&job, seeds, workers)? {
                let ok = r.result?;
                kept += ok as usize;
                t.push(vec![r.seed.to_string(), flag(ok)]);
            }
            let n = seeds.len() as f64;
            let prob = kept as f64 / n;
            out.stat("retention", prob);
            out.stat("std_error", (prob * (1.0 - prob) / n).sqrt());
            out.bundle.tables.push(t);
        }
        "lifetime" => {
            let life = pca::memory_lifetime(&rule, &noise, size, p.steps, seeds, workers)?;
            let mut t = Table::new("lifetime", &["seed", "lifetime", "censored"]);
            for (seed, l) in &life.per_seed {
                let v = l.map_or(String::new(), |x| x.to_string());
                t.push(vec![seed.to_string(), v, flag(l.is_none())]);
            }
            out.stat("median_lifetime", life.median.unwrap_or(f64::INFINITY));
            out.stat("censored", life.censored as f64);
            out.bundle.tables.push(t);
        }
        _ => unreachable!("name validated"),
    }
    Ok(out)
}

// ---------------------------------------------------------------- cdw

fn run_cdw(c: &CdwConfig, seeds: &[u64], workers: usize) -> Result<Outcome, CliError> {
    let template = PhaseEomParams {
        omega0_tau: c.omega0_tau,
        e_threshold: c.e_threshold,
        e_dc: 0.0,
        e_ac: c.e_ac,
        omega_d: c.omega_d,
        inertial: c.inertial,
    };
    template.validate()?;
    let grid = linspace(c.e_dc_min, c.e_dc_max, c.e_dc_steps);
    let opts = IvOptions {
        periods: c.periods,
        substeps: c.substeps,
        temperature: c.temperature,
        lock_tolerance: c.lock_tolerance,
        max_denominator: c.max_denominator,
        warm_start: true,
    };
    let job = |rng: &mut RandomSource| -> tcsim_core::Result<StaircaseResult> {
        let mut noise = rng.split(2);
        match c.model {
            CdwModel::Single => cdw::iv_curve(&template, &grid, &opts, Some(&mut noise)),
            CdwModel::Chain => {
                let chain = ChainCdwParams::random(c.sites, c.stiffness, &mut rng.split(1));
                cdw::chain_iv(&chain, &template, &grid, &opts, Some(&mut noise))
            }
        }
    };
    let sweeps: Vec<StaircaseResult> = run_replicas(&job, seeds, workers)?
        .into_iter()
        .map(|r| r.result)
        .collect::<Result<_, _>>()?;
    let mut rates = vec![0.0; grid.len()];
    for s in &sweeps {
        for (r, p) in rates.iter_mut().zip(&s.points) {
            *r += p.winding_rate / sweeps.len() as f64;
        }
    }
    let mut staircase = StaircaseResult::from_rates(c.omega_d, &grid, &rates);
    staircase.detect(c.lock_tolerance, c.max_denominator);

    let mut t = Table::new("staircase", &["E_dc", "winding_rate", "dV_dI"]);
    for p in &staircase.points {
        t.push_nums(&[p.e_dc, p.winding_rate, p.dv_di()]);
    }
    let mut pl = Table::new("plateaus", &["p", "q", "center", "width"]);
    for p in &staircase.plateaus {
        pl.push(vec![p.p.to_string(), p.q.to_string(), num(p.center), num(p.width)]);
    }
    let mut out = Outcome::default();
    out.stat("width_1_2", staircase.width(1, 2));
    out.stat("width_1_1", staircase.width(1, 1));
    out.stat("plateaus", staircase.plateaus.len() as f64);
    out.bundle.plots.push(line(
        "staircase",
        "Winding rate",
        "E_dc",
        "<dtheta/dt> / omega_D",
        grid.clone(),
        vec![("rate".into(), rates.iter().map(|r| r / c.omega_d).collect())],
    ));
    out.bundle.tables.push(t);
    out.bundle.tables.push(pl);
    Ok(out)
}
