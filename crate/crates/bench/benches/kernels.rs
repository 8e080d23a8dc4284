use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use tcsim_core::cdw::{integrate_phase, PhaseEomParams, PhaseOptions};
use tcsim_core::oscillator::{
    integrate_chain_langevin, mathieu, mathieu_monodromy, BathParams, Boundary, ChainParams, DriveParams,
    IntegrationOptions, PhaseState,
};
use tcsim_core::pca::{step_rule, PcaRule, SpinLattice2D};
use tcsim_core::quantum::{build_mbl_floquet, floquet_spectrum_of, EvolutionPath, FloquetStep, MblDisorder, StateVector};
use tcsim_core::RandomSource;

fn floquet(c: &mut Criterion) {
    let mut rng = RandomSource::new(1, 0);
    for sites in [10, 14] {
        let step = build_mbl_floquet(&MblDisorder::strong(sites, 0.05), EvolutionPath::Auto, &mut rng).unwrap();
        let psi = StateVector::random_bitstring(sites, &mut rng);
        c.bench_function(&format!("floquet_period_L{sites}"), |b| {
            b.iter_batched_ref(|| psi.clone(), |s| step.apply(s), BatchSize::LargeInput)
        });
    }
    let step = build_mbl_floquet(&MblDisorder::strong(8, 0.05), EvolutionPath::Auto, &mut rng).unwrap();
    let mut slow = c.benchmark_group("diagonalize");
    slow.sample_size(10);
    slow.bench_function("quasienergy_spectrum_L8", |b| {
        b.iter(|| floquet_spectrum_of(step.as_ref()).unwrap())
    });
    slow.finish();
}

fn oscillators(c: &mut Criterion) {
    c.bench_function("mathieu_monodromy", |b| {
        b.iter(|| mathieu_monodromy(black_box(1.0), black_box(0.4), 0.0, mathieu::MIN_SUBSTEPS).unwrap())
    });
    let drive = DriveParams {
        phase: std::f64::consts::PI,
        ..DriveParams::new(1.0, 0.4, 2.0, 1.0)
    };
    let chain = ChainParams::new(32, -0.2, Boundary::Periodic);
    let bath = BathParams::new(0.05, 0.06);
    let state = PhaseState::uniform(32, 0.5, 0.0);
    let opts = IntegrationOptions::new(20);
    c.bench_function("langevin_chain_N32_20_periods", |b| {
        b.iter(|| {
            let mut rng = RandomSource::new(3, 0);
            integrate_chain_langevin(&drive, &chain, &bath, &state, &opts, &mut rng).unwrap()
        })
    });
}

fn automata(c: &mut Criterion) {
    let lattice = SpinLattice2D::all_up(128, 128).unwrap();
    for (name, rule) in [("toom_step_128", PcaRule::ToomNec), ("pi_toom_step_128", PcaRule::PiToom)] {
        c.bench_function(name, |b| b.iter(|| step_rule(black_box(&lattice), &rule).unwrap()));
    }
}

fn cdw(c: &mut Criterion) {
    let params = PhaseEomParams::inertial(3.0, 0.3).with_drive(0.8, 0.8);
    let opts = PhaseOptions::periods(&params, 200.0);
    c.bench_function("cdw_inertial_200_periods", |b| {
        b.iter(|| integrate_phase(&params, &opts, None, None).unwrap())
    });
}

criterion_group!(benches, floquet, oscillators, automata, cdw);
criterion_main!(benches);
