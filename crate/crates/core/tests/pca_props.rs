use std::collections::BTreeMap;

use proptest::prelude::*;

use tcsim_core::pca::{step_rule, GlauberSweeper, PcaRule, SpinLattice2D};
use tcsim_core::RandomSource;

fn lattice(lx: usize, ly: usize, seed: u64) -> SpinLattice2D {
    SpinLattice2D::random(lx, ly, &mut RandomSource::from_seed(seed)).unwrap()
}

/// Raise every down spin of `base` with probability one half.
fn raised(base: &SpinLattice2D, seed: u64) -> SpinLattice2D {
    let mut rng = RandomSource::new(seed, 7);
    let mut out = base.clone();
    for y in 0..base.ly() {
        for x in 0..base.lx() {
            if base.get(x, y) < 0 && rng.bernoulli(0.5) {
                out.set(x, y, 1);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn toom_is_monotone(lx in 1usize..140, ly in 1usize..12, seed in 0u64..10_000) {
        let low = lattice(lx, ly, seed);
        let high = raised(&low, seed);
        prop_assert!(high.dominates(&low));
        let (a, b) = (step_rule(&high, &PcaRule::ToomNec).unwrap(), step_rule(&low, &PcaRule::ToomNec).unwrap());
        prop_assert!(a.dominates(&b));
    }

    #[test]
    fn toom_commutes_with_global_flip(lx in 1usize..140, ly in 1usize..12, seed in 0u64..10_000) {
        let l = lattice(lx, ly, seed);
        let direct = step_rule(&l.flipped(), &PcaRule::ToomNec).unwrap();
        prop_assert_eq!(direct, step_rule(&l, &PcaRule::ToomNec).unwrap().flipped());
    }

    #[test]
    fn pi_toom_is_negated_toom(lx in 1usize..140, ly in 1usize..12, seed in 0u64..10_000) {
        let l = lattice(lx, ly, seed);
        let pi = step_rule(&l, &PcaRule::PiToom).unwrap();
        prop_assert_eq!(pi, step_rule(&l, &PcaRule::ToomNec).unwrap().flipped());
    }

    #[test]
    fn toom_matches_reference_majority(lx in 1usize..80, ly in 1usize..8, seed in 0u64..10_000) {
        let l = lattice(lx, ly, seed);
        let next = step_rule(&l, &PcaRule::ToomNec).unwrap();
        for y in 0..ly {
            for x in 0..lx {
                let sum = l.get(x, y) + l.get((x + 1) % lx, y) + l.get(x, (y + 1) % ly);
                prop_assert_eq!(next.get(x, y), sum.signum());
            }
        }
    }
}

fn energy_and_magnetization(spins: &[i8], lx: usize, ly: usize) -> (i64, i64) {
    let mut e = 0i64;
    for y in 0..ly {
        for x in 0..lx {
            let s = spins[y * lx + x] as i64;
            e -= s * spins[y * lx + (x + 1) % lx] as i64;
            e -= s * spins[((y + 1) % ly) * lx + x] as i64;
        }
    }
    (e, spins.iter().map(|&s| s as i64).sum())
}

#[test]
fn glauber_samples_the_boltzmann_distribution() {
    let (lx, ly) = (4usize, 4usize);
    let (temperature, field) = (2.5, 0.3);
    let n = lx * ly;

    // exact weights of each (E, M) class
    let mut exact: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    let mut z = 0.0;
    for bits in 0u32..(1 << n) {
        let spins: Vec<i8> = (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect();
        let (e, m) = energy_and_magnetization(&spins, lx, ly);
        let w = (-(e as f64 - field * m as f64) / temperature).exp();
        *exact.entry((e, m)).or_default() += w;
        z += w;
    }
    exact.values_mut().for_each(|w| *w /= z);

    let mut g = GlauberSweeper::new(&SpinLattice2D::all_up(lx, ly).unwrap(), temperature, field).unwrap();
    let mut rng = RandomSource::from_seed(21);
    for _ in 0..1000 {
        g.sweep(&mut rng);
    }
    let samples = 200_000;
    let mut seen: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    for _ in 0..samples {
        for _ in 0..3 {
            g.sweep(&mut rng);
        }
        *seen.entry(energy_and_magnetization(g.spins(), lx, ly)).or_default() += 1.0 / samples as f64;
    }
    let tv: f64 = exact
        .iter()
        .map(|(k, p)| (p - seen.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.01, "total variation distance {tv}");
    for (k, f) in &seen {
        assert!(exact.contains_key(k), "impossible class {k:?} with frequency {f}");
    }
}

#[test]
fn glauber_at_wrong_temperature_is_detectably_different() {
    // the same statistic must be able to fail
    let (lx, ly) = (4usize, 4usize);
    let n = lx * ly;
    let mut exact: BTreeMap<i64, f64> = BTreeMap::new();
    let mut z = 0.0;
    for bits in 0u32..(1 << n) {
        let spins: Vec<i8> = (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect();
        let (e, _) = energy_and_magnetization(&spins, lx, ly);
        let w = (-(e as f64) / 2.5).exp();
        *exact.entry(e).or_default() += w;
        z += w;
    }
    let mut g = GlauberSweeper::new(&SpinLattice2D::all_up(lx, ly).unwrap(), 3.0, 0.0).unwrap();
    let mut rng = RandomSource::from_seed(22);
    let samples = 50_000;
    let mut seen: BTreeMap<i64, f64> = BTreeMap::new();
    for _ in 0..samples {
        for _ in 0..3 {
            g.sweep(&mut rng);
        }
        *seen.entry(energy_and_magnetization(g.spins(), lx, ly).0).or_default() += 1.0 / samples as f64;
    }
    let tv: f64 = exact.iter().map(|(k, w)| (w / z - seen.get(k).copied().unwrap_or(0.0)).abs()).sum::<f64>() / 2.0;
    assert!(tv > 0.03, "total variation distance {tv}");
}
