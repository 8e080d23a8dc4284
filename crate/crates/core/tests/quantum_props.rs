use num_complex::Complex64;
use proptest::prelude::*;

use tcsim_core::quantum::{
    chain_step, floquet_spectrum, EvolutionPath, FloquetOperator, MblDisorder, SpinChainParams, StateVector,
};
use tcsim_core::RandomSource;

fn chain(sites: usize, eps: f64, hx: f64, seed: u64) -> SpinChainParams {
    let mut d = MblDisorder::strong(sites, eps);
    d.hx = hx;
    d.realize(&mut RandomSource::from_seed(seed))
}

/// `X U X` with `X = prod_i sigma^x_i`, as a matrix over basis indices.
fn conjugated_by_parity(u: &faer::Mat<Complex64>, sites: usize) -> faer::Mat<Complex64> {
    let mask = (1usize << sites) - 1;
    faer::Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i ^ mask, j ^ mask)])
}

fn commutator_norm(a: &faer::Mat<Complex64>, b: &faer::Mat<Complex64>) -> f64 {
    let c = a * b - b * a;
    c.norm_l2()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_preserves_norm(sites in 1usize..=7, eps in 0.0f64..0.3, hx in prop_oneof![Just(0.0), 0.05f64..0.5], seed in 0u64..1000) {
        let step = chain_step(&chain(sites, eps, hx, seed), EvolutionPath::Auto).unwrap();
        let mut psi = StateVector::random_bitstring(sites, &mut RandomSource::new(seed, 1));
        for _ in 0..30 {
            step.apply(&mut psi);
        }
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_undoes_forward(sites in 1usize..=6, eps in 0.0f64..0.3, hx in 0.0f64..0.4, seed in 0u64..1000) {
        let step = chain_step(&chain(sites, eps, hx, seed), EvolutionPath::Auto).unwrap();
        let init = StateVector::random_bitstring(sites, &mut RandomSource::new(seed, 2));
        let mut psi = init.clone();
        for _ in 0..10 {
            step.apply(&mut psi);
        }
        for _ in 0..10 {
            step.apply_inverse(&mut psi);
        }
        prop_assert!((psi.inner(&init).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn floquet_operator_is_unitary(sites in 1usize..=6, eps in 0.0f64..0.3, hx in 0.0f64..0.4, seed in 0u64..1000) {
        let step = chain_step(&chain(sites, eps, hx, seed), EvolutionPath::Auto).unwrap();
        let op = FloquetOperator::from_step(step.as_ref()).unwrap();
        prop_assert!(op.unitarity_error() < 1e-10);
    }

    #[test]
    fn fast_and_dense_paths_agree(sites in 1usize..=6, eps in 0.0f64..0.3, seed in 0u64..1000) {
        let p = chain(sites, eps, 0.0, seed);
        let fast = chain_step(&p, EvolutionPath::Fast).unwrap();
        let dense = chain_step(&p, EvolutionPath::Dense).unwrap();
        let mut a = StateVector::random_bitstring(sites, &mut RandomSource::new(seed, 3));
        let mut b = a.clone();
        for _ in 0..5 {
            fast.apply(&mut a);
            dense.apply(&mut b);
        }
        prop_assert!((a.inner(&b).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pairing_is_an_involution(sites in 2usize..=6, eps in 0.0f64..0.2, seed in 0u64..1000) {
        let s = floquet_spectrum(&chain(sites, eps, 0.0, seed)).unwrap();
        for (j, &k) in s.pairing.iter().enumerate() {
            prop_assert_eq!(s.pairing[k], j);
            prop_assert!(k != j);
        }
    }

    #[test]
    fn cat_overlap_ignores_eigenvector_phases(sites in 2usize..=5, seed in 0u64..1000, phi in 0.0f64..6.28) {
        let mut s = floquet_spectrum(&chain(sites, 0.0, 0.0, seed)).unwrap();
        let before: Vec<f64> = (0..s.pairing.len()).map(|j| s.parity_matrix_element(j, s.pairing[j])).collect();
        let rot = Complex64::from_polar(1.0, phi);
        for j in (0..s.eigenvectors.ncols()).step_by(2) {
            for a in 0..s.eigenvectors.nrows() {
                s.eigenvectors[(a, j)] *= rot;
            }
        }
        for (j, b) in before.iter().enumerate() {
            prop_assert!((s.parity_matrix_element(j, s.pairing[j]) - b).abs() < 1e-12);
        }
    }
}

#[test]
fn parity_commutes_with_floquet_operator_without_fields() {
    let mut rng = RandomSource::from_seed(5);
    for sites in 2..=6 {
        let js: Vec<f64> = (0..sites - 1).map(|_| rng.uniform_in(0.3, 1.2)).collect();
        let p = SpinChainParams::new(sites, 1.0, 1.0)
            .with_pulse_error(0.07)
            .with_nearest_neighbor(&js)
            .with_fields(vec![0.0; sites], vec![0.0; sites], vec![0.0; sites]);
        let u = FloquetOperator::from_step(chain_step(&p, EvolutionPath::Auto).unwrap().as_ref()).unwrap();
        let xux = conjugated_by_parity(u.matrix(), sites);
        assert!(commutator_norm(u.matrix(), &xux) < 1e-10, "L = {sites}");
    }
}

#[test]
fn longitudinal_field_breaks_parity_commutation() {
    let p = chain(4, 0.07, 0.0, 9);
    let u = FloquetOperator::from_step(chain_step(&p, EvolutionPath::Auto).unwrap().as_ref()).unwrap();
    let xux = conjugated_by_parity(u.matrix(), 4);
    assert!(commutator_norm(u.matrix(), &xux) > 1e-3);
}

#[test]
fn solvable_limit_splittings_vanish_for_every_size() {
    for sites in 1..=7 {
        let s = floquet_spectrum(&chain(sites, 0.0, 0.0, sites as u64)).unwrap();
        assert!(s.max_splitting() < 1e-10, "L = {sites}: {}", s.max_splitting());
        assert!(s.cat_overlaps.iter().all(|c| *c > 1.0 - 1e-10));
    }
}
