//! Dense Floquet operator and quasienergy pairing.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use super::floquet::{chain_step, dense_operator, EvolutionPath, FloquetStep};
use super::params::SpinChainParams;
use crate::error::{Error, Result};

pub const DIAGONALIZE_LIMIT: usize = 10;
const UNITARITY_TOLERANCE: f64 = 1e-8;

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Dense one-period unitary.
#[derive(Debug, Clone)]
pub struct FloquetOperator {
    sites: usize,
    period: f64,
    matrix: Mat<Complex64>,
}

impl FloquetOperator {
    pub fn from_step(step: &dyn FloquetStep) -> Result<Self> {
        if step.sites() > DIAGONALIZE_LIMIT {
            return Err(Error::TooLarge {
                sites: step.sites(),
                limit: DIAGONALIZE_LIMIT,
            });
        }
        let op = Self {
            sites: step.sites(),
            period: step.period(),
            matrix: dense_operator(step),
        };
        let err = op.unitarity_error();
        if !(err < UNITARITY_TOLERANCE) {
            return Err(Error::NonUnitary(err));
        }
        Ok(op)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.matrix
    }

    /// `max |U^dag U - I|` over entries.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for j in 0..p.ncols() {
            for i in 0..p.nrows() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn spectrum(&self) -> Result<QuasienergySpectrum> {
        let dim = self.matrix.nrows();
        let eig = self
            .matrix
            .eigen()
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let values = eig.S().column_vector();
        let vecs = eig.U();
        let phases: Vec<f64> = (0..dim).map(|k| wrap_phase(values[k].arg())).collect();
        let mut v = Mat::from_fn(dim, dim, |i, k| vecs[(i, k)]);
        orthonormalize_clusters(&mut v, &phases);
        let (pairing, cat_overlaps, splittings) = pair_states(&v, &phases);
        Ok(QuasienergySpectrum {
            sites: self.sites,
            period: self.period,
            eigenphases: phases,
            eigenvectors: v,
            pairing,
            splittings,
            cat_overlaps,
        })
    }
}

/// Eigen-decomposition of a Floquet operator with cat-state partners.
///
/// `cat_overlaps[j]` is `sum_a |psi_j(a)| |psi_k(flip(a))|` for the partner
/// `k`, which is 1 when `psi_j` and `psi_k` are the two parity combinations of
/// the same globally flipped pair and does not depend on eigenvector phases.
#[derive(Debug, Clone)]
pub struct QuasienergySpectrum {
    pub sites: usize,
    pub period: f64,
    pub eigenphases: Vec<f64>,
    /// Column `j` is the eigenvector of `eigenphases[j]`.
    pub eigenvectors: Mat<Complex64>,
    pub pairing: Vec<usize>,
    pub splittings: Vec<f64>,
    pub cat_overlaps: Vec<f64>,
}

impl QuasienergySpectrum {
    pub fn quasienergies(&self) -> Vec<f64> {
        self.eigenphases.iter().map(|t| t / self.period).collect()
    }

    pub fn min_splitting(&self) -> f64 {
        self.splittings.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_splitting(&self) -> f64 {
        self.splittings.iter().copied().fold(0.0, f64::max)
    }

    pub fn median_splitting(&self) -> f64 {
        median(&self.splittings)
    }

    /// Magnitude of `<psi_j| prod sigma^x |psi_k>`.
    pub fn parity_matrix_element(&self, j: usize, k: usize) -> f64 {
        let mask = (1usize << self.sites) - 1;
        let v = &self.eigenvectors;
        (0..v.nrows())
            .map(|a| v[(a, j)].conj() * v[(a ^ mask, k)])
            .sum::<Complex64>()
            .norm()
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Spectrum of a realized chain.
pub fn floquet_spectrum(params: &SpinChainParams) -> Result<QuasienergySpectrum> {
    if params.sites > DIAGONALIZE_LIMIT {
        return Err(Error::TooLarge {
            sites: params.sites,
            limit: DIAGONALIZE_LIMIT,
        });
    }
    let step = chain_step(params, EvolutionPath::Auto)?;
    FloquetOperator::from_step(step.as_ref())?.spectrum()
}

/// Spectrum of any propagator small enough to diagonalize.
pub fn floquet_spectrum_of(step: &dyn FloquetStep) -> Result<QuasienergySpectrum> {
    FloquetOperator::from_step(step)?.spectrum()
}

/// Normalize all columns and re-orthonormalize columns whose eigenphases are
/// numerically degenerate.
fn orthonormalize_clusters(v: &mut Mat<Complex64>, phases: &[f64]) {
    let dim = v.nrows();
    let mut order: Vec<usize> = (0..phases.len()).collect();
    order.sort_by(|a, b| phases[*a].total_cmp(&phases[*b]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match clusters.last_mut() {
            Some(c) if (phases[k] - phases[*c.last().unwrap()]).abs() < 1e-9 => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    // The cluster touching -pi may continue across +pi.
    if clusters.len() > 1 {
        let first = phases[clusters[0][0]];
        let last = phases[*clusters.last().unwrap().last().unwrap()];
        if first + 2.0 * PI - last < 1e-9 {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }
    for cluster in clusters {
        for (n, &k) in cluster.iter().enumerate() {
            for &prev in &cluster[..n] {
                let proj: Complex64 = (0..dim).map(|a| v[(a, prev)].conj() * v[(a, k)]).sum();
                for a in 0..dim {
                    let p = v[(a, prev)];
                    v[(a, k)] -= proj * p;
                }
            }
            let norm: f64 = (0..dim).map(|a| v[(a, k)].norm_sqr()).sum::<f64>().sqrt();
            for a in 0..dim {
                v[(a, k)] /= norm;
            }
        }
    }
}

fn splitting(theta_j: f64, theta_k: f64) -> f64 {
    wrap_phase(theta_j - theta_k - PI).abs()
}

/// Greedy maximum-overlap matching; ties go to the smaller splitting.
fn pair_states(
    v: &Mat<Complex64>,
    phases: &[f64],
) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let dim = v.nrows();
    let mask = dim - 1;
    let abs = Mat::<f64>::from_fn(dim, dim, |a, j| v[(a, j)].norm());
    let flipped = Mat::<f64>::from_fn(dim, dim, |a, k| abs[(a ^ mask, k)]);
    let overlap = abs.transpose() * &flipped;

    let mut candidates: Vec<(i64, f64, usize, usize)> = Vec::with_capacity(dim * (dim - 1) / 2);
    for j in 0..dim {
        for k in (j + 1)..dim {
            let b = 0.5 * (overlap[(j, k)] + overlap[(k, j)]);
            let key = -(b * 1e10).round() as i64;
            candidates.push((key, splitting(phases[j], phases[k]), j, k));
        }
    }
    candidates.sort_by(|x, y| {
        x.0.cmp(&y.0)
            .then(x.1.total_cmp(&y.1))
            .then(x.2.cmp(&y.2))
            .then(x.3.cmp(&y.3))
    });

    let mut pairing = vec![usize::MAX; dim];
    let mut cat = vec![0.0; dim];
    let mut split = vec![0.0; dim];
    let mut left = dim;
    for (_, s, j, k) in candidates {
        if left < 2 {
            break;
        }
        if pairing[j] != usize::MAX || pairing[k] != usize::MAX {
            continue;
        }
        let b = 0.5 * (overlap[(j, k)] + overlap[(k, j)]);
        pairing[j] = k;
        pairing[k] = j;
        cat[j] = b;
        cat[k] = b;
        split[j] = s;
        split[k] = s;
        left -= 2;
    }
    // A lone state (dimension 1 only) is its own partner.
    for j in 0..dim {
        if pairing[j] == usize::MAX {
            pairing[j] = j;
            split[j] = splitting(phases[j], phases[j]);
        }
    }
    (pairing, cat, split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::params::MblDisorder;
    use crate::rng::RandomSource;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_phase(0.1) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn pairing_is_an_involution() {
        let p = MblDisorder::strong(5, 0.1).realize(&mut RandomSource::from_seed(11));
        let spec = floquet_spectrum(&p).unwrap();
        for (j, &k) in spec.pairing.iter().enumerate() {
            assert_ne!(j, k);
            assert_eq!(spec.pairing[k], j);
        }
        assert!(spec.splittings.iter().all(|s| *s >= 0.0));
        assert!(spec.eigenphases.iter().all(|t| *t > -PI && *t <= PI));
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let p = MblDisorder::strong(4, 0.2).realize(&mut RandomSource::from_seed(1));
        let spec = floquet_spectrum(&p).unwrap();
        let g = spec.eigenvectors.adjoint() * &spec.eigenvectors;
        for i in 0..16 {
            for j in 0..16 {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - t).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn too_large_is_rejected() {
        let p = SpinChainParams::new(11, 1.0, 1.0);
        assert!(matches!(floquet_spectrum(&p), Err(Error::TooLarge { .. })));
    }
}
