//! Linear stability of the damped Mathieu equation
//! `x'' = -[omega0^2 + delta' cos(omega_d t)] x - c x'`.
//!
//! Units are fixed by `omega_d = 2` (period `pi`), so `a = omega0^2` and
//! `delta' = delta * a`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{precondition, Error, Result};

pub const MIN_SUBSTEPS: usize = 512;
pub const DEFAULT_SUBSTEPS: usize = 1024;
const STABILITY_SLACK: f64 = 1e-9;

type M2 = [[f64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// `exp(m)` for a real 2x2 matrix, exact up to rounding.
fn expm(m: &M2) -> M2 {
    let s = 0.5 * (m[0][0] + m[1][1]);
    let n = [[m[0][0] - s, m[0][1]], [m[1][0], m[1][1] - s]];
    // n is traceless, so n^2 = mu2 I
    let mu2 = n[0][0] * n[0][0] + n[0][1] * n[1][0];
    let (ch, sh) = if mu2 > 0.0 {
        let mu = mu2.sqrt();
        (mu.cosh(), mu.sinh() / mu)
    } else if mu2 < 0.0 {
        let mu = (-mu2).sqrt();
        (mu.cos(), mu.sin() / mu)
    } else {
        (1.0, 1.0)
    };
    let e = s.exp();
    [
        [e * (ch + sh * n[0][0]), e * sh * n[0][1]],
        [e * sh * n[1][0], e * (ch + sh * n[1][1])],
    ]
}

/// One-period propagator eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Monodromy {
    pub matrix: [[f64; 2]; 2],
    pub multipliers: [Complex64; 2],
    pub stable: bool,
}

impl Monodromy {
    pub fn max_modulus(&self) -> f64 {
        self.multipliers[0].norm().max(self.multipliers[1].norm())
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

/// Monodromy of the damped Mathieu equation over one drive period.
///
/// Fourth-order Magnus steps with exact 2x2 exponentials keep the
/// determinant equal to `exp(-c pi)` to rounding.
pub fn mathieu_monodromy(a: f64, delta: f64, c: f64, substeps: usize) -> Result<Monodromy> {
    if substeps < MIN_SUBSTEPS {
        return Err(precondition(format!(
            "need at least {MIN_SUBSTEPS} substeps per period, got {substeps}"
        )));
    }
    let period = PI;
    let h = period / substeps as f64;
    let dp = delta * a;
    let gen = |t: f64| -> M2 { [[0.0, 1.0], [-(a + dp * (2.0 * t).cos()), -c]] };
    let r = 3f64.sqrt() / 6.0;
    let mut phi: M2 = [[1.0, 0.0], [0.0, 1.0]];
    for k in 0..substeps {
        let t0 = k as f64 * h;
        let a1 = gen(t0 + (0.5 - r) * h);
        let a2 = gen(t0 + (0.5 + r) * h);
        let comm = {
            let x = mul(&a2, &a1);
            let y = mul(&a1, &a2);
            [[x[0][0] - y[0][0], x[0][1] - y[0][1]], [x[1][0] - y[1][0], x[1][1] - y[1][1]]]
        };
        let w = 3f64.sqrt() * h * h / 12.0;
        let omega = [
            [
                0.5 * h * (a1[0][0] + a2[0][0]) + w * comm[0][0],
                0.5 * h * (a1[0][1] + a2[0][1]) + w * comm[0][1],
            ],
            [
                0.5 * h * (a1[1][0] + a2[1][0]) + w * comm[1][0],
                0.5 * h * (a1[1][1] + a2[1][1]) + w * comm[1][1],
            ],
        ];
        phi = mul(&expm(&omega), &phi);
    }
    if phi.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("monodromy matrix".into()));
    }
    let tr = phi[0][0] + phi[1][1];
    let det = phi[0][0] * phi[1][1] - phi[0][1] * phi[1][0];
    let disc = Complex64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    let half = Complex64::new(tr / 2.0, 0.0);
    let multipliers = [half + disc, half - disc];
    let max = multipliers[0].norm().max(multipliers[1].norm());
    Ok(Monodromy {
        matrix: phi,
        multipliers,
        stable: max <= 1.0 + STABILITY_SLACK,
    })
}

/// Leading-order edges of the first tongue, `a = 1 / (1 -+ delta/2)`.
pub fn first_tongue_asymptote(delta: f64) -> (f64, f64) {
    (1.0 / (1.0 + delta / 2.0), 1.0 / (1.0 - delta / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub a_min: f64,
    pub a_max: f64,
    pub a_steps: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_steps: usize,
}

impl GridSpec {
    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    pub fn a_values(&self) -> Vec<f64> {
        Self::axis(self.a_min, self.a_max, self.a_steps)
    }

    pub fn delta_values(&self) -> Vec<f64> {
        Self::axis(self.delta_min, self.delta_max, self.delta_steps)
    }
}

/// Stability over an `(a, delta)` grid, row-major with `delta` as the row.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityChart {
    pub a_values: Vec<f64>,
    pub delta_values: Vec<f64>,
    pub damping: f64,
    pub max_multiplier: Vec<f64>,
    pub stable: Vec<bool>,
    /// Largest `|det M - exp(-c pi)|` seen while filling the chart.
    pub max_determinant_error: f64,
}

impl StabilityChart {
    pub fn index(&self, i_delta: usize, i_a: usize) -> usize {
        i_delta * self.a_values.len() + i_a
    }

    pub fn is_stable(&self, i_delta: usize, i_a: usize) -> bool {
        self.stable[self.index(i_delta, i_a)]
    }

    pub fn unstable_count(&self) -> usize {
        self.stable.iter().filter(|s| !**s).count()
    }

    /// Cells whose stability differs from a grid neighbour.
    pub fn boundary_cells(&self) -> Vec<(usize, usize)> {
        let (nd, na) = (self.delta_values.len(), self.a_values.len());
        let mut out = Vec::new();
        for i in 0..nd {
            for j in 0..na {
                let s = self.is_stable(i, j);
                let differs = (i > 0 && self.is_stable(i - 1, j) != s)
                    || (i + 1 < nd && self.is_stable(i + 1, j) != s)
                    || (j > 0 && self.is_stable(i, j - 1) != s)
                    || (j + 1 < na && self.is_stable(i, j + 1) != s);
                if differs {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

pub fn tongue_boundary_scan(grid: &GridSpec, c: f64, substeps: usize) -> Result<StabilityChart> {
    if grid.a_steps < 32 || grid.delta_steps < 32 {
        return Err(precondition("stability grid must be at least 32 x 32"));
    }
    let a_values = grid.a_values();
    let delta_values = grid.delta_values();
    let target = (-c * PI).exp();
    let mut max_multiplier = Vec::with_capacity(a_values.len() * delta_values.len());
    let mut stable = Vec::with_capacity(max_multiplier.capacity());
    let mut det_err = 0.0f64;
    for &d in &delta_values {
        for &a in &a_values {
            let m = mathieu_monodromy(a, d, c, substeps)?;
            det_err = det_err.max((m.determinant() - target).abs());
            max_multiplier.push(m.max_modulus());
            stable.push(m.stable);
        }
    }
    Ok(StabilityChart {
        a_values,
        delta_values,
        damping: c,
        max_multiplier,
        stable,
        max_determinant_error: det_err,
    })
}

/// Smallest `delta` in `(0, delta_max]` that is unstable at fixed `a`,
/// located by a coarse scan and bisection to `tol`.
pub fn instability_onset(
    a: f64,
    c: f64,
    delta_max: f64,
    tol: f64,
    substeps: usize,
) -> Result<Option<f64>> {
    let unstable = |d: f64| mathieu_monodromy(a, d, c, substeps).map(|m| !m.stable);
    let coarse = 64;
    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=coarse {
        let d = delta_max * k as f64 / coarse as f64;
        if unstable(d)? {
            hi = Some(d);
            break;
        }
        lo = d;
    }
    let Some(mut hi) = hi else {
        return Ok(None);
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if unstable(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Edge of the first tongue on one side of `a = 1` at fixed `delta`, found
/// by bisection between the tongue centre and `a_far`.
pub fn tongue_edge(delta: f64, c: f64, a_far: f64, tol: f64, substeps: usize) -> Result<f64> {
    let stable = |a: f64| mathieu_monodromy(a, delta, c, substeps).map(|m| m.stable);
    let (mut inside, mut outside) = (1.0, a_far);
    if stable(inside)? || !stable(outside)? {
        return Err(precondition("a = 1 must be unstable and a_far stable"));
    }
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        if stable(mid)? {
            outside = mid;
        } else {
            inside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_matches_series() {
        let m = [[0.1, 0.7], [-0.3, -0.2]];
        let mut term: M2 = [[1.0, 0.0], [0.0, 1.0]];
        let mut sum = term;
        for k in 1..30 {
            term = mul(&term, &m);
            let f = (1..=k).map(|x| x as f64).product::<f64>();
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += term[i][j] / f;
                }
            }
        }
        let e = expm(&m);
        for i in 0..2 {
            for j in 0..2 {
                assert!((e[i][j] - sum[i][j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn undriven_multipliers_on_unit_circle() {
        for a in [0.3, 1.7, 4.2] {
            let m = mathieu_monodromy(a, 0.0, 0.0, 512).unwrap();
            for l in m.multipliers {
                assert!((l.norm() - 1.0).abs() < 1e-9);
            }
            let phi = PI * a.sqrt();
            assert!((m.multipliers[0].re - phi.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn determinant_is_damping_factor() {
        for (a, d, c) in [(1.0, 0.3, 0.2), (2.5, 1.1, 0.05), (0.4, 0.0, 1.3)] {
            let m = mathieu_monodromy(a, d, c, 512).unwrap();
            assert!((m.determinant() - (-c * PI).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn too_few_substeps() {
        assert!(mathieu_monodromy(1.0, 0.1, 0.0, 100).is_err());
    }

    #[test]
    fn centre_of_first_tongue_is_unstable() {
        assert!(!mathieu_monodromy(1.0, 0.05, 0.0, 512).unwrap().stable);
        assert!(mathieu_monodromy(1.5, 0.05, 0.0, 512).unwrap().stable);
    }
}
