//! Spin-chain parameters and disorder ensembles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::RandomSource;

/// Fully realized two-segment Floquet chain.
///
/// Segment one evolves for `t1` under
/// `H1 = -sum_{i<j} J_ij sz_i sz_j - sum_i (hz_i sz_i + hy_i sy_i + hx_i sx_i)`,
/// segment two for `t2` under `H2 = g sum_i sx_i`. A perfect pi pulse is
/// `g t2 = pi/2`; the pulse error `eps` is defined by `g t2 = (pi/2)(1 - eps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinChainParams {
    pub sites: usize,
    /// Row-major `sites x sites`, symmetric with zero diagonal.
    pub couplings: Vec<f64>,
    pub hx: Vec<f64>,
    pub hy: Vec<f64>,
    pub hz: Vec<f64>,
    pub g: f64,
    pub t1: f64,
    pub t2: f64,
}

impl SpinChainParams {
    /// Free chain with a perfect pi pulse.
    pub fn new(sites: usize, t1: f64, t2: f64) -> Self {
        Self {
            sites,
            couplings: vec![0.0; sites * sites],
            hx: vec![0.0; sites],
            hy: vec![0.0; sites],
            hz: vec![0.0; sites],
            g: PI / (2.0 * t2),
            t1,
            t2,
        }
    }

    pub fn with_pulse_error(mut self, eps: f64) -> Self {
        self.g = PI * (1.0 - eps) / (2.0 * self.t2);
        self
    }

    pub fn pulse_error(&self) -> f64 {
        1.0 - 2.0 * self.g * self.t2 / PI
    }

    /// Open-chain nearest-neighbour couplings `J_{i,i+1} = js[i]`.
    pub fn with_nearest_neighbor(mut self, js: &[f64]) -> Self {
        self.couplings = vec![0.0; self.sites * self.sites];
        for (i, &j) in js.iter().enumerate().take(self.sites.saturating_sub(1)) {
            self.set_coupling(i, i + 1, j);
        }
        self
    }

    /// `J_ij = j0 / |i - j|^alpha` on an open chain.
    pub fn with_power_law(mut self, j0: f64, alpha: f64) -> Self {
        for i in 0..self.sites {
            for j in (i + 1)..self.sites {
                self.set_coupling(i, j, j0 / ((j - i) as f64).powf(alpha));
            }
        }
        self
    }

    pub fn with_fields(mut self, hx: Vec<f64>, hy: Vec<f64>, hz: Vec<f64>) -> Self {
        self.hx = hx;
        self.hy = hy;
        self.hz = hz;
        self
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.sites + j]
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, value: f64) {
        self.couplings[i * self.sites + j] = value;
        self.couplings[j * self.sites + i] = value;
    }

    pub fn period(&self) -> f64 {
        self.t1 + self.t2
    }

    /// True when the first segment is diagonal in the `sigma^z` basis.
    pub fn is_longitudinal(&self) -> bool {
        self.hx.iter().chain(&self.hy).all(|h| *h == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 {
            return Err(invalid("sites", "need at least one site"));
        }
        if !(self.t1 > 0.0 && self.t2 > 0.0) {
            return Err(invalid("t1/t2", "segment durations must be positive"));
        }
        if self.couplings.len() != self.sites * self.sites {
            return Err(invalid("couplings", "matrix must be sites x sites"));
        }
        for i in 0..self.sites {
            if self.coupling(i, i) != 0.0 {
                return Err(invalid("couplings", format!("diagonal entry {i} is nonzero")));
            }
            for j in 0..i {
                if self.coupling(i, j) != self.coupling(j, i) {
                    return Err(invalid("couplings", format!("J[{i}][{j}] != J[{j}][{i}]")));
                }
            }
        }
        for (name, f) in [("hx", &self.hx), ("hy", &self.hy), ("hz", &self.hz)] {
            if f.len() != self.sites {
                return Err(invalid(name, "field vector length must equal sites"));
            }
        }
        let all = self
            .couplings
            .iter()
            .chain(&self.hx)
            .chain(&self.hy)
            .chain(&self.hz)
            .chain([&self.g, &self.t1, &self.t2]);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(invalid("params", "all parameters must be finite"));
        }
        Ok(())
    }

    /// Energy of `H1` on a computational basis state when it is diagonal.
    pub fn diagonal_energy(&self, index: usize) -> f64 {
        let s = |i: usize| if index >> i & 1 == 0 { 1.0 } else { -1.0 };
        let mut e = 0.0;
        for i in 0..self.sites {
            e -= self.hz[i] * s(i);
            for j in (i + 1)..self.sites {
                let jij = self.coupling(i, j);
                if jij != 0.0 {
                    e -= jij * s(i) * s(j);
                }
            }
        }
        e
    }
}

/// Disorder ensemble for the two-segment chain.
///
/// Ranges are given as dimensionless phases (`J t1`, `h t1`). Couplings are
/// nearest-neighbour. The coupling draws are always consumed, then scaled by
/// `interaction_scale`, so an interacting and a non-interacting chain built
/// from the same seed share their fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MblDisorder {
    pub sites: usize,
    pub t1: f64,
    pub t2: f64,
    pub epsilon: f64,
    pub coupling_range: (f64, f64),
    pub field_range: (f64, f64),
    pub interaction_scale: f64,
    /// Uniform transverse fields; nonzero values force the dense path.
    pub hx: f64,
    pub hy: f64,
}

impl MblDisorder {
    /// `J t1 ~ U[pi/8, 3pi/8]`, `hz t1 ~ U[0, pi]`, no transverse field.
    pub fn strong(sites: usize, epsilon: f64) -> Self {
        Self {
            sites,
            t1: 1.0,
            t2: 1.0,
            epsilon,
            coupling_range: (PI / 8.0, 3.0 * PI / 8.0),
            field_range: (0.0, PI),
            interaction_scale: 1.0,
            hx: 0.0,
            hy: 0.0,
        }
    }

    pub fn non_interacting(mut self) -> Self {
        self.interaction_scale = 0.0;
        self
    }

    pub fn realize(&self, rng: &mut RandomSource) -> SpinChainParams {
        let l = self.sites;
        let js: Vec<f64> = (0..l.saturating_sub(1))
            .map(|_| {
                self.interaction_scale * rng.uniform_in(self.coupling_range.0, self.coupling_range.1)
                    / self.t1
            })
            .collect();
        let hz: Vec<f64> = (0..l)
            .map(|_| rng.uniform_in(self.field_range.0, self.field_range.1) / self.t1)
            .collect();
        SpinChainParams::new(l, self.t1, self.t2)
            .with_pulse_error(self.epsilon)
            .with_nearest_neighbor(&js)
            .with_fields(vec![self.hx; l], vec![self.hy; l], hz)
    }
}

/// Long-range ion-style chain: ferromagnetic `J0/|i-j|^alpha` Ising
/// couplings plus a uniform transverse `B_y`, kicked by a global pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonChain {
    pub sites: usize,
    pub j0: f64,
    pub alpha: f64,
    pub b_y: f64,
    pub t1: f64,
    pub t2: f64,
    pub epsilon: f64,
}

impl IonChain {
    pub fn new(sites: usize) -> Self {
        Self {
            sites,
            j0: 1.0,
            alpha: 1.5,
            b_y: 0.3,
            t1: 0.5,
            t2: 1.0,
            epsilon: 0.03,
        }
    }

    pub fn params(&self) -> SpinChainParams {
        SpinChainParams::new(self.sites, self.t1, self.t2)
            .with_pulse_error(self.epsilon)
            .with_power_law(self.j0, self.alpha)
            .with_fields(
                vec![0.0; self.sites],
                vec![self.b_y; self.sites],
                vec![0.0; self.sites],
            )
    }
}

/// Disorder ensemble for the digital circuit with pulse fraction `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SycamoreDisorder {
    pub sites: usize,
    pub g: f64,
    pub field_range: (f64, f64),
    pub coupling_range: (f64, f64),
}

impl SycamoreDisorder {
    /// `h ~ U[-pi, pi]`, `J ~ U[-1.5 pi, -0.5 pi]`.
    pub fn new(sites: usize, g: f64) -> Self {
        Self {
            sites,
            g,
            field_range: (-PI, PI),
            coupling_range: (-1.5 * PI, -0.5 * PI),
        }
    }
}
