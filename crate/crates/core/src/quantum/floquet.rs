//! One-period propagators.

use faer::{Mat, Side};
use num_complex::Complex64;

use super::params::{MblDisorder, SpinChainParams, SycamoreDisorder};
use super::state::StateVector;
use crate::error::{invalid, precondition, Error, Result};
use crate::rng::RandomSource;

pub const FAST_PATH_LIMIT: usize = 14;
pub const DENSE_EVOLVE_LIMIT: usize = 12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Advances a state by one drive period.
pub trait FloquetStep: Send + Sync {
    fn sites(&self) -> usize;

    fn period(&self) -> f64;

    fn apply(&self, state: &mut StateVector);

    fn apply_inverse(&self, state: &mut StateVector);

    fn dim(&self) -> usize {
        1 << self.sites()
    }
}

impl<T: FloquetStep + ?Sized> FloquetStep for Box<T> {
    fn sites(&self) -> usize {
        (**self).sites()
    }
    fn period(&self) -> f64 {
        (**self).period()
    }
    fn apply(&self, state: &mut StateVector) {
        (**self).apply(state)
    }
    fn apply_inverse(&self, state: &mut StateVector) {
        (**self).apply_inverse(state)
    }
}

/// Which evolution kernel to use for the first segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionPath {
    /// Fast path when the first segment is diagonal, dense otherwise.
    #[default]
    Auto,
    Fast,
    Dense,
}

/// Order of the two factors within one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOrder {
    /// Diagonal phase first, then the kick.
    DiagonalFirst,
    /// Kick first, then the diagonal phase.
    KickFirst,
}

/// Global kick `prod_i exp(-i theta sigma^x_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kick {
    cos: f64,
    sin: f64,
}

impl Kick {
    pub fn new(theta: f64) -> Self {
        Self {
            cos: theta.cos(),
            sin: theta.sin(),
        }
    }

    fn apply(&self, psi: &mut [Complex64], sites: usize, sign: f64) {
        let c = Complex64::new(self.cos, 0.0);
        let s = Complex64::new(0.0, -sign * self.sin);
        for site in 0..sites {
            let bit = 1usize << site;
            for a in 0..psi.len() {
                if a & bit == 0 {
                    let (x, y) = (psi[a], psi[a | bit]);
                    psi[a] = c * x + s * y;
                    psi[a | bit] = s * x + c * y;
                }
            }
        }
    }
}

/// Diagonal phase followed (or preceded) by a uniform transverse kick.
#[derive(Debug, Clone)]
pub struct KickedDiagonal {
    sites: usize,
    period: f64,
    phases: Vec<Complex64>,
    kick: Kick,
    order: StepOrder,
}

impl KickedDiagonal {
    /// `phases[a]` multiplies basis state `a`; the kick angle is `theta`.
    pub fn new(
        sites: usize,
        period: f64,
        phases: Vec<Complex64>,
        theta: f64,
        order: StepOrder,
    ) -> Result<Self> {
        if sites > FAST_PATH_LIMIT {
            return Err(Error::TooLarge {
                sites,
                limit: FAST_PATH_LIMIT,
            });
        }
        if phases.len() != 1 << sites {
            return Err(invalid("phases", "length must be 2^sites"));
        }
        Ok(Self {
            sites,
            period,
            phases,
            kick: Kick::new(theta),
            order,
        })
    }

    /// Fast propagator for a longitudinal chain.
    pub fn from_params(params: &SpinChainParams) -> Result<Self> {
        params.validate()?;
        if !params.is_longitudinal() {
            return Err(precondition(
                "fast path needs hx = hy = 0 so the first segment is diagonal",
            ));
        }
        if params.sites > FAST_PATH_LIMIT {
            return Err(Error::TooLarge {
                sites: params.sites,
                limit: FAST_PATH_LIMIT,
            });
        }
        let phases = (0..1usize << params.sites)
            .map(|a| Complex64::from_polar(1.0, -params.t1 * params.diagonal_energy(a)))
            .collect();
        Self::new(
            params.sites,
            params.period(),
            phases,
            params.g * params.t2,
            StepOrder::DiagonalFirst,
        )
    }

    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    fn diag(&self, psi: &mut [Complex64], inverse: bool) {
        for (a, p) in psi.iter_mut().zip(&self.phases) {
            *a *= if inverse { p.conj() } else { *p };
        }
    }
}

impl FloquetStep for KickedDiagonal {
    fn sites(&self) -> usize {
        self.sites
    }

    fn period(&self) -> f64 {
        self.period
    }

    fn apply(&self, state: &mut StateVector) {
        let psi = state.amplitudes_mut();
        match self.order {
            StepOrder::DiagonalFirst => {
                self.diag(psi, false);
                self.kick.apply(psi, self.sites, 1.0);
            }
            StepOrder::KickFirst => {
                self.kick.apply(psi, self.sites, 1.0);
                self.diag(psi, false);
            }
        }
    }

    fn apply_inverse(&self, state: &mut StateVector) {
        let psi = state.amplitudes_mut();
        match self.order {
            StepOrder::DiagonalFirst => {
                self.kick.apply(psi, self.sites, -1.0);
                self.diag(psi, true);
            }
            StepOrder::KickFirst => {
                self.diag(psi, true);
                self.kick.apply(psi, self.sites, -1.0);
            }
        }
    }
}

/// Dense first-segment propagator `exp(-i t1 H1)` followed by the kick.
#[derive(Debug, Clone)]
pub struct DenseKicked {
    sites: usize,
    period: f64,
    u1: Mat<Complex64>,
    kick: Kick,
}

impl DenseKicked {
    pub fn from_params(params: &SpinChainParams) -> Result<Self> {
        params.validate()?;
        if params.sites > DENSE_EVOLVE_LIMIT {
            return Err(Error::TooLarge {
                sites: params.sites,
                limit: DENSE_EVOLVE_LIMIT,
            });
        }
        let h = first_segment_hamiltonian(params);
        let eig = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let v = eig.U();
        let e = eig.S().column_vector();
        let dim = h.nrows();
        let scaled = Mat::from_fn(dim, dim, |i, k| {
            v[(i, k)] * Complex64::from_polar(1.0, -params.t1 * e[k].re)
        });
        let u1 = &scaled * v.adjoint();
        Ok(Self {
            sites: params.sites,
            period: params.period(),
            u1,
            kick: Kick::new(params.g * params.t2),
        })
    }

    fn matvec(&self, psi: &mut [Complex64], adjoint: bool) {
        let dim = psi.len();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        if adjoint {
            for (k, o) in out.iter_mut().enumerate() {
                let col = self.u1.col(k);
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, p) in psi.iter().enumerate() {
                    acc += col[j].conj() * p;
                }
                *o = acc;
            }
        } else {
            for (j, p) in psi.iter().enumerate() {
                let col = self.u1.col(j);
                for (i, o) in out.iter_mut().enumerate() {
                    *o += col[i] * p;
                }
            }
        }
        psi.copy_from_slice(&out);
    }
}

impl FloquetStep for DenseKicked {
    fn sites(&self) -> usize {
        self.sites
    }

    fn period(&self) -> f64 {
        self.period
    }

    fn apply(&self, state: &mut StateVector) {
        let psi = state.amplitudes_mut();
        self.matvec(psi, false);
        self.kick.apply(psi, self.sites, 1.0);
    }

    fn apply_inverse(&self, state: &mut StateVector) {
        let psi = state.amplitudes_mut();
        self.kick.apply(psi, self.sites, -1.0);
        self.matvec(psi, true);
    }
}

/// Dense matrix of the first-segment Hamiltonian.
pub fn first_segment_hamiltonian(params: &SpinChainParams) -> Mat<Complex64> {
    let dim = 1usize << params.sites;
    let mut h = Mat::<Complex64>::zeros(dim, dim);
    for a in 0..dim {
        h[(a, a)] = Complex64::new(params.diagonal_energy(a), 0.0);
        for i in 0..params.sites {
            let bit = 1usize << i;
            let b = a ^ bit;
            // <b| sigma^x |a> = 1, <b| sigma^y |a> = +i if site i of a is up.
            let y = if a & bit == 0 { I } else { -I };
            h[(b, a)] -= params.hx[i] + params.hy[i] * y;
        }
    }
    h
}

/// Propagator for a realized chain along the requested path.
pub fn chain_step(params: &SpinChainParams, path: EvolutionPath) -> Result<Box<dyn FloquetStep>> {
    match path {
        EvolutionPath::Fast => Ok(Box::new(KickedDiagonal::from_params(params)?)),
        EvolutionPath::Dense => Ok(Box::new(DenseKicked::from_params(params)?)),
        EvolutionPath::Auto if params.is_longitudinal() => {
            Ok(Box::new(KickedDiagonal::from_params(params)?))
        }
        EvolutionPath::Auto => Ok(Box::new(DenseKicked::from_params(params)?)),
    }
}

/// Disordered two-segment chain, realized once from `rng`.
pub fn build_mbl_floquet(
    disorder: &MblDisorder,
    path: EvolutionPath,
    rng: &mut RandomSource,
) -> Result<Box<dyn FloquetStep>> {
    chain_step(&disorder.realize(rng), path)
}

/// Realized digital circuit. Unit period.
#[derive(Debug, Clone)]
pub struct SycamoreFloquet {
    pub fields: Vec<f64>,
    pub couplings: Vec<f64>,
    pub g: f64,
    step: KickedDiagonal,
}

impl SycamoreFloquet {
    /// `couplings[i]` couples sites `i` and `i + 1` on an open chain.
    pub fn new(fields: Vec<f64>, couplings: Vec<f64>, g: f64) -> Result<Self> {
        let l = fields.len();
        if l == 0 {
            return Err(invalid("sites", "need at least one site"));
        }
        if couplings.len() != l - 1 {
            return Err(invalid("couplings", "need sites - 1 nearest-neighbour couplings"));
        }
        if !fields.iter().chain(&couplings).chain([&g]).all(|v| v.is_finite()) {
            return Err(invalid("params", "all parameters must be finite"));
        }
        if l > FAST_PATH_LIMIT {
            return Err(Error::TooLarge {
                sites: l,
                limit: FAST_PATH_LIMIT,
            });
        }
        let phases = (0..1usize << l)
            .map(|a| {
                let s = |i: usize| if a >> i & 1 == 0 { 1.0 } else { -1.0 };
                let z: f64 = (0..l).map(|i| fields[i] * s(i)).sum();
                let zz: f64 = (0..l - 1).map(|i| couplings[i] * s(i) * s(i + 1)).sum();
                Complex64::from_polar(1.0, -0.5 * z - 0.25 * zz)
            })
            .collect();
        let step = KickedDiagonal::new(
            l,
            1.0,
            phases,
            std::f64::consts::FRAC_PI_2 * g,
            StepOrder::KickFirst,
        )?;
        Ok(Self {
            fields,
            couplings,
            g,
            step,
        })
    }
}

impl FloquetStep for SycamoreFloquet {
    fn sites(&self) -> usize {
        self.step.sites()
    }
    fn period(&self) -> f64 {
        1.0
    }
    fn apply(&self, state: &mut StateVector) {
        self.step.apply(state)
    }
    fn apply_inverse(&self, state: &mut StateVector) {
        self.step.apply_inverse(state)
    }
}

pub fn build_sycamore_floquet(
    disorder: &SycamoreDisorder,
    rng: &mut RandomSource,
) -> Result<SycamoreFloquet> {
    let l = disorder.sites;
    if l == 0 {
        return Err(invalid("sites", "need at least one site"));
    }
    let (h0, h1) = disorder.field_range;
    let (j0, j1) = disorder.coupling_range;
    let fields = (0..l).map(|_| rng.uniform_in(h0, h1)).collect();
    let couplings = (0..l - 1).map(|_| rng.uniform_in(j0, j1)).collect();
    SycamoreFloquet::new(fields, couplings, disorder.g)
}

/// Dense matrix of one period, built column by column.
pub fn dense_operator(step: &dyn FloquetStep) -> Mat<Complex64> {
    let dim = step.dim();
    let mut u = Mat::<Complex64>::zeros(dim, dim);
    for a in 0..dim {
        let mut s = StateVector::basis(step.sites(), a);
        step.apply(&mut s);
        for (i, amp) in s.amplitudes().iter().enumerate() {
            u[(i, a)] = *amp;
        }
    }
    u
}
