//! Update rules, biased noise, and the heat-bath Glauber baseline.

use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use super::lattice::{SpinLattice2D, ZmLattice};
use crate::error::{invalid, precondition, Result};
use crate::rng::RandomSource;

/// Per-step flip probabilities: a cell is set up with probability `eps_p`
/// and down with probability `eps_q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    pub eps_p: f64,
    pub eps_q: f64,
}

impl NoiseParams {
    pub fn new(eps_p: f64, eps_q: f64) -> Result<Self> {
        let n = Self { eps_p, eps_q };
        n.validate()?;
        Ok(n)
    }

    pub fn none() -> Self {
        Self {
            eps_p: 0.0,
            eps_q: 0.0,
        }
    }

    /// From bias `b = (p - q)/(p + q)` and amplitude `p + q`.
    pub fn from_bias(bias: f64, amplitude: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&bias) {
            return Err(invalid("bias", "must lie in [-1, 1]"));
        }
        Self::new(0.5 * amplitude * (1.0 + bias), 0.5 * amplitude * (1.0 - bias))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_p >= 0.0 && self.eps_q >= 0.0) {
            return Err(precondition("noise probabilities must be non-negative"));
        }
        if self.eps_p + self.eps_q > 1.0 + 1e-15 {
            return Err(precondition("eps_p + eps_q must not exceed 1"));
        }
        Ok(())
    }

    pub fn amplitude(&self) -> f64 {
        self.eps_p + self.eps_q
    }

    /// `(p - q)/(p + q)`, zero for the noiseless case.
    pub fn bias(&self) -> f64 {
        let a = self.amplitude();
        if a == 0.0 {
            0.0
        } else {
            (self.eps_p - self.eps_q) / a
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude() == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum PcaRule {
    /// `maj(self, east, north)`.
    ToomNec,
    /// Negated NEC majority.
    PiToom,
    /// Heat-bath kinetic Ising model, one checkerboard sweep per step.
    Glauber { temperature: f64, field: f64 },
    /// Base rule followed by the global `Z_m` increment.
    Rotated { base: Box<PcaRule>, m: u8 },
}

impl PcaRule {
    /// Period of the noiseless response to a uniform state.
    pub fn period(&self) -> usize {
        match self {
            PcaRule::PiToom => 2,
            PcaRule::Rotated { m, .. } => *m as usize,
            _ => 1,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            PcaRule::Glauber { .. } => false,
            PcaRule::Rotated { base, .. } => base.is_deterministic(),
            _ => true,
        }
    }
}

/// Base rule composed with the `Z_m` shift. For `m = 2` on binary spins the
/// shift is negation, so `Rotated(ToomNec, 2)` steps exactly like `PiToom`.
pub fn make_rotated_rule(base: PcaRule, m: u8) -> Result<PcaRule> {
    if m < 2 {
        return Err(invalid("m", "rotation order must be at least 2"));
    }
    match &base {
        PcaRule::ToomNec => {}
        PcaRule::Glauber { .. } | PcaRule::PiToom | PcaRule::Rotated { .. } if m == 2 => {}
        _ => {
            return Err(invalid(
                "base",
                "only the NEC majority generalizes to a Z_m alphabet",
            ))
        }
    }
    Ok(PcaRule::Rotated {
        base: Box::new(base),
        m,
    })
}

/// Row with bit `x` taken from bit `(x + 1) mod lx` of `row`.
fn shift_east(row: &[u64], lx: usize, out: &mut [u64]) {
    let w = row.len();
    let r = match lx % 64 {
        0 => 64,
        r => r,
    };
    for k in 0..w - 1 {
        out[k] = (row[k] >> 1) | (row[k + 1] << 63);
    }
    let mask = if r == 64 { u64::MAX } else { (1u64 << r) - 1 };
    out[w - 1] = ((row[w - 1] >> 1) | ((row[0] & 1) << (r - 1))) & mask;
}

#[inline]
fn majority(a: u64, b: u64, c: u64) -> u64 {
    (a & b) | (a & c) | (b & c)
}

/// One synchronous deterministic step into `out`.
fn nec_into(input: &SpinLattice2D, out: &mut SpinLattice2D, negate: bool) {
    let (lx, ly) = (input.lx(), input.ly());
    let mask = input.tail_mask();
    let wpr = input.words_per_row();
    let mut east = vec![0u64; wpr];
    for y in 0..ly {
        let row = input.row(y);
        let north = input.row((y + 1) % ly);
        shift_east(row, lx, &mut east);
        let dst = out.row_mut(y);
        for k in 0..wpr {
            let m = majority(row[k], east[k], north[k]);
            dst[k] = if negate { !m } else { m };
        }
        dst[wpr - 1] &= mask;
    }
}

/// Deterministic synchronous update into a fresh lattice.
pub fn step_rule(lattice: &SpinLattice2D, rule: &PcaRule) -> Result<SpinLattice2D> {
    let mut out = lattice.clone();
    match rule {
        PcaRule::ToomNec => nec_into(lattice, &mut out, false),
        PcaRule::PiToom => nec_into(lattice, &mut out, true),
        PcaRule::Rotated { base, m: 2 } => {
            out = step_rule(lattice, base)?.flipped();
        }
        PcaRule::Rotated { .. } => {
            return Err(precondition("rotated rules with m > 2 act on a Z_m lattice"))
        }
        PcaRule::Glauber { .. } => {
            return Err(precondition("Glauber updates are stochastic; use step_stochastic"))
        }
    }
    Ok(out)
}

/// One step of any binary rule; stochastic rules draw from `rng`.
pub fn step_stochastic(
    lattice: &SpinLattice2D,
    rule: &PcaRule,
    rng: &mut RandomSource,
) -> Result<SpinLattice2D> {
    match rule {
        PcaRule::Glauber { temperature, field } => {
            let mut g = GlauberSweeper::new(lattice, *temperature, *field)?;
            g.sweep(rng);
            Ok(g.to_lattice())
        }
        PcaRule::Rotated { base, m: 2 } => Ok(step_stochastic(lattice, base, rng)?.flipped()),
        _ => step_rule(lattice, rule),
    }
}

/// Independent per-cell noise after the rule step.
pub fn apply_noise(lattice: &mut SpinLattice2D, noise: &NoiseParams, rng: &mut RandomSource) -> Result<()> {
    noise.validate()?;
    let hit = noise.amplitude().min(1.0);
    if hit == 0.0 {
        return Ok(());
    }
    let up_share = noise.eps_p / noise.amplitude();
    let (lx, n) = (lattice.lx(), lattice.cells());
    let mut visit = |k: usize, rng: &mut RandomSource| {
        let s = if rng.uniform() < up_share { 1 } else { -1 };
        lattice.set(k % lx, k / lx, s);
    };
    if hit >= 1.0 {
        for k in 0..n {
            visit(k, rng);
        }
        return Ok(());
    }
    let geo = Geometric::new(hit).map_err(|e| precondition(format!("noise rate: {e}")))?;
    let mut k = 0usize;
    loop {
        let skip = geo.sample(rng);
        k = match k.checked_add(skip as usize) {
            Some(v) if v < n => v,
            _ => break,
        };
        visit(k, rng);
        k += 1;
    }
    Ok(())
}

/// Temperature and field whose heat-bath flip probabilities out of the two
/// uniform states equal the noise rates: a lone down flip in the all-up
/// state has probability `eps_q` and a lone up flip in the all-down state
/// `eps_p`.
pub fn matched_glauber(noise: &NoiseParams) -> Result<(f64, f64)> {
    noise.validate()?;
    if noise.is_zero() {
        return Ok((0.0, 0.0));
    }
    if !(noise.eps_p > 0.0 && noise.eps_q > 0.0 && noise.eps_p < 0.5 && noise.eps_q < 0.5) {
        return Err(precondition(
            "matched Glauber rates need 0 < eps_p, eps_q < 1/2",
        ));
    }
    let lp = ((1.0 - noise.eps_p) / noise.eps_p).ln();
    let lq = ((1.0 - noise.eps_q) / noise.eps_q).ln();
    let beta = (lp + lq) / 16.0;
    let field = (lq - lp) / (4.0 * beta);
    Ok((1.0 / beta, field))
}

/// Unpacked heat-bath sampler for `H = -sum_<ij> s_i s_j - h sum_i s_i`.
#[derive(Debug, Clone)]
pub struct GlauberSweeper {
    lx: usize,
    ly: usize,
    spins: Vec<i8>,
    /// `P(s = +1)` indexed by neighbour sum `(-4..=4)/2 + 2`.
    p_up: [f64; 5],
}

impl GlauberSweeper {
    pub fn new(lattice: &SpinLattice2D, temperature: f64, field: f64) -> Result<Self> {
        let (lx, ly) = (lattice.lx(), lattice.ly());
        if lx % 2 != 0 || ly % 2 != 0 {
            return Err(precondition("checkerboard sweeps need even lattice dimensions"));
        }
        if !(temperature >= 0.0) || !field.is_finite() {
            return Err(invalid("temperature", "must be non-negative with a finite field"));
        }
        let mut p_up = [0.0; 5];
        for (i, p) in p_up.iter_mut().enumerate() {
            let local = 2.0 * i as f64 - 4.0 + field;
            *p = if temperature == 0.0 {
                match local.partial_cmp(&0.0) {
                    Some(std::cmp::Ordering::Greater) => 1.0,
                    Some(std::cmp::Ordering::Less) => 0.0,
                    _ => 0.5,
                }
            } else {
                1.0 / (1.0 + (-2.0 * local / temperature).exp())
            };
        }
        Ok(Self {
            lx,
            ly,
            spins: lattice.to_spins(),
            p_up,
        })
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Black sublattice then white.
    pub fn sweep(&mut self, rng: &mut RandomSource) {
        let (lx, ly) = (self.lx, self.ly);
        for parity in 0..2 {
            for y in 0..ly {
                let up = ((y + 1) % ly) * lx;
                let down = ((y + ly - 1) % ly) * lx;
                let row = y * lx;
                let mut x = (y + parity) % 2;
                while x < lx {
                    let e = if x + 1 == lx { 0 } else { x + 1 };
                    let w = if x == 0 { lx - 1 } else { x - 1 };
                    let s = self.spins[row + e] + self.spins[row + w] + self.spins[up + x] + self.spins[down + x];
                    let p = self.p_up[((s + 4) / 2) as usize];
                    self.spins[row + x] = if rng.uniform() < p { 1 } else { -1 };
                    x += 2;
                }
            }
        }
    }

    pub fn negate(&mut self) {
        self.spins.iter_mut().for_each(|s| *s = -*s);
    }

    /// Replace the spins, keeping the rates.
    pub fn load(&mut self, lattice: &SpinLattice2D) -> Result<()> {
        if lattice.lx() != self.lx || lattice.ly() != self.ly {
            return Err(invalid("lattice", "size differs from the sampler"));
        }
        self.spins = lattice.to_spins();
        Ok(())
    }

    pub fn magnetization(&self) -> f64 {
        self.spins.iter().map(|&s| s as i64).sum::<i64>() as f64 / self.spins.len() as f64
    }

    /// `-sum_<ij> s_i s_j` over right and up bonds.
    pub fn bond_energy(&self) -> f64 {
        let (lx, ly) = (self.lx, self.ly);
        let mut e = 0i64;
        for y in 0..ly {
            for x in 0..lx {
                let s = self.spins[y * lx + x] as i64;
                e -= s * self.spins[y * lx + (x + 1) % lx] as i64;
                e -= s * self.spins[((y + 1) % ly) * lx + x] as i64;
            }
        }
        e as f64
    }

    pub fn to_lattice(&self) -> SpinLattice2D {
        SpinLattice2D::from_spins(self.lx, self.ly, &self.spins).expect("spins are +-1")
    }
}

/// `Z_m` analogue of the NEC rule: plurality of `(self, east, north)`, ties
/// among three distinct values keep `self`, then every cell advances by one.
pub fn step_zm(lattice: &ZmLattice) -> ZmLattice {
    let (lx, ly, m) = (lattice.lx(), lattice.ly(), lattice.m());
    let mut out = lattice.clone();
    let cells = out.cells_mut();
    for y in 0..ly {
        for x in 0..lx {
            let s = lattice.get(x, y);
            let e = lattice.get((x + 1) % lx, y);
            let n = lattice.get(x, (y + 1) % ly);
            let winner = if e == n { e } else { s };
            cells[y * lx + x] = (winner + 1) % m;
        }
    }
    out
}

/// With probability `eps` per cell, replace the state by a uniform draw.
pub fn apply_zm_noise(lattice: &mut ZmLattice, eps: f64, rng: &mut RandomSource) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(precondition("noise probability must lie in [0, 1]"));
    }
    if eps == 0.0 {
        return Ok(());
    }
    let m = lattice.m() as u64;
    for c in lattice.cells_mut() {
        if rng.uniform() < eps {
            *c = rng.below(m) as u8;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn east_shift_wraps_for_partial_and_full_words() {
        for lx in [1usize, 5, 64, 70, 128] {
            let mut rng = RandomSource::from_seed(lx as u64);
            let l = SpinLattice2D::random(lx, 1, &mut rng).unwrap();
            let mut out = vec![0u64; l.words_per_row()];
            shift_east(l.row(0), lx, &mut out);
            let mut shifted = l.clone();
            shifted.row_mut(0).copy_from_slice(&out);
            for x in 0..lx {
                assert_eq!(shifted.get(x, 0), l.get((x + 1) % lx, 0), "lx {lx} x {x}");
            }
        }
    }

    #[test]
    fn uniform_states_under_rules() {
        let up = SpinLattice2D::all_up(10, 6).unwrap();
        assert_eq!(step_rule(&up, &PcaRule::ToomNec).unwrap(), up);
        let once = step_rule(&up, &PcaRule::PiToom).unwrap();
        assert_eq!(once.up_count(), 0);
        assert_eq!(step_rule(&once, &PcaRule::PiToom).unwrap(), up);
    }

    #[test]
    fn noise_extremes() {
        let mut rng = RandomSource::from_seed(2);
        let l = SpinLattice2D::random(33, 17, &mut rng).unwrap();
        let mut a = l.clone();
        apply_noise(&mut a, &NoiseParams::none(), &mut rng).unwrap();
        assert_eq!(a, l);
        apply_noise(&mut a, &NoiseParams::new(1.0, 0.0).unwrap(), &mut rng).unwrap();
        assert_eq!(a.up_count(), a.cells());
        assert!(NoiseParams::new(0.7, 0.4).is_err());
        assert!(NoiseParams::new(-0.1, 0.4).is_err());
    }

    #[test]
    fn bias_and_amplitude() {
        let n = NoiseParams::from_bias(0.25, 0.04).unwrap();
        assert!((n.eps_p - 0.025).abs() < 1e-15 && (n.eps_q - 0.015).abs() < 1e-15);
        assert!((n.bias() - 0.25).abs() < 1e-12);
        assert_eq!(NoiseParams::none().bias(), 0.0);
    }

    #[test]
    fn matched_rates_reproduce_noise() {
        let noise = NoiseParams::new(0.03, 0.01).unwrap();
        let (t, h) = matched_glauber(&noise).unwrap();
        let p_down_in_up = 1.0 / (1.0 + (2.0 * (4.0 + h) / t).exp());
        let p_up_in_down = 1.0 / (1.0 + (2.0 * (4.0 - h) / t).exp());
        assert!((p_down_in_up - 0.01).abs() < 1e-12);
        assert!((p_up_in_down - 0.03).abs() < 1e-12);
        assert!(h > 0.0);
        assert!(matched_glauber(&NoiseParams::new(0.6, 0.1).unwrap()).is_err());
    }

    #[test]
    fn rotated_rule_validation() {
        assert!(make_rotated_rule(PcaRule::ToomNec, 1).is_err());
        assert!(make_rotated_rule(PcaRule::PiToom, 3).is_err());
        assert_eq!(make_rotated_rule(PcaRule::ToomNec, 3).unwrap().period(), 3);
    }

    #[test]
    fn zm_uniform_cycles() {
        let l = ZmLattice::uniform(5, 4, 3, 0).unwrap();
        let a = step_zm(&l);
        let b = step_zm(&a);
        let c = step_zm(&b);
        assert!(a.cells().iter().all(|&s| s == 1));
        assert!(b.cells().iter().all(|&s| s == 2));
        assert_eq!(c, l);
    }

    #[test]
    fn glauber_zero_temperature_follows_majority() {
        let mut l = SpinLattice2D::all_up(4, 4).unwrap();
        l.set(1, 1, -1);
        let mut g = GlauberSweeper::new(&l, 0.0, 0.0).unwrap();
        g.sweep(&mut RandomSource::from_seed(0));
        assert_eq!(g.magnetization(), 1.0);
        assert!(GlauberSweeper::new(&SpinLattice2D::all_up(3, 4).unwrap(), 1.0, 0.0).is_err());
    }
}
