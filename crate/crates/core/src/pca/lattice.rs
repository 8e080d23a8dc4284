//! Bit-packed periodic Ising lattice and a small `Z_m` lattice.

use std::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::rng::RandomSource;

/// `lx x ly` lattice of `+-1` spins, periodic in both directions.
///
/// Row `y` occupies `words_per_row` consecutive words; bit `x % 64` of word
/// `x / 64` is 1 for spin up. Bits past `lx` in the last word are always 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinLattice2D {
    lx: usize,
    ly: usize,
    wpr: usize,
    words: Vec<u64>,
}

impl SpinLattice2D {
    pub fn new(lx: usize, ly: usize, up: bool) -> Result<Self> {
        if lx == 0 || ly == 0 {
            return Err(invalid("size", "lattice dimensions must be positive"));
        }
        let wpr = lx.div_ceil(64);
        let mut l = Self {
            lx,
            ly,
            wpr,
            words: vec![if up { u64::MAX } else { 0 }; wpr * ly],
        };
        l.clear_tails();
        Ok(l)
    }

    pub fn all_up(lx: usize, ly: usize) -> Result<Self> {
        Self::new(lx, ly, true)
    }

    pub fn all_down(lx: usize, ly: usize) -> Result<Self> {
        Self::new(lx, ly, false)
    }

    /// Independent fair spins.
    pub fn random(lx: usize, ly: usize, rng: &mut RandomSource) -> Result<Self> {
        let mut l = Self::new(lx, ly, false)?;
        for w in l.words.iter_mut() {
            *w = rng.next_u64();
        }
        l.clear_tails();
        Ok(l)
    }

    /// Lattice from `+-1` values in row-major order.
    pub fn from_spins(lx: usize, ly: usize, spins: &[i8]) -> Result<Self> {
        if spins.len() != lx * ly {
            return Err(invalid("spins", "length must be lx * ly"));
        }
        let mut l = Self::new(lx, ly, false)?;
        for (k, &s) in spins.iter().enumerate() {
            match s {
                1 => l.set(k % lx, k / lx, 1),
                -1 => {}
                _ => return Err(invalid("spins", "entries must be +1 or -1")),
            }
        }
        Ok(l)
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn cells(&self) -> usize {
        self.lx * self.ly
    }

    pub fn words_per_row(&self) -> usize {
        self.wpr
    }

    pub fn row(&self, y: usize) -> &[u64] {
        &self.words[y * self.wpr..(y + 1) * self.wpr]
    }

    pub fn row_mut(&mut self, y: usize) -> &mut [u64] {
        &mut self.words[y * self.wpr..(y + 1) * self.wpr]
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Mask of valid bits in the last word of a row.
    pub fn tail_mask(&self) -> u64 {
        match self.lx % 64 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }

    pub(crate) fn clear_tails(&mut self) {
        let mask = self.tail_mask();
        for y in 0..self.ly {
            let i = y * self.wpr + self.wpr - 1;
            self.words[i] &= mask;
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> i8 {
        let w = self.words[y * self.wpr + x / 64];
        if w >> (x % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, s: i8) {
        let w = &mut self.words[y * self.wpr + x / 64];
        let bit = 1u64 << (x % 64);
        if s > 0 {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    pub fn up_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Mean spin.
    pub fn magnetization(&self) -> f64 {
        2.0 * self.up_count() as f64 / self.cells() as f64 - 1.0
    }

    /// All spins negated.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        out.words.iter_mut().for_each(|w| *w = !*w);
        out.clear_tails();
        out
    }

    pub fn to_spins(&self) -> Vec<i8> {
        (0..self.ly)
            .flat_map(|y| (0..self.lx).map(move |x| (x, y)))
            .map(|(x, y)| self.get(x, y))
            .collect()
    }

    /// Cellwise `self >= other`.
    pub fn dominates(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| b & !a == 0)
    }

    /// Square of `side x side` cells with spin `s`, lower-left corner at `(x0, y0)`.
    pub fn paint_square(&mut self, x0: usize, y0: usize, side: usize, s: i8) {
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                self.set(x % self.lx, y % self.ly, s);
            }
        }
    }

    /// Plain PBM: a `P1 lx ly` header line, then one row of `0`/`1` digits per
    /// lattice row with `1` for spin up.
    pub fn to_pbm(&self) -> String {
        let mut out = format!("P1 {} {}\n", self.lx, self.ly);
        for y in 0..self.ly {
            for x in 0..self.lx {
                out.push(if self.get(x, y) > 0 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_pbm(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| invalid("pbm", "empty input"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "P1" {
            return Err(invalid("pbm", "header must be `P1 width height`"));
        }
        let lx: usize = parts[1].parse().map_err(|_| invalid("pbm", "bad width"))?;
        let ly: usize = parts[2].parse().map_err(|_| invalid("pbm", "bad height"))?;
        let mut spins = Vec::with_capacity(lx * ly);
        for line in lines {
            for c in line.chars().filter(|c| !c.is_whitespace()) {
                spins.push(match c {
                    '1' => 1,
                    '0' => -1,
                    _ => return Err(invalid("pbm", format!("unexpected character {c:?}"))),
                });
            }
        }
        Self::from_spins(lx, ly, &spins)
    }
}

impl std::fmt::Display for SpinLattice2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        for y in (0..self.ly).rev() {
            for x in 0..self.lx {
                s.push(if self.get(x, y) > 0 { '+' } else { '-' });
            }
            let _ = writeln!(s);
        }
        f.write_str(&s)
    }
}

/// Periodic lattice of `Z_m` clock states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZmLattice {
    lx: usize,
    ly: usize,
    m: u8,
    cells: Vec<u8>,
}

impl ZmLattice {
    pub fn uniform(lx: usize, ly: usize, m: u8, state: u8) -> Result<Self> {
        if lx == 0 || ly == 0 {
            return Err(invalid("size", "lattice dimensions must be positive"));
        }
        if m < 2 || state >= m {
            return Err(invalid("m", "need m >= 2 and state < m"));
        }
        Ok(Self {
            lx,
            ly,
            m,
            cells: vec![state; lx * ly],
        })
    }

    pub fn random(lx: usize, ly: usize, m: u8, rng: &mut RandomSource) -> Result<Self> {
        let mut l = Self::uniform(lx, ly, m, 0)?;
        for c in l.cells.iter_mut() {
            *c = rng.below(m as u64) as u8;
        }
        Ok(l)
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.cells[y * self.lx + x]
    }

    /// `mean exp(2 pi i s / m)` as `(re, im)`.
    pub fn clock_order(&self) -> (f64, f64) {
        let n = self.cells.len() as f64;
        let w = 2.0 * std::f64::consts::PI / self.m as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for &s in &self.cells {
            re += (w * s as f64).cos();
            im += (w * s as f64).sin();
        }
        (re / n, im / n)
    }

    /// Fraction of cells in each state.
    pub fn histogram(&self) -> Vec<f64> {
        let mut h = vec![0.0; self.m as usize];
        for &s in &self.cells {
            h[s as usize] += 1.0;
        }
        let n = self.cells.len() as f64;
        h.iter_mut().for_each(|x| *x /= n);
        h
    }
}
