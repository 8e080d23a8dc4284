use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::RandomSource;

/// Pauli axis used for local observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Pure state of `sites` spin-1/2 in the `sigma^z` product basis.
///
/// Bit `i` of a basis index is 0 for spin up (`sigma^z_i = +1`) and 1 for
/// spin down.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    sites: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << sites {
            return Err(invalid(
                "amplitudes",
                format!("expected {} entries, got {}", 1usize << sites, amplitudes.len()),
            ));
        }
        let mut s = Self { sites, amplitudes };
        let n = s.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(invalid("amplitudes", "state has zero or non-finite norm"));
        }
        s.amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(s)
    }

    /// Computational basis state with the given index.
    pub fn basis(sites: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << sites];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { sites, amplitudes }
    }

    /// Product state from `sigma^z` values (`true` = up).
    pub fn product_z(up: &[bool]) -> Self {
        let index = up
            .iter()
            .enumerate()
            .filter(|(_, u)| !**u)
            .fold(0usize, |acc, (i, _)| acc | (1 << i));
        Self::basis(up.len(), index)
    }

    pub fn all_up(sites: usize) -> Self {
        Self::basis(sites, 0)
    }

    /// `|up down up down ...>`
    pub fn neel(sites: usize) -> Self {
        let up: Vec<bool> = (0..sites).map(|i| i % 2 == 0).collect();
        Self::product_z(&up)
    }

    /// All spins along `+x`.
    pub fn x_polarized(sites: usize) -> Self {
        let dim = 1usize << sites;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            sites,
            amplitudes: vec![a; dim],
        }
    }

    /// Uniformly random computational basis state.
    pub fn random_bitstring(sites: usize, rng: &mut RandomSource) -> Self {
        Self::basis(sites, rng.below(1 << sites) as usize)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `<sigma^axis_site>`.
    pub fn expectation(&self, axis: Axis, site: usize) -> f64 {
        let bit = 1usize << site;
        let psi = &self.amplitudes;
        match axis {
            Axis::Z => psi
                .iter()
                .enumerate()
                .map(|(a, c)| if a & bit == 0 { c.norm_sqr() } else { -c.norm_sqr() })
                .sum(),
            Axis::X => {
                let mut acc = 0.0;
                for a in (0..psi.len()).filter(|a| a & bit == 0) {
                    acc += (psi[a].conj() * psi[a | bit]).re;
                }
                2.0 * acc
            }
            Axis::Y => {
                let mut acc = 0.0;
                for a in (0..psi.len()).filter(|a| a & bit == 0) {
                    acc += (psi[a].conj() * psi[a | bit]).im;
                }
                2.0 * acc
            }
        }
    }

    pub fn magnetization_profile(&self, axis: Axis) -> Vec<f64> {
        (0..self.sites).map(|i| self.expectation(axis, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neel_profile() {
        let s = StateVector::neel(4);
        assert_eq!(s.magnetization_profile(Axis::Z), vec![1.0, -1.0, 1.0, -1.0]);
        assert!(s.magnetization_profile(Axis::X).iter().all(|m| m.abs() < 1e-15));
    }

    #[test]
    fn x_polarized_profile() {
        let s = StateVector::x_polarized(3);
        for i in 0..3 {
            assert!((s.expectation(Axis::X, i) - 1.0).abs() < 1e-12);
            assert!(s.expectation(Axis::Z, i).abs() < 1e-12);
            assert!(s.expectation(Axis::Y, i).abs() < 1e-12);
        }
    }

    #[test]
    fn y_eigenstate() {
        // (|up> + i|down>)/sqrt2 is the +1 eigenstate of sigma^y
        let s = StateVector::from_amplitudes(
            1,
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)],
        )
        .unwrap();
        assert!((s.expectation(Axis::Y, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(StateVector::from_amplitudes(2, vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }
}
