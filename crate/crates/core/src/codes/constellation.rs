use num_complex::Complex64;

use crate::{Error, Result};

/// Square `M²`-QAM on the odd-integer lattice, Gray-indexed: bits
/// `i / M` select the in-phase level and `i % M` the quadrature level,
/// each through a reflected Gray map. [`Self::normalized`] gives the unit
/// average-energy version.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    m: usize,
    points: Vec<Complex64>,
}

fn gray_level(index: usize, m: usize) -> f64 {
    let mut bin = index;
    let mut shift = 1;
    while shift < m {
        bin ^= bin >> shift;
        shift <<= 1;
    }
    (2 * bin) as f64 - (m - 1) as f64
}

impl Constellation {
    pub fn qam(m: usize) -> Result<Self> {
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("QAM side must be a power of two ≥ 2, got {m}")));
        }
        let points = (0..m * m).map(|i| Complex64::new(gray_level(i / m, m), gray_level(i % m, m))).collect();
        Ok(Self { m, points })
    }

    pub fn side(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Gaussian-integer points `(±1, ±3, …) + i(±1, ±3, …)`.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Mean energy of the integer points, `2(M² − 1)/3`.
    pub fn energy(&self) -> f64 {
        2.0 * ((self.m * self.m) as f64 - 1.0) / 3.0
    }

    pub fn normalized(&self) -> Vec<Complex64> {
        let s = self.energy().sqrt();
        self.points.iter().map(|p| p / s).collect()
    }
}
