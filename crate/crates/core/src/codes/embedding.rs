use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// A totally real number field `K` of degree `n` with an integral basis
/// `β₀..βₙ₋₁` and a cyclic generator `σ` of its Galois group. Elements
/// are taken with Gaussian-integer coefficients, i.e. in `K(i)`, where `σ`
/// fixes `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberFieldEmbedding {
    degree: usize,
    /// `conj[k][j] = σᵏ(βⱼ)`.
    conj: Vec<Vec<f64>>,
}

/// `{1, φ}` for `Q(√5)` (`n = 2`) or `{1, θ, θ²}` with `θ = 2cos(2π/7)`
/// for the cyclic cubic field of conductor 7 (`n = 3`).
pub fn build_embedding(n: usize) -> Result<NumberFieldEmbedding> {
    let conj = match n {
        2 => {
            let s5 = 5f64.sqrt();
            vec![vec![1.0, (1.0 + s5) / 2.0], vec![1.0, (1.0 - s5) / 2.0]]
        }
        3 => (0..3)
            .map(|k| {
                let theta = 2.0 * (2.0 * PI * (1 << k) as f64 / 7.0).cos();
                vec![1.0, theta, theta * theta]
            })
            .collect(),
        _ => return Err(Error::Unsupported(format!("no number field of degree {n} ships"))),
    };
    Ok(NumberFieldEmbedding { degree: n, conj })
}

impl NumberFieldEmbedding {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The `n × n` matrix `σᵏ(βⱼ)`.
    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.conj
    }

    /// `σᵏ(ℓ)` for `k = 0..n`, where `ℓ = Σ cⱼ βⱼ`.
    pub fn conjugates(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(coeffs.len(), self.degree);
        self.conj.iter().map(|row| row.iter().zip(coeffs).map(|(b, c)| c * b).sum()).collect()
    }

    /// `σ^shift(ℓ)`.
    pub fn conjugate(&self, coeffs: &[Complex64], shift: usize) -> Complex64 {
        let row = &self.conj[shift % self.degree];
        row.iter().zip(coeffs).map(|(b, c)| c * b).sum()
    }

    /// `∏ₖ |σᵏ(ℓ)|²`, the squared modulus of the relative norm; at least 1
    /// for every nonzero Gaussian-integer coefficient vector.
    pub fn norm_product(&self, coeffs: &[Complex64]) -> f64 {
        self.conjugates(coeffs).iter().map(|z| z.norm_sqr()).product()
    }
}
