use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::Codebook;
use crate::{Error, Result};

/// Exhaustive ML decision: the codeword minimising
/// `Σ_r w_r² |Y − H X|²_r`, lowest index on ties. `channel` already
/// includes any power scaling and `whitener` holds per-row inverse noise
/// standard deviations.
pub fn ml_decode(
    code: &Codebook,
    channel: &DMatrix<Complex64>,
    received: &DMatrix<Complex64>,
    whitener: &DVector<f64>,
) -> Result<usize> {
    let first = code.matrices.first().ok_or_else(|| Error::InvalidArgument("empty codebook".into()))?;
    let (t, cols) = first.shape();
    let rows = channel.nrows();
    if channel.ncols() != t || received.shape() != (rows, cols) || whitener.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "channel {:?}, codeword {:?}, received {:?}, whitener {}",
            channel.shape(),
            (t, cols),
            received.shape(),
            whitener.len()
        )));
    }
    let weights: Vec<f64> = whitener.iter().map(|w| w * w).collect();
    let mut best = (f64::INFINITY, 0);
    for (k, x) in code.matrices.iter().enumerate() {
        let mut dist = 0.0;
        for r in 0..rows {
            let mut row = 0.0;
            for c in 0..cols {
                let mut pred = Complex64::new(0.0, 0.0);
                for j in 0..t {
                    pred += channel[(r, j)] * x[(j, c)];
                }
                row += (received[(r, c)] - pred).norm_sqr();
            }
            dist += weights[r] * row;
        }
        if dist < best.0 {
            best = (dist, k);
        }
    }
    Ok(best.1)
}
