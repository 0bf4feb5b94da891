use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{build_embedding, cda_codeword};
use crate::{Error, Result};

/// Row ownership of the `T × T` selection-DF code, `T = p + nq`, with
/// 1-based row numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsdfSchedule {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub dimension: usize,
    pub delay: usize,
    pub source_first_phase: Vec<usize>,
    pub source_second_phase: Vec<usize>,
    /// `relay_rows[j − 2]` for relay `j = 2..=n`.
    pub relay_rows: Vec<Vec<usize>>,
}

pub fn nsdf_schedule(n: usize, p: usize, q: usize) -> Result<NsdfSchedule> {
    if n < 2 || q == 0 || p < q {
        return Err(Error::InvalidProtocol(format!("need n ≥ 2 and p ≥ q ≥ 1, got n={n} p={p} q={q}")));
    }
    let dimension = p + n * q;
    let block = |j: usize| (p + (j - 1) * q + 1..=p + j * q).collect::<Vec<_>>();
    Ok(NsdfSchedule {
        n,
        p,
        q,
        dimension,
        delay: (p + q) * dimension,
        source_first_phase: (1..=p).collect(),
        source_second_phase: block(1),
        relay_rows: (2..=n).map(block).collect(),
    })
}

impl NsdfSchedule {
    /// Owner of each row: 1 for the source, `j` for relay `j`.
    pub fn owners(&self) -> Vec<usize> {
        let mut out = vec![0; self.dimension];
        for &r in self.source_first_phase.iter().chain(&self.source_second_phase) {
            out[r - 1] = 1;
        }
        for (j, rows) in self.relay_rows.iter().enumerate() {
            for &r in rows {
                out[r - 1] = j + 2;
            }
        }
        out
    }
}

/// Non-norm element of the cubic cyclic algebra: 2 is inert in the field
/// of conductor 7, so `1 + i` has norm valuation 1, not a multiple of 3.
pub const CUBIC_GAMMA: Complex64 = Complex64::new(1.0, 1.0);

/// `3 × 3` cyclic-division-algebra codeword for the `n = 2`, `p = q = 1`
/// schedule (`T = 3`).
pub fn cubic_cda_codeword(layers: &[Vec<Complex64>; 3]) -> DMatrix<Complex64> {
    let field = build_embedding(3).expect("cubic field ships");
    cda_codeword(&field, CUBIC_GAMMA, layers)
}
