use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{build_embedding, Constellation, NumberFieldEmbedding};
use crate::{report, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeKind {
    /// `x = (ℓ, σ(ℓ), …, σⁿ⁻¹(ℓ))ᵗ` over the orthogonal amplify-and-forward
    /// frame, stored as `n × 1` columns.
    OafDiagonal { n: usize },
    /// `2(n−1) × 2(n−1)` cyclic-division-algebra code over the
    /// non-orthogonal amplify-and-forward frame.
    NafCda { n: usize },
}

/// One relay forwarding instruction of a vectorised schedule (1-based
/// time slots).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Forward {
    pub relay: usize,
    pub heard_at: usize,
    pub sent_at: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub kind: CodeKind,
    /// Unscaled codewords on the Gaussian-integer lattice.
    pub matrices: Vec<DMatrix<Complex64>>,
    pub rate_bits_per_use: f64,
    /// Channel uses of one frame.
    pub frame_uses: usize,
    /// SNR the scaling was computed for.
    pub rho: f64,
    /// Largest scale with `‖θX‖² ≤ frame_uses · ρ` over the codebook,
    /// where `‖X‖²` counts every transmission of the frame.
    pub theta: f64,
    pub forwards: Vec<Forward>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// `θ` at another SNR; the cap scales linearly in `ρ`.
    pub fn theta_at(&self, rho: f64) -> f64 {
        self.theta * (rho / self.rho).sqrt()
    }

    /// Energy of codeword `k` over the whole frame, before scaling.
    pub fn frame_energy(&self, k: usize) -> f64 {
        frame_energy(self.kind, &self.matrices[k])
    }

    pub fn energy_cap(&self) -> f64 {
        self.frame_uses as f64 * self.rho
    }

    /// Writes `index,row,col,re,im` rows of the unscaled codewords.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "index,row,col,re,im")?;
        for (k, x) in self.matrices.iter().enumerate() {
            for r in 0..x.nrows() {
                for c in 0..x.ncols() {
                    let z = x[(r, c)];
                    writeln!(out, "{k},{r},{c},{},{}", report::scientific(z.re), report::scientific(z.im))?;
                }
            }
        }
        Ok(())
    }
}

fn frame_energy(kind: CodeKind, x: &DMatrix<Complex64>) -> f64 {
    let total: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    match kind {
        // Relays repeat every symbol but the first.
        CodeKind::OafDiagonal { .. } => total + x.iter().skip(1).map(|z| z.norm_sqr()).sum::<f64>(),
        CodeKind::NafCda { .. } => total,
    }
}

fn scale_for(kind: CodeKind, matrices: &[DMatrix<Complex64>], frame_uses: usize, rho: f64) -> f64 {
    let peak = matrices.iter().map(|x| frame_energy(kind, x)).fold(0.0, f64::max);
    (frame_uses as f64 * rho / peak).sqrt()
}

/// Every coefficient vector in `points^len`, first coordinate slowest.
fn coefficient_vectors(points: &[Complex64], len: usize) -> Vec<Vec<Complex64>> {
    let total = points.len().pow(len as u32);
    (0..total)
        .map(|mut idx| {
            let mut v = vec![Complex64::new(0.0, 0.0); len];
            for slot in v.iter_mut().rev() {
                *slot = points[idx % points.len()];
                idx /= points.len();
            }
            v
        })
        .collect()
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")))
    }
}

/// `(M²)ⁿ` codewords `(ℓ, σ(ℓ), …)` with `ℓ = Σ cⱼβⱼ`, `cⱼ` in `M²`-QAM.
pub fn oaf_diagonal_codebook(n: usize, m: usize, rho: f64) -> Result<Codebook> {
    check_rho(rho)?;
    let field = build_embedding(n)?;
    let qam = Constellation::qam(m)?;
    if qam.len() > 256 {
        return Err(Error::Unsupported(format!("{m}²-QAM is beyond exhaustive decoding")));
    }
    let kind = CodeKind::OafDiagonal { n };
    let matrices: Vec<_> =
        coefficient_vectors(qam.points(), n).iter().map(|c| DMatrix::from_vec(n, 1, field.conjugates(c))).collect();
    let frame_uses = 2 * n - 1;
    let theta = scale_for(kind, &matrices, frame_uses, rho);
    let rate = n as f64 * (qam.len() as f64).log2() / frame_uses as f64;
    Ok(Codebook { kind, matrices, rate_bits_per_use: rate, frame_uses, rho, theta, forwards: Vec::new() })
}

/// Left-regular representation of `Σ ℓₖ zᵏ` in the cyclic algebra
/// `(K(i)/Q(i), σ, γ)`: entry `(r, c)` is `σᶜ(ℓ_{r−c})`, times `γ` above
/// the diagonal.
pub fn cda_codeword(field: &NumberFieldEmbedding, gamma: Complex64, layers: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    let n = field.degree();
    DMatrix::from_fn(n, n, |r, c| {
        let layer = (r + n - c) % n;
        let z = field.conjugate(&layers[layer], c);
        if r < c {
            gamma * z
        } else {
            z
        }
    })
}

/// 2×2 code for two nodes: `[[αℓ₀, iσ(αℓ₁)], [αℓ₁, σ(αℓ₀)]]` over
/// `Q(i, √5)` with `α = 1 + i − iφ`, sent row by row; the relay repeats
/// slots 1 and 2 in slots 3 and 4. The factor `α` makes the lattice
/// generator unitary up to scale (the Golden code), so the peak frame
/// energy equals the average.
pub fn naf_codebook(n: usize, m: usize, rho: f64) -> Result<Codebook> {
    check_rho(rho)?;
    if n != 2 {
        return Err(Error::Unsupported(format!("no NAF code ships for n = {n}")));
    }
    let field = build_embedding(2)?;
    let qam = Constellation::qam(m)?;
    if qam.len().pow(4) > 1 << 16 {
        return Err(Error::Unsupported(format!("{m}²-QAM gives more than 2^16 codewords")));
    }
    let gamma = Complex64::new(0.0, 1.0);
    let kind = CodeKind::NafCda { n };
    let matrices: Vec<_> = coefficient_vectors(qam.points(), 4)
        .iter()
        .map(|c| {
            let mut x = cda_codeword(&field, gamma, &[c[0..2].to_vec(), c[2..4].to_vec()]);
            for col in 0..2 {
                let a = field.conjugate(&GOLDEN_SHAPING, col);
                x.column_mut(col).iter_mut().for_each(|z| *z *= a);
            }
            x
        })
        .collect();
    let frame_uses = 4;
    let theta = scale_for(kind, &matrices, frame_uses, rho);
    let rate = 4.0 * (qam.len() as f64).log2() / frame_uses as f64;
    Ok(Codebook { kind, matrices, rate_bits_per_use: rate, frame_uses, rho, theta, forwards: naf_forwards(n) })
}

/// `α = 1 + i − iφ` in the basis `{1, φ}`.
const GOLDEN_SHAPING: [Complex64; 2] = [Complex64::new(1.0, 1.0), Complex64::new(0.0, -1.0)];

/// Relay `i ∈ 2..=n` forwards in slot `4(n−1)(i−2) + 2(n−1) + k` what it
/// heard in slot `4(n−1)(i−2) + k`, `k = 1..=2(n−1)`.
pub fn naf_forwards(n: usize) -> Vec<Forward> {
    let w = 2 * (n - 1);
    (2..=n)
        .flat_map(|i| {
            let base = 4 * (n - 1) * (i - 2);
            (1..=w).map(move |k| Forward { relay: i, heard_at: base + k, sent_at: base + w + k })
        })
        .collect()
}
