use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relay transforms for `n − 1` relays with `p = n`, `q = n − 1`: relay
/// `j` (1-based, `j ≥ 2`) forwards source symbol `j` in relaying slot
/// `j − 1`, scaled by `alphas[j − 2]`.
pub fn relay_matrices(alphas: &[f64]) -> Vec<DMatrix<Complex64>> {
    let q = alphas.len();
    alphas
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut m = DMatrix::zeros(q, q + 1);
            m[(i, i + 1)] = Complex64::new(a, 0.0);
            m
        })
        .collect()
}

/// [`relay_matrices`] with unit gains.
pub fn oaf_relay_matrices(n: usize) -> Vec<DMatrix<Complex64>> {
    relay_matrices(&vec![1.0; n.saturating_sub(1)])
}
