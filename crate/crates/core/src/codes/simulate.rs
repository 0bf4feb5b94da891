use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::{ml_decode, CodeKind, Codebook};
use crate::exponent::{complex_normal, trial_rng, ChannelRealization, ProtocolKind, ProtocolSpec};
use crate::outage::{check_sweep, db_to_linear, fit_exponent, worker_pool, OutagePoint, OutageSeries, RateRule};
use crate::{Error, Result};
use rayon::prelude::*;

/// Equivalent channel and per-row noise variance seen by the codeword,
/// relay gains fixed at 1.
pub fn effective_channel(kind: CodeKind, real: &ChannelRealization) -> (DMatrix<Complex64>, DVector<f64>) {
    match kind {
        CodeKind::OafDiagonal { n } => {
            let mut diag = vec![real.g[0]];
            diag.extend((0..n - 1).map(|j| real.g[j + 1] * real.h[j]));
            let noise = std::iter::once(1.0).chain(real.h.iter().map(|h| 1.0 + h.norm_sqr()));
            (DMatrix::from_diagonal(&DVector::from_vec(diag)), DVector::from_iterator(n, noise))
        }
        CodeKind::NafCda { .. } => {
            let (g1, g2, h) = (real.g[0], real.g[1], real.h[0]);
            let l = DMatrix::from_row_slice(2, 2, &[g1, Complex64::new(0.0, 0.0), h * g2, g1]);
            (l, DVector::from_vec(vec![1.0, 1.0 + h.norm_sqr()]))
        }
    }
}

fn check_pair(spec: &ProtocolSpec, code: &Codebook) -> Result<()> {
    let ok = match code.kind {
        CodeKind::OafDiagonal { n } => spec.kind == ProtocolKind::Oaf && spec.n == n,
        CodeKind::NafCda { n } => spec.kind == ProtocolKind::Naf && spec.n == n,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "code {:?} does not fit protocol {} with n = {}",
            code.kind,
            spec.kind.name(),
            spec.n
        )))
    }
}

fn trial_error(code: &Codebook, rho: f64, seed: u64, index: u64) -> Result<bool> {
    let n = match code.kind {
        CodeKind::OafDiagonal { n } | CodeKind::NafCda { n } => n,
    };
    let mut rng = trial_rng(seed, index);
    let real = ChannelRealization::draw(n, &mut rng);
    let sent = rng.random_range(0..code.len());
    let (l, noise) = effective_channel(code.kind, &real);
    let h = l * Complex64::new(code.theta_at(rho), 0.0);
    let x = &code.matrices[sent];
    let mut y = &h * x;
    for r in 0..y.nrows() {
        let sd = noise[r].sqrt();
        for c in 0..y.ncols() {
            y[(r, c)] += complex_normal(&mut rng) * sd;
        }
    }
    let whitener = noise.map(|v| 1.0 / v.sqrt());
    Ok(ml_decode(code, &h, &y, &whitener)? != sent)
}

/// Word-error rate of `code` over `spec`'s fading channel at each SNR,
/// in the same series shape (and seeding contract) as outage sweeps.
pub fn simulate_wer(
    spec: &ProtocolSpec,
    code: &Codebook,
    snr_db: &[f64],
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<OutageSeries> {
    spec.validate()?;
    check_pair(spec, code)?;
    check_sweep(snr_db, trials, workers)?;
    let pool = worker_pool(workers)?;
    let points = pool.install(|| {
        snr_db
            .iter()
            .enumerate()
            .map(|(k, &db)| {
                let rho = db_to_linear(db);
                let first = k as u64 * trials;
                let errors = (0..trials)
                    .into_par_iter()
                    .map(|t| trial_error(code, rho, master_seed, first + t).map(u64::from))
                    .try_reduce(|| 0, |a, b| Ok(a + b))?;
                OutagePoint::new(db, trials, errors)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let fit = fit_exponent(&points).ok();
    Ok(OutageSeries {
        protocol: *spec,
        rate: RateRule::Fixed(code.rate_bits_per_use),
        points,
        fitted_exponent: fit.map(|f| f.0),
        fit_stderr: fit.map(|f| f.1),
    })
}
