//! Finite-SNR Monte Carlo outage estimation for every protocol's channel
//! model, and log-log slope fits that measure diversity empirically.
//!
//! Per-symbol transmit power is `ρ` and every noise has unit variance.
//! Trial `t` of point `k` in a sweep draws its channel from
//! [`trial_rng`]`(seed, k·trials + t)`, so counts do not depend on how the
//! trials are scheduled across threads.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::codes::relay_matrices;
use crate::exponent::{trial_rng, ChannelRealization, MultiplexingGain, ProtocolKind, ProtocolSpec};
use crate::{report, Error, Result};

/// Target rate `R` in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateRule {
    /// `R = r log₂ ρ`, floored at zero.
    Multiplexing(MultiplexingGain),
    /// A fixed number of bits per use, independent of SNR.
    Fixed(f64),
}

impl RateRule {
    pub fn bits(&self, rho: f64) -> f64 {
        match *self {
            RateRule::Multiplexing(r) => (r.value() * rho.log2()).max(0.0),
            RateRule::Fixed(bits) => bits,
        }
    }
}

pub fn db_to_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho >= 0.0 {
        Ok(())
    } else {
        Err(Error::NonFinite("rho"))
    }
}

fn check_channel(real: &ChannelRealization, n: usize) -> Result<()> {
    if !real.is_finite() {
        return Err(Error::NonFinite("channel coefficient"));
    }
    if real.g.len() != n || real.h.len() + 1 != n {
        return Err(Error::DimensionMismatch(format!(
            "expected {n} source links and {} relay links, got {} and {}",
            n - 1,
            real.g.len(),
            real.h.len()
        )));
    }
    Ok(())
}

/// `log₂ det(I + ρ Σ^{-1/2} H H† Σ^{-1/2})` for diagonal `Σ`, through a
/// Cholesky factor of the Hermitian positive-definite argument.
fn log2_det_whitened(h: &DMatrix<Complex64>, noise: &DVector<f64>, rho: f64) -> f64 {
    let mut w = h.clone();
    for (i, mut row) in w.row_iter_mut().enumerate() {
        row /= Complex64::new(noise[i].sqrt(), 0.0);
    }
    let m = w.nrows();
    let j = DMatrix::<Complex64>::identity(m, m) + (&w * w.adjoint()) * Complex64::new(rho, 0.0);
    let chol = j.cholesky().expect("identity plus a Gram matrix is positive definite");
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.re.ln()).sum::<f64>() / std::f64::consts::LN_2
}

/// Relay amplification meeting the per-relay energy budget with equality:
/// `αⱼ² = ρ / (p ρ |gⱼ|² + 1)`.
pub fn oaf_gains(real: &ChannelRealization, rho: f64, p: usize) -> Vec<f64> {
    real.g[1..].iter().map(|g| rho / (p as f64 * rho * g.norm_sqr() + 1.0)).collect()
}

/// Channel matrix `[g₁ I_p; Σⱼ gⱼ hⱼ Aⱼ]` and the diagonal of the noise
/// covariance of the amplify-and-forward frame with `p = n`, `q = n − 1`.
pub fn oaf_channel(real: &ChannelRealization, rho: f64) -> (DMatrix<Complex64>, DVector<f64>) {
    let n = real.n();
    let (p, q) = (n, n - 1);
    let alphas: Vec<f64> = oaf_gains(real, rho, p).iter().map(|a2| a2.sqrt()).collect();
    let a = relay_matrices(&alphas);
    let mut h = DMatrix::<Complex64>::zeros(p + q, p);
    for i in 0..p {
        h[(i, i)] = real.g[0];
    }
    let mut noise = DVector::from_element(p + q, 1.0);
    for (j, aj) in a.iter().enumerate() {
        let gain = real.g[j + 1] * real.h[j];
        let block = aj * gain;
        let mut lower = h.rows_mut(p, q);
        lower += block;
        let colour = aj * aj.adjoint();
        for i in 0..q {
            noise[p + i] += real.h[j].norm_sqr() * colour[(i, i)].re;
        }
    }
    (h, noise)
}

/// Mutual information in bits over one `2n − 1`-use amplify-and-forward
/// frame with gaussian input of per-symbol power `ρ`.
pub fn mutual_info_oaf(real: &ChannelRealization, rho: f64, n: usize) -> Result<f64> {
    check_rho(rho)?;
    if n < 2 {
        return Err(Error::InvalidProtocol(format!("need n ≥ 2, got {n}")));
    }
    check_channel(real, n)?;
    let (h, noise) = oaf_channel(real, rho);
    Ok(log2_det_whitened(&h, &noise, rho))
}

/// Lower-triangular 2×2 channel of one non-orthogonal amplify-and-forward
/// frame served by relay `i`, with its noise covariance diagonal.
pub fn naf_frame(real: &ChannelRealization, rho: f64, i: usize) -> (DMatrix<Complex64>, DVector<f64>) {
    let (g1, gi, hi) = (real.g[0], real.g[i + 1], real.h[i]);
    let b2 = rho / (rho * gi.norm_sqr() + 1.0);
    let b = b2.sqrt();
    let h = DMatrix::from_row_slice(2, 2, &[g1, Complex64::new(0.0, 0.0), hi * gi * b, g1]);
    let noise = DVector::from_vec(vec![1.0, 1.0 + b2 * hi.norm_sqr()]);
    (h, noise)
}

pub fn mutual_info_naf(real: &ChannelRealization, rho: f64, n: usize) -> Result<f64> {
    check_rho(rho)?;
    check_channel(real, n)?;
    Ok((0..n - 1)
        .map(|i| {
            let (h, noise) = naf_frame(real, rho, i);
            log2_det_whitened(&h, &noise, rho)
        })
        .sum())
}

/// Which relays decode under the threshold rule `p log₂(1 + ρ|gⱼ|²) ≥ mR`.
pub fn decoding_relays(real: &ChannelRealization, rho: f64, p: usize, frame_bits: f64) -> Vec<bool> {
    real.g[1..].iter().map(|g| p as f64 * (rho * g.norm_sqr()).ln_1p() / std::f64::consts::LN_2 >= frame_bits).collect()
}

fn selection_df_info(real: &ChannelRealization, rho: f64, spec: &ProtocolSpec, frame_bits: f64) -> f64 {
    let (p, q) = (spec.p as f64, spec.q as f64);
    let direct = rho * real.g[0].norm_sqr();
    let helpers: f64 = decoding_relays(real, rho, spec.p, frame_bits)
        .iter()
        .zip(&real.h)
        .filter(|(ok, _)| **ok)
        .map(|(_, h)| rho * h.norm_sqr())
        .sum();
    let second = match spec.kind {
        ProtocolKind::NsdfFixed | ProtocolKind::NsdfVariable => direct + helpers,
        _ => helpers,
    };
    (p * direct.ln_1p() + q * second.ln_1p()) / std::f64::consts::LN_2
}

/// Mutual information in bits over a whole frame of `m = p + q` uses. The
/// selection schemes need the target frame rate to know which relays join.
pub fn frame_mutual_info(spec: &ProtocolSpec, real: &ChannelRealization, rho: f64, frame_bits: f64) -> Result<f64> {
    check_rho(rho)?;
    check_channel(real, spec.n)?;
    match spec.kind {
        ProtocolKind::Oaf => {
            if spec.p != spec.n || spec.q + 1 != spec.n {
                return Err(Error::Unsupported("outage simulation of OAF needs p = n, q = n − 1".into()));
            }
            mutual_info_oaf(real, rho, spec.n)
        }
        ProtocolKind::Naf => mutual_info_naf(real, rho, spec.n),
        ProtocolKind::Miso => {
            let gain: f64 = real.g.iter().map(|g| g.norm_sqr()).sum();
            Ok((rho * gain).ln_1p() / std::f64::consts::LN_2)
        }
        _ => Ok(selection_df_info(real, rho, spec, frame_bits)),
    }
}

pub fn is_outage(spec: &ProtocolSpec, real: &ChannelRealization, rho: f64, rate_bits: f64) -> Result<bool> {
    let frame_bits = spec.m() as f64 * rate_bits;
    Ok(frame_mutual_info(spec, real, rho, frame_bits)? < frame_bits)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutagePoint {
    pub snr_db: f64,
    pub rho: f64,
    pub trials: u64,
    pub outage_count: u64,
    pub p_hat: f64,
}

impl OutagePoint {
    pub fn new(snr_db: f64, trials: u64, outage_count: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be positive".into()));
        }
        if outage_count > trials {
            return Err(Error::InvalidArgument("more outages than trials".into()));
        }
        let p_hat = outage_count as f64 / trials as f64;
        Ok(Self { snr_db, rho: db_to_linear(snr_db), trials, outage_count, p_hat })
    }

    /// Binomial standard error of `p_hat`.
    pub fn stderr(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageSeries {
    pub protocol: ProtocolSpec,
    pub rate: RateRule,
    pub points: Vec<OutagePoint>,
    /// Negated log-log slope, when at least three points saw an event.
    pub fitted_exponent: Option<f64>,
    pub fit_stderr: Option<f64>,
}

impl OutageSeries {
    pub fn zero_points(&self) -> usize {
        self.points.iter().filter(|p| p.outage_count == 0).count()
    }
}

/// Hook applied to every sampled channel before evaluation.
pub type ChannelTweak<'a> = &'a (dyn Fn(&mut ChannelRealization) + Sync);

fn count_events(
    spec: &ProtocolSpec,
    rate: RateRule,
    rho: f64,
    first_index: u64,
    trials: u64,
    seed: u64,
    tweak: Option<ChannelTweak<'_>>,
) -> Result<u64> {
    let rate_bits = rate.bits(rho);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, first_index + t);
            let mut real = ChannelRealization::draw(spec.n, &mut rng);
            if let Some(f) = tweak {
                f(&mut real);
            }
            is_outage(spec, &real, rho, rate_bits).map(u64::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Estimates the outage probability at one SNR from `trials` channel draws
/// indexed `0..trials` under `master_seed`.
pub fn outage_prob(
    spec: &ProtocolSpec,
    rate: RateRule,
    snr_db: f64,
    trials: u64,
    master_seed: u64,
) -> Result<OutagePoint> {
    outage_prob_with(spec, rate, snr_db, trials, master_seed, None)
}

/// [`outage_prob`] with every channel passed through `tweak` first.
pub fn outage_prob_with(
    spec: &ProtocolSpec,
    rate: RateRule,
    snr_db: f64,
    trials: u64,
    master_seed: u64,
    tweak: Option<ChannelTweak<'_>>,
) -> Result<OutagePoint> {
    spec.validate()?;
    if !snr_db.is_finite() {
        return Err(Error::NonFinite("snr_db"));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let count = count_events(spec, rate, db_to_linear(snr_db), 0, trials, master_seed, tweak)?;
    OutagePoint::new(snr_db, trials, count)
}

/// Least-squares slope of `log₁₀ p_hat` against `log₁₀ ρ`, negated, with
/// its standard error. Points without events are skipped.
pub fn fit_exponent(points: &[OutagePoint]) -> Result<(f64, f64)> {
    let usable: Vec<(f64, f64)> =
        points.iter().filter(|p| p.outage_count > 0).map(|p| (p.rho.log10(), p.p_hat.log10())).collect();
    if usable.len() < 3 {
        return Err(Error::TooFewPoints(usable.len()));
    }
    let k = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("SNR points must differ".into()));
    }
    let slope = sxy / sxx;
    let sse: f64 = usable.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let stderr = (sse / (k - 2.0) / sxx).sqrt();
    Ok((-slope, stderr))
}

pub fn estimate_exponent(series: &OutageSeries) -> Result<(f64, f64)> {
    fit_exponent(&series.points)
}

/// Runs [`outage_prob`] at every SNR on a pool of `workers` threads and
/// attaches the fitted exponent.
pub fn sweep(
    spec: &ProtocolSpec,
    rate: RateRule,
    snr_db: &[f64],
    trials_per_point: u64,
    master_seed: u64,
    workers: usize,
) -> Result<OutageSeries> {
    spec.validate()?;
    check_sweep(snr_db, trials_per_point, workers)?;
    let pool = worker_pool(workers)?;
    let points = pool.install(|| {
        snr_db
            .iter()
            .enumerate()
            .map(|(k, &db)| {
                let first = k as u64 * trials_per_point;
                let count = count_events(spec, rate, db_to_linear(db), first, trials_per_point, master_seed, None)?;
                OutagePoint::new(db, trials_per_point, count)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let fit = fit_exponent(&points).ok();
    Ok(OutageSeries { protocol: *spec, rate, points, fitted_exponent: fit.map(|f| f.0), fit_stderr: fit.map(|f| f.1) })
}

pub(crate) fn check_sweep(snr_db: &[f64], trials: u64, workers: usize) -> Result<()> {
    if snr_db.is_empty() {
        return Err(Error::InvalidArgument("no SNR points".into()));
    }
    if snr_db.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("snr_db"));
    }
    if snr_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("SNR points must be strictly increasing".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    if workers == 0 {
        return Err(Error::InvalidArgument("workers must be positive".into()));
    }
    Ok(())
}

pub(crate) fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))
}

/// Writes the series as `snr_db,rho,trials,outage_count,p_hat,stderr` rows
/// followed by a `# slope=… stderr=…` line.
pub fn write_csv<W: Write>(series: &OutageSeries, mut out: W) -> io::Result<()> {
    writeln!(out, "snr_db,rho,trials,outage_count,p_hat,stderr")?;
    for p in &series.points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            report::fixed(p.snr_db),
            report::scientific(p.rho),
            p.trials,
            p.outage_count,
            report::scientific(p.p_hat),
            report::scientific(p.stderr())
        )?;
    }
    match (series.fitted_exponent, series.fit_stderr) {
        (Some(s), Some(e)) => writeln!(out, "# slope={} stderr={}", report::fixed(s), report::fixed(e)),
        _ => writeln!(out, "# slope=nan stderr=nan"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_channel(n: usize) -> ChannelRealization {
        ChannelRealization { g: vec![c(1.0, 0.0); n], h: vec![c(1.0, 0.0); n - 1] }
    }

    #[test]
    fn silent_channel_carries_nothing() {
        let real = ChannelRealization { g: vec![c(0.0, 0.0); 3], h: vec![c(0.0, 0.0); 2] };
        assert_eq!(mutual_info_oaf(&real, 100.0, 3).unwrap(), 0.0);
        assert_eq!(mutual_info_oaf(&unit_channel(3), 0.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut real = unit_channel(2);
        assert!(mutual_info_oaf(&real, f64::NAN, 2).is_err());
        assert!(mutual_info_oaf(&real, 1.0, 3).is_err());
        real.g[0] = c(f64::INFINITY, 0.0);
        assert!(mutual_info_oaf(&real, 1.0, 2).is_err());
    }

    #[test]
    fn relay_noise_is_coloured_per_slot() {
        let real =
            ChannelRealization { g: vec![c(1.0, 0.0), c(0.5, 0.0), c(0.0, 1.0)], h: vec![c(2.0, 0.0), c(0.0, 3.0)] };
        let (h, noise) = oaf_channel(&real, 10.0);
        let a = oaf_gains(&real, 10.0, 3);
        assert_eq!(h.shape(), (5, 3));
        assert!((noise[3] - (1.0 + 4.0 * a[0])).abs() < 1e-12);
        assert!((noise[4] - (1.0 + 9.0 * a[1])).abs() < 1e-12);
        assert_eq!(h[(3, 0)], c(0.0, 0.0));
        assert!((h[(3, 1)] - c(0.5 * 2.0 * a[0].sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fixed_and_multiplexing_rates() {
        assert_eq!(RateRule::Fixed(1.5).bits(1e6), 1.5);
        let r = RateRule::Multiplexing(MultiplexingGain::new(0.5).unwrap());
        assert!((r.bits(16.0) - 2.0).abs() < 1e-12);
        assert_eq!(r.bits(0.5), 0.0);
    }

    #[test]
    fn synthetic_slopes() {
        let make = |f: &dyn Fn(f64) -> f64| -> Vec<OutagePoint> {
            [10.0, 20.0, 30.0, 40.0]
                .iter()
                .map(|&db| {
                    let rho = db_to_linear(db);
                    OutagePoint { snr_db: db, rho, trials: 1, outage_count: 1, p_hat: f(rho) }
                })
                .collect()
        };
        let (s, e) = fit_exponent(&make(&|rho| rho.powf(-2.0))).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && e < 1e-12);
        let (s, _) = fit_exponent(&make(&|rho| 5.0 * rho.powf(-1.5))).unwrap();
        assert!((s - 1.5).abs() < 1e-12);
        assert_eq!(fit_exponent(&make(&|_| 0.1)[..2]), Err(Error::TooFewPoints(2)));
    }

    #[test]
    fn point_validation() {
        assert!(OutagePoint::new(10.0, 0, 0).is_err());
        assert!(OutagePoint::new(10.0, 5, 6).is_err());
        assert_eq!(OutagePoint::new(10.0, 4, 1).unwrap().p_hat, 0.25);
    }

    #[test]
    fn sweep_validation() {
        let spec = ProtocolSpec::miso(1).unwrap();
        let rate = RateRule::Fixed(1.0);
        assert!(sweep(&spec, rate, &[10.0, 10.0], 10, 1, 1).is_err());
        assert!(sweep(&spec, rate, &[10.0], 0, 1, 1).is_err());
        assert!(sweep(&spec, rate, &[10.0], 10, 1, 0).is_err());
        assert!(sweep(&spec, rate, &[], 10, 1, 1).is_err());
    }

    #[test]
    fn csv_layout() {
        let spec = ProtocolSpec::miso(1).unwrap();
        let points = vec![OutagePoint::new(10.0, 4, 1).unwrap()];
        let series = OutageSeries {
            protocol: spec,
            rate: RateRule::Fixed(1.0),
            points,
            fitted_exponent: Some(1.25),
            fit_stderr: Some(0.5),
        };
        let mut buf = Vec::new();
        write_csv(&series, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "snr_db,rho,trials,outage_count,p_hat,stderr");
        assert!(lines[1].starts_with("10.00,1e1,4,1,2.5e-1,"));
        assert_eq!(lines[2], "# slope=1.25 stderr=0.50");
    }
}
