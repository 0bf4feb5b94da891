#![allow(clippy::needless_range_loop)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relay_dmt::codes::{oaf_relay_matrices, relay_matrices};
use relay_dmt::exponent::complex_normal;
use relay_dmt::outage::*;
use relay_dmt::{ChannelRealization, MultiplexingGain, ProtocolKind, ProtocolSpec};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Determinant by Gaussian elimination with partial pivoting.
fn dense_det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut det = c(1.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
        }
    }
    det
}

/// Assembles `I + ρ H H† Σ⁻¹` from the frame equations: the source sends
/// `x₁..xₙ`, the destination hears each directly, then relay `j` replays
/// its noisy copy of `x_j` with gain `αⱼ`.
fn oaf_info_by_assembly(real: &ChannelRealization, rho: f64) -> f64 {
    let n = real.g.len();
    let m = 2 * n - 1;
    let mut h = vec![vec![c(0.0); n]; m];
    let mut sigma = vec![1.0; m];
    for i in 0..n {
        h[i][i] = real.g[0];
    }
    for j in 1..n {
        let alpha2 = rho / (n as f64 * rho * real.g[j].norm_sqr() + 1.0);
        h[n + j - 1][j] = real.g[j] * real.h[j - 1] * alpha2.sqrt();
        sigma[n + j - 1] += alpha2 * real.h[j - 1].norm_sqr();
    }
    let j: Vec<Vec<Complex64>> = (0..m)
        .map(|r| {
            (0..m)
                .map(|s| {
                    let hh: Complex64 = (0..n).map(|k| h[r][k] * h[s][k].conj()).sum();
                    let id = if r == s { 1.0 } else { 0.0 };
                    c(id) + hh * rho / sigma[s]
                })
                .collect()
        })
        .collect();
    dense_det(j).re.log2()
}

fn oaf_info_closed_form(real: &ChannelRealization, rho: f64) -> f64 {
    let n = real.g.len();
    let g1 = real.g[0].norm_sqr();
    let mut det = (1.0 + rho * g1).powi(n as i32);
    for j in 1..n {
        let a2 = rho / (n as f64 * rho * real.g[j].norm_sqr() + 1.0);
        let gamma = (real.g[j] * real.h[j - 1]).norm_sqr();
        det *= 1.0 + rho * a2 * gamma / ((1.0 + rho * g1) * (1.0 + a2 * real.h[j - 1].norm_sqr()));
    }
    det.log2()
}

#[test]
fn oaf_information_unit_example() {
    let real = ChannelRealization { g: vec![c(1.0); 2], h: vec![c(1.0)] };
    let got = mutual_info_oaf(&real, 1.0, 2).unwrap();
    assert!((got - oaf_info_by_assembly(&real, 1.0)).abs() < 1e-10);
    assert!((got - 4.5f64.log2()).abs() < 1e-12);
}

#[test]
fn oaf_information_matches_independent_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..2000 {
        let n = rng.random_range(2..=5);
        let real = ChannelRealization::draw(n, &mut rng);
        let rho = 10f64.powf(rng.random_range(-1.0..4.0));
        let got = mutual_info_oaf(&real, rho, n).unwrap();
        assert!((got - oaf_info_by_assembly(&real, rho)).abs() < 1e-8 * got.max(1.0));
        assert!((got - oaf_info_closed_form(&real, rho)).abs() < 1e-8 * got.max(1.0));
    }
}

/// Smallest eigenvalue of `(n−1) Σ γⱼ AⱼAⱼ† − BB†`.
fn cauchy_schwarz_gap(a: &[DMatrix<Complex64>], real: &ChannelRealization) -> f64 {
    let q = a[0].nrows();
    let mut b = DMatrix::<Complex64>::zeros(q, a[0].ncols());
    let mut bound = DMatrix::<Complex64>::zeros(q, q);
    for (j, aj) in a.iter().enumerate() {
        let gh = real.g[j + 1] * real.h[j];
        b += aj * gh;
        bound += aj * aj.adjoint() * c(gh.norm_sqr());
    }
    let diff = bound * c(a.len() as f64) - &b * b.adjoint();
    diff.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

#[test]
fn cauchy_schwarz_bound_holds_for_arbitrary_relay_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..10_000 {
        let n = rng.random_range(2..=5);
        let real = ChannelRealization::draw(n, &mut rng);
        let (p, q) = (rng.random_range(1..=5), rng.random_range(1..=4));
        let a: Vec<DMatrix<Complex64>> = if trial % 2 == 0 {
            (1..n).map(|_| DMatrix::from_fn(q, p, |_, _| complex_normal(&mut rng))).collect()
        } else {
            let alphas: Vec<f64> = (1..n).map(|_| rng.random_range(0.1..3.0)).collect();
            relay_matrices(&alphas)
        };
        assert!(
            cauchy_schwarz_gap(&a, &real) >= -1e-10 * (1.0 + real.g.iter().map(|g| g.norm_sqr()).sum::<f64>()).powi(2)
        );
    }
}

#[test]
fn fixed_relay_maps_are_mutually_orthogonal() {
    for n in 2..=6 {
        let a = oaf_relay_matrices(n);
        for j in 0..a.len() {
            for k in 0..a.len() {
                if j != k {
                    assert!((&a[j] * a[k].adjoint()).iter().all(|z| *z == c(0.0)));
                }
            }
        }
    }
}

fn miso1_closed_form(rho: f64, bits: f64) -> f64 {
    1.0 - (-(2f64.powf(bits) - 1.0) / rho).exp()
}

fn within_three_sigma(point: &OutagePoint, p: f64) -> bool {
    let sd = (p * (1.0 - p) / point.trials as f64).sqrt();
    (point.p_hat - p).abs() <= 3.0 * sd
}

#[test]
fn single_antenna_matches_exponential_law() {
    let spec = ProtocolSpec::miso(1).unwrap();
    let point = outage_prob(&spec, RateRule::Fixed(1.0), 10.0, 200_000, 3).unwrap();
    assert!((miso1_closed_form(10.0, 1.0) - 0.0952).abs() < 5e-5);
    assert!(within_three_sigma(&point, miso1_closed_form(10.0, 1.0)));
    let rate = RateRule::Multiplexing(MultiplexingGain::new(0.5).unwrap());
    for db in [0.0, 5.0, 10.0, 20.0] {
        let point = outage_prob(&spec, rate, db, 200_000, 4).unwrap();
        let rho = db_to_linear(db);
        assert!(within_three_sigma(&point, miso1_closed_form(rho, rate.bits(rho))), "{db} dB");
    }
}

#[test]
fn silent_relay_reduces_nsdf_to_direct_link() {
    let spec = ProtocolSpec::new(ProtocolKind::NsdfFixed, 2, 1, 1).unwrap();
    let mute = |real: &mut ChannelRealization| real.g[1] = Complex64::new(1e-12, 0.0);
    let point = outage_prob_with(&spec, RateRule::Fixed(1.0), 10.0, 200_000, 5, Some(&mute)).unwrap();
    assert!(within_three_sigma(&point, miso1_closed_form(10.0, 1.0)));
}

#[test]
fn zero_rate_never_outages() {
    let rate = RateRule::Multiplexing(MultiplexingGain::new(0.0).unwrap());
    let specs = [
        ProtocolSpec::oaf(3).unwrap(),
        ProtocolSpec::naf(3).unwrap(),
        ProtocolSpec::new(ProtocolKind::NsdfFixed, 3, 2, 1).unwrap(),
        ProtocolSpec::new(ProtocolKind::OsdfFixed, 3, 2, 1).unwrap(),
        ProtocolSpec::miso(2).unwrap(),
    ];
    for spec in specs {
        assert_eq!(outage_prob(&spec, rate, 10.0, 20_000, 6).unwrap().outage_count, 0, "{:?}", spec.kind);
    }
}

#[test]
fn counts_do_not_depend_on_worker_count() {
    let rate = RateRule::Multiplexing(MultiplexingGain::new(0.3).unwrap());
    for spec in [ProtocolSpec::oaf(2).unwrap(), ProtocolSpec::new(ProtocolKind::OsdfFixed, 3, 2, 1).unwrap()] {
        let a = sweep(&spec, rate, &[0.0, 10.0, 20.0], 20_000, 77, 1).unwrap();
        let b = sweep(&spec, rate, &[0.0, 10.0, 20.0], 20_000, 77, 8).unwrap();
        assert_eq!(a, b);
        let mut x = Vec::new();
        let mut y = Vec::new();
        write_csv(&a, &mut x).unwrap();
        write_csv(&b, &mut y).unwrap();
        assert_eq!(x, y);
    }
}

#[test]
fn outage_falls_with_snr() {
    let rate = RateRule::Multiplexing(MultiplexingGain::new(0.25).unwrap());
    for spec in [
        ProtocolSpec::oaf(2).unwrap(),
        ProtocolSpec::naf(2).unwrap(),
        ProtocolSpec::new(ProtocolKind::NsdfFixed, 2, 2, 1).unwrap(),
    ] {
        let s = sweep(&spec, rate, &[5.0, 10.0, 15.0, 20.0], 50_000, 9, 1).unwrap();
        for w in s.points.windows(2) {
            let slack = 3.0 * (w[0].stderr().powi(2) + w[1].stderr().powi(2)).sqrt();
            assert!(w[1].p_hat <= w[0].p_hat + slack, "{:?} {:?}", spec.kind, s.points);
        }
    }
}

#[test]
fn orthogonal_selection_never_beats_nonorthogonal() {
    let rate = RateRule::Multiplexing(MultiplexingGain::new(0.2).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let nsdf = ProtocolSpec::new(ProtocolKind::NsdfFixed, 3, 2, 1).unwrap();
    let osdf = ProtocolSpec::new(ProtocolKind::OsdfFixed, 3, 2, 1).unwrap();
    for _ in 0..20_000 {
        let real = ChannelRealization::draw(3, &mut rng);
        let bits = rate.bits(100.0);
        if is_outage(&nsdf, &real, 100.0, bits).unwrap() {
            assert!(is_outage(&osdf, &real, 100.0, bits).unwrap());
        }
    }
}

#[test]
fn two_antenna_diversity_at_fixed_rate() {
    let spec = ProtocolSpec::miso(2).unwrap();
    let snr = [10.0, 12.5, 15.0, 17.5, 20.0];
    let s = sweep(&spec, RateRule::Fixed(1.0), &snr, 1_000_000, 10, 1).unwrap();
    let slope = s.fitted_exponent.unwrap();
    assert!((slope - 2.0).abs() < 0.2, "{slope}");
    let (again, _) = estimate_exponent(&s).unwrap();
    assert_eq!(again, slope);
}

#[test]
fn oaf_rejects_unsupported_split() {
    let spec = ProtocolSpec::new(ProtocolKind::Oaf, 2, 3, 1).unwrap();
    let rate = RateRule::Fixed(1.0);
    assert!(outage_prob(&spec, rate, 10.0, 10, 1).is_err());
}
