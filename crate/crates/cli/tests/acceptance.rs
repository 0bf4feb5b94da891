//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relay_dmt::analytic::{self, PhaseRatio};
use relay_dmt::codes::{naf_codebook, oaf_diagonal_codebook, oaf_relay_matrices, relay_matrices, simulate_wer};
use relay_dmt::exponent::complex_normal;
use relay_dmt::numeric::{self, default_kappa_grid, oracle_variable_envelope};
use relay_dmt::outage::{db_to_linear, sweep, OutageSeries, RateRule};
use relay_dmt::{ChannelRealization, MultiplexingGain, PiecewiseLinearCurve, ProtocolKind, ProtocolSpec};

const SEED: u64 = 1;

type OracleFn = fn(usize, f64, f64, f64) -> f64;
type Criterion = fn() -> Verdict;
/// Name, protocol, multiplexing gain, SNR window, trials per point, target slope, half-width.
type SlopeRun = (&'static str, ProtocolSpec, f64, [f64; 5], u64, f64, f64);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn grid(count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64 / (count - 1) as f64).collect()
}

fn splits(n: usize) -> Vec<(usize, usize)> {
    let mut s = vec![(1, 1), (2, 1), (3, 1), (3, 2), (5, 3)];
    if !s.contains(&(n, n - 1)) {
        s.push((n, n - 1));
    }
    s
}

fn analytic_matches_oracle() -> Verdict {
    let start = Instant::now();
    let rs = grid(101);
    let mut worst = (0.0f64, String::new());
    let mut cases = 0;
    for n in 2..=4 {
        for (p, q) in splits(n) {
            let (pf, qf) = (p as f64, q as f64);
            let pairs: [(&str, PiecewiseLinearCurve, OracleFn); 3] = [
                ("oaf", analytic::oaf_upper_bound(n, p, q).unwrap(), numeric::oaf_value),
                ("nsdf", analytic::nsdf_fixed_dmt(n, p, q).unwrap(), numeric::nsdf_value),
                ("osdf", analytic::osdf_fixed_dmt(n, p, q).unwrap(), numeric::osdf_value),
            ];
            for (name, curve, oracle) in pairs {
                cases += 1;
                for &r in &rs {
                    let d = (curve.eval(r).unwrap() - oracle(n, pf, qf, r)).abs();
                    if d > worst.0 || d.is_nan() {
                        worst = (d, format!("{name} n={n} p={p} q={q} r={r:.2}"));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst.0 < 1e-6 && secs < 10.0,
        format!(
            "{cases} cases x 101 samples, max |diff| {:.1e} at {}, {secs:.2} s (limits 1e-6, 10 s)",
            worst.0, worst.1
        ),
    )
}

fn point_values() -> Verdict {
    let half = MultiplexingGain::new(0.5).unwrap();
    let quarter = MultiplexingGain::new(0.25).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let checks = [
        ("oaf n=3 d(0.25)", analytic::oaf_optimal_dmt(3).at(quarter), 1.75),
        ("oaf n=3 d(0.75)", analytic::oaf_optimal_dmt(3).eval(0.75).unwrap(), 0.25),
        ("naf n=3 d(0.25)", analytic::naf_dmt(3).at(quarter), 1.75),
        ("nsdf-variable n=2 d(0.5)", analytic::nsdf_variable_dmt(2).at(half), 0.75),
        ("osdf kappa_2", analytic::osdf_kappa_n(2), 2.0),
        ("nsdf kappa_2", analytic::nsdf_kappa_n(2), phi),
    ];
    let bad: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > 1e-12)
        .map(|(name, got, want)| format!("{name}={got} want {want}"))
        .collect();
    verdict(
        bad.is_empty(),
        if bad.is_empty() { format!("{} values within 1e-12", checks.len()) } else { bad.join("; ") },
    )
}

fn identities() -> Verdict {
    let rs = grid(1001);
    let tol = 1e-12;
    let mut bad = Vec::new();
    for n in 2..=5 {
        let naf = analytic::naf_dmt(n);
        let tdb = analytic::transmit_diversity_bound(n);
        let oaf = analytic::oaf_optimal_dmt(n);
        let nsdf11 = analytic::nsdf_fixed_dmt_ratio(n, PhaseRatio::from_counts(1, 1).unwrap());
        let nv = analytic::nsdf_variable_dmt(n);
        let ov = analytic::osdf_variable_dmt(n);
        let mut fixed = Vec::new();
        for (p, q) in splits(n) {
            fixed.push(analytic::nsdf_fixed_dmt(n, p, q).unwrap());
            fixed.push(analytic::osdf_fixed_dmt(n, p, q).unwrap());
            fixed.push(analytic::oaf_upper_bound(n, p, q).unwrap());
        }
        for &r in &rs {
            let t = tdb.eval(r).unwrap();
            let a = naf.eval(r).unwrap();
            let (v_n, v_o) = (nv.eval(r).unwrap(), ov.eval(r).unwrap());
            if (oaf.eval(r).unwrap() - a).abs() > tol {
                bad.push(format!("oaf != naf n={n} r={r}"));
            }
            if (nsdf11.eval(r).unwrap() - a).abs() > tol {
                bad.push(format!("nsdf(1,1) != naf n={n} r={r}"));
            }
            if v_n < v_o - tol {
                bad.push(format!("nsdf-variable < osdf-variable n={n} r={r}"));
            }
            let above = [a, v_n, v_o].into_iter().chain(fixed.iter().map(|c| c.eval(r).unwrap())).any(|d| d > t + tol);
            if above {
                bad.push(format!("curve above transmit bound n={n} r={r}"));
            }
        }
    }
    verdict(
        bad.is_empty(),
        if bad.is_empty() {
            "n=2..5 on 1001 points".into()
        } else {
            format!("{} violations, first: {}", bad.len(), bad[0])
        },
    )
}

fn envelope() -> Verdict {
    let rs = grid(101);
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        let kappas = default_kappa_grid(ProtocolKind::NsdfFixed, n, 1e-3);
        let env = oracle_variable_envelope(ProtocolKind::NsdfFixed, n, &kappas, &rs).unwrap();
        let exact = analytic::nsdf_variable_dmt(n);
        for &r in &rs {
            worst = worst.max((env.curve.eval(r).unwrap() - exact.eval(r).unwrap()).abs());
        }
    }
    verdict(worst < 5e-3, format!("max |envelope - variable| {worst:.2e} for n=2,3 (limit 5e-3)"))
}

fn cauchy_schwarz_gap(a: &[DMatrix<Complex64>], real: &ChannelRealization) -> f64 {
    let q = a[0].nrows();
    let mut b = DMatrix::<Complex64>::zeros(q, a[0].ncols());
    let mut bound = DMatrix::<Complex64>::zeros(q, q);
    for (j, aj) in a.iter().enumerate() {
        let gh = real.g[j + 1] * real.h[j];
        b += aj * gh;
        bound += aj * aj.adjoint() * Complex64::new(gh.norm_sqr(), 0.0);
    }
    let diff = bound * Complex64::new(a.len() as f64, 0.0) - &b * b.adjoint();
    diff.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

fn relay_matrix_properties() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut smallest = f64::INFINITY;
    for trial in 0..10_000 {
        let n = rng.random_range(2..=5);
        let real = ChannelRealization::draw(n, &mut rng);
        let a: Vec<DMatrix<Complex64>> = if trial % 2 == 0 {
            let (p, q) = (rng.random_range(1..=5), rng.random_range(1..=4));
            (1..n).map(|_| DMatrix::from_fn(q, p, |_, _| complex_normal(&mut rng))).collect()
        } else {
            relay_matrices(&(1..n).map(|_| rng.random_range(0.1..3.0)).collect::<Vec<_>>())
        };
        smallest = smallest.min(cauchy_schwarz_gap(&a, &real));
    }
    let orthogonal = (2..=8).all(|n| {
        let a = oaf_relay_matrices(n);
        (0..a.len()).all(|j| {
            (0..a.len()).all(|k| j == k || (&a[j] * a[k].adjoint()).iter().all(|z| *z == Complex64::new(0.0, 0.0)))
        })
    });
    verdict(
        smallest >= -1e-10 && orthogonal,
        format!("min eigenvalue {smallest:.2e} over 10^4 draws (limit -1e-10), A_j A_k^H = 0 exactly: {orthogonal}"),
    )
}

fn slope_of(series: &OutageSeries) -> f64 {
    series.fitted_exponent.unwrap_or(f64::NAN)
}

fn monte_carlo_exponents() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;

    let miso = ProtocolSpec::miso(1).unwrap();
    let snr = [0.0, 5.0, 10.0, 15.0, 20.0];
    let s = sweep(&miso, RateRule::Fixed(1.0), &snr, 1_000_000, SEED, 1).unwrap();
    let worst_z = s
        .points
        .iter()
        .map(|p| {
            let exact = 1.0 - (-1.0 / db_to_linear(p.snr_db)).exp();
            (p.p_hat - exact).abs() / (exact * (1.0 - exact) / p.trials as f64).sqrt()
        })
        .fold(0.0, f64::max);
    pass &= worst_z <= 3.0;
    notes.push(format!("miso n=1 worst |z| {worst_z:.2}"));

    let runs: [SlopeRun; 3] = [
        ("oaf n=2 r=0.25", ProtocolSpec::oaf(2).unwrap(), 0.25, [20.0, 25.0, 30.0, 35.0, 40.0], 1_000_000, 1.25, 0.25),
        (
            "nsdf n=2 (2,1) r=0.1",
            ProtocolSpec::nsdf_fixed(2, 2, 1).unwrap(),
            0.1,
            [15.0, 20.0, 25.0, 30.0, 35.0],
            10_000_000,
            1.7,
            0.3,
        ),
        ("naf n=2 r=0.25", ProtocolSpec::naf(2).unwrap(), 0.25, [25.0, 30.0, 35.0, 40.0, 45.0], 10_000_000, 1.25, 0.25),
    ];
    for (name, spec, r, snr, trials, target, band) in runs {
        let rate = RateRule::Multiplexing(MultiplexingGain::new(r).unwrap());
        let slope = slope_of(&sweep(&spec, rate, &snr, trials, SEED, 1).unwrap());
        let ok = (slope - target).abs() <= band;
        pass &= ok;
        notes.push(format!(
            "{name} slope {slope:.3} over {}-{} dB at {trials:.0e} trials ({} {target}+-{band})",
            snr[0],
            snr[4],
            if ok { "in" } else { "outside" }
        ));
    }
    verdict(pass, notes.join("; "))
}

fn code_properties() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;

    let diag = oaf_diagonal_codebook(2, 2, 100.0).unwrap();
    let mut pairs = 0;
    let mut min_product = f64::INFINITY;
    for (i, a) in diag.matrices.iter().enumerate() {
        for b in &diag.matrices[i + 1..] {
            let d = a - b;
            pairs += 1;
            min_product = min_product.min(d.iter().map(|z| z.norm_sqr()).product());
        }
    }
    pass &= min_product >= 1.0 - 1e-9;
    notes.push(format!("diagonal code {pairs} pairs, min norm product {min_product:.3}"));

    let naf = naf_codebook(2, 2, 100.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut min_det = f64::INFINITY;
    for _ in 0..10_000 {
        let (i, j) = (rng.random_range(0..naf.len()), rng.random_range(0..naf.len()));
        if i != j {
            min_det = min_det.min((&naf.matrices[i] - &naf.matrices[j]).determinant().norm());
        }
    }
    pass &= min_det > 0.0;
    notes.push(format!("naf code min |det| {min_det:.3} over 10^4 pairs"));

    let mut worst_ratio: f64 = 0.0;
    for code in [&diag, &naf] {
        for k in 0..code.len() {
            worst_ratio = worst_ratio.max(code.theta.powi(2) * code.frame_energy(k) / code.energy_cap());
        }
    }
    pass &= (1.0 - 1e-9..=1.0 + 1e-9).contains(&worst_ratio);
    notes.push(format!("peak energy / cap {worst_ratio:.12}"));

    let snr = [14.0, 17.0, 20.0, 23.0, 26.0];
    for (name, spec, code) in
        [("oaf-diag", ProtocolSpec::oaf(2).unwrap(), &diag), ("naf", ProtocolSpec::naf(2).unwrap(), &naf)]
    {
        let slope = slope_of(&simulate_wer(&spec, code, &snr, 100_000, SEED, 1).unwrap());
        pass &= slope >= 1.6;
        notes.push(format!("{name} WER slope {slope:.3} (need >= 1.6)"));
    }
    verdict(pass, notes.join("; "))
}

fn run_binary(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_relay-dmt")).args(args).output().expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn determinism() -> Verdict {
    let commands: [&[&str]; 3] = [
        &[
            "outage",
            "--protocol",
            "oaf",
            "--n",
            "3",
            "--r",
            "0.25",
            "--snr",
            "5,10,15",
            "--trials",
            "50000",
            "--seed",
            "11",
        ],
        &[
            "outage",
            "--protocol",
            "nsdf",
            "--n",
            "3",
            "--p",
            "2",
            "--q",
            "1",
            "--r",
            "0.2",
            "--trials",
            "100000",
            "--seed",
            "12",
        ],
        &["codesim", "--code", "naf", "--snr", "6,10,14", "--trials", "5000", "--seed", "13"],
    ];
    let mut identical = 0;
    for cmd in commands {
        let outputs: Vec<Vec<u8>> =
            ["1", "2", "5"].iter().map(|w| run_binary(&[cmd, &["--workers", w]].concat())).collect();
        if outputs.windows(2).all(|w| w[0] == w[1]) {
            identical += 1;
        }
    }
    verdict(
        identical == commands.len(),
        format!("{identical}/{} commands byte-identical across 1, 2 and 5 workers", commands.len()),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("analytic vs oracle", analytic_matches_oracle),
        ("point values", point_values),
        ("identities", identities),
        ("envelope", envelope),
        ("relay matrices", relay_matrix_properties),
        ("monte carlo exponents", monte_carlo_exponents),
        ("code properties", code_properties),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        failed += usize::from(!v.pass);
        println!(
            "{} {} {name}: {} [{:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
