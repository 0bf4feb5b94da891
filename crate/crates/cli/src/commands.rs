use std::fs::File;
use std::io::{BufWriter, Write};

use relay_dmt::analytic::{self, DmtCurve};
use relay_dmt::codes::{naf_codebook, oaf_diagonal_codebook, simulate_wer};
use relay_dmt::numeric;
use relay_dmt::outage::{self, db_to_linear, OutageSeries, RateRule};
use relay_dmt::report::fixed;
use relay_dmt::{MultiplexingGain, ProtocolKind, ProtocolSpec};

use crate::{CodeChoice, CodesimArgs, DmtArgs, Failure, OutageArgs, ProtocolArgs, SnrArgs, VerifyArgs, VerifyProtocol};

/// Largest discrepancy `verify` accepts.
const VERIFY_TOLERANCE: f64 = 1e-6;
/// Offset applied by `verify --perturb`.
const PERTURBATION: f64 = 1e-3;
/// Optimizer value `d(n, p, q, r)`.
type OracleFn = fn(usize, f64, f64, f64) -> f64;

const SPLITS: [(usize, usize); 5] = [(1, 1), (2, 1), (3, 1), (3, 2), (5, 3)];

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn protocol_spec(kind: ProtocolKind, n: usize, p: Option<u64>, q: Option<u64>) -> Result<ProtocolSpec, Failure> {
    let (dp, dq) = match kind {
        ProtocolKind::Oaf => (n, n.saturating_sub(1)),
        ProtocolKind::Naf => (n.saturating_sub(1), n.saturating_sub(1)),
        ProtocolKind::Miso => (1, 0),
        _ => (1, 1),
    };
    let p = p.map_or(dp, |v| v as usize);
    let q = q.map_or(dq, |v| v as usize);
    Ok(ProtocolSpec::new(kind, n, p, q)?)
}

fn spec_from(args: &ProtocolArgs) -> Result<ProtocolSpec, Failure> {
    let kind: ProtocolKind = args.protocol.parse()?;
    protocol_spec(kind, args.n as usize, args.p, args.q)
}

fn r_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if !(0.0..=1.0).contains(&min) || !(min..=1.0).contains(&max) {
        return Err(usage(format!("r range [{min}, {max}] must satisfy 0 <= r-min <= r-max <= 1")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(usage(format!("r-step must be positive, got {step}")));
    }
    let count = ((max - min) / step + 1e-9).floor();
    if count > 1e6 {
        return Err(usage("r grid exceeds 10^6 points"));
    }
    Ok((0..=count as usize).map(|i| (min + i as f64 * step).min(max)).collect())
}

pub fn dmt(args: &DmtArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let rs = r_grid(args.r_min, args.r_max, args.r_step)?;
    if args.all {
        let n = args.protocol.n as usize;
        let columns: Vec<(&str, DmtCurve)> = vec![
            ("tdb", analytic::dmt(&ProtocolSpec::miso(n)?)?),
            ("oaf", analytic::dmt(&ProtocolSpec::oaf(n)?)?),
            ("naf", analytic::dmt(&ProtocolSpec::naf(n)?)?),
            ("nsdf_variable", analytic::dmt(&protocol_spec(ProtocolKind::NsdfVariable, n, None, None)?)?),
            ("osdf_variable", analytic::dmt(&protocol_spec(ProtocolKind::OsdfVariable, n, None, None)?)?),
        ];
        let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
        writeln!(out, "r,{}", names.join(","))?;
        for &r in &rs {
            let values = columns.iter().map(|(_, c)| c.eval(r).map(fixed)).collect::<Result<Vec<_>, _>>()?;
            writeln!(out, "{},{}", fixed(r), values.join(","))?;
        }
        return Ok(());
    }
    let curve = analytic::dmt(&spec_from(&args.protocol)?)?;
    writeln!(out, "r,d")?;
    for &r in &rs {
        writeln!(out, "{},{}", fixed(r), fixed(curve.eval(r)?))?;
    }
    Ok(())
}

struct Case {
    kind: ProtocolKind,
    n: usize,
    p: usize,
    q: usize,
    max_diff: f64,
    worst_r: f64,
}

fn parse_split(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || usage(format!("split '{s}' is not of the form p:q"));
    let (p, q) = s.split_once(':').ok_or_else(bad)?;
    let p: usize = p.trim().parse().map_err(|_| bad())?;
    let q: usize = q.trim().parse().map_err(|_| bad())?;
    if p == 0 || q == 0 {
        return Err(bad());
    }
    Ok((p, q))
}

fn check_case(kind: ProtocolKind, n: usize, p: usize, q: usize, rs: &[f64], offset: f64) -> Result<Case, Failure> {
    let (pf, qf) = (p as f64, q as f64);
    let (curve, oracle): (_, OracleFn) = match kind {
        ProtocolKind::Oaf => (analytic::oaf_upper_bound(n, p, q)?, numeric::oaf_value),
        ProtocolKind::NsdfFixed => (analytic::nsdf_fixed_dmt(n, p, q)?, numeric::nsdf_value),
        _ => (analytic::osdf_fixed_dmt(n, p, q)?, numeric::osdf_value),
    };
    let mut case = Case { kind, n, p, q, max_diff: 0.0, worst_r: 0.0 };
    for &r in rs {
        let diff = (curve.eval(r)? - (oracle(n, pf, qf, r) + offset)).abs();
        if diff > case.max_diff || diff.is_nan() {
            case.max_diff = diff;
            case.worst_r = r;
        }
    }
    Ok(case)
}

pub fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let kinds: Vec<ProtocolKind> = match args.protocol {
        VerifyProtocol::All => vec![ProtocolKind::Oaf, ProtocolKind::NsdfFixed, ProtocolKind::OsdfFixed],
        VerifyProtocol::Oaf => vec![ProtocolKind::Oaf],
        VerifyProtocol::Nsdf => vec![ProtocolKind::NsdfFixed],
        VerifyProtocol::Osdf => vec![ProtocolKind::OsdfFixed],
    };
    let explicit: Vec<(usize, usize)> = match (args.p, args.q) {
        (Some(p), Some(q)) => vec![(p as usize, q as usize)],
        _ => args.pq.iter().map(|s| parse_split(s)).collect::<Result<_, _>>()?,
    };
    let samples = args.samples as usize;
    let rs: Vec<f64> = (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect();
    let offset = if args.perturb { PERTURBATION } else { 0.0 };

    let mut cases = Vec::new();
    for &n in &args.n {
        let n = n as usize;
        let mut splits = if explicit.is_empty() { SPLITS.to_vec() } else { explicit.clone() };
        if explicit.is_empty() && !splits.contains(&(n, n - 1)) {
            splits.push((n, n - 1));
        }
        for &kind in &kinds {
            for &(p, q) in &splits {
                cases.push(check_case(kind, n, p, q, &rs, offset)?);
            }
        }
    }

    writeln!(out, "protocol,n,p,q,max_diff,worst_r")?;
    for c in &cases {
        writeln!(out, "{},{},{},{},{:e},{}", c.kind, c.n, c.p, c.q, c.max_diff, fixed(c.worst_r))?;
    }
    let worst =
        cases.iter().max_by(|a, b| a.max_diff.total_cmp(&b.max_diff)).ok_or_else(|| usage("nothing to verify"))?;
    let summary = format!(
        "{} n={} p={} q={} r={} diff={:e}",
        worst.kind,
        worst.n,
        worst.p,
        worst.q,
        fixed(worst.worst_r),
        worst.max_diff
    );
    writeln!(out, "# cases={} samples={samples} worst: {summary}", cases.len())?;
    if args.protocol == VerifyProtocol::Nsdf {
        for c in &cases {
            match analytic::nsdf_intersection(c.n, c.p, c.q)? {
                Some((r, d)) => {
                    writeln!(out, "# nsdf n={} p={} q={} intersection r={} d={}", c.n, c.p, c.q, fixed(r), fixed(d))?
                }
                None => writeln!(out, "# nsdf n={} p={} q={} intersection none", c.n, c.p, c.q)?,
            }
        }
    }
    if worst.max_diff < VERIFY_TOLERANCE {
        Ok(())
    } else {
        Err(Failure::Check(format!("discrepancy above {VERIFY_TOLERANCE:e}: {summary}")))
    }
}

fn snr_points(args: &SnrArgs, default: (f64, f64, f64)) -> Result<Vec<f64>, Failure> {
    let points = if !args.snr.is_empty() {
        args.snr.clone()
    } else {
        let lo = args.snr_min.unwrap_or(default.0);
        let hi = args.snr_max.unwrap_or(default.1);
        let step = args.snr_step.unwrap_or(default.2);
        if step.is_nan()
            || step <= 0.0
            || !step.is_finite()
            || hi.is_nan()
            || hi < lo
            || !lo.is_finite()
            || !hi.is_finite()
        {
            return Err(usage(format!("bad SNR range {lo}..{hi} step {step}")));
        }
        let count = ((hi - lo) / step + 1e-9).floor();
        if count >= 1000.0 {
            return Err(usage("more than 1000 SNR points"));
        }
        (0..=count as usize).map(|i| lo + i as f64 * step).collect()
    };
    if points.iter().any(|x| !x.is_finite() || x.abs() > 200.0) {
        return Err(usage("SNR points must lie within +-200 dB"));
    }
    Ok(points)
}

fn finish_series(series: &OutageSeries, out: &mut dyn Write) -> Result<(), Failure> {
    outage::write_csv(series, &mut *out)?;
    let zeros = series.zero_points();
    let total = series.points.len();
    if zeros as f64 > 0.3 * total as f64 {
        eprintln!("warning: {zeros} of {total} SNR points saw no events; raise --trials or lower the SNR range");
    }
    match series.fitted_exponent {
        Some(_) => Ok(()),
        None => Err(Failure::Fit(format!(
            "only {} of {total} points have events; at least 3 are needed for a slope",
            total - zeros
        ))),
    }
}

pub fn outage(args: &OutageArgs, seed: u64, workers: usize, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = spec_from(&args.protocol)?;
    let rate = match (args.r, args.rate) {
        (Some(r), None) => RateRule::Multiplexing(MultiplexingGain::new(r)?),
        (None, Some(bits)) if bits >= 0.0 && bits.is_finite() => RateRule::Fixed(bits),
        (None, Some(bits)) => return Err(usage(format!("rate must be a nonnegative number of bits, got {bits}"))),
        _ => return Err(usage("one of --r or --rate is required")),
    };
    let snr = snr_points(&args.snr, (0.0, 20.0, 5.0))?;
    let trials = args.snr.trials.unwrap_or(100_000);
    let series = outage::sweep(&spec, rate, &snr, trials, seed, workers)?;
    finish_series(&series, out)
}

pub fn codesim(args: &CodesimArgs, seed: u64, workers: usize, out: &mut dyn Write) -> Result<(), Failure> {
    let n = args.n as usize;
    let m = args.m as usize;
    let snr = snr_points(&args.snr, (14.0, 26.0, 3.0))?;
    let trials = args.snr.trials.unwrap_or(100_000);
    let default_kind = match args.code {
        CodeChoice::OafDiag => ProtocolKind::Oaf,
        CodeChoice::Naf => ProtocolKind::Naf,
    };
    let kind = match &args.protocol {
        Some(name) => name.parse()?,
        None => default_kind,
    };
    let spec = protocol_spec(kind, n, None, None)?;
    let rho = db_to_linear(snr[0]);
    let code = match args.code {
        CodeChoice::OafDiag => oaf_diagonal_codebook(n, m, rho)?,
        CodeChoice::Naf => naf_codebook(n, m, rho)?,
    };
    let series = simulate_wer(&spec, &code, &snr, trials, seed, workers)?;
    if let Some(path) = &args.codebook {
        let file = File::create(path).map_err(|e| usage(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        code.write_csv(&mut w)?;
        w.flush()?;
    }
    finish_series(&series, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_grid_hits_endpoints() {
        let g = r_grid(0.0, 1.0, 0.01).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[100], 1.0);
        assert_eq!(fixed(g[25]), "0.25");
        assert!(r_grid(0.5, 0.2, 0.1).is_err());
        assert!(r_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn splits_parse() {
        assert_eq!(parse_split("3:2").unwrap(), (3, 2));
        assert!(parse_split("3").is_err());
        assert!(parse_split("0:1").is_err());
    }

    #[test]
    fn natural_phase_lengths() {
        assert_eq!(protocol_spec(ProtocolKind::Oaf, 3, None, None).unwrap(), ProtocolSpec::oaf(3).unwrap());
        assert_eq!(protocol_spec(ProtocolKind::Naf, 3, None, None).unwrap(), ProtocolSpec::naf(3).unwrap());
        assert_eq!(protocol_spec(ProtocolKind::NsdfFixed, 2, Some(2), None).unwrap().q, 1);
    }
}
