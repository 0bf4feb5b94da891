//! Closed-form DMT curves for every protocol, and the optimal phase ratio
//! selectors of the variable-ratio decode-and-forward protocols.
//!
//! Phase lengths enter the formulas only through the ratios `m/p` and
//! `m/q` (with `m = p + q`), collected in [`PhaseRatio`]. Integer `(p, q)`
//! and real `κ = p/q` share the same code path.

use crate::exponent::{pointwise_max, pointwise_min, ExtendedReal, MultiplexingGain, PiecewiseLinearCurve};
use crate::{Error, ProtocolKind, ProtocolSpec, Result};

/// `m/p` and `m/q` for a two-phase frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRatio {
    /// `m / p = 1 + 1/κ`
    pub m_over_p: f64,
    /// `m / q = 1 + κ`
    pub m_over_q: f64,
}

impl PhaseRatio {
    /// Decode-and-forward phase split; requires `p >= q >= 1`.
    pub fn from_counts(p: usize, q: usize) -> Result<Self> {
        if q == 0 || p < q {
            return Err(Error::InvalidProtocol(format!("phase lengths (p, q) = ({p}, {q}) need p >= q >= 1")));
        }
        let m = (p + q) as f64;
        Ok(PhaseRatio { m_over_p: m / p as f64, m_over_q: m / q as f64 })
    }

    /// Real-valued ratio `κ >= 1`.
    pub fn from_kappa(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 1.0) {
            return Err(Error::InvalidProtocol(format!("kappa = {kappa} must be >= 1")));
        }
        Ok(PhaseRatio { m_over_p: 1.0 + 1.0 / kappa, m_over_q: 1.0 + kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.m_over_q / self.m_over_p
    }

    /// End of the cooperative region, `p/m`.
    pub fn p_over_m(&self) -> f64 {
        1.0 / self.m_over_p
    }

    pub fn q_over_m(&self) -> f64 {
        1.0 / self.m_over_q
    }
}

/// A DMT curve: piecewise linear, or the variable-ratio protocols' curve
/// whose upper branch is a rational function of `r`.
#[derive(Debug, Clone, PartialEq)]
pub enum DmtCurve {
    Piecewise(PiecewiseLinearCurve),
    Variable(VariableRatioCurve),
}

impl DmtCurve {
    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok(self.at(MultiplexingGain::new(r)?))
    }

    pub fn at(&self, r: MultiplexingGain) -> f64 {
        match self {
            DmtCurve::Piecewise(c) => c.at(r),
            DmtCurve::Variable(c) => c.at(r),
        }
    }

    pub fn max_diversity(&self) -> f64 {
        self.at(MultiplexingGain::new(0.0).unwrap())
    }

    pub fn as_piecewise(&self) -> Option<&PiecewiseLinearCurve> {
        match self {
            DmtCurve::Piecewise(c) => Some(c),
            DmtCurve::Variable(_) => None,
        }
    }
}

impl From<PiecewiseLinearCurve> for DmtCurve {
    fn from(c: PiecewiseLinearCurve) -> Self {
        DmtCurve::Piecewise(c)
    }
}

/// `d(r) = n - slope·r` up to `r_break`, then
/// `(a2 r² + a1 r + a0) / (b1 r + b0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableRatioCurve {
    n: usize,
    kappa_n: f64,
    slope: f64,
    numerator: [f64; 3],
    denominator: [f64; 2],
}

impl VariableRatioCurve {
    /// `1 / (κₙ + 1)`, where the linear branch ends.
    pub fn break_point(&self) -> f64 {
        1.0 / (self.kappa_n + 1.0)
    }

    pub fn kappa_n(&self) -> f64 {
        self.kappa_n
    }

    pub fn at(&self, r: MultiplexingGain) -> f64 {
        let r = r.value();
        if r <= self.break_point() {
            (self.n as f64 - self.slope * r).max(0.0)
        } else {
            self.tail(r).max(0.0)
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok(self.at(MultiplexingGain::new(r)?))
    }

    fn tail(&self, r: f64) -> f64 {
        let [a2, a1, a0] = self.numerator;
        let [b1, b0] = self.denominator;
        (a2 * r * r + a1 * r + a0) / (b1 * r + b0)
    }

    /// Value of the upper (rational) branch evaluated at `r`, regardless of
    /// which branch is active.
    pub fn tail_value(&self, r: f64) -> f64 {
        self.tail(r)
    }

    /// Value of the linear branch at `r`, regardless of which branch is
    /// active.
    pub fn head_value(&self, r: f64) -> f64 {
        self.n as f64 - self.slope * r
    }
}

/// `d(r) = n(1 - r)`, the MISO outage exponent no relay protocol can beat.
pub fn transmit_diversity_bound(n: usize) -> PiecewiseLinearCurve {
    PiecewiseLinearCurve::hinge(n as f64, 1.0)
}

/// Upper bound on the DMT of any OAF protocol with phase lengths `(p, q)`,
/// whatever relay matrices are used. `q = 0` is the non-cooperative link.
pub fn oaf_upper_bound(n: usize, p: usize, q: usize) -> Result<PiecewiseLinearCurve> {
    if n < 2 || p < 1 {
        return Err(Error::InvalidProtocol(format!("OAF bound needs n >= 2, p >= 1 (got n={n}, p={p})")));
    }
    if q == 0 {
        return Ok(PiecewiseLinearCurve::hinge(1.0, 1.0));
    }
    let m = p + q;
    let nf = n as f64;
    let pts = if p * (2 * n - 1) >= n * m {
        // p/m >= n/(2n-1)
        vec![(0.0, nf), (q as f64 / m as f64, 1.0), (0.5, 0.5), (1.0, 0.0)]
    } else {
        let knee = ((n - 1) * p) as f64 / (n * m - p) as f64;
        vec![(0.0, nf), (knee, 1.0 - knee), (1.0, 0.0)]
    };
    PiecewiseLinearCurve::new(pts)
}

/// DMT of the delay-optimal OAF protocol (`p = n`, `q = n - 1`, one relay
/// per second-phase slot).
pub fn oaf_optimal_dmt(n: usize) -> PiecewiseLinearCurve {
    PiecewiseLinearCurve::new([(0.0, n as f64), (0.5, 0.5), (1.0, 0.0)]).expect("valid")
}

/// `d(r) = (1 - r)^+ + (n - 1)(1 - 2r)^+`.
pub fn naf_dmt(n: usize) -> PiecewiseLinearCurve {
    PiecewiseLinearCurve::hinge(1.0, 1.0).add(&PiecewiseLinearCurve::hinge((n - 1) as f64, 0.5))
}

/// Critical NSDF ratio: positive root of `(n-1)κ² - κ - (n-1) = 0`.
pub fn nsdf_kappa_n(n: usize) -> f64 {
    let k = (n - 1) as f64;
    (1.0 + (1.0 + 4.0 * k * k).sqrt()) / (2.0 * k)
}

/// Critical OSDF ratio `n / (n - 1)`.
pub fn osdf_kappa_n(n: usize) -> f64 {
    n as f64 / (n - 1) as f64
}

/// Outage exponent of the NSDF destination channel when `k - 1` relays
/// take part (`k = 1`: source alone in both phases).
pub fn nsdf_conditional_exponent(k: usize, p: usize, q: usize) -> Result<PiecewiseLinearCurve> {
    Ok(conditional_exponent(k, PhaseRatio::from_counts(p, q)?))
}

/// [`nsdf_conditional_exponent`] for a real phase ratio.
pub fn conditional_exponent(k: usize, ratio: PhaseRatio) -> PiecewiseLinearCurve {
    if k <= 1 {
        return PiecewiseLinearCurve::hinge(1.0, 1.0);
    }
    let knee = ratio.q_over_m();
    PiecewiseLinearCurve::new([(0.0, k as f64), (knee, 1.0), (1.0, 0.0)]).expect("valid")
}

/// Exponent of the event that exactly `k - 1` of the `n - 1` relays decode.
pub fn participation_exponent(n: usize, k: usize, p: usize, q: usize, r: MultiplexingGain) -> Result<ExtendedReal> {
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={n}")));
    }
    let ratio = PhaseRatio::from_counts(p, q)?;
    Ok(participation_exponent_ratio(n, k, ratio, r.value()))
}

pub(crate) fn participation_exponent_ratio(n: usize, k: usize, ratio: PhaseRatio, r: f64) -> ExtendedReal {
    if r * ratio.m_over_p <= 1.0 {
        ExtendedReal::Finite((n - k) as f64 * (1.0 - ratio.m_over_p * r).max(0.0))
    } else if k >= 2 {
        ExtendedReal::PosInfinity
    } else {
        ExtendedReal::Finite(0.0)
    }
}

/// `d_a`: every relay in outage, source alone:
/// `(n-1)(1 - mr/p)^+ + (1 - r)^+`.
pub fn nsdf_all_relays_silent(n: usize, ratio: PhaseRatio) -> PiecewiseLinearCurve {
    PiecewiseLinearCurve::hinge((n - 1) as f64, ratio.p_over_m()).add(&PiecewiseLinearCurve::hinge(1.0, 1.0))
}

/// Fixed-ratio NSDF DMT, composed as `min(d_a, d_n)`.
pub fn nsdf_fixed_dmt(n: usize, p: usize, q: usize) -> Result<PiecewiseLinearCurve> {
    check_relays(n)?;
    Ok(nsdf_fixed_dmt_ratio(n, PhaseRatio::from_counts(p, q)?))
}

pub fn nsdf_fixed_dmt_ratio(n: usize, ratio: PhaseRatio) -> PiecewiseLinearCurve {
    let d_a = nsdf_all_relays_silent(n, ratio);
    let d_b = conditional_exponent(n, ratio);
    pointwise_min(&d_a, &d_b)
}

/// Fixed-ratio NSDF DMT written out branch by branch (the `κ <= κₙ` and
/// `κ >= κₙ` forms). Must agree with [`nsdf_fixed_dmt_ratio`].
pub fn nsdf_fixed_dmt_published(n: usize, ratio: PhaseRatio) -> PiecewiseLinearCurve {
    let nf = n as f64;
    let (a, b) = (ratio.m_over_p, ratio.m_over_q);
    let end = 1.0 / a;
    let tail_start = (end, 1.0 - end);
    if ratio.kappa() <= nsdf_kappa_n(n) {
        return PiecewiseLinearCurve::new([(0.0, nf), tail_start, (1.0, 0.0)]).expect("valid");
    }
    // Crossing of d_a and d_b; the middle branch is empty at κ = κₙ.
    let rc = ((nf - a) / ((nf - 2.0) * a + 1.0)).clamp(1.0 / b, end);
    PiecewiseLinearCurve::new([(0.0, nf), (1.0 / b, 1.0), (rc, a * (1.0 - rc)), tail_start, (1.0, 0.0)]).expect("valid")
}

/// Where `d_a` and `d_b` meet for `κ >= κₙ`:
/// `r = (np - m)/((n-2)m + p)`, `d = (m/p)(1 - r)`.
pub fn nsdf_intersection(n: usize, p: usize, q: usize) -> Result<Option<(f64, f64)>> {
    let ratio = PhaseRatio::from_counts(p, q)?;
    if ratio.kappa() < nsdf_kappa_n(n) {
        return Ok(None);
    }
    let m = p + q;
    let r = (n * p - m) as f64 / ((n - 2) * m + p) as f64;
    Ok(Some((r, ratio.m_over_p * (1.0 - r))))
}

/// Variable-ratio NSDF DMT (`κ` re-optimised for every `r`).
pub fn nsdf_variable_dmt(n: usize) -> VariableRatioCurve {
    let kappa_n = nsdf_kappa_n(n);
    let nf = n as f64;
    VariableRatioCurve {
        n,
        kappa_n,
        slope: (nf - 1.0) * (kappa_n + 1.0),
        // (n - r)(1 - r) / ((n-2)r + 1)
        numerator: [1.0, -(nf + 1.0), nf],
        denominator: [nf - 2.0, 1.0],
    }
}

/// The ratio `κ = p/q` maximising the NSDF diversity at `r`.
pub fn nsdf_optimal_kappa(n: usize, r: MultiplexingGain) -> Result<f64> {
    let kappa_n = nsdf_kappa_n(n);
    let r = r.value();
    if r >= 1.0 {
        return Err(Error::UnboundedKappa);
    }
    if r <= 1.0 / (kappa_n + 1.0) {
        Ok(kappa_n)
    } else {
        let k = (n - 1) as f64;
        Ok((1.0 + (k - 1.0) * r) / (k * (1.0 - r)))
    }
}

/// Fixed-ratio OSDF DMT, composed from the exponents of its outage events:
/// `max(min(n(1 - mr/p)^+, d_n), (1 - r)^+)`. The outer maximum is the
/// option of not cooperating at all.
pub fn osdf_fixed_dmt(n: usize, p: usize, q: usize) -> Result<PiecewiseLinearCurve> {
    check_relays(n)?;
    Ok(osdf_fixed_dmt_ratio(n, PhaseRatio::from_counts(p, q)?))
}

pub fn osdf_fixed_dmt_ratio(n: usize, ratio: PhaseRatio) -> PiecewiseLinearCurve {
    let silent = PiecewiseLinearCurve::hinge(n as f64, ratio.p_over_m());
    let cooperative = pointwise_min(&silent, &conditional_exponent(n, ratio));
    pointwise_max(&cooperative, &PiecewiseLinearCurve::hinge(1.0, 1.0))
}

/// Fixed-ratio OSDF DMT written out branch by branch.
pub fn osdf_fixed_dmt_published(n: usize, ratio: PhaseRatio) -> PiecewiseLinearCurve {
    let nf = n as f64;
    let (a, b) = (ratio.m_over_p, ratio.m_over_q);
    // (n-1)p / (nm - p)
    let r3 = (nf - 1.0) / (nf * a - 1.0);
    if ratio.kappa() <= osdf_kappa_n(n) {
        return PiecewiseLinearCurve::new([(0.0, nf), (r3, 1.0 - r3), (1.0, 0.0)]).expect("valid");
    }
    // (np - m) / (m(n-1))
    let r2 = ((nf - a) / (a * (nf - 1.0))).clamp(1.0 / b, r3);
    PiecewiseLinearCurve::new([(0.0, nf), (1.0 / b, 1.0), (r2, a * (1.0 - r2)), (r3, 1.0 - r3), (1.0, 0.0)])
        .expect("valid")
}

/// Variable-ratio OSDF DMT.
pub fn osdf_variable_dmt(n: usize) -> VariableRatioCurve {
    let kappa_n = osdf_kappa_n(n);
    let nf = n as f64;
    VariableRatioCurve {
        n,
        kappa_n,
        slope: (nf - 1.0) * (kappa_n + 1.0),
        // n(1 - r) / ((n-1)r + 1)
        numerator: [0.0, -nf, nf],
        denominator: [nf - 1.0, 1.0],
    }
}

/// The ratio `κ = p/q` maximising the OSDF diversity at `r`.
pub fn osdf_optimal_kappa(n: usize, r: MultiplexingGain) -> Result<f64> {
    let kappa_n = osdf_kappa_n(n);
    let r = r.value();
    if r >= 1.0 {
        return Err(Error::UnboundedKappa);
    }
    if r <= 1.0 / (kappa_n + 1.0) {
        Ok(kappa_n)
    } else {
        let k = (n - 1) as f64;
        Ok((1.0 + k * r) / (k * (1.0 - r)))
    }
}

fn check_relays(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidProtocol(format!("n = {n}: at least one relay is required")))
    } else {
        Ok(())
    }
}

/// The DMT of a protocol.
///
/// For `Oaf`, the delay-optimal `(p, q) = (n, n-1)` gives the optimal curve;
/// any other split gives the class upper bound for that split.
pub fn dmt(spec: &ProtocolSpec) -> Result<DmtCurve> {
    spec.validate()?;
    let n = spec.n;
    let curve = match spec.kind {
        ProtocolKind::Oaf if spec.p == n && spec.q == n - 1 => oaf_optimal_dmt(n).into(),
        ProtocolKind::Oaf => oaf_upper_bound(n, spec.p, spec.q)?.into(),
        ProtocolKind::NsdfFixed => nsdf_fixed_dmt(n, spec.p, spec.q)?.into(),
        ProtocolKind::OsdfFixed => osdf_fixed_dmt(n, spec.p, spec.q)?.into(),
        ProtocolKind::NsdfVariable => DmtCurve::Variable(nsdf_variable_dmt(n)),
        ProtocolKind::OsdfVariable => DmtCurve::Variable(osdf_variable_dmt(n)),
        ProtocolKind::Naf => naf_dmt(n).into(),
        ProtocolKind::Miso => transmit_diversity_bound(n).into(),
    };
    Ok(curve)
}
