use crate::{Error, MultiplexingGain, Result};

/// Tolerance used when comparing breakpoint abscissas and ordinates.
pub const CURVE_EPS: f64 = 1e-12;

/// A continuous piecewise-linear tradeoff curve `d(r)` on `[0, 1]`.
///
/// Breakpoints are stored as `f64`. Rational breakpoints are produced from
/// integer ratios with a single rounding; all comparisons use
/// [`CURVE_EPS`].
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearCurve {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinearCurve {
    /// Builds a curve from `(r, d)` breakpoints.
    ///
    /// Abscissas must be strictly increasing from 0 to 1. Ordinates are
    /// clamped to `max(d, 0)`. Breakpoints closer than [`CURVE_EPS`] to their
    /// predecessor are merged (the later ordinate must agree).
    pub fn new(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (r, d) in points {
            if !r.is_finite() || !d.is_finite() {
                return Err(Error::InvalidCurve(format!("non-finite breakpoint ({r}, {d})")));
            }
            let d = d.max(0.0);
            if let Some(&(lr, ld)) = out.last() {
                if r < lr - CURVE_EPS {
                    return Err(Error::InvalidCurve(format!("abscissa {r} after {lr}")));
                }
                if r <= lr + CURVE_EPS {
                    if (d - ld).abs() > 1e-9 {
                        return Err(Error::InvalidCurve(format!("discontinuity at r = {r}: {ld} vs {d}")));
                    }
                    continue;
                }
            }
            out.push((r, d));
        }
        if out.len() < 2 {
            return Err(Error::InvalidCurve("need at least two breakpoints".into()));
        }
        let first = out[0].0;
        let last = out[out.len() - 1].0;
        if first.abs() > CURVE_EPS || (last - 1.0).abs() > CURVE_EPS {
            return Err(Error::InvalidCurve(format!("domain [{first}, {last}] is not [0, 1]")));
        }
        out[0].0 = 0.0;
        let k = out.len() - 1;
        out[k].0 = 1.0;
        Ok(PiecewiseLinearCurve { points: out })
    }

    /// `height * (1 - r / zero_at)^+` on `[0, 1]`.
    pub fn hinge(height: f64, zero_at: f64) -> Self {
        let pts = if zero_at >= 1.0 {
            vec![(0.0, height), (1.0, height * (1.0 - 1.0 / zero_at))]
        } else {
            vec![(0.0, height), (zero_at, 0.0), (1.0, 0.0)]
        };
        Self::new(pts).expect("hinge breakpoints are valid")
    }

    /// Samples `f` at the given abscissas (which must span `[0, 1]`).
    pub fn from_samples(rs: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(rs.iter().map(|&r| (r, f(r))))
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Value at `r`, exact at breakpoints. Errors outside `[0, 1]`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok(self.at(MultiplexingGain::new(r)?))
    }

    pub fn at(&self, r: MultiplexingGain) -> f64 {
        self.value(r.value())
    }

    // Caller guarantees r in [0, 1].
    fn value(&self, r: f64) -> f64 {
        let pts = &self.points;
        // First breakpoint strictly to the right of r.
        let i = pts.partition_point(|&(x, _)| x <= r);
        if i == 0 {
            return pts[0].1;
        }
        if i == pts.len() {
            return pts[pts.len() - 1].1;
        }
        let (r0, d0) = pts[i - 1];
        if r == r0 {
            return d0;
        }
        let (r1, d1) = pts[i];
        d0 + (d1 - d0) * (r - r0) / (r1 - r0)
    }

    /// `d(0)`.
    pub fn max_diversity(&self) -> f64 {
        self.points[0].1
    }

    pub fn is_non_increasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 <= w[0].1 + CURVE_EPS)
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Self) -> Self {
        let xs = merged_abscissas(self, other);
        Self::new(xs.into_iter().map(|x| (x, self.value(x) + other.value(x))))
            .expect("sum of valid curves")
            .simplified()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.points.iter().map(|&(r, d)| (r, k * d))).expect("scaled curve")
    }

    /// Drops interior breakpoints that are collinear with their neighbours.
    pub fn simplified(mut self) -> Self {
        let mut keep: Vec<(f64, f64)> = Vec::with_capacity(self.points.len());
        for (idx, &pt) in self.points.iter().enumerate() {
            if idx + 1 < self.points.len() && !keep.is_empty() {
                let a = *keep.last().unwrap();
                let b = self.points[idx + 1];
                let on_line = a.1 + (b.1 - a.1) * (pt.0 - a.0) / (b.0 - a.0);
                if (on_line - pt.1).abs() <= CURVE_EPS {
                    continue;
                }
            }
            keep.push(pt);
        }
        self.points = keep;
        self
    }

    /// Largest `|self(r) - other(r)|` over the given abscissas.
    pub fn max_abs_diff(&self, other: &Self, rs: impl IntoIterator<Item = f64>) -> f64 {
        rs.into_iter()
            .map(|r| (self.value(r.clamp(0.0, 1.0)) - other.value(r.clamp(0.0, 1.0))).abs())
            .fold(0.0, f64::max)
    }
}

fn merged_abscissas(a: &PiecewiseLinearCurve, b: &PiecewiseLinearCurve) -> Vec<f64> {
    let mut xs: Vec<f64> = a.points.iter().chain(&b.points).map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|x, y| (*x - *y).abs() <= CURVE_EPS);
    xs
}

/// Abscissas strictly inside a segment where `a - b` changes sign.
///
/// Each crossing is the intersection of the two segment lines on that
/// interval.
pub fn crossing_points(a: &PiecewiseLinearCurve, b: &PiecewiseLinearCurve) -> Vec<f64> {
    let xs = merged_abscissas(a, b);
    let mut out = Vec::new();
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let (a0, a1) = (a.value(x0), a.value(x1));
        let (b0, b1) = (b.value(x0), b.value(x1));
        let (e0, e1) = (a0 - b0, a1 - b1);
        if (e0 > CURVE_EPS && e1 < -CURVE_EPS) || (e0 < -CURVE_EPS && e1 > CURVE_EPS) {
            let sa = (a1 - a0) / (x1 - x0);
            let sb = (b1 - b0) / (x1 - x0);
            let x = x0 + (b0 - a0) / (sa - sb);
            out.push(x.clamp(x0, x1));
        }
    }
    out
}

fn combine(a: &PiecewiseLinearCurve, b: &PiecewiseLinearCurve, pick: fn(f64, f64) -> f64) -> PiecewiseLinearCurve {
    let mut xs = merged_abscissas(a, b);
    xs.extend(crossing_points(a, b));
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|x, y| (*x - *y).abs() <= CURVE_EPS);
    PiecewiseLinearCurve::new(xs.into_iter().map(|x| (x, pick(a.value(x), b.value(x)))))
        .expect("combination of valid curves")
        .simplified()
}

/// Exact pointwise minimum, with crossing breakpoints inserted.
pub fn pointwise_min(a: &PiecewiseLinearCurve, b: &PiecewiseLinearCurve) -> PiecewiseLinearCurve {
    combine(a, b, f64::min)
}

/// Exact pointwise maximum, with crossing breakpoints inserted.
pub fn pointwise_max(a: &PiecewiseLinearCurve, b: &PiecewiseLinearCurve) -> PiecewiseLinearCurve {
    combine(a, b, f64::max)
}
