//! Exact solver for the exponent minimisation problems behind every DMT
//! curve, used as an oracle against the closed forms in [`crate::analytic`].
//!
//! Every problem has the shape
//!
//! ```text
//! inf  w·x   over x ∈ [0,1]^D
//! s.t. a·x + Σ_j c_j min(x[s_j], x[t_j]) ≥ β₀ + β₁ r,   c_j ≥ 0
//! ```
//!
//! The feasible set is a convex polytope (the left side is concave), so the
//! infimum over the closure is attained at a vertex. Vertices are found by
//! intersecting every `D`-subset of the candidate hyperplanes: the box
//! faces, the switching surfaces `x[s_j] = x[t_j]`, and each linear piece of
//! the constraint.

use rayon::prelude::*;

use crate::exponent::{ExtendedReal, MultiplexingGain, PiecewiseLinearCurve, ProtocolKind};
use crate::{analytic, Error, Result};

const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

/// A `c · min(x[a], x[b])` term of the constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinTerm {
    pub weight: f64,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfimumProblem {
    objective: Vec<f64>,
    linear: Vec<f64>,
    mins: Vec<MinTerm>,
    rhs_const: f64,
    rhs_slope: f64,
}

impl InfimumProblem {
    /// Builds `inf objective·x` subject to
    /// `linear·x + Σ mins ≥ rhs_const + rhs_slope·r` on the unit box.
    pub fn new(
        objective: Vec<f64>,
        linear: Vec<f64>,
        mins: Vec<MinTerm>,
        rhs_const: f64,
        rhs_slope: f64,
    ) -> Result<Self> {
        let dim = objective.len();
        if dim == 0 || linear.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "objective has {dim} coefficients, constraint has {}",
                linear.len()
            )));
        }
        if mins.iter().any(|t| t.a >= dim || t.b >= dim) {
            return Err(Error::DimensionMismatch("min term index out of range".into()));
        }
        if mins.iter().any(|t| t.weight.is_nan() || t.weight < 0.0) {
            return Err(Error::InvalidArgument("min term weights must be nonnegative".into()));
        }
        let finite = objective.iter().chain(&linear).all(|c| c.is_finite())
            && mins.iter().all(|t| t.weight.is_finite())
            && rhs_const.is_finite()
            && rhs_slope.is_finite();
        if !finite {
            return Err(Error::NonFinite("problem coefficient"));
        }
        Ok(Self { objective, linear, mins, rhs_const, rhs_slope })
    }

    /// Outage of the amplify-and-forward channel with `p` cooperative and
    /// `q` relaying symbols: `inf u + (n−1)v` s.t.
    /// `(p−q)u + q min(u,v) ≥ p − m r`.
    pub fn oaf_bound(n: usize, p: f64, q: f64) -> Self {
        let m = p + q;
        Self {
            objective: vec![1.0, (n - 1) as f64],
            linear: vec![p - q, 0.0],
            mins: vec![MinTerm { weight: q, a: 0, b: 1 }],
            rhs_const: p,
            rhs_slope: -m,
        }
    }

    /// Destination outage of non-orthogonal selection DF when `k−1` relays
    /// decoded. For `k = 1` only the direct link remains.
    pub fn nsdf_conditional(k: usize, p: f64, q: f64) -> Self {
        let m = p + q;
        if k <= 1 {
            return Self::single(1.0, 1.0, -1.0);
        }
        Self {
            objective: vec![1.0, (k - 1) as f64],
            linear: vec![p, 0.0],
            mins: vec![MinTerm { weight: q, a: 0, b: 1 }],
            rhs_const: m,
            rhs_slope: -m,
        }
    }

    /// Orthogonal counterpart of [`Self::nsdf_conditional`]: the source is
    /// silent in the second phase, so without helpers only `p` symbols
    /// carry information.
    pub fn osdf_conditional(k: usize, p: f64, q: f64) -> Self {
        let m = p + q;
        if k <= 1 {
            return Self::single(p, p, -m);
        }
        Self { objective: vec![1.0, (k - 1) as f64], linear: vec![p, q], mins: Vec::new(), rhs_const: m, rhs_slope: -m }
    }

    /// Outage of one source-relay link decoding `m r log ρ` bits from `p`
    /// symbols.
    pub fn relay_outage(p: f64, q: f64) -> Self {
        Self::single(p, p, -(p + q))
    }

    /// Complement of [`Self::relay_outage`]: the relay decodes.
    pub fn relay_success(p: f64, q: f64) -> Self {
        Self::single(-p, -p, p + q)
    }

    /// `inf u + Σ v_j` s.t. `u + Σ min(u, v_j) ≥ n − (2n−1) r`, the outage
    /// of the amplify-and-forward scheme with orthogonal relay matrices.
    pub fn oaf_orthogonal(n: usize) -> Self {
        let mut linear = vec![0.0; n];
        linear[0] = 1.0;
        Self {
            objective: vec![1.0; n],
            linear,
            mins: (1..n).map(|j| MinTerm { weight: 1.0, a: 0, b: j }).collect(),
            rhs_const: n as f64,
            rhs_slope: -((2 * n - 1) as f64),
        }
    }

    fn single(coef: f64, rhs_const: f64, rhs_slope: f64) -> Self {
        Self { objective: vec![1.0], linear: vec![coef], mins: Vec::new(), rhs_const, rhs_slope }
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    pub fn rhs(&self, r: f64) -> f64 {
        self.rhs_const + self.rhs_slope * r
    }

    /// Left side of the constraint at `x`.
    pub fn lhs(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.linear.iter().zip(x).map(|(c, v)| c * v).sum();
        lin + self.mins.iter().map(|t| t.weight * x[t.a].min(x[t.b])).sum::<f64>()
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    fn hyperplanes(&self, r: f64) -> Vec<(Vec<f64>, f64)> {
        let d = self.dim();
        let mut planes = Vec::new();
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            planes.push((e.clone(), 0.0));
            planes.push((e, 1.0));
        }
        for t in &self.mins {
            if t.a != t.b {
                let mut e = vec![0.0; d];
                e[t.a] = 1.0;
                e[t.b] = -1.0;
                planes.push((e, 0.0));
            }
        }
        let rhs = self.rhs(r);
        for mask in 0..(1usize << self.mins.len()) {
            let mut e = self.linear.clone();
            for (j, t) in self.mins.iter().enumerate() {
                let pick = if mask >> j & 1 == 0 { t.a } else { t.b };
                e[pick] += t.weight;
            }
            if e.iter().any(|c| c.abs() > PIVOT_TOL) {
                planes.push((e, rhs));
            }
        }
        planes
    }
}

/// Optimal value and a minimiser. An empty feasible region yields `+∞`
/// and no minimiser.
#[derive(Debug, Clone, PartialEq)]
pub struct Infimum {
    pub value: ExtendedReal,
    pub optimizer: Option<Vec<f64>>,
}

pub fn solve_infimum(problem: &InfimumProblem, r: MultiplexingGain) -> Infimum {
    let r = r.value();
    let d = problem.dim();
    let planes = problem.hyperplanes(r);
    let rhs = problem.rhs(r);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut chosen = Vec::with_capacity(d);
    let mut scratch = vec![0.0; d * (d + 1)];
    for_each_subset(planes.len(), d, &mut chosen, &mut |idx| {
        for (row, &k) in idx.iter().enumerate() {
            let (coef, b) = &planes[k];
            scratch[row * (d + 1)..row * (d + 1) + d].copy_from_slice(coef);
            scratch[row * (d + 1) + d] = *b;
        }
        let Some(mut x) = gauss_solve(&mut scratch, d) else {
            return;
        };
        if x.iter().any(|&v| !(-FEAS_TOL..=1.0 + FEAS_TOL).contains(&v)) {
            return;
        }
        x.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        if problem.lhs(&x) < rhs - FEAS_TOL {
            return;
        }
        let value = problem.objective_at(&x);
        if best.as_ref().is_none_or(|(b, _)| value < b - PIVOT_TOL) {
            best = Some((value, x));
        }
    });
    match best {
        Some((value, x)) => Infimum { value: ExtendedReal::Finite(value.max(0.0)), optimizer: Some(x) },
        None => Infimum { value: ExtendedReal::PosInfinity, optimizer: None },
    }
}

fn for_each_subset(n: usize, k: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if chosen.len() == k {
        f(chosen);
        return;
    }
    let start = chosen.last().map_or(0, |&i| i + 1);
    let need = k - chosen.len();
    for i in start..=n.saturating_sub(need) {
        if i >= n {
            break;
        }
        chosen.push(i);
        for_each_subset(n, k, chosen, f);
        chosen.pop();
    }
}

/// Solves the augmented `d × (d+1)` system in place by partial pivoting.
fn gauss_solve(a: &mut [f64], d: usize) -> Option<Vec<f64>> {
    let w = d + 1;
    for col in 0..d {
        let pivot = (col..d).max_by(|&i, &j| a[i * w + col].abs().total_cmp(&a[j * w + col].abs()))?;
        if a[pivot * w + col].abs() < PIVOT_TOL {
            return None;
        }
        if pivot != col {
            for c in 0..w {
                a.swap(pivot * w + c, col * w + c);
            }
        }
        for row in col + 1..d {
            let f = a[row * w + col] / a[col * w + col];
            if f != 0.0 {
                for c in col..w {
                    a[row * w + c] -= f * a[col * w + c];
                }
            }
        }
    }
    let mut x = vec![0.0; d];
    for row in (0..d).rev() {
        let tail: f64 = (row + 1..d).map(|c| a[row * w + c] * x[c]).sum();
        x[row] = (a[row * w + d] - tail) / a[row * w + row];
    }
    Some(x)
}

fn gain(r: f64) -> MultiplexingGain {
    MultiplexingGain::new(r.clamp(0.0, 1.0)).expect("clamped gain")
}

fn solve_at(problem: &InfimumProblem, r: f64) -> ExtendedReal {
    solve_infimum(problem, gain(r)).value
}

fn times(count: usize, e: ExtendedReal) -> ExtendedReal {
    if count == 0 {
        ExtendedReal::Finite(0.0)
    } else {
        match e {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(count as f64 * v),
            ExtendedReal::PosInfinity => ExtendedReal::PosInfinity,
        }
    }
}

fn finite(e: ExtendedReal) -> f64 {
    e.finite().expect("direct-link term is always finite")
}

/// Oracle value of the amplify-and-forward bound, including the option of
/// not cooperating at all.
pub fn oaf_value(n: usize, p: f64, q: f64, r: f64) -> f64 {
    finite(solve_at(&InfimumProblem::oaf_bound(n, p, q), r)).max(1.0 - r)
}

/// Exponent of "exactly `k−1` of the `n−1` relays decode" plus the
/// conditional destination exponent, for `k = 1..=n`.
fn selection_terms(
    n: usize,
    p: f64,
    q: f64,
    r: f64,
    conditional: impl Fn(usize) -> InfimumProblem,
) -> Vec<ExtendedReal> {
    let fail = solve_at(&InfimumProblem::relay_outage(p, q), r);
    let pass = solve_at(&InfimumProblem::relay_success(p, q), r);
    (1..=n).map(|k| times(n - k, fail) + times(k - 1, pass) + solve_at(&conditional(k), r)).collect()
}

/// Per-`k` exponents of the non-orthogonal selection DF outage, `k−1`
/// being the number of decoding relays.
pub fn nsdf_terms(n: usize, p: f64, q: f64, r: f64) -> Vec<ExtendedReal> {
    selection_terms(n, p, q, r, |k| InfimumProblem::nsdf_conditional(k, p, q))
}

pub fn osdf_terms(n: usize, p: f64, q: f64, r: f64) -> Vec<ExtendedReal> {
    selection_terms(n, p, q, r, |k| InfimumProblem::osdf_conditional(k, p, q))
}

fn min_term(terms: Vec<ExtendedReal>) -> f64 {
    finite(terms.into_iter().min().expect("at least one term"))
}

pub fn nsdf_value(n: usize, p: f64, q: f64, r: f64) -> f64 {
    min_term(nsdf_terms(n, p, q, r))
}

pub fn osdf_value(n: usize, p: f64, q: f64, r: f64) -> f64 {
    min_term(osdf_terms(n, p, q, r)).max(1.0 - r)
}

/// Traces a piecewise-linear function of `r` on `[0,1]`: samples a grid
/// plus `hints`, then locates every kink between samples by intersecting
/// one-sided tangents, bisecting whenever that fails to verify.
pub fn trace_curve(f: impl Fn(f64) -> f64, hints: &[f64]) -> Result<PiecewiseLinearCurve> {
    const SAMPLES: usize = 200;
    let mut rs: Vec<f64> = (0..=SAMPLES).map(|i| i as f64 / SAMPLES as f64).collect();
    rs.extend(hints.iter().copied().filter(|h| (0.0..=1.0).contains(h)));
    rs.sort_by(f64::total_cmp);
    rs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(rs.len() * 2);
    let mut prev = (rs[0], f(rs[0]));
    points.push(prev);
    for &r in &rs[1..] {
        let next = (r, f(r));
        refine(&f, prev, next, 0, &mut points);
        points.push(next);
        prev = next;
    }
    Ok(PiecewiseLinearCurve::new(points)?.simplified())
}

const TRACE_TOL: f64 = 1e-9;

fn is_linear(f: &impl Fn(f64) -> f64, (a, fa): (f64, f64), (b, fb): (f64, f64)) -> bool {
    [0.25, 0.5, 0.75].iter().all(|&t| {
        let x = a + t * (b - a);
        (f(x) - (fa + t * (fb - fa))).abs() <= TRACE_TOL
    })
}

fn refine(f: &impl Fn(f64) -> f64, lo: (f64, f64), hi: (f64, f64), depth: u32, out: &mut Vec<(f64, f64)>) {
    if is_linear(f, lo, hi) {
        return;
    }
    let (a, fa) = lo;
    let (b, fb) = hi;
    let width = b - a;
    if depth > 48 || width < 1e-10 {
        let x = 0.5 * (a + b);
        out.push((x, f(x)));
        return;
    }
    let h = (width * 1e-3).min(1e-7);
    let sl = (f(a + h) - fa) / h;
    let sr = (fb - f(b - h)) / h;
    if (sl - sr).abs() > 1e-9 {
        let mut x = (fb - fa + sl * a - sr * b) / (sl - sr);
        if x > a && x < b {
            let (hl, hr) = (0.5 * (x - a), 0.5 * (b - x));
            let sl = (f(a + hl) - fa) / hl;
            let sr = (fb - f(b - hr)) / hr;
            if (sl - sr).abs() > 1e-9 {
                x = ((fb - fa + sl * a - sr * b) / (sl - sr)).clamp(a, b);
            }
        }
        if x > a && x < b {
            let kink = (x, f(x));
            if (kink.1 - (fa + sl * (x - a))).abs() <= TRACE_TOL && is_linear(f, lo, kink) && is_linear(f, kink, hi) {
                out.push(kink);
                return;
            }
        }
    }
    let x = 0.5 * (a + b);
    let mid = (x, f(x));
    refine(f, lo, mid, depth + 1, out);
    out.push(mid);
    refine(f, mid, hi, depth + 1, out);
}

fn counts(p: usize, q: usize) -> (f64, f64, f64) {
    (p as f64, q as f64, (p + q) as f64)
}

/// The amplify-and-forward bound curve rebuilt from the optimisation.
pub fn oracle_oaf_curve(n: usize, p: usize, q: usize) -> Result<PiecewiseLinearCurve> {
    if n < 2 || p == 0 {
        return Err(Error::InvalidProtocol(format!("oaf needs n ≥ 2 and p ≥ 1, got n={n} p={p}")));
    }
    let (pf, qf, m) = counts(p, q);
    trace_curve(|r| oaf_value(n, pf, qf, r), &[qf / m, pf / m, 0.5])
}

fn check_df(n: usize, p: usize, q: usize) -> Result<()> {
    if n < 2 || q == 0 || p < q {
        return Err(Error::InvalidProtocol(format!("selection DF needs n ≥ 2 and p ≥ q ≥ 1, got n={n} p={p} q={q}")));
    }
    Ok(())
}

pub fn oracle_nsdf_curve(n: usize, p: usize, q: usize) -> Result<PiecewiseLinearCurve> {
    check_df(n, p, q)?;
    let (pf, qf, m) = counts(p, q);
    trace_curve(|r| nsdf_value(n, pf, qf, r), &[qf / m, pf / m])
}

pub fn oracle_osdf_curve(n: usize, p: usize, q: usize) -> Result<PiecewiseLinearCurve> {
    check_df(n, p, q)?;
    let (pf, qf, m) = counts(p, q);
    trace_curve(|r| osdf_value(n, pf, qf, r), &[qf / m, pf / m])
}

/// Upper envelope over `κ` of the fixed-ratio curves, sampled at `rs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub curve: PiecewiseLinearCurve,
    /// Maximising `κ` at each sample; the smallest one on ties.
    pub argmax: Vec<f64>,
}

pub fn oracle_variable_envelope(kind: ProtocolKind, n: usize, kappa_grid: &[f64], rs: &[f64]) -> Result<Envelope> {
    let value: fn(usize, f64, f64, f64) -> f64 = match kind {
        ProtocolKind::NsdfFixed | ProtocolKind::NsdfVariable => nsdf_value,
        ProtocolKind::OsdfFixed | ProtocolKind::OsdfVariable => osdf_value,
        other => return Err(Error::Unsupported(format!("no κ envelope for {}", other.name()))),
    };
    if n < 2 {
        return Err(Error::InvalidProtocol(format!("need n ≥ 2, got {n}")));
    }
    if kappa_grid.is_empty() || kappa_grid.iter().any(|k| !(k.is_finite() && *k >= 1.0)) {
        return Err(Error::InvalidArgument("κ grid must be nonempty with entries ≥ 1".into()));
    }
    if rs.len() < 2 {
        return Err(Error::TooFewPoints(rs.len()));
    }
    let best: Vec<(f64, f64)> = rs
        .par_iter()
        .map(|&r| {
            kappa_grid.iter().fold((f64::NEG_INFINITY, f64::NAN), |acc, &k| {
                let d = value(n, k, 1.0, r);
                if d > acc.0 + 1e-12 || (d > acc.0 - 1e-12 && k < acc.1) {
                    (d, k)
                } else {
                    acc
                }
            })
        })
        .collect();
    let curve = PiecewiseLinearCurve::new(rs.iter().zip(&best).map(|(&r, &(d, _))| (r, d)))?;
    Ok(Envelope { curve, argmax: best.into_iter().map(|(_, k)| k).collect() })
}

/// `{κₙ}` together with `[1, 10]` at `step` and a geometric tail up to
/// 1000; the maximising ratio grows without bound as `r → 1`.
pub fn default_kappa_grid(kind: ProtocolKind, n: usize, step: f64) -> Vec<f64> {
    let kappa_n = match kind {
        ProtocolKind::OsdfFixed | ProtocolKind::OsdfVariable => analytic::osdf_kappa_n(n),
        _ => analytic::nsdf_kappa_n(n),
    };
    let steps = (9.0 / step).round() as usize;
    let mut grid: Vec<f64> = (0..=steps).map(|i| 1.0 + i as f64 * step).collect();
    let mut k = 10.0;
    while k < 1000.0 {
        k *= 1.0 + step / 5.0;
        grid.push(k);
    }
    grid.push(kappa_n);
    grid.sort_by(f64::total_cmp);
    grid
}
