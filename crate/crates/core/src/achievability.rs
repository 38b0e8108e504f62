//! An explicit infinite-message scheme for AND at B.
//!
//! The sources are realized as `X = [V_x >= 1 - p]`, `Y = [V_y >= 1 - q]`
//! from independent uniforms. A monotone rate-allocation curve
//! `(alpha(s), beta(s))` and a partition of `s` define nested rectangles
//! `U_{2i-1} = [alpha_i, 1] x [beta_{i-1}, 1]` (sent by A) and
//! `U_{2i} = [alpha_i, 1] x [beta_i, 1]` (sent by B). Each message rate is a
//! difference of `G(a) = (1 - a) h2(r / (1 - a))`; as the mesh shrinks the
//! total tends to a weighted area computed by [`integral_sum_rate`].

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::h2;

const SNAP: f64 = 1e-12;
const QUAD_TOL: f64 = 1e-9;

/// `(1 - a) h2(r / (1 - a))`, the conditional entropy left in a source with
/// bias `r` once the strip `[0, a)` has been described. Needs `a <= 1 - r`.
fn residual_entropy(r: f64, a: f64) -> f64 {
    let width = 1.0 - a;
    if width <= 0.0 {
        return 0.0;
    }
    width * h2((r / width).min(1.0))
}

/// `log2((1 - v) / (1 - r - v))`, the marginal cost of widening a strip at `v`.
fn weight(r: f64, v: f64) -> f64 {
    ((1.0 - v) / (1.0 - r - v)).log2()
}

/// Monotone piecewise-linear curve from `(0, 0)` to `(1 - p, beta_end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateAllocationCurve {
    p: f64,
    q: f64,
    vertices: Vec<(f64, f64)>,
    // cumulative chord length, normalized to end at 1
    knots: Vec<f64>,
}

impl RateAllocationCurve {
    /// Validates monotonicity and the end conditions `alpha = 1 - p`,
    /// `0 <= beta <= 1 - q`. An end `alpha` within 1e-12 of `1 - p` is snapped.
    pub fn new(p: f64, q: f64, mut vertices: Vec<(f64, f64)>) -> Result<Self> {
        if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("curve needs 0 < p, q < 1, got ({p}, {q})")));
        }
        if vertices.len() < 2 {
            return Err(Error::domain("a curve needs at least two vertices"));
        }
        if vertices[0] != (0.0, 0.0) {
            return Err(Error::domain(format!("curve must start at (0, 0), got {:?}", vertices[0])));
        }
        for w in vertices.windows(2) {
            let ((a0, b0), (a1, b1)) = (w[0], w[1]);
            if !(a1.is_finite() && b1.is_finite()) || a1 < a0 || b1 < b0 {
                return Err(Error::domain(format!("curve is not monotone at {:?} -> {:?}", w[0], w[1])));
            }
        }
        let last = vertices.len() - 1;
        let (a_end, b_end) = vertices[last];
        if (a_end - (1.0 - p)).abs() > SNAP {
            return Err(Error::domain(format!("curve must end at alpha = 1 - p = {}, got {a_end}", 1.0 - p)));
        }
        vertices[last].0 = 1.0 - p;
        if vertices.iter().any(|&(a, _)| a > 1.0 - p) {
            return Err(Error::domain("alpha exceeds 1 - p"));
        }
        if b_end > 1.0 - q {
            return Err(Error::domain(format!("curve must end at beta <= 1 - q = {}, got {b_end}", 1.0 - q)));
        }

        let mut knots = Vec::with_capacity(vertices.len());
        let mut acc = 0.0;
        knots.push(0.0);
        for w in vertices.windows(2) {
            acc += (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
            knots.push(acc);
        }
        for k in &mut knots {
            *k /= acc;
        }
        Ok(Self { p, q, vertices, knots })
    }

    /// Curve for the variant where both terminals compute the AND, which
    /// must end at `beta = 1 - q`.
    pub fn new_both_terminals(p: f64, q: f64, vertices: Vec<(f64, f64)>) -> Result<Self> {
        let curve = Self::new(p, q, vertices)?;
        if (curve.end().1 - (1.0 - q)).abs() > SNAP {
            return Err(Error::domain("a both-terminals curve must end at beta = 1 - q"));
        }
        Ok(curve)
    }

    /// Reads `alpha,beta` rows (header optional) from a CSV file.
    pub fn from_csv(path: impl AsRef<Path>, p: f64, q: f64) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(path, io),
                other => Error::parse("curve file", format!("{other:?}")),
            })?;
        let mut vertices = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::parse("curve file", e))?;
            let fields: Vec<&str> = record.iter().collect();
            if fields.len() != 2 {
                return Err(Error::parse("curve file", format!("line {}: expected alpha,beta", line + 1)));
            }
            match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => vertices.push((a, b)),
                _ if line == 0 => continue,
                _ => return Err(Error::parse("curve file", format!("line {}: not a number", line + 1))),
            }
        }
        Self::new(p, q, vertices)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn end(&self) -> (f64, f64) {
        *self.vertices.last().expect("validated non-empty")
    }

    /// Point at chord-length parameter `s` in `[0, 1]`. Endpoints are exact.
    pub fn point(&self, s: f64) -> (f64, f64) {
        if s <= 0.0 {
            return self.vertices[0];
        }
        if s >= 1.0 {
            return self.end();
        }
        let k = self.knots.partition_point(|&t| t <= s).clamp(1, self.knots.len() - 1);
        let (s0, s1) = (self.knots[k - 1], self.knots[k]);
        let ((a0, b0), (a1, b1)) = (self.vertices[k - 1], self.vertices[k]);
        let t = if s1 > s0 { (s - s0) / (s1 - s0) } else { 1.0 };
        (a0 + t * (a1 - a0), b0 + t * (b1 - b0))
    }
}

/// The optimal curve for `0 < p <= q <= 1/2`.
pub fn gamma1(p: f64, q: f64) -> Result<RateAllocationCurve> {
    if !(p > 0.0 && p <= q && q <= 0.5) {
        return Err(Error::domain(format!("gamma1 needs 0 < p <= q <= 1/2, got ({p}, {q})")));
    }
    RateAllocationCurve::new(
        p,
        q,
        vec![(0.0, 0.0), (1.0 - p / q, 0.0), (1.0 - 2.0 * p, 1.0 - 2.0 * q), (1.0 - p, 1.0 - 2.0 * q)],
    )
}

/// The optimal curve for `0 < q <= p <= 1/2`.
pub fn gamma2(p: f64, q: f64) -> Result<RateAllocationCurve> {
    if !(q > 0.0 && q <= p && p <= 0.5) {
        return Err(Error::domain(format!("gamma2 needs 0 < q <= p <= 1/2, got ({p}, {q})")));
    }
    RateAllocationCurve::new(
        p,
        q,
        vec![(0.0, 0.0), (0.0, 1.0 - q / p), (1.0 - 2.0 * p, 1.0 - 2.0 * q), (1.0 - p, 1.0 - 2.0 * q)],
    )
}

/// Breakpoints `0 = s_0 < s_1 < ... < s_m = 1`; a code has `2m` messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    breaks: Vec<f64>,
}

impl Partition {
    pub fn new(breaks: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return Err(Error::domain("partition must run from 0 to 1"));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("partition breakpoints must be strictly increasing"));
        }
        Ok(Self { breaks })
    }

    pub fn uniform(intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::domain("a partition needs at least one interval"));
        }
        let m = intervals as f64;
        let mut breaks: Vec<f64> = (0..=intervals).map(|i| i as f64 / m).collect();
        breaks[intervals] = 1.0;
        Self::new(breaks)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn intervals(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn messages(&self) -> usize {
        2 * self.intervals()
    }

    pub fn mesh(&self) -> f64 {
        self.breaks.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Union of both breakpoint sets.
    pub fn refine(&self, other: &Partition) -> Partition {
        let mut breaks: Vec<f64> = self.breaks.iter().chain(&other.breaks).copied().collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Partition { breaks }
    }
}

fn interval_points(curve: &RateAllocationCurve, partition: &Partition, i: usize) -> Result<((f64, f64), (f64, f64))> {
    if i == 0 || i > partition.intervals() {
        return Err(Error::domain(format!("interval {i} outside 1..={}", partition.intervals())));
    }
    Ok((curve.point(partition.breaks[i - 1]), curve.point(partition.breaks[i])))
}

/// Rate of message `2i - 1` (A widens the vertical bar over interval `i`).
pub fn strip_rate_a(curve: &RateAllocationCurve, partition: &Partition, i: usize) -> Result<f64> {
    let ((a0, b0), (a1, _)) = interval_points(curve, partition, i)?;
    let p = curve.p;
    if a1 > 1.0 - p {
        return Err(Error::Singularity(format!("alpha = {a1} beyond 1 - p = {}", 1.0 - p)));
    }
    if a1 == a0 {
        return Ok(0.0);
    }
    Ok((1.0 - b0) * (residual_entropy(p, a0) - residual_entropy(p, a1)))
}

/// Rate of message `2i` (B widens the horizontal bar over interval `i`).
pub fn strip_rate_b(curve: &RateAllocationCurve, partition: &Partition, i: usize) -> Result<f64> {
    let ((_, b0), (a1, b1)) = interval_points(curve, partition, i)?;
    let q = curve.q;
    if b1 >= 1.0 - q {
        return Err(Error::Singularity(format!("beta = {b1} reaches 1 - q = {}", 1.0 - q)));
    }
    if b1 == b0 || a1 >= 1.0 {
        return Ok(0.0);
    }
    Ok((1.0 - a1) * (residual_entropy(q, b0) - residual_entropy(q, b1)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRates {
    /// Message rates in sending order, A first.
    pub per_message: Vec<f64>,
    pub total: f64,
    /// Largest message rate divided by the partition mesh.
    pub rate_per_mesh: f64,
}

pub fn scheme_sum_rate(curve: &RateAllocationCurve, partition: &Partition) -> Result<SchemeRates> {
    let mut per_message = Vec::with_capacity(partition.messages());
    for i in 1..=partition.intervals() {
        per_message.push(strip_rate_a(curve, partition, i)?);
        per_message.push(strip_rate_b(curve, partition, i)?);
    }
    let total = per_message.iter().sum();
    let max_rate = per_message.iter().copied().fold(0.0, f64::max);
    Ok(SchemeRates {
        per_message,
        total,
        rate_per_mesh: max_rate / partition.mesh(),
    })
}

fn simpson_step(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson_step(f, a, fa, m, fm);
    let (rm, frm, right) = simpson_step(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub(crate) fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson_step(&f, a, fa, b, fb);
    simpson_rec(&f, a, fa, b, fb, m, fm, whole, tol, 48)
}

// Integral over [x0, x1] of (1 - y(x)) * weight(r, x), with y linear from y0
// to y1. The constant part (1 - y1) uses the antiderivative; the rest
// vanishes at x1, which tames the log singularity at x = 1 - r.
fn bar_integral(r: f64, (x0, y0): (f64, f64), (x1, y1): (f64, f64)) -> f64 {
    if x1 <= x0 {
        return 0.0;
    }
    let exact = (1.0 - y1) * (residual_entropy(r, x0) - residual_entropy(r, x1));
    if y1 == y0 {
        return exact;
    }
    let slope = (y1 - y0) / (x1 - x0);
    let rest = adaptive_simpson(
        |x| {
            let lift = slope * (x1 - x);
            if lift == 0.0 { 0.0 } else { lift * weight(r, x) }
        },
        x0,
        x1,
        QUAD_TOL,
    );
    exact + rest
}

/// Limit of the scheme's sum-rate as the mesh goes to zero: the weighted
/// area of the vertical bars (weight in `alpha`, cost `p`) plus that of the
/// horizontal bars (weight in `beta`, cost `q`).
pub fn integral_sum_rate(curve: &RateAllocationCurve) -> Result<f64> {
    let (p, q) = (curve.p, curve.q);
    let mut total = 0.0;
    for w in curve.vertices.windows(2) {
        let ((a0, b0), (a1, b1)) = (w[0], w[1]);
        total += bar_integral(p, (a0, b0), (a1, b1));
        total += bar_integral(q, (b0, a0), (b1, a1));
    }
    if !total.is_finite() {
        return Err(Error::Singularity(format!("weighted area is not finite at ({p}, {q})")));
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub samples: u64,
    /// Draws where the auxiliary chain `U_1 >= U_2 >= ...` broke.
    pub chain_violations: u64,
    /// Draws where `U_t AND Y` differs from `X AND Y`.
    pub decoding_errors: u64,
}

impl MonteCarloReport {
    pub fn error_rate(&self) -> f64 {
        self.decoding_errors as f64 / self.samples as f64
    }
}

/// Simulates the nested-rectangle auxiliaries on seeded uniform draws and
/// counts draws where B's final reconstruction of `X AND Y` is wrong.
pub fn monte_carlo_p2_check(
    curve: &RateAllocationCurve,
    partition: &Partition,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloReport> {
    if samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let (p, q) = (curve.p, curve.q);
    let points: Vec<(f64, f64)> = partition.breaks.iter().map(|&s| curve.point(s)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = MonteCarloReport {
        samples,
        chain_violations: 0,
        decoding_errors: 0,
    };
    for _ in 0..samples {
        let (vx, vy): (f64, f64) = (rng.gen(), rng.gen());
        let x = vx >= 1.0 - p;
        let y = vy >= 1.0 - q;
        let mut previous = true;
        let mut chain_ok = true;
        let mut last = true;
        for i in 1..points.len() {
            let (alpha, _) = points[i];
            let (_, beta_prev) = points[i - 1];
            let (_, beta) = points[i];
            for u in [vx >= alpha && vy >= beta_prev, vx >= alpha && vy >= beta] {
                chain_ok &= previous || !u;
                previous = u;
                last = u;
            }
        }
        report.chain_violations += u64::from(!chain_ok);
        report.decoding_errors += u64::from((last && y) != (x && y));
    }
    Ok(report)
}

/// Uniform draw of a valid `(p, q)` pair with its optimal curve and a random
/// partition into `1..=max_intervals` intervals.
pub fn random_configuration(rng: &mut impl Rng, max_intervals: usize) -> (RateAllocationCurve, Partition) {
    let a: f64 = rng.gen_range(0.01..=0.5);
    let b: f64 = rng.gen_range(0.01..=0.5);
    let curve = if a <= b { gamma1(a, b) } else { gamma2(a, b) }.expect("drawn inside the domain");
    let m = rng.gen_range(1..=max_intervals.max(1));
    let mut breaks: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(0.0..1.0)).collect();
    breaks.push(0.0);
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    (curve, Partition::new(breaks).unwrap_or_else(|_| Partition::uniform(1).unwrap()))
}
