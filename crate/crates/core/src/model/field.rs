use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::entropy::h2;
use super::function::{FunctionSpec, TruthTable};
use crate::error::{Error, Result};
use crate::oracles::ClosedForm;

/// A rate-reduction value in bits, or `Bottom` standing for `-inf`
/// (an infeasible pmf). `Bottom` orders below every finite value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub enum ExtendedReal {
    Bottom,
    Finite(f64),
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn is_bottom(self) -> bool {
        matches!(self, ExtendedReal::Bottom)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Bottom => None,
        }
    }

    /// `f64` view with `Bottom` mapped to `-inf`. Only for comparisons and output.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::NEG_INFINITY)
    }

    /// Total order used by the envelope code; NaN never enters a field.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.to_f64().total_cmp(&other.to_f64())
    }
}

impl From<Option<f64>> for ExtendedReal {
    fn from(v: Option<f64>) -> Self {
        v.map_or(ExtendedReal::Bottom, ExtendedReal::Finite)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Bottom => f.write_str("-inf"),
            ExtendedReal::Finite(v) => write!(f, "{v}"),
        }
    }
}

/// The terminal that sends the first message of a code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terminal {
    A,
    B,
}

impl Terminal {
    pub fn other(self) -> Self {
        match self {
            Terminal::A => Terminal::B,
            Terminal::B => Terminal::A,
        }
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Terminal::A => "A",
            Terminal::B => "B",
        })
    }
}

/// Uniform `N x N` grid over the product family `{Ber(p) x Ber(q)}`.
///
/// Node `(i, j)` sits at `(p, q) = (i/(N-1), j/(N-1))`. Row `j` (fixed `q`)
/// is the discretized X-marginal perturbation set, column `i` (fixed `p`)
/// the Y-marginal one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductPmfGrid {
    n: usize,
}

impl ProductPmfGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("grid size N must be >= 2, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    /// Coordinate of index `k` on either axis. Endpoints are exactly 0 and 1.
    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        k as f64 / (self.n - 1) as f64
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.coord(k)).collect()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Nearest grid index to a coordinate in `[0, 1]`.
    pub fn nearest_index(&self, x: f64) -> usize {
        ((x.clamp(0.0, 1.0) * (self.n - 1) as f64).round() as usize).min(self.n - 1)
    }

    /// All nodes `(i, j, p, q)` in storage order (`p` outer, `q` inner).
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.n).flat_map(move |i| (0..self.n).map(move |j| (i, j, self.coord(i), self.coord(j))))
    }
}

/// What a [`RateField`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldLabel {
    /// Zero-message rate reduction.
    Rho0,
    /// Rate reduction after `messages` messages, the first sent by `first`.
    Messages { messages: usize, first: Terminal },
    /// Rate reduction of a closed-form infinite-message surface.
    RhoStar(ClosedForm),
    /// Anything else (loaded from disk, hand-built).
    Other,
}

impl fmt::Display for FieldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldLabel::Rho0 => f.write_str("rho_0"),
            FieldLabel::Messages { messages, first } => write!(f, "rho_{messages}^{first}"),
            FieldLabel::RhoStar(which) => write!(f, "rho_star({which})"),
            FieldLabel::Other => f.write_str("other"),
        }
    }
}

/// Extended-real rate-reduction values over a [`ProductPmfGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RateField {
    grid: ProductPmfGrid,
    values: Vec<ExtendedReal>,
    label: FieldLabel,
}

impl RateField {
    pub fn from_values(grid: ProductPmfGrid, values: Vec<ExtendedReal>, label: FieldLabel) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidConfig(format!(
                "field has {} values, grid N={} needs {}",
                values.len(),
                grid.size(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| v.finite().is_some_and(|x| !x.is_finite())) {
            return Err(Error::InvalidConfig("finite field values must not be NaN or infinite".into()));
        }
        Ok(Self { grid, values, label })
    }

    /// Builds a field by evaluating `f(p, q)` at every node.
    pub fn from_fn(grid: ProductPmfGrid, label: FieldLabel, mut f: impl FnMut(f64, f64) -> ExtendedReal) -> Self {
        let values = grid.nodes().map(|(_, _, p, q)| f(p, q)).collect();
        Self { grid, values, label }
    }

    pub fn grid(&self) -> ProductPmfGrid {
        self.grid
    }

    pub fn label(&self) -> FieldLabel {
        self.label
    }

    pub fn values(&self) -> &[ExtendedReal] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> ExtendedReal {
        self.values[self.grid.index(i, j)]
    }

    /// Value at the grid node nearest to `(p, q)`.
    pub fn at(&self, p: f64, q: f64) -> ExtendedReal {
        self.get(self.grid.nearest_index(p), self.grid.nearest_index(q))
    }

    /// Row `j`: fixed `q`, varying `p`.
    pub fn row(&self, j: usize) -> Vec<ExtendedReal> {
        (0..self.grid.size()).map(|i| self.get(i, j)).collect()
    }

    /// Column `i`: fixed `p`, varying `q`.
    pub fn column(&self, i: usize) -> &[ExtendedReal] {
        let n = self.grid.size();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn relabel(mut self, label: FieldLabel) -> Self {
        self.label = label;
        self
    }

    pub(crate) fn check_same_grid(&self, other: &RateField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                expected: self.grid.size(),
                actual: other.grid.size(),
            });
        }
        Ok(())
    }

    /// Sup-norm distance between two fields. `Bottom` vs `Bottom` counts as
    /// zero, `Bottom` vs finite as `+inf`.
    pub fn sup_change(&self, other: &RateField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| match (a, b) {
                (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => (x - y).abs(),
                (ExtendedReal::Bottom, ExtendedReal::Bottom) => 0.0,
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max))
    }

    /// `max (reference - self)` over all nodes, the one-sided gap to a
    /// dominating reference. A `Bottom` node where the reference is finite
    /// contributes `+inf`.
    pub fn max_gap_below(&self, reference: &RateField) -> Result<f64> {
        self.check_same_grid(reference)?;
        Ok(self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(v, r)| match (v, r) {
                (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => y - x,
                (_, ExtendedReal::Bottom) => f64::NEG_INFINITY,
                (ExtendedReal::Bottom, ExtendedReal::Finite(_)) => f64::INFINITY,
            })
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

fn support(r: f64) -> &'static [usize] {
    if r == 0.0 {
        &[0]
    } else if r == 1.0 {
        &[1]
    } else {
        &[0, 1]
    }
}

fn constant_over<I: Iterator<Item = u8>>(mut symbols: I) -> bool {
    match symbols.next() {
        None => true,
        Some(first) => symbols.all(|s| s == first),
    }
}

/// Whether both functions are computable with zero messages at `Ber(p) x Ber(q)`:
/// `f_A(x, .)` is constant on `supp(q)` for every `x` in `supp(p)`, and
/// `f_B(., y)` is constant on `supp(p)` for every `y` in `supp(q)`.
pub fn zero_message_feasible(p: f64, q: f64, f: &FunctionSpec) -> bool {
    let (sx, sy) = (support(p), support(q));
    let a_ok = |t: &TruthTable| sx.iter().all(|&x| constant_over(sy.iter().map(|&y| t[x][y])));
    let b_ok = |t: &TruthTable| sy.iter().all(|&y| constant_over(sx.iter().map(|&x| t[x][y])));
    a_ok(&f.f_a) && b_ok(&f.f_b)
}

/// Zero-message rate reduction: `h2(p) + h2(q)` where both functions are
/// computable without communication, `Bottom` elsewhere.
pub fn rho0_field(grid: ProductPmfGrid, f: &FunctionSpec) -> RateField {
    RateField::from_fn(grid, FieldLabel::Rho0, |p, q| {
        if zero_message_feasible(p, q, f) {
            ExtendedReal::Finite(h2(p) + h2(q))
        } else {
            ExtendedReal::Bottom
        }
    })
}
