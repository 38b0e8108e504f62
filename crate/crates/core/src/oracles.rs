//! Closed-form infinite-message sum-rates for the two AND examples, the
//! rate-reduction fields they induce, and a verifier for the least-element
//! family (majorizes `rho_0`, concave along rows and columns).

use std::f64::consts::LOG2_E;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{h2, rho0_field, ExtendedReal, FieldLabel, FunctionSpec, ProductPmfGrid, RateField, Terminal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClosedForm {
    /// Both terminals compute `X AND Y`.
    AndBoth,
    /// Only B computes `X AND Y`.
    AndAtB,
}

impl ClosedForm {
    pub fn function(self) -> FunctionSpec {
        match self {
            ClosedForm::AndBoth => FunctionSpec::and_both(),
            ClosedForm::AndAtB => FunctionSpec::and_at_b(),
        }
    }

    pub fn sum_rate(self, p: f64, q: f64) -> Result<f64> {
        match self {
            ClosedForm::AndBoth => r_star_and_both(p, q),
            ClosedForm::AndAtB => r_star_and_at_b(p, q),
        }
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClosedForm::AndBoth => "and-both",
            ClosedForm::AndAtB => "and-at-b",
        })
    }
}

const SEAM_TOL: f64 = 1e-9;

fn check_unit(p: f64, q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("(p, q) = ({p}, {q}) outside [0, 1]^2")));
    }
    Ok(())
}

fn seam(a: f64, b: f64, what: &str) -> f64 {
    assert!((a - b).abs() <= SEAM_TOL, "{what} branches disagree: {a} vs {b}");
    a
}

// valid for 0 < p <= q; `slope` is 1 - q (both) or 1 - 2q (at B)
fn lower_branch(p: f64, q: f64, slope: f64) -> f64 {
    h2(p) + p * h2(q) + p * q.log2() + p * slope * LOG2_E
}

fn both_ordered(p: f64, q: f64) -> f64 {
    lower_branch(p, q, 1.0 - q)
}

fn at_b_ordered(p: f64, q: f64) -> f64 {
    lower_branch(p, q, 1.0 - 2.0 * q)
}

/// Minimum sum-rate with unbounded interaction when both terminals compute
/// `X AND Y` and `X ~ Ber(p)`, `Y ~ Ber(q)` are independent.
pub fn r_star_and_both(p: f64, q: f64) -> Result<f64> {
    check_unit(p, q)?;
    if p == 0.0 || q == 0.0 {
        return Ok(0.0);
    }
    Ok(if p < q {
        both_ordered(p, q)
    } else if p > q {
        both_ordered(q, p)
    } else {
        seam(both_ordered(p, q), both_ordered(q, p), "p = q")
    })
}

fn at_b_lower_half(p: f64, q: f64) -> f64 {
    // p, q in (0, 1/2]
    if p < q {
        at_b_ordered(p, q)
    } else if p > q {
        at_b_ordered(q, p)
    } else {
        seam(at_b_ordered(p, q), at_b_ordered(q, p), "p = q")
    }
}

/// Minimum sum-rate with unbounded interaction when only B computes
/// `X AND Y`.
pub fn r_star_and_at_b(p: f64, q: f64) -> Result<f64> {
    check_unit(p, q)?;
    if p == 0.0 || q == 0.0 || p == 1.0 {
        // p = 1 reflects onto p = 0 below; the limit is 0 for q < 1/2
        return Ok(if q >= 0.5 { h2(p) } else { 0.0 });
    }
    Ok(if q > 0.5 {
        h2(p)
    } else {
        let r = if p < 0.5 {
            at_b_lower_half(p, q)
        } else if p > 0.5 {
            at_b_lower_half(1.0 - p, q)
        } else {
            seam(at_b_lower_half(p, q), at_b_lower_half(1.0 - p, q), "p = 1/2")
        };
        if q == 0.5 {
            seam(r, h2(p), "q = 1/2")
        } else {
            r
        }
    })
}

/// `h2(p) + h2(q) - R*(p, q)` over the grid. Always finite.
pub fn rho_star_field(grid: ProductPmfGrid, which: ClosedForm) -> RateField {
    RateField::from_fn(grid, FieldLabel::RhoStar(which), |p, q| {
        let r = which.sum_rate(p, q).expect("grid nodes lie in the unit square");
        ExtendedReal::Finite(h2(p) + h2(q) - r)
    })
}

/// Outcome of one membership condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub passed: bool,
    /// Largest violation seen (0 when none); `inf` for a `Bottom` hole.
    pub worst_violation: f64,
    /// `(p, q)` of the worst violation.
    pub worst_node: Option<(f64, f64)>,
}

impl ConditionReport {
    fn new() -> Self {
        Self {
            passed: true,
            worst_violation: 0.0,
            worst_node: None,
        }
    }

    fn record(&mut self, violation: f64, node: (f64, f64), slack: f64) {
        if violation > slack {
            self.passed = false;
        }
        if violation > self.worst_violation {
            self.worst_violation = violation;
            self.worst_node = Some(node);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub majorizes_rho0: ConditionReport,
    pub row_concave: ConditionReport,
    pub column_concave: ConditionReport,
}

impl MembershipReport {
    pub fn passed(&self) -> bool {
        self.majorizes_rho0.passed && self.row_concave.passed && self.column_concave.passed
    }
}

// Midpoint test on consecutive finite triples; a Bottom node with finite
// nodes on both sides is an unbounded violation.
fn check_line(values: &[ExtendedReal], node: impl Fn(usize) -> (f64, f64), slack: f64, report: &mut ConditionReport) {
    let first = values.iter().position(|v| v.is_finite());
    let last = values.iter().rposition(|v| v.is_finite());
    if let (Some(lo), Some(hi)) = (first, last) {
        for k in lo + 1..hi {
            if values[k].is_bottom() {
                report.record(f64::INFINITY, node(k), slack);
            }
        }
    }
    for k in 1..values.len().saturating_sub(1) {
        if let (Some(a), Some(b), Some(c)) = (values[k - 1].finite(), values[k].finite(), values[k + 1].finite()) {
            report.record(0.5 * (a + c) - b, node(k), slack);
        }
    }
}

/// Checks that `rho` majorizes the zero-message field of `f` and is
/// midpoint-concave along every row and every column, each within `slack`.
pub fn verify_family_membership(rho: &RateField, f: &FunctionSpec, slack: f64) -> Result<MembershipReport> {
    if !(slack >= 0.0) {
        return Err(Error::InvalidConfig(format!("slack must be >= 0, got {slack}")));
    }
    let grid = rho.grid();
    let rho0 = rho0_field(grid, f);
    rho.check_same_grid(&rho0)?;

    let mut majorizes_rho0 = ConditionReport::new();
    for (i, j, p, q) in grid.nodes() {
        let deficit = match (rho.get(i, j), rho0.get(i, j)) {
            (_, ExtendedReal::Bottom) => continue,
            (ExtendedReal::Bottom, ExtendedReal::Finite(_)) => f64::INFINITY,
            (ExtendedReal::Finite(r), ExtendedReal::Finite(r0)) => r0 - r,
        };
        majorizes_rho0.record(deficit, (p, q), slack);
    }

    let mut row_concave = ConditionReport::new();
    for j in 0..grid.size() {
        check_line(&rho.row(j), |i| (grid.coord(i), grid.coord(j)), slack, &mut row_concave);
    }
    let mut column_concave = ConditionReport::new();
    for i in 0..grid.size() {
        check_line(rho.column(i), |j| (grid.coord(i), grid.coord(j)), slack, &mut column_concave);
    }

    Ok(MembershipReport {
        majorizes_rho0,
        row_concave,
        column_concave,
    })
}

/// A known finite-message sum-rate for the AND-at-B example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub p: f64,
    pub q: f64,
    pub messages: usize,
    /// Terminal sending the first message.
    pub first: Terminal,
    pub sum_rate: f64,
}

/// Finite-message landmarks for AND-at-B: one message from A costs
/// `log2 2 = 1` at `p = 1/2, q < 1/2` and `h2(p)` for `q >= 1/2`; two
/// messages starting at B already reach the unbounded-interaction rate
/// `h2(q)` at `p = 1/2`.
pub fn landmark_values() -> Vec<Landmark> {
    let mut table = Vec::new();
    for q in [0.1, 0.2, 0.25, 0.3, 0.4] {
        table.push(Landmark {
            p: 0.5,
            q,
            messages: 1,
            first: Terminal::A,
            sum_rate: 1.0,
        });
        table.push(Landmark {
            p: 0.5,
            q,
            messages: 2,
            first: Terminal::B,
            sum_rate: h2(q),
        });
    }
    for (p, q) in [(0.3, 0.7), (0.2, 0.5), (0.6, 0.8)] {
        table.push(Landmark {
            p,
            q,
            messages: 1,
            first: Terminal::A,
            sum_rate: h2(p),
        });
    }
    table
}
