use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::DistortionModel;
use crate::envelope::envelope_on_lattice;
use crate::error::{Error, Result};
use crate::iteration::{IterationTrace, StepRecord};
use crate::model::{h2, joint_conditional_entropy_sum, ExtendedReal, FieldLabel, ProductPmfGrid, RateField, Terminal};

/// Slack on the zero-message distortion constraint.
const FEASIBILITY_TOL: f64 = 1e-12;

/// Which joint pmfs the parameter axis sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// Independent `Ber(p) x Ber(q)` over the full `(p, q)` grid; both
    /// terminals' perturbation lines are present.
    Product,
    /// Independent sources with `q` pinned; only A's lines are present.
    ProductRow { q: f64 },
    /// `P(X = 1) = param` through a fixed channel `channel[x][y]`; only A's
    /// lines are present.
    FixedConditional { channel: [[f64; 2]; 2] },
}

/// A uniform parameter grid times a uniform distortion grid on `[0, d_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RDDomain {
    family: Family,
    n_param: usize,
    n_d: usize,
    d_max: f64,
}

impl RDDomain {
    fn build(family: Family, n_param: usize, n_d: usize, d_max: f64) -> Result<Self> {
        if n_param < 2 || n_d < 2 {
            return Err(Error::InvalidConfig(format!(
                "parameter and distortion grids need >= 2 points, got {n_param} and {n_d}"
            )));
        }
        if !(d_max > 0.0 && d_max.is_finite()) {
            return Err(Error::InvalidConfig(format!("distortion range must be positive, got {d_max}")));
        }
        match family {
            Family::Product => {}
            Family::ProductRow { q } => {
                if !(0.0..=1.0).contains(&q) {
                    return Err(Error::domain(format!("q = {q} outside [0, 1]")));
                }
            }
            Family::FixedConditional { channel } => {
                for row in channel {
                    if row.iter().any(|&w| !(w >= 0.0)) || (row[0] + row[1] - 1.0).abs() > 1e-12 {
                        return Err(Error::domain(format!("channel row {row:?} is not a pmf")));
                    }
                }
            }
        }
        Ok(Self {
            family,
            n_param,
            n_d,
            d_max,
        })
    }

    /// `n x n` product grid times `n_d` distortion levels.
    pub fn product(n: usize, n_d: usize, d_max: f64) -> Result<Self> {
        Self::build(Family::Product, n, n_d, d_max)
    }

    pub fn product_row(q: f64, n_param: usize, n_d: usize, d_max: f64) -> Result<Self> {
        Self::build(Family::ProductRow { q }, n_param, n_d, d_max)
    }

    pub fn fixed_conditional(channel: [[f64; 2]; 2], n_param: usize, n_d: usize, d_max: f64) -> Result<Self> {
        Self::build(Family::FixedConditional { channel }, n_param, n_d, d_max)
    }

    /// Doubly symmetric binary source: `Y = X xor Ber(crossover)`.
    pub fn binary_symmetric(crossover: f64, n_param: usize, n_d: usize, d_max: f64) -> Result<Self> {
        let c = crossover;
        Self::fixed_conditional([[1.0 - c, c], [c, 1.0 - c]], n_param, n_d, d_max)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn param_size(&self) -> usize {
        self.n_param
    }

    pub fn distortion_size(&self) -> usize {
        self.n_d
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    /// Number of `q` values: `n_param` for the product family, else 1.
    pub fn line_count(&self) -> usize {
        match self.family {
            Family::Product => self.n_param,
            _ => 1,
        }
    }

    pub fn has_b_lines(&self) -> bool {
        matches!(self.family, Family::Product)
    }

    pub fn len(&self) -> usize {
        self.n_param * self.line_count() * self.n_d
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn param(&self, i: usize) -> f64 {
        i as f64 / (self.n_param - 1) as f64
    }

    pub fn distortion(&self, k: usize) -> f64 {
        if k + 1 == self.n_d {
            self.d_max
        } else {
            k as f64 * self.d_max / (self.n_d - 1) as f64
        }
    }

    pub fn distortions(&self) -> Vec<f64> {
        (0..self.n_d).map(|k| self.distortion(k)).collect()
    }

    /// Second source parameter of line `j`.
    pub fn q_of(&self, j: usize) -> Option<f64> {
        match self.family {
            Family::Product => Some(self.param(j)),
            Family::ProductRow { q } => Some(q),
            Family::FixedConditional { .. } => None,
        }
    }

    /// Storage index of `(param i, line j, distortion k)`.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.line_count() + j) * self.n_d + k
    }

    pub fn nearest_param(&self, x: f64) -> usize {
        ((x.clamp(0.0, 1.0) * (self.n_param - 1) as f64).round() as usize).min(self.n_param - 1)
    }

    pub fn nearest_distortion(&self, d: f64) -> usize {
        ((d.clamp(0.0, self.d_max) / self.d_max * (self.n_d - 1) as f64).round() as usize).min(self.n_d - 1)
    }

    /// Joint pmf `[x][y]` at parameter node `i` on line `j`.
    pub fn joint(&self, i: usize, j: usize) -> [[f64; 2]; 2] {
        let p = self.param(i);
        let px = [1.0 - p, p];
        let channel = match self.family {
            Family::FixedConditional { channel } => channel,
            _ => {
                let q = self.q_of(j).expect("product families carry q");
                [[1.0 - q, q]; 2]
            }
        };
        [
            [px[0] * channel[0][0], px[0] * channel[0][1]],
            [px[1] * channel[1][0], px[1] * channel[1][1]],
        ]
    }

    /// `H(X|Y) + H(Y|X)` at node `(i, j)`.
    pub fn conditional_entropy_sum(&self, i: usize, j: usize) -> f64 {
        match self.family {
            Family::FixedConditional { .. } => joint_conditional_entropy_sum(&self.joint(i, j)),
            _ => h2(self.param(i)) + h2(self.q_of(j).expect("product families carry q")),
        }
    }
}

/// Zero-message rate reduction under a distortion budget: `H(X|Y) + H(Y|X)`
/// when a decoder seeing only `y` meets the budget, `Bottom` otherwise.
pub fn rho0_distortion(joint: &[[f64; 2]; 2], budget: f64, model: &DistortionModel) -> ExtendedReal {
    if model.zero_message_distortion(joint) <= budget + FEASIBILITY_TOL {
        ExtendedReal::Finite(joint_conditional_entropy_sum(joint))
    } else {
        ExtendedReal::Bottom
    }
}

/// Rate reduction over a [`RDDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct RdField {
    domain: RDDomain,
    values: Vec<ExtendedReal>,
    label: FieldLabel,
}

impl RdField {
    pub fn domain(&self) -> RDDomain {
        self.domain
    }

    pub fn label(&self) -> FieldLabel {
        self.label
    }

    pub fn values(&self) -> &[ExtendedReal] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> ExtendedReal {
        self.values[self.domain.index(i, j, k)]
    }

    /// Sum-rate `H(X|Y) + H(Y|X) - rho`; `+inf` where infeasible.
    pub fn sum_rate(&self, i: usize, j: usize, k: usize) -> f64 {
        match self.get(i, j, k) {
            ExtendedReal::Finite(r) => self.domain.conditional_entropy_sum(i, j) - r,
            ExtendedReal::Bottom => f64::INFINITY,
        }
    }

    /// Sum-rate against distortion at one parameter node of line `j`.
    pub fn rate_curve(&self, i: usize, j: usize) -> Vec<(f64, f64)> {
        (0..self.domain.n_d)
            .map(|k| (self.domain.distortion(k), self.sum_rate(i, j, k)))
            .collect()
    }

    /// The `(p, q)` slice at distortion level `k` (product family only).
    pub fn product_slice(&self, k: usize) -> Result<RateField> {
        if !self.domain.has_b_lines() {
            return Err(Error::InvalidConfig("only the product family has (p, q) slices".into()));
        }
        let grid = ProductPmfGrid::new(self.domain.n_param)?;
        let values = grid.nodes().map(|(i, j, _, _)| self.get(i, j, k)).collect();
        RateField::from_values(grid, values, self.label)
    }

    pub fn sup_change(&self, other: &RdField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| match (a, b) {
                (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => (x - y).abs(),
                (ExtendedReal::Bottom, ExtendedReal::Bottom) => 0.0,
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }
}

pub fn rho0_distortion_field(domain: RDDomain, model: &DistortionModel) -> RdField {
    let mut values = Vec::with_capacity(domain.len());
    for i in 0..domain.n_param {
        for j in 0..domain.line_count() {
            let joint = domain.joint(i, j);
            let feasible_from = model.zero_message_distortion(&joint) - FEASIBILITY_TOL;
            let rho = match domain.family {
                Family::FixedConditional { .. } => joint_conditional_entropy_sum(&joint),
                _ => domain.conditional_entropy_sum(i, j),
            };
            values.extend((0..domain.n_d).map(|k| {
                if domain.distortion(k) >= feasible_from {
                    ExtendedReal::Finite(rho)
                } else {
                    ExtendedReal::Bottom
                }
            }));
        }
    }
    RdField {
        domain,
        values,
        label: FieldLabel::Rho0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdConfig {
    pub max_messages: usize,
    pub tolerance: f64,
    pub first: Terminal,
    pub track_history: bool,
}

impl RdConfig {
    pub fn new(max_messages: usize, tolerance: f64) -> Result<Self> {
        let cfg = Self {
            max_messages,
            tolerance,
            first: Terminal::A,
            track_history: false,
        };
        if max_messages < 1 || !(tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "need max_messages >= 1 and tolerance > 0, got {max_messages} and {tolerance}"
            )));
        }
        Ok(cfg)
    }

    pub fn with_history(mut self, track: bool) -> Self {
        self.track_history = track;
        self
    }

    pub fn starting_with(mut self, first: Terminal) -> Self {
        self.first = first;
        self
    }
}

#[derive(Debug, Clone)]
pub struct RdOutcome {
    pub history: Vec<RdField>,
    pub last: RdField,
    pub trace: IterationTrace,
}

fn next_label(prev: FieldLabel, first: Terminal) -> FieldLabel {
    let messages = match prev {
        FieldLabel::Messages { messages, .. } => messages,
        _ => 0,
    };
    FieldLabel::Messages {
        messages: messages + 1,
        first,
    }
}

/// Joint envelope over `(p, D)` on every line of fixed `q`.
pub fn rd_half_step_a(prev: &RdField) -> RdField {
    let d = prev.domain;
    let (n, lines, n_d) = (d.n_param, d.line_count(), d.n_d);
    let slices: Vec<Vec<ExtendedReal>> = (0..lines)
        .into_par_iter()
        .map(|j| {
            let mut lattice = Vec::with_capacity(n * n_d);
            for i in 0..n {
                let start = d.index(i, j, 0);
                lattice.extend_from_slice(&prev.values[start..start + n_d]);
            }
            envelope_on_lattice(n, n_d, &lattice)
        })
        .collect();
    let mut values = vec![ExtendedReal::Bottom; d.len()];
    for (j, slice) in slices.iter().enumerate() {
        for i in 0..n {
            let start = d.index(i, j, 0);
            values[start..start + n_d].copy_from_slice(&slice[i * n_d..(i + 1) * n_d]);
        }
    }
    RdField {
        domain: d,
        values,
        label: next_label(prev.label, Terminal::A),
    }
}

/// Joint envelope over `(q, D)` on every line of fixed `p` (product family).
pub fn rd_half_step_b(prev: &RdField) -> Result<RdField> {
    let d = prev.domain;
    if !d.has_b_lines() {
        return Err(Error::InvalidConfig("this family has no perturbation lines for B".into()));
    }
    let block = d.n_param * d.n_d;
    let mut values = vec![ExtendedReal::Bottom; d.len()];
    values
        .par_chunks_mut(block)
        .zip(prev.values.par_chunks(block))
        .for_each(|(out, input)| out.copy_from_slice(&envelope_on_lattice(d.n_param, d.n_d, input)));
    Ok(RdField {
        domain: d,
        values,
        label: next_label(prev.label, Terminal::B),
    })
}

/// Alternating joint envelopes from [`rho0_distortion_field`]. Families
/// without B lines accept a single A half-step only.
pub fn rd_iterate(domain: RDDomain, model: &DistortionModel, cfg: &RdConfig) -> Result<RdOutcome> {
    if !domain.has_b_lines() && (cfg.max_messages > 1 || cfg.first == Terminal::B) {
        return Err(Error::InvalidConfig(
            "row and fixed-conditional families support one message from A only".into(),
        ));
    }
    let mut current = rho0_distortion_field(domain, model);
    let mut history = Vec::new();
    if cfg.track_history {
        history.push(current.clone());
    }
    let mut trace = IterationTrace::default();
    let mut terminal = cfg.first;
    for _ in 0..cfg.max_messages {
        let started = Instant::now();
        let next = match terminal {
            Terminal::A => rd_half_step_a(&current),
            Terminal::B => rd_half_step_b(&current)?,
        };
        let sup_change = next.sup_change(&current);
        trace.records.push(StepRecord {
            messages: trace.records.len() + 1,
            terminal,
            sup_change,
            max_oracle_gap: None,
            seconds: started.elapsed().as_secs_f64(),
        });
        if cfg.track_history {
            history.push(next.clone());
        }
        current = next;
        terminal = terminal.other();
        if sup_change <= cfg.tolerance && trace.records.len() >= 2 {
            trace.converged = true;
            break;
        }
    }
    Ok(RdOutcome {
        history,
        last: current,
        trace,
    })
}

/// One-message sum-rate against distortion at `P(X = 1) = p_x` for a
/// fixed-channel domain; this is the Wyner-Ziv rate with side information
/// at the decoder.
pub fn wyner_ziv_rate(domain: RDDomain, model: &DistortionModel, p_x: f64) -> Result<Vec<(f64, f64)>> {
    if !matches!(domain.family, Family::FixedConditional { .. }) {
        return Err(Error::InvalidConfig("the Wyner-Ziv curve needs a fixed-channel domain".into()));
    }
    let i = domain.nearest_param(p_x);
    if (domain.param(i) - p_x).abs() > 1e-9 {
        return Err(Error::domain(format!("p_x = {p_x} is not a grid node")));
    }
    let out = rd_iterate(domain, model, &RdConfig::new(1, 1e-12)?)?;
    Ok(out.last.rate_curve(i, 0))
}
