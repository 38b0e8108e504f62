//! Alternating row/column concave-envelope iteration on the product grid.
//!
//! A half-step for terminal A replaces every row (fixed `q`) by its upper
//! concave envelope in `p`; a half-step for B does the same to every column.
//! Starting from the zero-message field, `t` half-steps give the `t`-message
//! rate reduction whose first message is sent by the terminal of the last
//! half-step applied.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelope::envelope_into;
use crate::error::{Error, Result};
use crate::model::{h2, rho0_field, ExtendedReal, FieldLabel, FunctionSpec, ProductPmfGrid, RateField, Terminal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    pub grid_size: usize,
    pub max_messages: usize,
    /// Stop once consecutive fields differ by at most this much (sup norm, bits).
    pub tolerance: f64,
    /// Keep every intermediate field, not just the last two.
    pub track_history: bool,
    /// Terminal whose half-step is applied first.
    pub first: Terminal,
}

impl IterationConfig {
    pub fn new(grid_size: usize, max_messages: usize, tolerance: f64) -> Result<Self> {
        let cfg = Self {
            grid_size,
            max_messages,
            tolerance,
            track_history: false,
            first: Terminal::A,
        };
        cfg.validate()?;
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

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 2 {
            return Err(Error::InvalidConfig(format!("grid size must be >= 2, got {}", self.grid_size)));
        }
        if self.max_messages < 1 {
            return Err(Error::InvalidConfig("max_messages must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        Ok(())
    }
}

/// One half-step of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Number of messages of the field produced by this step.
    pub messages: usize,
    pub terminal: Terminal,
    /// Sup-norm change from the previous field (`inf` when the finite support grew).
    pub sup_change: f64,
    /// `max(oracle - field)` when an oracle was supplied.
    pub max_oracle_gap: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<StepRecord>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct IterationOutcome {
    /// All fields from `rho_0` on when history was requested, otherwise empty.
    pub history: Vec<RateField>,
    /// Field before the last one (for the fixed-point check).
    pub previous: RateField,
    pub last: RateField,
    pub trace: IterationTrace,
}

/// Messages behind a field label; 0 for anything but an iterate.
pub fn message_count(label: FieldLabel) -> usize {
    match label {
        FieldLabel::Messages { messages, .. } => messages,
        _ => 0,
    }
}

/// Row envelopes: concave in `p` for every fixed `q`.
pub fn half_step_a(prev: &RateField) -> RateField {
    let grid = prev.grid();
    let n = grid.size();
    let xs: Vec<f64> = (0..n).map(|k| k as f64).collect();
    let rows: Vec<Vec<ExtendedReal>> = (0..n)
        .into_par_iter()
        .map_init(Vec::new, |hull, j| {
            let row = prev.row(j);
            let mut out = vec![ExtendedReal::Bottom; n];
            envelope_into(&xs, &row, &mut out, hull);
            out
        })
        .collect();
    let mut values = vec![ExtendedReal::Bottom; grid.node_count()];
    for (j, row) in rows.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            values[grid.index(i, j)] = *v;
        }
    }
    let label = FieldLabel::Messages {
        messages: message_count(prev.label()) + 1,
        first: Terminal::A,
    };
    RateField::from_values(grid, values, label).expect("envelope keeps the grid shape")
}

/// Column envelopes: concave in `q` for every fixed `p`.
pub fn half_step_b(prev: &RateField) -> RateField {
    let grid = prev.grid();
    let n = grid.size();
    let xs: Vec<f64> = (0..n).map(|k| k as f64).collect();
    let mut values = vec![ExtendedReal::Bottom; grid.node_count()];
    values
        .par_chunks_mut(n)
        .enumerate()
        .for_each_init(Vec::new, |hull, (i, out)| envelope_into(&xs, prev.column(i), out, hull));
    let label = FieldLabel::Messages {
        messages: message_count(prev.label()) + 1,
        first: Terminal::B,
    };
    RateField::from_values(grid, values, label).expect("envelope keeps the grid shape")
}

pub fn half_step(prev: &RateField, terminal: Terminal) -> RateField {
    match terminal {
        Terminal::A => half_step_a(prev),
        Terminal::B => half_step_b(prev),
    }
}

/// Runs the alternating iteration from `rho_0` until `max_messages`
/// half-steps or until a half-step changes the field by at most the
/// tolerance. Non-convergence is reported in the trace.
pub fn iterate(f: &FunctionSpec, cfg: &IterationConfig, oracle: Option<&RateField>) -> Result<IterationOutcome> {
    cfg.validate()?;
    let grid = ProductPmfGrid::new(cfg.grid_size)?;
    if let Some(o) = oracle {
        if o.grid() != grid {
            return Err(Error::GridMismatch {
                expected: grid.size(),
                actual: o.grid().size(),
            });
        }
    }

    let mut current = rho0_field(grid, f);
    let mut previous = current.clone();
    let mut history = Vec::new();
    if cfg.track_history {
        history.push(current.clone());
    }
    let mut trace = IterationTrace::default();
    let mut terminal = cfg.first;

    for _ in 0..cfg.max_messages {
        let started = Instant::now();
        let next = half_step(&current, terminal);
        let sup_change = next.sup_change(&current)?;
        debug_assert!(is_monotone_step(&current, &next), "a half-step lowered a node");
        let max_oracle_gap = oracle.map(|o| next.max_gap_below(o)).transpose()?;
        trace.records.push(StepRecord {
            messages: message_count(next.label()),
            terminal,
            sup_change,
            max_oracle_gap,
            seconds: started.elapsed().as_secs_f64(),
        });
        if cfg.track_history {
            history.push(next.clone());
        }
        previous = std::mem::replace(&mut current, next);
        terminal = terminal.other();
        // the input to step 1 is not an envelope, so no-change there proves nothing
        if sup_change <= cfg.tolerance && trace.records.len() >= 2 {
            trace.converged = true;
            break;
        }
    }

    Ok(IterationOutcome {
        history,
        previous,
        last: current,
        trace,
    })
}

/// Every node is at least its previous value and no finite node turned
/// `Bottom`.
pub fn is_monotone_step(before: &RateField, after: &RateField) -> bool {
    before.values().iter().zip(after.values()).all(|(b, a)| match (b, a) {
        (ExtendedReal::Bottom, _) => true,
        (ExtendedReal::Finite(_), ExtendedReal::Bottom) => false,
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => y >= x,
    })
}

/// Sum-rate surface `h2(p) + h2(q) - rho`; infeasible nodes carry `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumRateField {
    grid: ProductPmfGrid,
    values: Vec<f64>,
    label: FieldLabel,
}

impl SumRateField {
    pub fn grid(&self) -> ProductPmfGrid {
        self.grid
    }

    pub fn label(&self) -> FieldLabel {
        self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn at(&self, p: f64, q: f64) -> f64 {
        self.get(self.grid.nearest_index(p), self.grid.nearest_index(q))
    }
}

pub fn sum_rate_field(rho: &RateField) -> SumRateField {
    let grid = rho.grid();
    let values = grid
        .nodes()
        .map(|(i, j, p, q)| match rho.get(i, j) {
            ExtendedReal::Finite(r) => h2(p) + h2(q) - r,
            ExtendedReal::Bottom => f64::INFINITY,
        })
        .collect();
    SumRateField {
        grid,
        values,
        label: rho.label(),
    }
}
