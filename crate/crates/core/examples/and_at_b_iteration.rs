//! Runs the alternating envelope iteration for AND computed at B and prints
//! how the worst node gap to the closed-form surface shrinks with messages
//! and with grid resolution.
//!
//! cargo run --release --example and_at_b_iteration -- [N ...]

use sumrate::iteration::{iterate, sum_rate_field, IterationConfig};
use sumrate::oracles::{rho_star_field, ClosedForm};
use sumrate::model::ProductPmfGrid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sizes: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let sizes = if sizes.is_empty() { vec![51, 101, 201, 401] } else { sizes };

    for which in [ClosedForm::AndAtB, ClosedForm::AndBoth] {
        println!("{which}");
        for &n in &sizes {
            let oracle = rho_star_field(ProductPmfGrid::new(n)?, which);
            let cfg = IterationConfig::new(n, 50, 1e-6)?;
            let out = iterate(&which.function(), &cfg, Some(&oracle))?;
            let seconds: f64 = out.trace.records.iter().map(|r| r.seconds).sum();
            let gaps: Vec<String> = out
                .trace
                .records
                .iter()
                .take(8)
                .map(|r| format!("{:.4}", r.max_oracle_gap.unwrap_or(f64::NAN)))
                .collect();
            let last = out.trace.records.last().expect("at least one step");
            println!(
                "  N={n:4}  steps={:2}  converged={}  floor={:.5}  {:.2}s  gaps[..8]=[{}]",
                out.trace.records.len(),
                out.trace.converged,
                last.max_oracle_gap.unwrap_or(f64::NAN),
                seconds,
                gaps.join(", ")
            );
            if which == ClosedForm::AndAtB && n == *sizes.last().unwrap() {
                let rates = sum_rate_field(&out.last);
                println!("  R(0.3, 0.4) = {:.6}  closed form {:.6}", rates.at(0.3, 0.4), which.sum_rate(0.3, 0.4)?);
            }
        }
    }
    Ok(())
}
