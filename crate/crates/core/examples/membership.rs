//! Checks which fields belong to the admissible family: the closed-form
//! optimum passes all three conditions, the zero-message field does not.
//!
//! cargo run --release --example membership -- [n]

use sumrate::model::{rho0_field, ProductPmfGrid};
use sumrate::oracles::{rho_star_field, verify_family_membership, ClosedForm, ConditionReport};

fn show(name: &str, c: &ConditionReport) {
    let at = c.worst_node.map(|(p, q)| format!(" at ({p:.3}, {q:.3})")).unwrap_or_default();
    println!("  {name:<14} {:<5} worst {:.3e}{at}", if c.passed { "ok" } else { "FAIL" }, c.worst_violation);
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(401);
    let grid = ProductPmfGrid::new(n)?;
    for which in [ClosedForm::AndAtB, ClosedForm::AndBoth] {
        let f = which.function();
        for (label, field) in [("optimum", rho_star_field(grid, which)), ("zero-message", rho0_field(grid, &f))] {
            let r = verify_family_membership(&field, &f, 1e-9)?;
            println!("{which} {label}: {}", if r.passed() { "member" } else { "not a member" });
            show("majorizes", &r.majorizes_rho0);
            show("row-concave", &r.row_concave);
            show("column-concave", &r.column_concave);
        }
    }
    Ok(())
}
