//! A concrete multi-message scheme for AND at terminal B: strip rates along
//! the optimal rate-allocation curve, their total for finer and finer
//! partitions, the limiting integral, and a simulated decoding check.
//!
//! cargo run --release --example achievable_scheme -- [p] [q]

use sumrate::achievability::{gamma1, gamma2, integral_sum_rate, monte_carlo_p2_check, scheme_sum_rate, Partition};
use sumrate::oracles::r_star_and_at_b;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let p: f64 = args.first().map(|s| s.parse()).transpose()?.unwrap_or(0.3);
    let q: f64 = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(0.4);
    let curve = if p <= q { gamma1(p, q)? } else { gamma2(p, q)? };

    let coarse = scheme_sum_rate(&curve, &Partition::uniform(2)?)?;
    println!("two intervals, four messages:");
    for (t, r) in coarse.per_message.iter().enumerate() {
        println!("  message {} ({}): {r:.6}", t + 1, if t % 2 == 0 { "A" } else { "B" });
    }

    println!("\n{:>6} {:>10}", "msgs", "sum-rate");
    for m in [1, 2, 4, 16, 64, 256, 1024] {
        let rates = scheme_sum_rate(&curve, &Partition::uniform(m)?)?;
        println!("{:>6} {:10.6}", 2 * m, rates.total);
    }
    println!("integral {:.10}", integral_sum_rate(&curve)?);
    println!("optimum  {:.10}", r_star_and_at_b(p, q)?);

    let mc = monte_carlo_p2_check(&curve, &Partition::uniform(8)?, 100_000, 7)?;
    println!(
        "\n{} draws: {} chain violations, {} decoding errors",
        mc.samples, mc.chain_violations, mc.decoding_errors
    );
    Ok(())
}
