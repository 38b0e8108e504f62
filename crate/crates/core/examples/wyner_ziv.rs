//! One-message rate against Hamming distortion for a doubly symmetric
//! binary source, from the joint (p, D) envelope, next to a direct search
//! over test channels with a three-letter auxiliary.
//!
//! cargo run --release --example wyner_ziv -- [crossover] [n_param] [n_d]

use sumrate::distortion::{brute_force_wz_curve, wyner_ziv_rate, DistortionModel, RDDomain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let crossover: f64 = args.first().map(|s| s.parse()).transpose()?.unwrap_or(0.25);
    let n_param: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(201);
    let n_d: usize = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(51);

    let model = DistortionModel::hamming_on_x();
    let domain = RDDomain::binary_symmetric(crossover, n_param, n_d, model.d_max())?;
    let envelope = wyner_ziv_rate(domain, &model, 0.5)?;
    let budgets: Vec<f64> = envelope.iter().map(|&(d, _)| d).collect();
    let channel = [[1.0 - crossover, crossover], [crossover, 1.0 - crossover]];
    let searched = brute_force_wz_curve(0.5, channel, &model, &budgets, 3)?;

    println!("{:>6} {:>10} {:>10} {:>9}", "D", "envelope", "search", "diff");
    for ((d, r), s) in envelope.iter().zip(&searched) {
        if *d > 0.3 {
            break;
        }
        println!("{d:6.3} {r:10.6} {s:10.6} {:+9.5}", r - s);
    }
    Ok(())
}
