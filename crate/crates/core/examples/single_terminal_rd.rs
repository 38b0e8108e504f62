//! Rate-distortion of a Bernoulli source from the envelope of the
//! zero-message field over (p, D), next to the classical h2(p) - h2(D).
//!
//! cargo run --release --example single_terminal_rd -- [p] [n_param] [n_d]

use sumrate::distortion::{rd_iterate, DistortionModel, RDDomain, RdConfig};
use sumrate::model::binary_entropy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let p: f64 = args.first().map(|s| s.parse()).transpose()?.unwrap_or(0.3);
    let n_param: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(201);
    let n_d: usize = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(101);

    let model = DistortionModel::hamming_on_x();
    // q = 0: the side information is constant
    let domain = RDDomain::product_row(0.0, n_param, n_d, model.d_max())?;
    let out = rd_iterate(domain, &model, &RdConfig::new(1, 1e-9)?)?;
    let i = domain.nearest_param(p);

    println!("{:>6} {:>10} {:>10}", "D", "envelope", "classical");
    for (d, r) in out.last.rate_curve(i, 0).into_iter().step_by(5) {
        let classical = if d < p.min(1.0 - p) { binary_entropy(p)? - binary_entropy(d)? } else { 0.0 };
        println!("{d:6.3} {r:10.6} {classical:10.6}");
    }
    Ok(())
}
