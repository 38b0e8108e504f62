//! With Hamming cost on f_B and zero allowed distortion, the
//! rate-distortion iteration reduces to lossless function computation:
//! the D = 0 slice tracks the plain iterate step for step.
//!
//! cargo run --release --example hamming_zero -- [n] [messages]

use sumrate::distortion::{rd_iterate, DistortionModel, RDDomain, RdConfig};
use sumrate::iteration::{iterate, IterationConfig};
use sumrate::model::FunctionSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map(|s| s.parse()).transpose()?.unwrap_or(51);
    let t: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(6);

    let f = FunctionSpec::and_at_b();
    let model = DistortionModel::hamming_on_function(&f.f_b);
    let domain = RDDomain::product(n, 6, model.d_max())?;
    let lossy = rd_iterate(domain, &model, &RdConfig::new(t, 1e-12)?.with_history(true))?;
    let lossless = iterate(&f, &IterationConfig::new(n, t, 1e-12)?.with_history(true), None)?;

    println!("{:>4} {:>12}", "t", "max |diff|");
    for (rd, plain) in lossy.history.iter().zip(&lossless.history) {
        let slice = rd.product_slice(0)?;
        println!("{:>4} {:12.3e}", sumrate::iteration::message_count(plain.label()), slice.sup_change(plain)?);
    }
    Ok(())
}
