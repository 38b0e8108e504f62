//! Upper concave envelopes in one and two dimensions, including the
//! `Bottom` convention: a missing node is lifted only where chords reach it.
//!
//! cargo run --release --example concave_envelope

use sumrate::envelope::{upper_concave_envelope_1d, upper_concave_envelope_2d, PointCloud2D, Profile1D};
use sumrate::model::{binary_entropy, ExtendedReal};

fn show(v: ExtendedReal) -> String {
    match v {
        ExtendedReal::Finite(x) => format!("{x:7.4}"),
        ExtendedReal::Bottom => "   -inf".into(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a dip between two bumps, then a gap closed by a chord
    let xs: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let ys: Vec<ExtendedReal> = xs
        .iter()
        .enumerate()
        .map(|(k, &x)| match k {
            6 | 7 => ExtendedReal::Bottom,
            _ => ExtendedReal::Finite((6.0 * x).sin().abs()),
        })
        .collect();
    let env = upper_concave_envelope_1d(&Profile1D::new(xs.clone(), ys.clone())?);
    println!("{:>5} {:>7} {:>7}", "x", "input", "hull");
    for k in 0..xs.len() {
        println!("{:5.2} {} {}", xs[k], show(ys[k]), show(env.ys()[k]));
    }

    // h2(u) - h2(v) is neither concave nor convex; its envelope on a 9x9 grid
    let axis: Vec<f64> = (0..9).map(|k| k as f64 / 8.0).collect();
    let mut values = Vec::new();
    for &u in &axis {
        for &v in &axis {
            values.push(ExtendedReal::Finite(binary_entropy(u)? - binary_entropy(v)?));
        }
    }
    let cloud = PointCloud2D::from_grid(&axis, &axis, &values)?;
    let queries = [(0.5, 0.0), (0.5, 0.5), (0.25, 0.75), (0.0, 0.5)];
    println!();
    for (q, v) in queries.iter().zip(upper_concave_envelope_2d(&cloud, &queries)) {
        println!("envelope at ({:.2}, {:.2}) = {}", q.0, q.1, show(v));
    }
    Ok(())
}
