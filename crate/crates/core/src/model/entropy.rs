//! Entropy helpers in bits.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// `-x log2 x` with the `0 log 0 = 0` convention applied explicitly.
#[inline]
pub(crate) fn neg_x_log2_x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln() / LN_2
    }
}

/// Binary entropy without the range check, for callers that already hold a
/// probability (grid nodes, closed forms).
#[inline]
pub(crate) fn h2(r: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&r), "h2 argument {r} out of range");
    if r <= 0.0 || r >= 1.0 {
        return 0.0;
    }
    neg_x_log2_x(r) + neg_x_log2_x(1.0 - r)
}

fn check_probability(r: f64) -> Result<()> {
    if r.is_nan() || !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(format!("probability {r} outside [0, 1]")));
    }
    Ok(())
}

/// Binary entropy `h2(r)` in bits.
pub fn binary_entropy(r: f64) -> Result<f64> {
    check_probability(r)?;
    Ok(h2(r))
}

/// `H(X|Y) + H(Y|X)` for independent `X ~ Ber(p)`, `Y ~ Ber(q)`, which is
/// `h2(p) + h2(q)`.
pub fn conditional_entropy_sum(p: f64, q: f64) -> Result<f64> {
    check_probability(p)?;
    check_probability(q)?;
    Ok(h2(p) + h2(q))
}

/// Shannon entropy of an (unnormalized-safe) pmf given as a slice of masses.
pub(crate) fn entropy_bits(pmf: &[f64]) -> f64 {
    pmf.iter().copied().map(neg_x_log2_x).sum()
}

/// `H(X|Y) + H(Y|X) = 2 H(X,Y) - H(X) - H(Y)` for a joint pmf over binary
/// alphabets, indexed `joint[x][y]`.
pub(crate) fn joint_conditional_entropy_sum(joint: &[[f64; 2]; 2]) -> f64 {
    let flat = [joint[0][0], joint[0][1], joint[1][0], joint[1][1]];
    let px = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
    let py = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
    (2.0 * entropy_bits(&flat) - entropy_bits(&px) - entropy_bits(&py)).max(0.0)
}
