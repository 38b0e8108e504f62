//! Minimum sum-rate of two-terminal interactive function computation on
//! binary product sources, computed as the least element of the family of
//! rate-reduction functionals that majorize the zero-message field and are
//! concave along every marginal perturbation line.
//!
//! * [`model`]: grids, rate fields, truth tables, entropies.
//! * [`envelope`]: upper concave envelopes on lines and planar domains.
//! * [`iteration`]: the alternating row/column envelope iteration.
//! * [`oracles`]: closed forms for the AND examples and a membership check.
//! * [`achievability`]: an explicit infinite-message scheme and its rates.
//! * [`distortion`]: sum-rate against a distortion budget at B.
//! * [`cli`]: the `sumrate` command line.

// `!(x > 0.0)` is how NaN gets rejected; index loops mirror the grid math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod achievability;
pub mod cli;
pub mod distortion;
pub mod envelope;
pub mod error;
pub mod iteration;
pub mod model;
pub mod oracles;

pub use error::{Error, Result};
