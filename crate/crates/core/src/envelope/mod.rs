//! Upper concave envelopes: the least concave majorant of a partially
//! defined function, on a line (monotone chain) and on a planar domain
//! (upper hull of the lifted points).

mod hull3;
mod one_d;
mod two_d;

#[cfg(test)]
#[path = "../../tests/common/oracles.rs"]
pub(crate) mod oracle;

pub use one_d::{upper_concave_envelope_1d, Profile1D};
pub(crate) use one_d::envelope_into;
pub(crate) use two_d::envelope_on_lattice;
pub use two_d::{upper_concave_envelope_2d, PointCloud2D, Rect};
