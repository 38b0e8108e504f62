//! Sum-rate against a distortion budget at B, with A's cost fixed at zero.
//!
//! The rate reduction lives on a (parameter x distortion) lattice; each
//! half-step takes the joint concave envelope over one terminal's
//! perturbation parameter and the budget, which realizes every split of
//! the budget across the auxiliary's outcomes at once.

mod model;
mod rd;
mod wyner_ziv;

pub use model::DistortionModel;
pub use rd::{
    rd_half_step_a, rd_half_step_b, rd_iterate, rho0_distortion, rho0_distortion_field, wyner_ziv_rate, Family, RDDomain,
    RdConfig, RdField, RdOutcome,
};
pub use wyner_ziv::{brute_force_wz, brute_force_wz_curve};
