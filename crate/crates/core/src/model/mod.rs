//! Domain types: extended reals, the product-pmf grid, rate fields, the
//! function pair, entropies and the zero-message initialization.

mod entropy;
mod field;
mod function;

pub use entropy::{binary_entropy, conditional_entropy_sum};
pub(crate) use entropy::{h2, joint_conditional_entropy_sum, neg_x_log2_x};
pub use field::{rho0_field, zero_message_feasible, ExtendedReal, FieldLabel, ProductPmfGrid, RateField, Terminal};
pub use function::{FunctionSpec, TruthTable};
