//! Truncated single- and two-mode Fock-space algebra.

mod density;
mod expm;
mod operator;
mod passive;
mod space;

pub use density::{DensityMatrix, ModeState, TwoModeDensityMatrix, EDGE_LEVELS, MIXTURE_WEIGHT_CUTOFF};
pub use expm::{expm, unitarity_defect};
#[cfg(test)]
pub(crate) use operator::max_abs;
pub use operator::{
    ladder_lower, ladder_raise, number_operator, tensor_product, OperatorMatrix, ALGEBRAIC_TOL, SPECTRAL_TOL,
};
pub use passive::{mode_unitary_log, quadratic_block, PassiveUnitary};
pub use space::{Mode, TruncatedFockSpace};
