//! Manifold-resolved degree of quantum polarisation for two-mode bosonic
//! states.
//!
//! The crate computes the semi-classical degree `P1sc` (norm of the mean
//! Stokes vector over the mean photon number) and the manifold-resolved
//! degree `P1`, which applies the same ratio inside every fixed-photon-number
//! manifold and averages with the manifold probabilities. Around that core it
//! provides truncated Fock-space algebra, Gaussian state construction and
//! conversion to the Fock basis, and a simulated measurement chain (homodyne
//! tomography and photon-number-resolving detection) with bootstrap error
//! bars.
//!
//! Conventions used throughout:
//!
//! * Two-mode basis `|m⟩_H ⊗ |n⟩_V`, flat index `m * d + n` (H slow).
//! * Stokes operators `S0 = n_H + n_V`, `S1 = a_H†a_V + a_H a_V†`,
//!   `S2 = -i(a_H†a_V - a_H a_V†)`, `S3 = n_H - n_V`. Much of the literature
//!   swaps the roles of `S1` and `S3`; here `S3` is the intensity difference.
//! * Quadratures `x = (a + a†)/√2`, `p = (a - a†)/(i√2)`, ordered
//!   `(x_H, p_H, x_V, p_V)`. Mean vectors are in these units; covariance
//!   matrices are in shot-noise units (vacuum covariance = identity).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod gaussian;
pub mod polarimetry;
pub mod tomography;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, Mode, ModeState, OperatorMatrix, TruncatedFockSpace, TwoModeDensityMatrix};
pub use gaussian::{GaussianMoments, GaussianState, ModeSpec, StateSpec};
pub use polarimetry::{ManifoldDecomposition, PolarisationReport, StokesOperators};
