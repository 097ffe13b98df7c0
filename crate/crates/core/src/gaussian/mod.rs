//! Two-mode Gaussian states: parameter specs, quadrature moments, symplectic
//! normal forms and Fock-space conversion.

mod fock;
mod spec;
mod state;
mod symplectic;

pub use fock::{
    coherent_amplitudes, coherent_fock, coherent_mode, displaced_squeezed_thermal_fock, displacement_unitary,
    gaussian_to_fock, product_fock, quadrature_moments, squeeze_unitary, thermal_mode, thermal_weights, work_dim,
    xi_state, COHERENT_TAIL_TOL, SIGMA_MARGIN,
};
pub use spec::{db_to_spec, ModeSpec, ModeSpecRecord, StateSpec};
pub use state::{
    mode_moments, mode_spec_from_moments, spec_to_gaussian, GaussianMoments, GaussianState, SYMMETRY_TOL,
    UNCERTAINTY_TOL,
};
pub use symplectic::{
    bloch_messiah, omega, passive_mode_unitary, repair, symplectic_defect, symplectic_eigenvalues, williamson,
    BlochMessiah, RepairOutcome, Williamson, DEFAULT_REPAIR_TOL,
};
