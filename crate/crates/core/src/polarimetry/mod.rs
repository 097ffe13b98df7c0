//! Stokes operators, excitation-manifold decomposition and the two degrees
//! of polarisation.

mod manifold;
mod report;
mod rotation;
mod stokes;

pub use manifold::{
    closed_form_p1_coherent, closed_form_p1_squeezed, decompose, degree_p1, degree_p1sc, manifold_project,
    p1sc_from_decomposition, stokes_expectations, DegreeWithTail, ManifoldDecomposition, ManifoldEntry,
    ManifoldProjection, DEFAULT_N_MAX, EPS_0, EPS_P,
};
pub use report::{analyse, ErrorBars, ManifoldRow, PolarisationReport};
pub use rotation::{polarisation_rotation, su2_rotate, su2_unitary, AXIS_TOL, S1_AXIS, S2_AXIS, S3_AXIS};
pub use stokes::{stokes_operators, StokesOperators};
