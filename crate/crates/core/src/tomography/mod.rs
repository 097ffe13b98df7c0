//! Simulated measurement chains: homodyne tomography of Gaussian states and
//! photon-number-resolving detection in three polarisation bases, each with
//! bootstrap error bars.

mod bootstrap;
mod homodyne;
mod pnrd;
mod rng;

pub use bootstrap::{
    analyse_homodyne, bootstrap_polarisation, gaussian_report, sample_wishart, BootstrapConfig, BootstrapResult,
    MAX_ABORT_FRACTION, MIN_REPLICATES,
};
pub use homodyne::{
    estimate_covariance, sample_homodyne, sample_homodyne_miscalibrated, CalibrationModel, QuadratureDataset,
    DEFAULT_SHOT_NOISE_UNCERTAINTY,
};
pub use pnrd::{
    basis_distribution, bootstrap_counts, estimate_from_distributions, estimate_p1_from_counts, read_counts_csv,
    sample_pnrd, write_counts_csv, BasisDistribution, CountRecord, PnrdBasis, PNRD_MASS_TOL,
};
pub use rng::{substream, CALIBRATION_STREAM, DATA_STREAM, REPLICATE_STREAM_BASE};
