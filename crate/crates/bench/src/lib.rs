//! Shared fixtures for the benchmarks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use polardeg::fock::{ladder_lower, Mode};
use polardeg::gaussian::{product_fock, spec_to_gaussian, ModeSpec, StateSpec};
use polardeg::{GaussianState, TruncatedFockSpace, TwoModeDensityMatrix};

pub fn space(dim: usize) -> TruncatedFockSpace {
    TruncatedFockSpace::two_mode(dim).expect("valid cutoff")
}

/// Anti-Hermitian single-mode squeezing generator `(ξ* a² - ξ a†²)/2`.
pub fn squeeze_generator(dim: usize, r: f64) -> DMatrix<Complex64> {
    let single = TruncatedFockSpace::single(dim).expect("valid cutoff");
    let a = ladder_lower(single, Mode::H).expect("single mode").into_entries();
    let a2 = &a * &a;
    (&a2 - a2.adjoint()) * Complex64::from(0.5 * r)
}

/// The squeezed thermal H mode and displaced V mode used for the
/// photon-number sweep at amplitude `alpha`.
pub fn fig4_spec(alpha: f64) -> StateSpec {
    let h = polardeg::gaussian::db_to_spec(3.2, 7.4, 0.0).expect("valid dB pair");
    let v = ModeSpec::coherent(Complex64::new(alpha, 0.0)).expect("finite amplitude");
    StateSpec::new(h, v)
}

pub fn fig4_state(alpha: f64, dim: usize) -> TwoModeDensityMatrix {
    product_fock(&fig4_spec(alpha), space(dim)).expect("cutoff large enough")
}

/// A Gaussian state whose covariance couples the two modes.
pub fn correlated_gaussian() -> GaussianState {
    let g = spec_to_gaussian(&fig4_spec(0.7));
    let (c, s) = (0.6f64.cos(), 0.6f64.sin());
    let mut bs = nalgebra::Matrix4::identity() * c;
    for k in 0..2 {
        bs[(k, k + 2)] = s;
        bs[(k + 2, k)] = -s;
    }
    GaussianState::new(bs * g.mean(), bs * g.cov() * bs.transpose()).expect("passive map keeps the state physical")
}
