use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector2, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spec::{ModeSpec, StateSpec};
use super::symplectic::omega;
use crate::error::{Error, Result};
use crate::fock::Mode;

/// Tolerance on `V - Vᵀ`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Lowest admissible eigenvalue of `V + iΩ`.
pub const UNCERTAINTY_TOL: f64 = 1e-9;

/// First and second quadrature moments with no physicality guarantee.
///
/// Ordering is `(x_H, p_H, x_V, p_V)`. The mean is in natural units
/// (`⟨x⟩ = √2 Re α`), the covariance `V_ij = ⟨{Δr_i, Δr_j}⟩` is in
/// shot-noise units so that vacuum has `V = I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "MomentsRecord", into = "MomentsRecord")]
pub struct GaussianMoments {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl GaussianMoments {
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>) -> Self {
        Self { mean, cov }
    }

    pub fn vacuum() -> Self {
        Self::new(Vector4::zeros(), Matrix4::identity())
    }

    pub fn symmetry_defect(&self) -> f64 {
        (self.cov - self.cov.transpose()).amax()
    }

    /// Smallest eigenvalue of the Hermitian matrix `V + iΩ`.
    pub fn uncertainty_margin(&self) -> f64 {
        let sym = (self.cov + self.cov.transpose()) * 0.5;
        let om = omega();
        let m = Matrix4::from_fn(|i, j| Complex64::new(sym[(i, j)], om[(i, j)]));
        SymmetricEigen::new(m).eigenvalues.min()
    }

    pub fn mean_photons(&self) -> f64 {
        self.mean.norm_squared() / 2.0 + (self.cov.trace() - 4.0) / 4.0
    }

    /// Photon-number variance of a Gaussian state from its moments.
    pub fn photon_number_variance(&self) -> f64 {
        let v = &self.cov;
        (v * v).trace() / 8.0 - 0.5 + (self.mean.transpose() * v * self.mean)[0] / 2.0
    }

    pub fn mode_mean(&self, mode: Mode) -> Vector2<f64> {
        let o = offset(mode);
        Vector2::new(self.mean[o], self.mean[o + 1])
    }

    pub fn mode_cov(&self, mode: Mode) -> Matrix2<f64> {
        let o = offset(mode);
        self.cov.fixed_view::<2, 2>(o, o).into_owned()
    }

    pub fn mode_mean_photons(&self, mode: Mode) -> f64 {
        self.mode_mean(mode).norm_squared() / 2.0 + (self.mode_cov(mode).trace() - 2.0) / 4.0
    }

    pub fn mode_photon_variance(&self, mode: Mode) -> f64 {
        let v = self.mode_cov(mode);
        let mu = self.mode_mean(mode);
        (v * v).trace() / 8.0 - 0.25 + (mu.transpose() * v * mu)[0] / 2.0
    }

    /// True when the H-V cross block is exactly zero.
    pub fn is_block_diagonal(&self) -> bool {
        self.cov.fixed_view::<2, 2>(0, 2).iter().all(|&x| x == 0.0)
            && self.cov.fixed_view::<2, 2>(2, 0).iter().all(|&x| x == 0.0)
    }
}

/// Row-major JSON layout of [`GaussianMoments`].
#[derive(Clone, Copy, Serialize, Deserialize)]
struct MomentsRecord {
    mean: [f64; 4],
    cov: [[f64; 4]; 4],
}

impl From<MomentsRecord> for GaussianMoments {
    fn from(r: MomentsRecord) -> Self {
        Self::new(Vector4::from(r.mean), Matrix4::from_fn(|i, j| r.cov[i][j]))
    }
}

impl From<GaussianMoments> for MomentsRecord {
    fn from(m: GaussianMoments) -> Self {
        Self {
            mean: m.mean.into(),
            cov: std::array::from_fn(|i| std::array::from_fn(|j| m.cov[(i, j)])),
        }
    }
}

fn offset(mode: Mode) -> usize {
    match mode {
        Mode::H => 0,
        Mode::V => 2,
    }
}

/// Moments that satisfy the uncertainty principle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianState(GaussianMoments);

impl GaussianState {
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>) -> Result<Self> {
        Self::from_moments(GaussianMoments::new(mean, cov))
    }

    pub fn from_moments(m: GaussianMoments) -> Result<Self> {
        if m.mean.iter().chain(m.cov.iter()).any(|x| !x.is_finite()) {
            return Err(Error::UnphysicalCovariance("non-finite entry".into()));
        }
        let asym = m.symmetry_defect();
        if asym > SYMMETRY_TOL {
            return Err(Error::UnphysicalCovariance(format!(
                "covariance is not symmetric (max deviation {asym:.3e})"
            )));
        }
        let margin = m.uncertainty_margin();
        if margin < -UNCERTAINTY_TOL {
            return Err(Error::UnphysicalCovariance(format!(
                "V + iΩ has eigenvalue {margin:.3e}"
            )));
        }
        Ok(Self(m))
    }

    pub fn vacuum() -> Self {
        Self(GaussianMoments::vacuum())
    }

    pub fn moments(&self) -> &GaussianMoments {
        &self.0
    }

    pub fn mean(&self) -> &Vector4<f64> {
        &self.0.mean
    }

    pub fn cov(&self) -> &Matrix4<f64> {
        &self.0.cov
    }

    pub fn mean_photons(&self) -> f64 {
        self.0.mean_photons()
    }

    pub fn photon_number_variance(&self) -> f64 {
        self.0.photon_number_variance()
    }
}

impl<'de> Deserialize<'de> for GaussianState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let m = GaussianMoments::deserialize(deserializer)?;
        Self::from_moments(m).map_err(serde::de::Error::custom)
    }
}

/// Per-mode moments of `D(α) S(ξ) ρ_th S(ξ)† D(α)†`.
pub fn mode_moments(spec: &ModeSpec) -> (Vector2<f64>, Matrix2<f64>) {
    let a = spec.alpha();
    let mean = Vector2::new(a.re, a.im) * std::f64::consts::SQRT_2;
    let nu = 2.0 * spec.n_th() + 1.0;
    let (r, half) = (spec.r(), spec.theta() / 2.0);
    let (c, s) = (half.cos(), half.sin());
    let rot = Matrix2::new(c, -s, s, c);
    let diag = Matrix2::new((-2.0 * r).exp(), 0.0, 0.0, (2.0 * r).exp());
    (mean, rot * diag * rot.transpose() * nu)
}

/// Moments of a product state. Always block-diagonal.
pub fn spec_to_gaussian(spec: &StateSpec) -> GaussianState {
    let (mh, vh) = mode_moments(&spec.h);
    let (mv, vv) = mode_moments(&spec.v);
    let mut mean = Vector4::zeros();
    mean.fixed_rows_mut::<2>(0).copy_from(&mh);
    mean.fixed_rows_mut::<2>(2).copy_from(&mv);
    let mut cov = Matrix4::zeros();
    cov.fixed_view_mut::<2, 2>(0, 0).copy_from(&vh);
    cov.fixed_view_mut::<2, 2>(2, 2).copy_from(&vv);
    // Rotations of diag(e^{-2r}, e^{2r}) are symmetric up to rounding.
    let cov = (cov + cov.transpose()) * 0.5;
    GaussianState(GaussianMoments::new(mean, cov))
}

/// Inverts [`mode_moments`]: reads `α`, `r`, `θ` and `n_th` off a one-mode
/// mean and covariance.
pub fn mode_spec_from_moments(mean: &Vector2<f64>, cov: &Matrix2<f64>) -> Result<ModeSpec> {
    let det = cov.determinant();
    if !(det > 0.0) || cov[(0, 0)] <= 0.0 {
        return Err(Error::UnphysicalCovariance(format!(
            "one-mode covariance is not positive definite (det {det:.3e})"
        )));
    }
    let nu = det.sqrt();
    if nu < 1.0 - UNCERTAINTY_TOL {
        return Err(Error::UnphysicalCovariance(format!(
            "one-mode symplectic eigenvalue {nu:.6} < 1"
        )));
    }
    let n_th = ((nu - 1.0) / 2.0).max(0.0);
    let xp = 0.5 * (cov[(0, 1)] + cov[(1, 0)]);
    let diff = cov[(0, 0)] - cov[(1, 1)];
    let half_gap = (0.25 * diff * diff + xp * xp).sqrt();
    let half_sum = 0.5 * (cov[(0, 0)] + cov[(1, 1)]);
    let lmax = half_sum + half_gap;
    let r = 0.25 * (lmax * lmax / det).ln().max(0.0);
    let theta = if half_gap == 0.0 {
        0.0
    } else {
        // Major axis at φ = ½ atan2(2 V_xp, V_xx - V_pp); the squeezed axis is φ + π/2.
        (2.0 * xp).atan2(diff) + std::f64::consts::PI
    };
    let alpha = Complex64::new(mean[0], mean[1]) / std::f64::consts::SQRT_2;
    ModeSpec::new(alpha, r, theta, n_th)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(alpha: Complex64, r: f64, theta: f64, n: f64) -> ModeSpec {
        ModeSpec::new(alpha, r, theta, n).unwrap()
    }

    #[test]
    fn vacuum_moments() {
        let g = spec_to_gaussian(&StateSpec::default());
        assert_eq!(*g.cov(), Matrix4::identity());
        assert_eq!(g.mean_photons(), 0.0);
        assert!((g.moments().uncertainty_margin()).abs() < 1e-12);
    }

    #[test]
    fn squeezed_mode_axes() {
        // θ = 0 squeezes x; θ = π squeezes p.
        let (_, v0) = mode_moments(&spec(Complex64::from(0.0), 0.5, 0.0, 0.0));
        assert!((v0[(0, 0)] - (-1.0f64).exp()).abs() < 1e-14);
        assert!((v0[(1, 1)] - 1.0f64.exp()).abs() < 1e-14);
        let (_, vpi) = mode_moments(&spec(Complex64::from(0.0), 0.5, std::f64::consts::PI, 0.0));
        assert!((vpi[(1, 1)] - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn photon_number_from_moments() {
        let s = StateSpec::new(
            spec(Complex64::new(0.7, -0.4), 0.3, 1.2, 0.25),
            spec(Complex64::new(-1.1, 0.2), 0.8, 4.0, 0.0),
        );
        let g = spec_to_gaussian(&s);
        assert!((g.mean_photons() - s.mean_photons()).abs() < 1e-12);
    }

    #[test]
    fn photon_variance_closed_forms() {
        // Coherent: Var = |α|².
        let g = spec_to_gaussian(&StateSpec::new(
            spec(Complex64::new(1.5, 0.5), 0.0, 0.0, 0.0),
            ModeSpec::vacuum(),
        ));
        assert!((g.photon_number_variance() - 2.5).abs() < 1e-12);
        // Thermal: Var = n(n+1).
        let g = spec_to_gaussian(&StateSpec::new(
            spec(Complex64::from(0.0), 0.0, 0.0, 0.7),
            ModeSpec::vacuum(),
        ));
        assert!((g.photon_number_variance() - 0.7 * 1.7).abs() < 1e-12);
        // Squeezed vacuum: Var = 2 sinh²r cosh²r.
        let r: f64 = 0.9;
        let g = spec_to_gaussian(&StateSpec::new(
            ModeSpec::vacuum(),
            spec(Complex64::from(0.0), r, 2.0, 0.0),
        ));
        let expected = 2.0 * (r.sinh() * r.cosh()).powi(2);
        assert!((g.photon_number_variance() - expected).abs() < 1e-12);
        assert!((g.moments().mode_photon_variance(Mode::V) - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_unphysical_covariance() {
        let mut cov = Matrix4::identity();
        cov[(0, 0)] = 0.5;
        cov[(1, 1)] = 1.5;
        assert!(GaussianState::new(Vector4::zeros(), cov).is_err());
        let mut cov = Matrix4::identity();
        cov[(0, 1)] = 1e-6;
        assert!(GaussianState::new(Vector4::zeros(), cov).is_err());
    }

    #[test]
    fn one_mode_inversion() {
        for (r, theta, n) in [
            (0.0, 0.0, 0.0),
            (0.4, 0.3, 0.0),
            (1.1, 5.9, 0.6),
            (0.2, std::f64::consts::PI, 0.1),
        ] {
            let s = spec(Complex64::new(0.3, -0.8), r, theta, n);
            let (m, v) = mode_moments(&s);
            let back = mode_spec_from_moments(&m, &v).unwrap();
            assert!((back.r() - r).abs() < 1e-12);
            assert!((back.n_th() - n).abs() < 1e-12);
            assert!((back.alpha() - s.alpha()).norm() < 1e-14);
            if r > 0.0 {
                let dtheta = (back.theta() - s.theta()).rem_euclid(std::f64::consts::TAU);
                assert!(dtheta < 1e-12 || std::f64::consts::TAU - dtheta < 1e-12);
            }
        }
    }
}
