use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{PassiveUnitary, TwoModeDensityMatrix};

/// Tolerance on `‖axis‖ - 1`.
pub const AXIS_TOL: f64 = 1e-12;

/// Unit vector along `S1`.
pub const S1_AXIS: [f64; 3] = [1.0, 0.0, 0.0];
/// Unit vector along `S2`.
pub const S2_AXIS: [f64; 3] = [0.0, 1.0, 0.0];
/// Unit vector along `S3`.
pub const S3_AXIS: [f64; 3] = [0.0, 0.0, 1.0];

/// `exp(-i angle (axis·S)/2)` as a passive unitary on `space`.
pub fn su2_unitary(space: crate::fock::TruncatedFockSpace, axis: [f64; 3], angle: f64) -> Result<PassiveUnitary> {
    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= AXIS_TOL) {
        return Err(Error::NonUnitAxis { norm });
    }
    // a†(n·σ)a = n·S for the Stokes labelling of this crate.
    let [x, y, z] = axis;
    let i = Complex64::new(0.0, 1.0);
    let n_sigma = Matrix2::new(
        Complex64::from(z),
        Complex64::from(x) - i * y,
        Complex64::from(x) + i * y,
        Complex64::from(-z),
    );
    PassiveUnitary::from_hamiltonian(space, n_sigma * Complex64::from(angle / 2.0))
}

/// Rotates the polarisation state by `angle` about `axis` on the Poincaré
/// sphere. Photon-number distributions are unchanged.
pub fn su2_rotate(rho: &TwoModeDensityMatrix, axis: [f64; 3], angle: f64) -> Result<TwoModeDensityMatrix> {
    su2_unitary(rho.space(), axis, angle)?.apply(rho)
}

/// Rotation of the polarisation plane by the physical angle `chi`
/// (`a_H → cos χ a_H + sin χ a_V` up to sign). On the Poincaré sphere this is
/// a rotation by `2χ` about the circular axis `S2`.
pub fn polarisation_rotation(rho: &TwoModeDensityMatrix, chi: f64) -> Result<TwoModeDensityMatrix> {
    su2_rotate(rho, S2_AXIS, 2.0 * chi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::TruncatedFockSpace;
    use crate::gaussian::xi_state;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn space(d: usize) -> TruncatedFockSpace {
        TruncatedFockSpace::two_mode(d).unwrap()
    }

    #[test]
    fn zero_angle_is_identity() {
        let rho = xi_state(0.3, space(4)).unwrap();
        let out = su2_rotate(&rho, S3_AXIS, 0.0).unwrap();
        assert!((out.to_dense() - rho.to_dense()).camax() < 1e-15);
    }

    #[test]
    fn pi_about_s1_swaps_modes() {
        let s = space(3);
        let h = TwoModeDensityMatrix::from_fock_amplitudes(s, &[(1, 0, Complex64::from(1.0))]).unwrap();
        let v = TwoModeDensityMatrix::from_fock_amplitudes(s, &[(0, 1, Complex64::from(1.0))]).unwrap();
        let out = su2_rotate(&h, S1_AXIS, PI).unwrap();
        assert!((out.overlap(&v).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn physical_quarter_turn_makes_xi_orthogonal() {
        let rho = xi_state(0.9, space(5)).unwrap();
        let rotated = polarisation_rotation(&rho, FRAC_PI_2).unwrap();
        assert!(rotated.overlap(&rho).unwrap() <= 1e-10);
        assert!((rotated.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn physical_rotation_moves_h_to_v() {
        let s = space(3);
        let h = TwoModeDensityMatrix::from_fock_amplitudes(s, &[(1, 0, Complex64::from(1.0))]).unwrap();
        let out = polarisation_rotation(&h, 0.3).unwrap();
        let p = out.populations();
        assert!((p[s.index(1, 0)] - 0.3f64.cos().powi(2)).abs() < 1e-14);
        assert!((p[s.index(0, 1)] - 0.3f64.sin().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_unit_axis() {
        let rho = xi_state(0.0, space(3)).unwrap();
        assert!(matches!(
            su2_rotate(&rho, [1.0, 1.0, 0.0], 0.1),
            Err(Error::NonUnitAxis { .. })
        ));
    }
}
