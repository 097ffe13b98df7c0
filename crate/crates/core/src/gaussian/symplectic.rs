//! Normal forms of two-mode covariance matrices and symplectic maps.
//!
//! Heisenberg convention throughout: a Gaussian unitary `U` is represented by
//! the real matrix `S` with `U† r U = S r`, so that `U₁U₂ ↦ S₁S₂` and the
//! covariance transforms as `V ↦ S V Sᵀ`.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use super::state::{GaussianMoments, GaussianState};
use crate::error::{Error, Result};

/// Default lower bound accepted by [`repair`]: symplectic eigenvalues in
/// `[1 - tol, 1)` are lifted to 1, anything lower is rejected.
pub const DEFAULT_REPAIR_TOL: f64 = 0.05;

/// Eigenvalue gap below which two Williamson or Bloch-Messiah values are
/// treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-9;

/// `Ω = J ⊕ J`, `J = [[0, 1], [-1, 0]]`.
pub fn omega() -> Matrix4<f64> {
    let mut o = Matrix4::zeros();
    o[(0, 1)] = 1.0;
    o[(1, 0)] = -1.0;
    o[(2, 3)] = 1.0;
    o[(3, 2)] = -1.0;
    o
}

/// Max-entry deviation of `S Ω Sᵀ - Ω`.
pub fn symplectic_defect(s: &Matrix4<f64>) -> f64 {
    (s * omega() * s.transpose() - omega()).amax()
}

fn sym_power(v: &Matrix4<f64>, power: f64) -> Result<Matrix4<f64>> {
    let eig = SymmetricEigen::new((v + v.transpose()) * 0.5);
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(Error::UnphysicalCovariance(format!(
            "covariance is not positive definite (min eigenvalue {min:.3e})"
        )));
    }
    let d = Matrix4::from_diagonal(&eig.eigenvalues.map(|x| x.powf(power)));
    Ok(eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Williamson normal form `V = S diag(ν₁, ν₁, ν₂, ν₂) Sᵀ` with symplectic `S`
/// and `ν₁ ≥ ν₂`.
#[derive(Clone, Copy, Debug)]
pub struct Williamson {
    pub nu: [f64; 2],
    pub s: Matrix4<f64>,
}

impl Williamson {
    pub fn diagonal(&self) -> Matrix4<f64> {
        let [a, b] = self.nu;
        Matrix4::from_diagonal(&Vector4::new(a, a, b, b))
    }

    pub fn min_nu(&self) -> f64 {
        self.nu[0].min(self.nu[1])
    }
}

pub fn williamson(v: &Matrix4<f64>) -> Result<Williamson> {
    let half = sym_power(v, 0.5)?;
    let inv_half = sym_power(v, -0.5)?;
    let k = inv_half * omega() * inv_half;
    let ik = k.map(|x| Complex64::new(0.0, x));
    let eig = SymmetricEigen::new(ik);

    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    // Positive pair, smallest μ (largest ν) first.
    order.truncate(2);
    order.reverse();
    let mut o = Matrix4::zeros();
    let mut nu = [0.0; 2];
    for (slot, &idx) in order.iter().enumerate() {
        let mu = eig.eigenvalues[idx];
        if !(mu > 0.0) {
            return Err(Error::UnphysicalCovariance("degenerate symplectic spectrum".into()));
        }
        nu[slot] = 1.0 / mu;
        let u = eig.eigenvectors.column(idx);
        let e = u.map(|z| z.re * std::f64::consts::SQRT_2);
        let f = u.map(|z| z.im * std::f64::consts::SQRT_2);
        // K e = μ f and K f = -μ e, so (f, e) spans a block μJ.
        o.set_column(2 * slot, &f);
        o.set_column(2 * slot + 1, &e);
    }
    let scale = Matrix4::from_diagonal(&Vector4::new(nu[0], nu[0], nu[1], nu[1]).map(|x| x.sqrt()));
    let s = half * o * scale.try_inverse().expect("diagonal with positive entries");
    Ok(Williamson { nu, s })
}

/// Symplectic eigenvalues `ν₁ ≥ ν₂` of a positive-definite covariance.
pub fn symplectic_eigenvalues(v: &Matrix4<f64>) -> Result<[f64; 2]> {
    Ok(williamson(v)?.nu)
}

/// Bloch-Messiah decomposition `S = O₁ Z O₂` of a symplectic matrix, with
/// `O₁`, `O₂` orthogonal symplectic and `Z = diag(λ₁, 1/λ₁, λ₂, 1/λ₂)`.
#[derive(Clone, Copy, Debug)]
pub struct BlochMessiah {
    pub o1: Matrix4<f64>,
    pub lambda: [f64; 2],
    pub o2: Matrix4<f64>,
}

impl BlochMessiah {
    pub fn z(&self) -> Matrix4<f64> {
        let [a, b] = self.lambda;
        Matrix4::from_diagonal(&Vector4::new(a, 1.0 / a, b, 1.0 / b))
    }

    /// Single-mode squeezing strengths `r_k = -ln λ_k` for real `ξ_k`, so
    /// that `S(r_k)` acts as `diag(e^{-r_k}, e^{r_k})` on mode `k`.
    pub fn squeezing(&self) -> [f64; 2] {
        [-self.lambda[0].ln(), -self.lambda[1].ln()]
    }
}

pub fn bloch_messiah(s: &Matrix4<f64>) -> Result<BlochMessiah> {
    let defect = symplectic_defect(s);
    if defect > 1e-8 {
        return Err(Error::UnphysicalCovariance(format!(
            "matrix is not symplectic (defect {defect:.3e})"
        )));
    }
    let p = sym_power(&(s.transpose() * s), 0.5)?;
    let orth = s * p
        .try_inverse()
        .ok_or_else(|| Error::UnphysicalCovariance("singular map".into()))?;
    let eig = SymmetricEigen::new(p);
    let om_t = omega().transpose();

    let mut pairs: Vec<(nalgebra::Vector4<f64>, nalgebra::Vector4<f64>)> = Vec::new();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut flat = Vec::new();
    for &idx in &order {
        let lam = eig.eigenvalues[idx];
        let e = eig.eigenvectors.column(idx).into_owned();
        if lam > 1.0 + DEGENERACY_TOL {
            pairs.push((e, om_t * e));
        } else if (lam - 1.0).abs() <= DEGENERACY_TOL {
            flat.push(e);
        }
    }
    // The unit-eigenvalue subspace is Ω-invariant; pair its vectors by
    // Gram-Schmidt against everything chosen so far.
    for cand in flat {
        if pairs.len() == 2 {
            break;
        }
        let mut e = cand;
        for (a, b) in &pairs {
            e -= a * a.dot(&e) + b * b.dot(&e);
        }
        let norm = e.norm();
        if norm < 1e-6 {
            continue;
        }
        e /= norm;
        pairs.push((e, om_t * e));
    }
    if pairs.len() != 2 {
        return Err(Error::UnphysicalCovariance(
            "could not pair squeezing eigenvectors".into(),
        ));
    }
    let mut q = Matrix4::zeros();
    let mut lambda = [1.0; 2];
    for (k, (e, f)) in pairs.iter().enumerate() {
        q.set_column(2 * k, e);
        q.set_column(2 * k + 1, f);
        // Z entry for the pair is eᵀPe; with symplectic P the partner is 1/λ.
        lambda[k] = (e.transpose() * p * e)[0];
    }
    Ok(BlochMessiah {
        o1: orth * q,
        lambda,
        o2: q.transpose(),
    })
}

/// Mode unitary `u` of a passive (orthogonal symplectic) map `K`, defined by
/// `U† a_j U = Σ_k u_jk a_k`.
pub fn passive_mode_unitary(k: &Matrix4<f64>) -> Matrix2<Complex64> {
    Matrix2::from_fn(|j, l| Complex64::new(k[(2 * j, 2 * l)], k[(2 * j + 1, 2 * l)]))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RepairOutcome {
    pub state: GaussianState,
    /// Smallest symplectic eigenvalue before repair.
    pub min_symplectic: f64,
    pub repaired: bool,
}

/// Projects a slightly unphysical estimate onto the physical set by lifting
/// symplectic eigenvalues in `[1 - tol, 1)` to 1.
///
/// Block-diagonal inputs are repaired mode by mode so that the H-V cross
/// block stays exactly zero.
pub fn repair(m: &GaussianMoments, tol: f64) -> Result<RepairOutcome> {
    let cov = (m.cov + m.cov.transpose()) * 0.5;
    let sym = GaussianMoments::new(m.mean, cov);
    if let Ok(state) = GaussianState::from_moments(sym) {
        let min = williamson(&cov).map(|w| w.min_nu()).unwrap_or(f64::NAN);
        return Ok(RepairOutcome {
            state,
            min_symplectic: min,
            repaired: false,
        });
    }
    let (fixed, min) = if sym.is_block_diagonal() {
        let mut fixed = cov;
        let mut min = f64::INFINITY;
        for o in [0, 2] {
            let block = cov.fixed_view::<2, 2>(o, o).into_owned();
            let det = block.determinant();
            if !(det > 0.0) || block[(0, 0)] <= 0.0 {
                return Err(Error::UnrepairableEstimate { min_symplectic: 0.0 });
            }
            let nu = det.sqrt();
            min = min.min(nu);
            if nu < 1.0 {
                fixed.fixed_view_mut::<2, 2>(o, o).copy_from(&(block / nu));
            }
        }
        (fixed, min)
    } else {
        let w = williamson(&cov).map_err(|_| Error::UnrepairableEstimate { min_symplectic: 0.0 })?;
        let lifted = Williamson {
            nu: [w.nu[0].max(1.0), w.nu[1].max(1.0)],
            s: w.s,
        };
        (w.s * lifted.diagonal() * w.s.transpose(), w.min_nu())
    };
    if min < 1.0 - tol {
        return Err(Error::UnrepairableEstimate { min_symplectic: min });
    }
    let fixed = (fixed + fixed.transpose()) * 0.5;
    let state = GaussianState::new(m.mean, fixed)?;
    Ok(RepairOutcome {
        state,
        min_symplectic: min,
        repaired: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix4;

    /// Real beam splitter of angle `t`, identical on x and p.
    fn beam_splitter(t: f64) -> Matrix4<f64> {
        let (c, s) = (t.cos(), t.sin());
        Matrix4::new(c, 0.0, s, 0.0, 0.0, c, 0.0, s, -s, 0.0, c, 0.0, 0.0, -s, 0.0, c)
    }

    fn squeezers(r1: f64, r2: f64) -> Matrix4<f64> {
        Matrix4::from_diagonal(&Vector4::new((-r1).exp(), r1.exp(), (-r2).exp(), r2.exp()))
    }

    fn phase(phi: f64) -> Matrix4<f64> {
        let mut k = Matrix4::identity();
        k[(0, 0)] = phi.cos();
        k[(0, 1)] = phi.sin();
        k[(1, 0)] = -phi.sin();
        k[(1, 1)] = phi.cos();
        k
    }

    /// Squeezed thermal light mixed on an unbalanced beam splitter.
    fn sample_cov() -> Matrix4<f64> {
        let s = phase(0.4) * beam_splitter(0.7) * squeezers(0.5, -0.2) * phase(1.3) * beam_splitter(0.2);
        let thermal = Matrix4::from_diagonal(&Vector4::new(1.6, 1.6, 1.1, 1.1));
        s * thermal * s.transpose()
    }

    #[test]
    fn omega_is_antisymmetric_and_squares_to_minus_one() {
        let o = omega();
        assert_eq!(o.transpose(), -o);
        assert_eq!(o * o, -Matrix4::identity());
    }

    #[test]
    fn williamson_reconstructs() {
        let v = sample_cov();
        let w = williamson(&v).unwrap();
        assert!(symplectic_defect(&w.s) < 1e-12);
        assert!((w.s * w.diagonal() * w.s.transpose() - v).amax() < 1e-12);
        assert!(w.nu[0] >= w.nu[1]);
        assert!((w.nu[0] - 1.6).abs() < 1e-12 && (w.nu[1] - 1.1).abs() < 1e-12);
        // Invariant check: ν₁² + ν₂² = Δ = det A + det B + 2 det C.
        let a = v.fixed_view::<2, 2>(0, 0).determinant();
        let b = v.fixed_view::<2, 2>(2, 2).determinant();
        let c = v.fixed_view::<2, 2>(0, 2).determinant();
        let delta = a + b + 2.0 * c;
        assert!((w.nu[0].powi(2) + w.nu[1].powi(2) - delta).abs() < 1e-11);
        assert!((w.nu[0] * w.nu[1] - v.determinant().sqrt()).abs() < 1e-11);
    }

    #[test]
    fn williamson_of_degenerate_thermal() {
        let v = Matrix4::identity() * 3.0;
        let w = williamson(&v).unwrap();
        assert!((w.nu[0] - 3.0).abs() < 1e-12 && (w.nu[1] - 3.0).abs() < 1e-12);
        assert!(symplectic_defect(&w.s) < 1e-12);
    }

    #[test]
    fn bloch_messiah_reconstructs() {
        let w = williamson(&sample_cov()).unwrap();
        let bm = bloch_messiah(&w.s).unwrap();
        assert!((bm.o1 * bm.z() * bm.o2 - w.s).amax() < 1e-10);
        for o in [bm.o1, bm.o2] {
            assert!((o * o.transpose() - Matrix4::identity()).amax() < 1e-10);
            assert!(symplectic_defect(&o) < 1e-10);
            let u = passive_mode_unitary(&o);
            assert!((u * u.adjoint() - Matrix2::identity()).iter().all(|z| z.norm() < 1e-10));
        }
    }

    #[test]
    fn bloch_messiah_of_passive_map() {
        let k = beam_splitter(0.3) * phase(0.9);
        let bm = bloch_messiah(&k).unwrap();
        assert!((bm.lambda[0] - 1.0).abs() < 1e-12 && (bm.lambda[1] - 1.0).abs() < 1e-12);
        assert!((bm.o1 * bm.z() * bm.o2 - k).amax() < 1e-12);
    }

    #[test]
    fn passive_unitary_of_phase_shift() {
        // Phase rotation a → e^{-iφ} a maps (x, p) → (x cos φ + p sin φ, -x sin φ + p cos φ).
        let phi: f64 = 0.8;
        let mut k = Matrix4::identity();
        k[(0, 0)] = phi.cos();
        k[(0, 1)] = phi.sin();
        k[(1, 0)] = -phi.sin();
        k[(1, 1)] = phi.cos();
        let u = passive_mode_unitary(&k);
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, -phi)).norm() < 1e-14);
        assert!((u[(1, 1)] - Complex64::from(1.0)).norm() < 1e-14);
    }

    #[test]
    fn repair_leaves_physical_states_alone() {
        let m = GaussianMoments::new(Vector4::new(0.1, 0.2, 0.3, 0.4), sample_cov());
        let out = repair(&m, DEFAULT_REPAIR_TOL).unwrap();
        assert!(!out.repaired);
        assert!((out.state.cov() - sample_cov()).amax() < 1e-15);
    }

    #[test]
    fn repair_lifts_small_violations() {
        let mut cov = Matrix4::identity() * 0.98;
        cov[(2, 2)] = 1.5;
        cov[(3, 3)] = 1.5;
        let out = repair(&GaussianMoments::new(Vector4::zeros(), cov), DEFAULT_REPAIR_TOL).unwrap();
        assert!(out.repaired);
        assert!((out.min_symplectic - 0.98).abs() < 1e-12);
        assert!((out.state.cov()[(0, 0)] - 1.0).abs() < 1e-12);
        assert_eq!(out.state.cov()[(2, 2)], 1.5);
        assert_eq!(out.state.cov()[(0, 2)], 0.0);

        // ν = (1.44, 0.99): correlated and just below the bound.
        let mixed = sample_cov() * 0.9;
        let out = repair(&GaussianMoments::new(Vector4::zeros(), mixed), DEFAULT_REPAIR_TOL).unwrap();
        assert!(out.repaired);
        assert!((out.min_symplectic - 0.99).abs() < 1e-10);
        let nu = symplectic_eigenvalues(out.state.cov()).unwrap();
        assert!((nu[0] - 1.44).abs() < 1e-10 && (nu[1] - 1.0).abs() < 1e-10);
        assert!(out.state.moments().uncertainty_margin() > -1e-9);
    }

    #[test]
    fn repair_rejects_large_violations() {
        let cov = Matrix4::identity() * 0.5;
        let err = repair(&GaussianMoments::new(Vector4::zeros(), cov), DEFAULT_REPAIR_TOL).unwrap_err();
        assert!(matches!(err, Error::UnrepairableEstimate { .. }));
    }
}
