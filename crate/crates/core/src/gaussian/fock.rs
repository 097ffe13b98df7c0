//! Fock-space representations of Gaussian states and the reverse map from a
//! truncated density matrix to its quadrature moments.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use num_complex::Complex64;

use super::spec::{ModeSpec, StateSpec};
use super::state::{mode_spec_from_moments, GaussianMoments, GaussianState};
use super::symplectic::{bloch_messiah, passive_mode_unitary, williamson};
use crate::error::{Error, Result};
use crate::fock::{
    ladder_lower, DensityMatrix, Mode, ModeState, OperatorMatrix, PassiveUnitary, TruncatedFockSpace,
    TwoModeDensityMatrix, MIXTURE_WEIGHT_CUTOFF,
};

/// Largest Poisson tail `P(n ≥ d)` accepted for coherent amplitudes.
pub const COHERENT_TAIL_TOL: f64 = 1e-10;

/// A mode is representable when `⟨n⟩ + SIGMA_MARGIN·σ_n < d`.
pub const SIGMA_MARGIN: f64 = 6.0;

/// Unitaries are built on `work_dim(d)` levels and the state is projected to
/// `d` afterwards, so the edge of the truncated generators stays away from the
/// levels that are kept.
pub fn work_dim(dim: usize) -> usize {
    dim + (dim / 2).max(8)
}

/// Fock amplitudes `e^{-|α|²/2} αⁿ/√n!` for `n < d`.
pub fn coherent_amplitudes(alpha: Complex64, dim: usize) -> Result<DVector<Complex64>> {
    let mut c = DVector::zeros(dim);
    c[0] = Complex64::from((-alpha.norm_sqr() / 2.0).exp());
    for n in 1..dim {
        c[n] = c[n - 1] * alpha / (n as f64).sqrt();
    }
    let tail = (1.0 - c.norm_squared()).max(0.0);
    if tail >= COHERENT_TAIL_TOL {
        return Err(Error::CutoffTooSmall { dim, population: tail });
    }
    Ok(c)
}

pub fn coherent_mode(alpha: Complex64, dim: usize) -> Result<ModeState> {
    ModeState::pure(dim, coherent_amplitudes(alpha, dim)?)
}

/// `|α⟩_H ⊗ |β⟩_V`.
pub fn coherent_fock(
    alpha_h: Complex64,
    alpha_v: Complex64,
    space: TruncatedFockSpace,
) -> Result<TwoModeDensityMatrix> {
    space.require_two_mode()?;
    let h = coherent_mode(alpha_h, space.dim())?;
    let v = coherent_mode(alpha_v, space.dim())?;
    TwoModeDensityMatrix::product(&h, &v)
}

fn single_mode_ops(dim: usize) -> Result<(TruncatedFockSpace, DMatrix<Complex64>)> {
    let space = TruncatedFockSpace::single(dim)?;
    Ok((space, ladder_lower(space, Mode::H)?.into_entries()))
}

/// `S(ξ) = exp[(ξ* a² - ξ a†²)/2]` on a `d`-level mode.
pub fn squeeze_unitary(dim: usize, xi: Complex64) -> Result<DMatrix<Complex64>> {
    let (space, a) = single_mode_ops(dim)?;
    let a2 = &a * &a;
    let gen = (&a2 * xi.conj() - a2.adjoint() * xi) * Complex64::from(0.5);
    Ok(OperatorMatrix::new(space, gen)?.exp()?.into_entries())
}

/// `D(α) = exp(α a† - α* a)` on a `d`-level mode.
pub fn displacement_unitary(dim: usize, alpha: Complex64) -> Result<DMatrix<Complex64>> {
    let (space, a) = single_mode_ops(dim)?;
    let gen = a.adjoint() * alpha - &a * alpha.conj();
    Ok(OperatorMatrix::new(space, gen)?.exp()?.into_entries())
}

/// Thermal occupation probabilities `n̄ᵏ/(1+n̄)^{k+1}` for `k < d`.
pub fn thermal_weights(n_th: f64, dim: usize) -> Vec<f64> {
    if n_th == 0.0 {
        let mut w = vec![0.0; dim];
        w[0] = 1.0;
        return w;
    }
    let ratio = n_th / (1.0 + n_th);
    let mut w = Vec::with_capacity(dim);
    let mut p = 1.0 / (1.0 + n_th);
    for _ in 0..dim {
        w.push(p);
        p *= ratio;
    }
    w
}

fn thermal_factor(n_th: f64, dim: usize) -> DMatrix<Complex64> {
    let weights = thermal_weights(n_th, dim);
    let keep: Vec<usize> = (0..dim).filter(|&k| weights[k] > MIXTURE_WEIGHT_CUTOFF).collect();
    let mut f = DMatrix::zeros(dim, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        f[(k, col)] = Complex64::from(weights[k].sqrt());
    }
    f
}

pub fn thermal_mode(n_th: f64, dim: usize) -> Result<ModeState> {
    ModeState::new(DensityMatrix::from_factor(
        TruncatedFockSpace::single(dim)?,
        thermal_factor(n_th, dim),
    )?)
}

fn check_mode_cutoff(mode: Mode, mean: f64, variance: f64, dim: usize) -> Result<()> {
    let required = mean + SIGMA_MARGIN * variance.max(0.0).sqrt();
    if required >= dim as f64 {
        return Err(Error::TruncationInadequate {
            mode: mode.name(),
            required,
            dim,
        });
    }
    Ok(())
}

/// `D(α) S(ξ) ρ_th S(ξ)† D(α)†` on `d` levels. Pure coherent states use the
/// closed-form amplitudes; everything else is built from the unitaries acting
/// on the thermal ensemble in the padded space.
pub fn displaced_squeezed_thermal_fock(spec: &ModeSpec, dim: usize) -> Result<ModeState> {
    if spec.r() == 0.0 && spec.n_th() == 0.0 {
        return coherent_mode(spec.alpha(), dim);
    }
    let g = super::state::spec_to_gaussian(&StateSpec::new(*spec, ModeSpec::vacuum()));
    check_mode_cutoff(
        Mode::H,
        g.moments().mode_mean_photons(Mode::H),
        g.moments().mode_photon_variance(Mode::H),
        dim,
    )?;
    let work = work_dim(dim);
    let mut factor = thermal_factor(spec.n_th(), work);
    if spec.r() != 0.0 {
        factor = squeeze_unitary(work, spec.xi())? * factor;
    }
    if spec.alpha() != Complex64::from(0.0) {
        factor = displacement_unitary(work, spec.alpha())? * factor;
    }
    let kept = factor.rows(0, dim).into_owned();
    ModeState::new(DensityMatrix::from_factor(TruncatedFockSpace::single(dim)?, kept)?)
}

/// `ρ_H ⊗ ρ_V` for a product specification.
pub fn product_fock(spec: &StateSpec, space: TruncatedFockSpace) -> Result<TwoModeDensityMatrix> {
    space.require_two_mode()?;
    let h = displaced_squeezed_thermal_fock(&spec.h, space.dim()).map_err(|e| relabel(e, Mode::H))?;
    let v = displaced_squeezed_thermal_fock(&spec.v, space.dim()).map_err(|e| relabel(e, Mode::V))?;
    TwoModeDensityMatrix::product(&h, &v)
}

fn relabel(err: Error, mode: Mode) -> Error {
    match err {
        Error::TruncationInadequate { required, dim, .. } => Error::TruncationInadequate {
            mode: mode.name(),
            required,
            dim,
        },
        other => other,
    }
}

/// Fock representation of an arbitrary two-mode Gaussian state.
///
/// Product states go mode by mode. Correlated states are assembled from the
/// normal form: thermal product, passive map `O₂`, single-mode squeezers,
/// passive map `O₁`, then displacement.
pub fn gaussian_to_fock(g: &GaussianState, space: TruncatedFockSpace) -> Result<TwoModeDensityMatrix> {
    space.require_two_mode()?;
    let d = space.dim();
    let m = g.moments();
    for mode in [Mode::H, Mode::V] {
        check_mode_cutoff(mode, m.mode_mean_photons(mode), m.mode_photon_variance(mode), d)?;
    }
    if m.is_block_diagonal() {
        let h = mode_spec_from_moments(&m.mode_mean(Mode::H), &m.mode_cov(Mode::H))?;
        let v = mode_spec_from_moments(&m.mode_mean(Mode::V), &m.mode_cov(Mode::V))?;
        return product_fock(&StateSpec::new(h, v), space);
    }

    let w = williamson(g.cov())?;
    let bm = bloch_messiah(&w.s)?;
    let n_th = w.nu.map(|nu| ((nu - 1.0) / 2.0).max(0.0));
    let dw = work_dim(d);
    let work = TruncatedFockSpace::two_mode(dw)?;
    let mut rho = TwoModeDensityMatrix::product(&thermal_mode(n_th[0], dw)?, &thermal_mode(n_th[1], dw)?)?;

    rho = PassiveUnitary::from_mode_unitary(work, &passive_mode_unitary(&bm.o2))?.apply(&rho)?;
    for (mode, r) in [Mode::H, Mode::V].into_iter().zip(bm.squeezing()) {
        if r.abs() > 1e-15 {
            rho = rho.transform_mode(mode, &squeeze_unitary(dw, Complex64::from(r))?)?;
        }
    }
    rho = PassiveUnitary::from_mode_unitary(work, &passive_mode_unitary(&bm.o1))?.apply(&rho)?;
    for (mode, o) in [(Mode::H, 0), (Mode::V, 2)] {
        let alpha = Complex64::new(m.mean[o], m.mean[o + 1]) / SQRT_2;
        if alpha != Complex64::from(0.0) {
            rho = rho.transform_mode(mode, &displacement_unitary(dw, alpha)?)?;
        }
    }
    project(&rho, space)
}

/// Keeps the rows of the factor with both occupations below `space.dim()`.
fn project(rho: &TwoModeDensityMatrix, space: TruncatedFockSpace) -> Result<TwoModeDensityMatrix> {
    let from = rho.space();
    let d = space.dim();
    let rows: Vec<usize> = (0..d).flat_map(|m| (0..d).map(move |n| from.index(m, n))).collect();
    let kept = rho.factor().select_rows(rows.iter());
    TwoModeDensityMatrix::new(DensityMatrix::from_factor(space, kept)?)
}

/// Column-wise `a_H ψ`, `a_H† ψ`, `a_V ψ` or `a_V† ψ` on the factor.
fn ladder_on_factor(f: &DMatrix<Complex64>, d: usize, mode: Mode, raise: bool) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(f.nrows(), f.ncols());
    for col in 0..f.ncols() {
        for m in 0..d {
            for n in 0..d {
                let (src, amp) = match (mode, raise) {
                    (Mode::H, false) if m + 1 < d => ((m + 1) * d + n, ((m + 1) as f64).sqrt()),
                    (Mode::H, true) if m > 0 => ((m - 1) * d + n, (m as f64).sqrt()),
                    (Mode::V, false) if n + 1 < d => (m * d + n + 1, ((n + 1) as f64).sqrt()),
                    (Mode::V, true) if n > 0 => (m * d + n - 1, (n as f64).sqrt()),
                    _ => continue,
                };
                out[(m * d + n, col)] = f[(src, col)] * amp;
            }
        }
    }
    out
}

/// Quadrature mean and covariance (shot-noise units) of a truncated state,
/// normalised by its trace.
pub fn quadrature_moments(rho: &TwoModeDensityMatrix) -> Result<GaussianMoments> {
    let d = rho.space().dim();
    let f = rho.factor();
    let trace = rho.trace();
    let i = Complex64::new(0.0, 1.0);
    let mut r_f = Vec::with_capacity(4);
    for mode in [Mode::H, Mode::V] {
        let lower = ladder_on_factor(f, d, mode, false);
        let raise = ladder_on_factor(f, d, mode, true);
        r_f.push((&lower + &raise) / Complex64::from(SQRT_2));
        r_f.push((&lower - &raise) * (-i / SQRT_2));
    }
    let inner = |a: &DMatrix<Complex64>, b: &DMatrix<Complex64>| -> Complex64 { a.dotc(b) };
    let mean = Vector4::from_fn(|k, _| inner(f, &r_f[k]).re / trace);
    let cov = Matrix4::from_fn(|k, l| {
        let sym = 2.0 * inner(&r_f[k], &r_f[l]).re / trace;
        sym - 2.0 * mean[k] * mean[l]
    });
    if mean.iter().chain(cov.iter()).any(|x| !x.is_finite()) {
        return Err(Error::UnphysicalCovariance("non-finite moments".into()));
    }
    Ok(GaussianMoments::new(mean, (cov + cov.transpose()) * 0.5))
}

/// `(√2|1,0⟩ + e^{iφ}|0,2⟩)/√3`: zero mean Stokes vector, fully polarised in
/// each manifold.
pub fn xi_state(phi: f64, space: TruncatedFockSpace) -> Result<TwoModeDensityMatrix> {
    space.require_two_mode()?;
    if space.dim() < 3 {
        return Err(Error::CutoffTooSmall {
            dim: space.dim(),
            population: 1.0 / 3.0,
        });
    }
    TwoModeDensityMatrix::from_fock_amplitudes(
        space,
        &[
            (1, 0, Complex64::from((2.0f64 / 3.0).sqrt())),
            (0, 2, Complex64::from_polar(1.0 / 3f64.sqrt(), phi)),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::spec_to_gaussian;

    fn two(d: usize) -> TruncatedFockSpace {
        TruncatedFockSpace::two_mode(d).unwrap()
    }

    #[test]
    fn coherent_amplitudes_are_poissonian() {
        let alpha = Complex64::new(1.2, -0.7);
        let c = coherent_amplitudes(alpha, 30).unwrap();
        let mean = alpha.norm_sqr();
        let mut fact = 1.0;
        for n in 0..10 {
            if n > 0 {
                fact *= n as f64;
            }
            let p = (-mean).exp() * mean.powi(n as i32) / fact;
            assert!((c[n].norm_sqr() - p).abs() < 1e-15);
        }
    }

    #[test]
    fn coherent_cutoff_rejected() {
        let err = coherent_amplitudes(Complex64::from(4.0), 20).unwrap_err();
        assert!(matches!(err, Error::CutoffTooSmall { .. }));
    }

    #[test]
    fn squeezed_vacuum_amplitudes() {
        // ⟨2k|S(r)|0⟩ = (-tanh r)^k √((2k)!) / (2^k k! √cosh r) for real ξ = r.
        let r: f64 = 0.7;
        let s = squeeze_unitary(60, Complex64::from(r)).unwrap();
        let t = r.tanh();
        let mut coeff = 1.0 / r.cosh().sqrt();
        for k in 0..8 {
            if k > 0 {
                let kk = k as f64;
                coeff *= -t * ((2.0 * kk) * (2.0 * kk - 1.0)).sqrt() / (2.0 * kk);
            }
            assert!((s[(2 * k, 0)] - Complex64::from(coeff)).norm() < 1e-12, "k={k}");
            assert!(s[(2 * k + 1, 0)].norm() < 1e-14);
        }
    }

    #[test]
    fn displacement_matches_coherent_amplitudes() {
        let alpha = Complex64::new(0.8, 0.5);
        let dmat = displacement_unitary(40, alpha).unwrap();
        let c = coherent_amplitudes(alpha, 40).unwrap();
        assert!((dmat.column(0) - c).camax() < 1e-12);
    }

    #[test]
    fn thermal_weights_sum_and_mean() {
        let w = thermal_weights(0.8, 200);
        let total: f64 = w.iter().sum();
        let mean: f64 = w.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((mean - 0.8).abs() < 1e-10);
    }

    #[test]
    fn product_round_trip_moments() {
        let spec = StateSpec::new(
            ModeSpec::new(Complex64::new(0.4, -0.3), 0.35, 1.1, 0.2).unwrap(),
            ModeSpec::new(Complex64::new(-0.6, 0.2), 0.5, 4.2, 0.0).unwrap(),
        );
        let rho = product_fock(&spec, two(40)).unwrap();
        let m = quadrature_moments(&rho).unwrap();
        let g = spec_to_gaussian(&spec);
        assert!((m.mean - g.mean()).amax() < 1e-9);
        assert!((m.cov - g.cov()).amax() < 1e-9);
        assert!((rho.mean_photons(None) - spec.mean_photons()).abs() < 1e-9);
    }

    #[test]
    fn correlated_round_trip_moments() {
        // Squeezed thermal modes mixed on a beam splitter: genuinely two-mode.
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let bs = Matrix4::new(c, 0.0, s, 0.0, 0.0, c, 0.0, s, -s, 0.0, c, 0.0, 0.0, -s, 0.0, c);
        let sq = Matrix4::from_diagonal(&Vector4::new(0.7, 1.0 / 0.7, 1.2, 1.0 / 1.2));
        let sym = bs * sq;
        let cov = sym * Matrix4::from_diagonal(&Vector4::new(1.3, 1.3, 1.0, 1.0)) * sym.transpose();
        let g = GaussianState::new(Vector4::new(0.3, -0.2, 0.1, 0.4), cov).unwrap();
        let rho = gaussian_to_fock(&g, two(40)).unwrap();
        let m = quadrature_moments(&rho).unwrap();
        assert!((m.mean - g.mean()).amax() < 1e-8, "{}", m.mean - g.mean());
        assert!((m.cov - g.cov()).amax() < 1e-8, "{}", m.cov - g.cov());
    }

    #[test]
    fn truncation_gate() {
        let spec = StateSpec::new(ModeSpec::squeezed_vacuum(1.5, 0.0).unwrap(), ModeSpec::vacuum());
        let err = product_fock(&spec, two(20)).unwrap_err();
        assert!(matches!(err, Error::TruncationInadequate { mode: "H", .. }));
    }

    #[test]
    fn xi_state_populations() {
        let rho = xi_state(0.4, two(4)).unwrap();
        let p = rho.populations();
        let s = rho.space();
        assert!((p[s.index(1, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[s.index(0, 2)] - 1.0 / 3.0).abs() < 1e-15);
        assert!(xi_state(0.0, two(2)).is_err());
    }
}
