//! Excitation-manifold decomposition and the two polarisation degrees.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{TruncatedFockSpace, TwoModeDensityMatrix};

/// Manifolds with probability at or below this are skipped in `P1`.
pub const EPS_P: f64 = 1e-14;
/// `P1sc` is defined as 0 when `⟨S0⟩` is below this.
pub const EPS_0: f64 = 1e-14;

/// Default manifold cap.
pub const DEFAULT_N_MAX: usize = 50;

/// `p_N = Tr(1_N ρ)` and the normalised block `ρ_N` in ascending-`m` order.
#[derive(Clone, Debug)]
pub struct ManifoldProjection {
    pub n: usize,
    pub probability: f64,
    /// `None` when `p_N ≤ EPS_P`.
    pub block: Option<DMatrix<Complex64>>,
    /// H occupations labelling the block rows.
    pub h_occupations: Vec<usize>,
}

fn check_manifold(space: TruncatedFockSpace, n: usize) -> Result<()> {
    if n > space.max_manifold() {
        return Err(Error::ManifoldOutOfRange {
            n,
            max: space.max_manifold(),
        });
    }
    Ok(())
}

pub fn manifold_project(rho: &TwoModeDensityMatrix, n: usize) -> Result<ManifoldProjection> {
    let space = rho.space();
    check_manifold(space, n)?;
    let rows = rho.factor_rows(&space.manifold_indices(n));
    let probability = rows.norm_squared();
    let block = (probability > EPS_P).then(|| (&rows * rows.adjoint()) / Complex64::from(probability));
    Ok(ManifoldProjection {
        n,
        probability,
        block,
        h_occupations: space.manifold_h_range(n).collect(),
    })
}

/// Unnormalised `(Tr 1_N ρ, Tr S3 1_N ρ, Tr X 1_N ρ)` with `X = a_H† a_V`,
/// computed from the manifold rows of the factor.
fn manifold_moments(space: TruncatedFockSpace, rows: &DMatrix<Complex64>, n: usize) -> (f64, f64, Complex64) {
    let ms: Vec<usize> = space.manifold_h_range(n).collect();
    let mut p = 0.0;
    let mut s3 = 0.0;
    let mut x = Complex64::from(0.0);
    for (i, &m) in ms.iter().enumerate() {
        let row = rows.row(i);
        let w = row.norm_squared();
        p += w;
        s3 += (2.0 * m as f64 - n as f64) * w;
        if i + 1 < ms.len() {
            let amp = (((m + 1) * (n - m)) as f64).sqrt();
            x += rows.row(i + 1).dotc(&row) * amp;
        }
    }
    (p, s3, x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ManifoldEntry {
    pub n: usize,
    pub probability: f64,
    /// `(⟨S1⟩_N, ⟨S2⟩_N, ⟨S3⟩_N)` in the normalised `ρ_N`; zero when the
    /// manifold is skipped.
    pub stokes: [f64; 3],
    /// Unnormalised `p_N ⟨S⟩_N`, kept for skipped manifolds too.
    pub weighted: [f64; 3],
    pub defined: bool,
}

impl ManifoldEntry {
    pub fn stokes_norm(&self) -> f64 {
        let [a, b, c] = self.stokes;
        (a * a + b * b + c * c).sqrt()
    }

    /// `‖⟨S⟩_N‖ / N`, the semi-classical degree inside the manifold.
    pub fn degree(&self) -> f64 {
        if self.n == 0 || !self.defined {
            0.0
        } else {
            self.stokes_norm() / self.n as f64
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifoldDecomposition {
    pub n_max: usize,
    pub entries: Vec<ManifoldEntry>,
    /// `max(0, 1 - Σ p_N)` over the listed manifolds.
    pub tail: f64,
}

impl ManifoldDecomposition {
    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.probability).collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    /// `Σ p_N ⟨S⟩_N` over the listed manifolds.
    pub fn stokes_sum(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for e in &self.entries {
            for (acc, v) in s.iter_mut().zip(e.weighted) {
                *acc += v;
            }
        }
        s
    }

    /// `Σ p_N N` over the listed manifolds.
    pub fn mean_photons(&self) -> f64 {
        self.entries.iter().map(|e| e.probability * e.n as f64).sum()
    }
}

/// Block-wise decomposition of `ρ` over manifolds `0..=n_max`.
pub fn decompose(rho: &TwoModeDensityMatrix, n_max: usize) -> Result<ManifoldDecomposition> {
    let space = rho.space();
    check_manifold(space, n_max)?;
    let entries: Vec<ManifoldEntry> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let rows = rho.factor_rows(&space.manifold_indices(n));
            let (p, s3, x) = manifold_moments(space, &rows, n);
            let defined = p > EPS_P;
            let weighted = [2.0 * x.re, 2.0 * x.im, s3];
            let stokes = if defined { weighted.map(|v| v / p) } else { [0.0; 3] };
            ManifoldEntry {
                n,
                probability: p,
                stokes,
                weighted,
                defined,
            }
        })
        .collect();
    let total: f64 = entries.iter().map(|e| e.probability).sum();
    Ok(ManifoldDecomposition {
        n_max,
        entries,
        tail: (1.0 - total).max(0.0),
    })
}

/// `P1` together with an upper bound on the contribution it cannot see.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegreeWithTail {
    pub value: f64,
    pub tail_bound: f64,
}

/// `P1 = Σ_{N≥1} p_N ‖⟨S⟩_N‖ / N`. Skipped manifolds add their probability
/// to the tail bound, since each term is at most `p_N`.
pub fn degree_p1(dec: &ManifoldDecomposition) -> DegreeWithTail {
    let mut value = 0.0;
    let mut skipped = 0.0;
    for e in dec.entries.iter().filter(|e| e.n > 0) {
        if e.defined {
            value += e.probability * e.degree();
        } else {
            skipped += e.probability.max(0.0);
        }
    }
    DegreeWithTail {
        value,
        tail_bound: dec.tail + skipped,
    }
}

/// Unnormalised `(⟨S0⟩, ⟨S1⟩, ⟨S2⟩, ⟨S3⟩)` over the whole truncated space.
pub fn stokes_expectations(rho: &TwoModeDensityMatrix) -> [f64; 4] {
    let space = rho.space();
    let f = rho.factor();
    let d = space.dim();
    let mut s0 = 0.0;
    let mut s3 = 0.0;
    let mut x = Complex64::from(0.0);
    for m in 0..d {
        for n in 0..d {
            let row = f.row(space.index(m, n));
            let w = row.norm_squared();
            s0 += (m + n) as f64 * w;
            s3 += (m as f64 - n as f64) * w;
            // X |m, n⟩ = √((m+1) n) |m+1, n-1⟩
            if m + 1 < d && n > 0 {
                let amp = (((m + 1) * n) as f64).sqrt();
                x += f.row(space.index(m + 1, n - 1)).dotc(&row) * amp;
            }
        }
    }
    [s0, 2.0 * x.re, 2.0 * x.im, s3]
}

/// `P1sc = ‖⟨S⟩‖ / ⟨S0⟩` over the full truncated space; 0 for vacuum.
pub fn degree_p1sc(rho: &TwoModeDensityMatrix) -> f64 {
    let [s0, s1, s2, s3] = stokes_expectations(rho);
    let trace = rho.trace();
    if s0 / trace < EPS_0 {
        return 0.0;
    }
    (s1 * s1 + s2 * s2 + s3 * s3).sqrt() / s0
}

/// `P1sc` rebuilt from the listed manifolds, `‖Σ p_N ⟨S⟩_N‖ / Σ p_N N`.
pub fn p1sc_from_decomposition(dec: &ManifoldDecomposition) -> f64 {
    let s0 = dec.mean_photons();
    if s0 < EPS_0 {
        return 0.0;
    }
    let [a, b, c] = dec.stokes_sum();
    (a * a + b * b + c * c).sqrt() / s0
}

/// `1 - exp(-(|α|² + |β|²))` for `|α⟩_H ⊗ |β⟩_V`.
pub fn closed_form_p1_coherent(alpha: Complex64, beta: Complex64) -> f64 {
    -(-(alpha.norm_sqr() + beta.norm_sqr())).exp_m1()
}

/// `P1` of `D(α)S(ξ)|0⟩ ⊗ |0⟩`, which is `1 - |⟨0|D(α)S(ξ)|0⟩|²`.
pub fn closed_form_p1_squeezed(alpha: Complex64, xi: Complex64) -> f64 {
    let (r, theta) = (xi.norm(), xi.arg());
    let phase = Complex64::from_polar(1.0, theta);
    let cross = alpha.conj().powi(2) * phase + alpha.powi(2) * phase.conj();
    let exponent = -alpha.norm_sqr() - 0.5 * cross.re * r.tanh();
    1.0 - exponent.exp() / r.cosh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{coherent_fock, xi_state};

    fn space(d: usize) -> TruncatedFockSpace {
        TruncatedFockSpace::two_mode(d).unwrap()
    }

    fn fock(d: usize, m: usize, n: usize) -> TwoModeDensityMatrix {
        TwoModeDensityMatrix::from_fock_amplitudes(space(d), &[(m, n, Complex64::from(1.0))]).unwrap()
    }

    #[test]
    fn xi_projection_onto_one_photon() {
        let rho = xi_state(0.7, space(4)).unwrap();
        let p = manifold_project(&rho, 1).unwrap();
        assert!((p.probability - 2.0 / 3.0).abs() < 1e-15);
        let block = p.block.unwrap();
        // Rows are m = 0 (|0,1⟩) then m = 1 (|1,0⟩).
        assert!((block[(1, 1)] - Complex64::from(1.0)).norm() < 1e-15);
        assert!(block[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn reconstruction_keeps_skipped_manifolds() {
        let sp = space(4);
        let eps: f64 = 5e-15;
        let mut factor = nalgebra::DMatrix::zeros(16, 2);
        factor[(sp.index(0, 0), 0)] = Complex64::from((1.0 - eps).sqrt());
        factor[(sp.index(3, 0), 1)] = Complex64::from(eps.sqrt());
        let rho = TwoModeDensityMatrix::new(crate::fock::DensityMatrix::from_factor(sp, factor).unwrap()).unwrap();
        let dec = decompose(&rho, 6).unwrap();
        assert!(!dec.entries[3].defined);
        assert!((degree_p1sc(&rho) - 1.0).abs() < 1e-12);
        assert!((p1sc_from_decomposition(&dec) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_projection() {
        let rho = fock(3, 0, 0);
        assert_eq!(manifold_project(&rho, 0).unwrap().probability, 1.0);
        assert!(manifold_project(&rho, 1).unwrap().block.is_none());
        assert!(manifold_project(&rho, 5).is_err());
    }

    #[test]
    fn coherent_two_photon_probability() {
        let rho = coherent_fock(Complex64::from(1.0), Complex64::from(0.0), space(30)).unwrap();
        let p = manifold_project(&rho, 2).unwrap().probability;
        assert!((p - (-1.0f64).exp() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn xi_stokes_per_manifold() {
        let rho = xi_state(1.3, space(4)).unwrap();
        let dec = decompose(&rho, 4).unwrap();
        assert_eq!(dec.entries[1].stokes, [0.0, 0.0, 1.0]);
        assert_eq!(dec.entries[2].stokes, [0.0, 0.0, -2.0]);
        assert!((degree_p1(&dec).value - 1.0).abs() < 1e-15);
        assert!(degree_p1sc(&rho) < 1e-15);
    }

    #[test]
    fn single_h_photon() {
        let rho = fock(3, 1, 0);
        let dec = decompose(&rho, 2).unwrap();
        assert_eq!(dec.entries[1].stokes, [0.0, 0.0, 1.0]);
        assert_eq!(degree_p1(&dec).value, 1.0);
        assert_eq!(degree_p1sc(&rho), 1.0);
    }

    #[test]
    fn vacuum_degrees_are_zero() {
        let rho = fock(3, 0, 0);
        let dec = decompose(&rho, 4).unwrap();
        assert!(dec.entries[1..].iter().all(|e| e.probability == 0.0));
        assert_eq!(degree_p1(&dec).value, 0.0);
        assert_eq!(degree_p1sc(&rho), 0.0);
    }

    #[test]
    fn diagonal_photon_has_s1() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = TwoModeDensityMatrix::from_fock_amplitudes(
            space(3),
            &[(1, 0, Complex64::from(s)), (0, 1, Complex64::from(s))],
        )
        .unwrap();
        let dec = decompose(&rho, 1).unwrap();
        let [s1, s2, s3] = dec.entries[1].stokes;
        assert!((s1 - 1.0).abs() < 1e-15 && s2.abs() < 1e-15 && s3.abs() < 1e-15);
        // (|1,0⟩ + i|0,1⟩)/√2: ⟨a_H†a_V⟩ = i/2, so S2 = +1.
        let rho = TwoModeDensityMatrix::from_fock_amplitudes(
            space(3),
            &[(1, 0, Complex64::from(s)), (0, 1, Complex64::new(0.0, s))],
        )
        .unwrap();
        let [_, s2, _] = decompose(&rho, 1).unwrap().entries[1].stokes;
        assert!((s2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_forms() {
        assert_eq!(closed_form_p1_coherent(Complex64::from(0.0), Complex64::from(0.0)), 0.0);
        let one = closed_form_p1_coherent(Complex64::from(1.0), Complex64::from(0.0));
        assert!((one - 0.632120558828558).abs() < 1e-14);
        let split = closed_form_p1_coherent(Complex64::from(0.5f64.sqrt()), Complex64::new(0.0, 0.5f64.sqrt()));
        assert!((split - one).abs() < 1e-15);
        let sq = closed_form_p1_squeezed(Complex64::from(0.0), Complex64::from(1.0));
        assert!((sq - (1.0 - 1.0 / 1.0f64.cosh())).abs() < 1e-15);
        let alpha = Complex64::new(0.3, 0.8);
        assert!(
            (closed_form_p1_squeezed(alpha, Complex64::from(0.0))
                - closed_form_p1_coherent(alpha, Complex64::from(0.0)))
            .abs()
                < 1e-15
        );
    }

    #[test]
    fn amplitude_squeezing_maximises_p1() {
        // α real (φ = 0): θ = 0 squeezes x, the amplitude quadrature.
        let alpha = Complex64::from(1.0);
        let amp = closed_form_p1_squeezed(alpha, Complex64::from_polar(0.5, 0.0));
        let phase = closed_form_p1_squeezed(alpha, Complex64::from_polar(0.5, std::f64::consts::PI));
        assert!(amp > phase);
        // Hand evaluation: 1 - exp(-1 ∓ tanh 0.5)/cosh 0.5.
        let t = 0.5f64.tanh();
        assert!((amp - (1.0 - (-1.0 - t).exp() / 0.5f64.cosh())).abs() < 1e-15);
        assert!((phase - (1.0 - (-1.0 + t).exp() / 0.5f64.cosh())).abs() < 1e-15);
    }
}
