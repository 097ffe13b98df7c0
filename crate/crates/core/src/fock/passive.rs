//! Number-conserving two-mode unitaries (wave plates, beam splitters,
//! polarisation rotations).
//!
//! A passive unitary `U = exp(-i a† H a)` with a Hermitian 2×2 `H` commutes
//! with the total photon number, so it acts block-diagonally on the
//! excitation manifolds. Each block is exponentiated separately, which keeps
//! the cost at `O(d⁴)` instead of `O(d⁶)` for the full two-mode matrix.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use super::density::TwoModeDensityMatrix;
use super::expm::expm;
use super::space::TruncatedFockSpace;
use crate::error::{Error, Result};

/// Restriction of `a† H a` to manifold `n`, in ascending-`m` block order.
pub fn quadratic_block(space: TruncatedFockSpace, n: usize, h: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    let ms: Vec<usize> = space.manifold_h_range(n).collect();
    let size = ms.len();
    let mut block = DMatrix::zeros(size, size);
    for (i, &m) in ms.iter().enumerate() {
        let k = n - m;
        block[(i, i)] = h[(0, 0)] * m as f64 + h[(1, 1)] * k as f64;
        if i + 1 < size {
            // a_H† a_V |m, k⟩ = √((m+1) k) |m+1, k-1⟩
            let amp = (((m + 1) * k) as f64).sqrt();
            block[(i + 1, i)] += h[(0, 1)] * amp;
            // a_V† a_H |m+1, k-1⟩ = √((m+1) k) |m, k⟩
            block[(i, i + 1)] += h[(1, 0)] * amp;
        }
    }
    block
}

#[derive(Clone, Debug)]
pub struct PassiveUnitary {
    space: TruncatedFockSpace,
    hamiltonian: Matrix2<Complex64>,
}

impl PassiveUnitary {
    /// `exp(-i a† H a)` for Hermitian `H`.
    pub fn from_hamiltonian(space: TruncatedFockSpace, hamiltonian: Matrix2<Complex64>) -> Result<Self> {
        space.require_two_mode()?;
        let deviation = (hamiltonian - hamiltonian.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if deviation > 1e-12 {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { space, hamiltonian })
    }

    /// The passive unitary with Heisenberg action `U† a U = u a` on the mode
    /// vector `a = (a_H, a_V)`.
    pub fn from_mode_unitary(space: TruncatedFockSpace, u: &Matrix2<Complex64>) -> Result<Self> {
        let defect = (u * u.adjoint() - Matrix2::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > 1e-10 {
            return Err(Error::ExpmAccuracy { defect });
        }
        Self::from_hamiltonian(space, mode_unitary_log(u))
    }

    pub fn hamiltonian(&self) -> &Matrix2<Complex64> {
        &self.hamiltonian
    }

    /// Matrix of the unitary on manifold `n`.
    pub fn block(&self, n: usize) -> Result<DMatrix<Complex64>> {
        if n > self.space.max_manifold() {
            return Err(Error::ManifoldOutOfRange {
                n,
                max: self.space.max_manifold(),
            });
        }
        let gen = quadratic_block(self.space, n, &self.hamiltonian) * Complex64::new(0.0, -1.0);
        expm(&gen)
    }

    /// `U ρ U†`, skipping manifolds the state does not populate.
    pub fn apply(&self, rho: &TwoModeDensityMatrix) -> Result<TwoModeDensityMatrix> {
        if rho.space() != self.space {
            return Err(Error::DimensionMismatch {
                expected: self.space.total_dim(),
                found: rho.space().total_dim(),
            });
        }
        let mut out = rho.clone();
        for n in 0..=self.space.max_manifold() {
            let idx = self.space.manifold_indices(n);
            let rows = rho.factor_rows(&idx);
            if rows.iter().all(|z| *z == Complex64::from(0.0)) {
                continue;
            }
            let block = self.block(n)?;
            out.inner_mut().set_factor_rows(&idx, &(block * rows));
        }
        Ok(out)
    }
}

/// Hermitian `H` with `exp(-i H) = u` for a 2×2 unitary `u`.
///
/// Splits `u = e^{iφ} w` with `w ∈ SU(2)` and reads the rotation angle and
/// axis off `w = cos(θ/2) - i sin(θ/2) n·σ`, which stays well defined at
/// degenerate eigenvalues.
pub fn mode_unitary_log(u: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let phase = det.arg() / 2.0;
    let w = u * Complex64::from_polar(1.0, -phase);
    let a = w[(0, 0)];
    let b = w[(0, 1)];
    let v = [-b.im, -b.re, -a.im];
    let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let half = s.atan2(a.re);
    let axis = if s > 0.0 {
        [v[0] / s, v[1] / s, v[2] / s]
    } else {
        [0.0, 0.0, 1.0]
    };
    let i = Complex64::new(0.0, 1.0);
    let c = |x: f64| Complex64::from(x);
    let n_sigma = Matrix2::new(
        c(axis[2]),
        c(axis[0]) - i * axis[1],
        c(axis[0]) + i * axis[1],
        c(-axis[2]),
    );
    n_sigma * c(half) - Matrix2::identity() * c(phase)
}
