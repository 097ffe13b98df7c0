//! Density matrices stored in Gram-factor form `ρ = F F†`.
//!
//! `F` has one row per basis state and one column per ensemble member, so a
//! pure state is a single column and a Gaussian mixed state is a short list
//! of weighted pure states. The factor form is Hermitian and positive
//! semidefinite by construction, and block operations (manifold projection,
//! polarisation rotations) act on the rows of `F` without ever forming the
//! `d² × d²` matrix. [`DensityMatrix::to_dense`] materialises it on demand.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::operator::{max_abs, OperatorMatrix, ALGEBRAIC_TOL, SPECTRAL_TOL};
use super::space::{Mode, TruncatedFockSpace};
use crate::error::{Error, Result};

/// Ensemble members with weight below this are dropped when mixing.
pub const MIXTURE_WEIGHT_CUTOFF: f64 = 1e-18;

/// Number of top levels per mode whose population is reported as edge
/// population.
pub const EDGE_LEVELS: usize = 6;

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: TruncatedFockSpace,
    factor: DMatrix<Complex64>,
}

fn check_trace(trace: f64) -> Result<()> {
    if !(trace > 0.0 && trace <= 1.0 + ALGEBRAIC_TOL) || !trace.is_finite() {
        return Err(Error::InvalidTrace { trace });
    }
    Ok(())
}

impl DensityMatrix {
    /// Builds `ρ = F F†`, validating dimensions and the trace bound.
    pub fn from_factor(space: TruncatedFockSpace, factor: DMatrix<Complex64>) -> Result<Self> {
        if factor.nrows() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                found: factor.nrows(),
            });
        }
        check_trace(factor.norm_squared())?;
        Ok(Self { space, factor })
    }

    pub fn pure(space: TruncatedFockSpace, psi: DVector<Complex64>) -> Result<Self> {
        let len = psi.len();
        Self::from_factor(space, DMatrix::from_column_slice(len, 1, psi.as_slice()))
    }

    /// Validates a dense density matrix and converts it to factor form.
    pub fn from_dense(space: TruncatedFockSpace, rho: &DMatrix<Complex64>) -> Result<Self> {
        let n = space.total_dim();
        if rho.nrows() != rho.ncols() {
            return Err(Error::NotSquare {
                rows: rho.nrows(),
                cols: rho.ncols(),
            });
        }
        if rho.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rho.nrows(),
            });
        }
        let deviation = max_abs(&(rho - rho.adjoint()));
        if deviation > ALGEBRAIC_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let herm = (rho + rho.adjoint()) * Complex64::from(0.5);
        let eig = herm.symmetric_eigen();
        let min_eigenvalue = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eigenvalue < -SPECTRAL_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        let kept: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 0.0).collect();
        let mut factor = DMatrix::zeros(n, kept.len());
        for (col, &k) in kept.iter().enumerate() {
            let s = eig.eigenvalues[k].sqrt();
            factor.set_column(col, &(eig.eigenvectors.column(k) * Complex64::from(s)));
        }
        Self::from_factor(space, factor)
    }

    /// Convex combination `Σ w_i ρ_i` (weights need not be normalised but
    /// the result must satisfy the trace bound).
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidSpec("empty mixture".into()))?;
        let space = first.1.space;
        let mut columns = Vec::new();
        for (w, rho) in parts {
            if rho.space != space {
                return Err(Error::DimensionMismatch {
                    expected: space.total_dim(),
                    found: rho.space.total_dim(),
                });
            }
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::InvalidSpec(format!("mixture weight {w} is negative")));
            }
            let s = Complex64::from(w.sqrt());
            for col in rho.factor.column_iter() {
                columns.push(col.into_owned() * s);
            }
        }
        let factor = DMatrix::from_columns(&columns);
        Self::from_factor(space, factor)
    }

    pub fn space(&self) -> TruncatedFockSpace {
        self.space
    }

    pub fn factor(&self) -> &DMatrix<Complex64> {
        &self.factor
    }

    /// Number of ensemble members in the factor.
    pub fn rank_bound(&self) -> usize {
        self.factor.ncols()
    }

    pub fn trace(&self) -> f64 {
        self.factor.norm_squared()
    }

    /// `1 - Tr ρ`: probability lost to the truncation.
    pub fn truncation_loss(&self) -> f64 {
        (1.0 - self.trace()).max(0.0)
    }

    pub fn purity(&self) -> f64 {
        (self.factor.adjoint() * &self.factor).norm_squared()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        &self.factor * self.factor.adjoint()
    }

    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.factor
            .row(i)
            .iter()
            .zip(self.factor.row(j).iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// Diagonal of ρ in the Fock basis.
    pub fn populations(&self) -> Vec<f64> {
        self.factor
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// `Tr(A ρ)`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<Complex64> {
        if op.space() != self.space {
            return Err(Error::DimensionMismatch {
                expected: self.space.total_dim(),
                found: op.space().total_dim(),
            });
        }
        let af = op.entries() * &self.factor;
        Ok(self.factor.iter().zip(af.iter()).map(|(f, g)| f.conj() * g).sum())
    }

    /// Population on the top [`EDGE_LEVELS`] levels of any mode.
    pub fn edge_population(&self) -> f64 {
        let d = self.space.dim();
        let edge = d.saturating_sub(EDGE_LEVELS);
        let pops = self.populations();
        if self.space.is_two_mode() {
            pops.iter()
                .enumerate()
                .filter(|(i, _)| {
                    let (m, n) = self.space.occupations(*i);
                    m >= edge || n >= edge
                })
                .map(|(_, p)| p)
                .sum()
        } else {
            pops[edge..].iter().sum()
        }
    }

    /// Mean photon number of `mode` (total for `None`).
    pub fn mean_photons(&self, mode: Option<Mode>) -> f64 {
        let pops = self.populations();
        if !self.space.is_two_mode() {
            return pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        }
        pops.iter()
            .enumerate()
            .map(|(i, p)| {
                let (m, n) = self.space.occupations(i);
                let count = match mode {
                    Some(Mode::H) => m,
                    Some(Mode::V) => n,
                    None => m + n,
                };
                count as f64 * p
            })
            .sum()
    }

    /// `U ρ U†` for a unitary on the full space.
    pub fn transform(&self, unitary: &DMatrix<Complex64>) -> Result<Self> {
        if unitary.nrows() != self.space.total_dim() || unitary.ncols() != unitary.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.space.total_dim(),
                found: unitary.nrows(),
            });
        }
        Ok(Self {
            space: self.space,
            factor: unitary * &self.factor,
        })
    }

    /// Applies a single-mode operator to one mode of a two-mode state
    /// (`(U ⊗ I) ρ (U ⊗ I)†` for H).
    pub fn transform_mode(&self, mode: Mode, unitary: &DMatrix<Complex64>) -> Result<Self> {
        self.space.require_two_mode()?;
        let d = self.space.dim();
        if unitary.nrows() != d || unitary.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: unitary.nrows(),
            });
        }
        let k = self.factor.ncols();
        // Column-major storage of one factor column as a d×d matrix gives
        // X[n, m] = ψ[m d + n]: V acts from the left, H from the right.
        let factor = match mode {
            Mode::V => {
                let stacked = DMatrix::from_column_slice(d, d * k, self.factor.as_slice());
                let out = unitary * stacked;
                DMatrix::from_column_slice(d * d, k, out.as_slice())
            }
            Mode::H => {
                let ut = unitary.transpose();
                let mut out = DMatrix::zeros(d * d, k);
                for (c, col) in self.factor.column_iter().enumerate() {
                    let x = DMatrix::from_column_slice(d, d, col.as_slice());
                    let y = x * &ut;
                    out.column_mut(c).copy_from_slice(y.as_slice());
                }
                out
            }
        };
        Ok(Self {
            space: self.space,
            factor,
        })
    }

    /// Rows of the factor restricted to `indices`.
    pub(crate) fn factor_rows(&self, indices: &[usize]) -> DMatrix<Complex64> {
        self.factor.select_rows(indices)
    }

    pub(crate) fn set_factor_rows(&mut self, indices: &[usize], rows: &DMatrix<Complex64>) {
        for (r, &i) in indices.iter().enumerate() {
            self.factor.row_mut(i).copy_from(&rows.row(r));
        }
    }

    pub(crate) fn from_factor_unchecked(space: TruncatedFockSpace, factor: DMatrix<Complex64>) -> Self {
        Self { space, factor }
    }

    /// Re-factorises through an eigendecomposition when the ensemble has
    /// grown beyond the space dimension; drops vanishing members otherwise.
    pub fn compress(&self) -> Self {
        let n = self.space.total_dim();
        if self.factor.ncols() > n {
            let eig = self.to_dense().symmetric_eigen();
            let kept: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > MIXTURE_WEIGHT_CUTOFF).collect();
            let mut factor = DMatrix::zeros(n, kept.len());
            for (col, &k) in kept.iter().enumerate() {
                let s = Complex64::from(eig.eigenvalues[k].sqrt());
                factor.set_column(col, &(eig.eigenvectors.column(k) * s));
            }
            return Self::from_factor_unchecked(self.space, factor);
        }
        let keep: Vec<usize> = (0..self.factor.ncols())
            .filter(|&c| self.factor.column(c).norm_squared() > MIXTURE_WEIGHT_CUTOFF)
            .collect();
        Self::from_factor_unchecked(self.space, self.factor.select_columns(&keep))
    }
}

/// Density matrix of a single mode.
#[derive(Clone, Debug)]
pub struct ModeState(DensityMatrix);

impl ModeState {
    pub fn new(inner: DensityMatrix) -> Result<Self> {
        if inner.space.modes() != 1 {
            return Err(Error::InvalidSpace("expected a single-mode state".into()));
        }
        Ok(Self(inner))
    }

    pub fn pure(dim: usize, psi: DVector<Complex64>) -> Result<Self> {
        Self::new(DensityMatrix::pure(TruncatedFockSpace::single(dim)?, psi)?)
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        let mut psi = DVector::zeros(dim);
        psi[0] = Complex64::from(1.0);
        Self::pure(dim, psi)
    }

    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::CutoffTooSmall { dim, population: 1.0 });
        }
        let mut psi = DVector::zeros(dim);
        psi[n] = Complex64::from(1.0);
        Self::pure(dim, psi)
    }

    pub fn dim(&self) -> usize {
        self.0.space.dim()
    }

    pub fn inner(&self) -> &DensityMatrix {
        &self.0
    }

    /// `U ρ U†`.
    pub fn transform(&self, unitary: &DMatrix<Complex64>) -> Result<Self> {
        Ok(Self(self.0.transform(unitary)?))
    }
}

impl Deref for ModeState {
    type Target = DensityMatrix;
    fn deref(&self) -> &DensityMatrix {
        &self.0
    }
}

/// Density matrix on the two-mode (H ⊗ V) truncated space.
#[derive(Clone, Debug)]
pub struct TwoModeDensityMatrix(DensityMatrix);

impl TwoModeDensityMatrix {
    pub fn new(inner: DensityMatrix) -> Result<Self> {
        inner.space.require_two_mode()?;
        Ok(Self(inner))
    }

    pub fn pure(space: TruncatedFockSpace, psi: DVector<Complex64>) -> Result<Self> {
        Self::new(DensityMatrix::pure(space, psi)?)
    }

    pub fn from_dense(space: TruncatedFockSpace, rho: &DMatrix<Complex64>) -> Result<Self> {
        Self::new(DensityMatrix::from_dense(space, rho)?)
    }

    /// Pure state from `(m, n, amplitude)` triples.
    pub fn from_fock_amplitudes(space: TruncatedFockSpace, amplitudes: &[(usize, usize, Complex64)]) -> Result<Self> {
        space.require_two_mode()?;
        let mut psi = DVector::zeros(space.total_dim());
        for &(m, n, amp) in amplitudes {
            if m >= space.dim() || n >= space.dim() {
                return Err(Error::CutoffTooSmall {
                    dim: space.dim(),
                    population: amp.norm_sqr(),
                });
            }
            psi[space.index(m, n)] += amp;
        }
        Self::pure(space, psi)
    }

    pub fn vacuum(space: TruncatedFockSpace) -> Result<Self> {
        Self::from_fock_amplitudes(space, &[(0, 0, Complex64::from(1.0))])
    }

    /// `ρ_H ⊗ ρ_V`.
    pub fn product(h: &ModeState, v: &ModeState) -> Result<Self> {
        if h.dim() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: v.dim(),
            });
        }
        let d = h.dim();
        let space = TruncatedFockSpace::two_mode(d)?;
        let mut columns = Vec::new();
        for fh in h.factor().column_iter() {
            let wh = fh.norm_squared();
            for fv in v.factor().column_iter() {
                if wh * fv.norm_squared() <= MIXTURE_WEIGHT_CUTOFF {
                    continue;
                }
                let mut col = DVector::zeros(d * d);
                for m in 0..d {
                    if fh[m] == Complex64::from(0.0) {
                        continue;
                    }
                    for n in 0..d {
                        col[m * d + n] = fh[m] * fv[n];
                    }
                }
                columns.push(col);
            }
        }
        if columns.is_empty() {
            return Err(Error::InvalidTrace { trace: 0.0 });
        }
        Self::new(DensityMatrix::from_factor(space, DMatrix::from_columns(&columns))?)
    }

    pub fn inner(&self) -> &DensityMatrix {
        &self.0
    }

    pub fn transform(&self, unitary: &DMatrix<Complex64>) -> Result<Self> {
        Ok(Self(self.0.transform(unitary)?))
    }

    pub fn transform_mode(&self, mode: Mode, unitary: &DMatrix<Complex64>) -> Result<Self> {
        Ok(Self(self.0.transform_mode(mode, unitary)?))
    }

    pub(crate) fn inner_mut(&mut self) -> &mut DensityMatrix {
        &mut self.0
    }

    /// `|⟨ψ|φ⟩|²`-style fidelity `Tr(ρ σ)` between two states.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        if self.space() != other.space() {
            return Err(Error::DimensionMismatch {
                expected: self.space().total_dim(),
                found: other.space().total_dim(),
            });
        }
        Ok((self.factor().adjoint() * other.factor()).norm_squared())
    }
}

impl Deref for TwoModeDensityMatrix {
    type Target = DensityMatrix;
    fn deref(&self) -> &DensityMatrix {
        &self.0
    }
}
