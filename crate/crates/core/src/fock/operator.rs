use nalgebra::DMatrix;
use num_complex::Complex64;

use super::expm::{expm, unitarity_defect};
use super::space::{Mode, TruncatedFockSpace};
use crate::error::{Error, Result};

/// Tolerance for algebraic identities such as Hermiticity.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for spectral and exponential contracts.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Dense operator on a truncated Fock space.
///
/// Storage is dense; two-mode operators have `d² × d²` entries, so build
/// them only for moderate cutoffs. The polarimetry routines never need them
/// and work block-wise instead.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    space: TruncatedFockSpace,
    entries: DMatrix<Complex64>,
    hermitian: bool,
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl OperatorMatrix {
    pub fn new(space: TruncatedFockSpace, entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        if entries.nrows() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                found: entries.nrows(),
            });
        }
        Ok(Self {
            space,
            entries,
            hermitian: false,
        })
    }

    pub fn identity(space: TruncatedFockSpace) -> Self {
        let n = space.total_dim();
        Self {
            space,
            entries: DMatrix::identity(n, n),
            hermitian: true,
        }
    }

    pub fn zeros(space: TruncatedFockSpace) -> Self {
        let n = space.total_dim();
        Self {
            space,
            entries: DMatrix::zeros(n, n),
            hermitian: true,
        }
    }

    /// Marks the operator Hermitian after checking `max |A - A†| ≤ 1e-12`.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let deviation = self.hermiticity_defect();
        if deviation > ALGEBRAIC_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn space(&self) -> TruncatedFockSpace {
        self.space
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            entries: self.entries.adjoint(),
            hermitian: self.hermitian,
        }
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch {
                expected: self.space.total_dim(),
                found: other.space.total_dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            space: self.space,
            entries: &self.entries + &other.entries,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            space: self.space,
            entries: &self.entries - &other.entries,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            space: self.space,
            entries: &self.entries * &other.entries,
            hermitian: false,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            space: self.space,
            entries: &self.entries * factor,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Matrix exponential of an anti-Hermitian generator.
    ///
    /// The result is checked for unitarity to `1e-10`; an exponential that
    /// misses that target is reported instead of returned.
    pub fn exp(&self) -> Result<Self> {
        let deviation = max_abs(&(&self.entries + self.entries.adjoint()));
        if deviation > SPECTRAL_TOL {
            return Err(Error::NotAntiHermitian { deviation });
        }
        let u = expm(&self.entries)?;
        let defect = unitarity_defect(&u);
        if defect > SPECTRAL_TOL {
            return Err(Error::ExpmAccuracy { defect });
        }
        Ok(Self {
            space: self.space,
            entries: u,
            hermitian: false,
        })
    }

    /// Applies the operator to a state vector on the same space.
    pub fn apply(&self, psi: &nalgebra::DVector<Complex64>) -> Result<nalgebra::DVector<Complex64>> {
        if psi.len() != self.space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.total_dim(),
                found: psi.len(),
            });
        }
        Ok(&self.entries * psi)
    }
}

fn single_mode_lower(dim: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::from((n as f64).sqrt());
    }
    a
}

/// Annihilation operator of `mode`, with `⟨n-1|a|n⟩ = √n`.
///
/// On a two-mode space the operator is embedded as `a ⊗ I` (H) or `I ⊗ a` (V).
pub fn ladder_lower(space: TruncatedFockSpace, mode: Mode) -> Result<OperatorMatrix> {
    let d = space.dim();
    let a = single_mode_lower(d);
    let entries = match (space.modes(), mode) {
        (1, Mode::H) => a,
        (1, Mode::V) => {
            return Err(Error::InvalidMode {
                mode: mode.name(),
                modes: 1,
            })
        }
        (_, Mode::H) => a.kronecker(&DMatrix::identity(d, d)),
        (_, Mode::V) => DMatrix::identity(d, d).kronecker(&a),
    };
    OperatorMatrix::new(space, entries)
}

pub fn ladder_raise(space: TruncatedFockSpace, mode: Mode) -> Result<OperatorMatrix> {
    Ok(ladder_lower(space, mode)?.adjoint())
}

pub fn number_operator(space: TruncatedFockSpace, mode: Mode) -> Result<OperatorMatrix> {
    let a = ladder_lower(space, mode)?;
    a.adjoint().mul(&a)?.into_hermitian()
}

/// `A ⊗ B` for two single-mode operators on the same cutoff, in the
/// H-slow basis ordering.
pub fn tensor_product(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    if a.space.modes() != 1 || b.space.modes() != 1 {
        return Err(Error::InvalidSpace(
            "tensor_product takes two single-mode operators".into(),
        ));
    }
    if a.space.dim() != b.space.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.space.dim(),
            found: b.space.dim(),
        });
    }
    let space = TruncatedFockSpace::two_mode(a.space.dim())?;
    let mut op = OperatorMatrix::new(space, a.entries.kronecker(&b.entries))?;
    op.hermitian = a.hermitian && b.hermitian;
    Ok(op)
}
