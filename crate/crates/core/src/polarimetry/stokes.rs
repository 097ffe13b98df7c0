use num_complex::Complex64;

use crate::error::Result;
use crate::fock::{ladder_lower, Mode, OperatorMatrix, TruncatedFockSpace};

/// Dense Stokes operators on a two-mode space.
///
/// Each matrix is `d² × d²`, so this is meant for small cutoffs (operator
/// identities, cross-checks). The degree computations in this module work
/// block by block on the density-matrix factor and never build these.
#[derive(Clone, Debug)]
pub struct StokesOperators {
    pub s0: OperatorMatrix,
    pub s1: OperatorMatrix,
    pub s2: OperatorMatrix,
    pub s3: OperatorMatrix,
}

impl StokesOperators {
    pub fn new(space: TruncatedFockSpace) -> Result<Self> {
        space.require_two_mode()?;
        let ah = ladder_lower(space, Mode::H)?;
        let av = ladder_lower(space, Mode::V)?;
        let nh = ah.adjoint().mul(&ah)?;
        let nv = av.adjoint().mul(&av)?;
        // X = a_H† a_V
        let x = ah.adjoint().mul(&av)?;
        let xd = x.adjoint();
        let s0 = nh.add(&nv)?.into_hermitian()?;
        let s1 = x.add(&xd)?.into_hermitian()?;
        let s2 = x.sub(&xd)?.scale(Complex64::new(0.0, -1.0)).into_hermitian()?;
        let s3 = nh.sub(&nv)?.into_hermitian()?;
        Ok(Self { s0, s1, s2, s3 })
    }

    /// `(S1, S2, S3)`.
    pub fn vector(&self) -> [&OperatorMatrix; 3] {
        [&self.s1, &self.s2, &self.s3]
    }
}

pub fn stokes_operators(space: TruncatedFockSpace) -> Result<StokesOperators> {
    StokesOperators::new(space)
}
