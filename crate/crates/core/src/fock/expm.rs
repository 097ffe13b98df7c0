//! Dense complex matrix exponential.
//!
//! Scaling and squaring with diagonal Padé approximants of degree 3, 5, 7, 9
//! or 13, selected from the 1-norm of the input (Higham, SIAM J. Matrix Anal.
//! Appl. 26, 2005). The thresholds keep the backward error at unit roundoff.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

type CMat = DMatrix<Complex64>;

fn one_norm(a: &CMat) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled_identity(n: usize, s: f64) -> CMat {
    CMat::from_diagonal_element(n, n, Complex64::new(s, 0.0))
}

fn pade_low(a: &CMat, coeffs: &[f64]) -> (CMat, CMat) {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = CMat::identity(n, n);
    let mut u = CMat::zeros(n, n);
    let mut v = CMat::zeros(n, n);
    for pair in coeffs.chunks(2) {
        v += &power * Complex64::from(pair[0]);
        u += &power * Complex64::from(pair[1]);
        power = &power * &a2;
    }
    (a * u, v)
}

fn pade_13(a: &CMat) -> (CMat, CMat) {
    let n = a.nrows();
    let b = |k: usize| Complex64::from(PADE_13[k]);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let id = CMat::identity(n, n);

    let inner_u = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = a * (&a6 * inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let inner_v = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &a6 * inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);
    (u, v)
}

/// `exp(a)` for a dense complex square matrix.
pub fn expm(a: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::ExpmAccuracy { defect: f64::NAN });
    }
    if norm == 0.0 {
        return Ok(CMat::identity(n, n));
    }

    let (u, v, squarings) = if norm <= THETA_3 {
        let (u, v) = pade_low(a, &PADE_3);
        (u, v, 0)
    } else if norm <= THETA_5 {
        let (u, v) = pade_low(a, &PADE_5);
        (u, v, 0)
    } else if norm <= THETA_7 {
        let (u, v) = pade_low(a, &PADE_7);
        (u, v, 0)
    } else if norm <= THETA_9 {
        let (u, v) = pade_low(a, &PADE_9);
        (u, v, 0)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let scaled = a * Complex64::from(0.5f64.powi(s));
        let (u, v) = pade_13(&scaled);
        (u, v, s)
    };

    let p = &v + &u;
    let q = &v - &u;
    let lu = q.lu();
    let mut r = lu.solve(&p).ok_or(Error::ExpmAccuracy { defect: f64::INFINITY })?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// Max-entry deviation of `u u† - I`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    let prod = u * u.adjoint() - scaled_identity(n, 1.0);
    prod.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
