use nalgebra::{Cholesky, Matrix4, Vector4};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{ChiSquared, Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::homodyne::{estimate_covariance, CalibrationModel, QuadratureDataset};
use super::rng::{substream, REPLICATE_STREAM_BASE};
use crate::error::{Error, Result};
use crate::fock::TruncatedFockSpace;
use crate::gaussian::{gaussian_to_fock, repair, GaussianMoments, RepairOutcome, DEFAULT_REPAIR_TOL};
use crate::polarimetry::{analyse, ErrorBars, PolarisationReport};

pub const MIN_REPLICATES: usize = 50;

/// Replicates are abandoned as a whole once more than this fraction abort.
pub const MAX_ABORT_FRACTION: f64 = 0.5;

#[derive(Clone, Copy, Debug)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub space: TruncatedFockSpace,
    pub n_max: usize,
    pub repair_tol: f64,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64, space: TruncatedFockSpace, n_max: usize) -> Self {
        Self {
            replicates,
            seed,
            space,
            n_max,
            repair_tol: DEFAULT_REPAIR_TOL,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::InvalidSpec(format!(
                "bootstrap needs at least {MIN_REPLICATES} replicates, got {}",
                self.replicates
            )));
        }
        self.space.require_two_mode()
    }
}

/// Per-replicate degrees plus their summary.
#[derive(Clone, Debug, Serialize)]
pub struct BootstrapResult {
    pub bars: ErrorBars,
    pub p1: Vec<f64>,
    pub p1sc: Vec<f64>,
}

pub(crate) fn summarise(values: &[(f64, f64)], replicates: usize) -> Result<BootstrapResult> {
    let aborted = replicates - values.len();
    if values.len() < 2 || aborted as f64 > MAX_ABORT_FRACTION * replicates as f64 {
        return Err(Error::Bootstrap(format!(
            "{aborted} of {replicates} replicates aborted"
        )));
    }
    let p1: Vec<f64> = values.iter().map(|v| v.0).collect();
    let p1sc: Vec<f64> = values.iter().map(|v| v.1).collect();
    let (p1_mean, p1_std) = mean_std(&p1);
    let (p1sc_mean, p1sc_std) = mean_std(&p1sc);
    Ok(BootstrapResult {
        bars: ErrorBars {
            p1_mean,
            p1_std,
            p1sc_mean,
            p1sc_std,
            replicates,
            aborted,
        },
        p1,
        p1sc,
    })
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Draws `W ~ Wishart(V, dof) / dof` with the Bartlett construction.
pub fn sample_wishart(rng: &mut ChaCha20Rng, scale: &Matrix4<f64>, dof: usize) -> Result<Matrix4<f64>> {
    if dof < 4 {
        return Err(Error::InsufficientSamples {
            required: 5,
            found: dof + 1,
        });
    }
    let l = Cholesky::new(*scale)
        .ok_or_else(|| Error::UnphysicalCovariance("bootstrap covariance is not positive definite".into()))?
        .l();
    let mut a = Matrix4::zeros();
    for i in 0..4 {
        let chi = ChiSquared::new((dof - i) as f64).map_err(|e| Error::Bootstrap(e.to_string()))?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let la = l * a;
    Ok(la * la.transpose() / dof as f64)
}

/// Repairs an estimate, converts it to the Fock basis and analyses it.
pub fn gaussian_report(
    estimate: &GaussianMoments,
    space: TruncatedFockSpace,
    n_max: usize,
    repair_tol: f64,
) -> Result<(PolarisationReport, RepairOutcome)> {
    let outcome = repair(estimate, repair_tol)?;
    let rho = gaussian_to_fock(&outcome.state, space)?;
    Ok((analyse(&rho, n_max)?, outcome))
}

/// Parametric bootstrap around a homodyne estimate.
///
/// Each replicate redraws the mean from `N(μ̂, V̂/M)`, the covariance from a
/// Wishart with `M - 1` degrees of freedom, and a shot-noise miscalibration
/// `ε ~ N(0, σ)`, then repairs and analyses the result. Replicate `b` reads
/// its own random stream, so the output does not depend on the thread count.
pub fn bootstrap_polarisation(
    estimate: &GaussianMoments,
    samples: usize,
    cal: &CalibrationModel,
    cfg: &BootstrapConfig,
) -> Result<BootstrapResult> {
    cfg.validate()?;
    if samples < 5 {
        return Err(Error::InsufficientSamples {
            required: 5,
            found: samples,
        });
    }
    let cov = (estimate.cov + estimate.cov.transpose()) * 0.5;
    let mean_chol = Cholesky::new(cov / samples as f64)
        .ok_or_else(|| Error::UnphysicalCovariance("estimated covariance is not positive definite".into()))?
        .l();
    let cal_dist = Normal::new(0.0, cal.sigma()).map_err(|e| Error::Bootstrap(e.to_string()))?;
    let values: Vec<(f64, f64)> = (0..cfg.replicates)
        .into_par_iter()
        .filter_map(|b| {
            let mut rng = substream(cfg.seed, REPLICATE_STREAM_BASE + b as u64);
            let z = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            let mean = estimate.mean + mean_chol * z;
            let v = sample_wishart(&mut rng, &cov, samples - 1).ok()?;
            let eps: f64 = cal_dist.sample(&mut rng);
            let scale = 1.0 + eps;
            if scale <= 0.0 {
                return None;
            }
            let draw = GaussianMoments::new(mean / scale.sqrt(), v / scale);
            let (report, _) = gaussian_report(&draw, cfg.space, cfg.n_max, cfg.repair_tol).ok()?;
            Some((report.p1, report.p1sc))
        })
        .collect();
    summarise(&values, cfg.replicates)
}

/// Point estimate from a dataset with bootstrap error bars attached.
pub fn analyse_homodyne(
    ds: &QuadratureDataset,
    cal: &CalibrationModel,
    cfg: &BootstrapConfig,
) -> Result<(PolarisationReport, BootstrapResult)> {
    let estimate = estimate_covariance(ds, cal, None)?;
    let (report, _) = gaussian_report(&estimate, cfg.space, cfg.n_max, cfg.repair_tol)?;
    let boot = bootstrap_polarisation(&estimate, ds.len(), cal, cfg)?;
    Ok((report.with_error_bars(boot.bars), boot))
}
