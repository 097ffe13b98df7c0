use std::io::{BufRead, Write};

use nalgebra::{Cholesky, DMatrix, Matrix4, Vector4};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng::{substream, CALIBRATION_STREAM, DATA_STREAM};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianMoments, GaussianState};

pub const DEFAULT_SHOT_NOISE_UNCERTAINTY: f64 = 0.01;

/// Relative uncertainty of the shot-noise reference used to calibrate the
/// homodyne data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CalibrationRecord", into = "CalibrationRecord")]
pub struct CalibrationModel {
    shot_noise_rel_uncertainty: f64,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
struct CalibrationRecord {
    shot_noise_rel_uncertainty: f64,
}

impl TryFrom<CalibrationRecord> for CalibrationModel {
    type Error = Error;
    fn try_from(r: CalibrationRecord) -> Result<Self> {
        Self::new(r.shot_noise_rel_uncertainty)
    }
}

impl From<CalibrationModel> for CalibrationRecord {
    fn from(c: CalibrationModel) -> Self {
        Self {
            shot_noise_rel_uncertainty: c.shot_noise_rel_uncertainty,
        }
    }
}

impl CalibrationModel {
    pub fn new(shot_noise_rel_uncertainty: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&shot_noise_rel_uncertainty) {
            return Err(Error::InvalidSpec(format!(
                "shot-noise uncertainty must lie in [0, 0.5), got {shot_noise_rel_uncertainty}"
            )));
        }
        Ok(Self {
            shot_noise_rel_uncertainty,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.shot_noise_rel_uncertainty
    }
}

impl Default for CalibrationModel {
    fn default() -> Self {
        Self {
            shot_noise_rel_uncertainty: DEFAULT_SHOT_NOISE_UNCERTAINTY,
        }
    }
}

/// `M` joint quadrature samples `(x_H, p_H, x_V, p_V)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureDataset {
    samples: DMatrix<f64>,
    seed: u64,
    shot_noise_rel_uncertainty: Option<f64>,
}

const COLUMNS: [&str; 4] = ["x_h", "p_h", "x_v", "p_v"];

impl QuadratureDataset {
    pub fn new(samples: DMatrix<f64>, seed: u64) -> Result<Self> {
        if samples.ncols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: samples.ncols(),
            });
        }
        if samples.nrows() < 2 {
            return Err(Error::InsufficientSamples {
                required: 2,
                found: samples.nrows(),
            });
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Format("dataset contains non-finite samples".into()));
        }
        Ok(Self {
            samples,
            seed,
            shot_noise_rel_uncertainty: None,
        })
    }

    pub fn with_calibration(mut self, cal: &CalibrationModel) -> Self {
        self.shot_noise_rel_uncertainty = Some(cal.sigma());
        self
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shot_noise_rel_uncertainty(&self) -> Option<f64> {
        self.shot_noise_rel_uncertainty
    }

    /// Writes `# key=value` header lines followed by a CSV table.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "# m={}", self.len())?;
        writeln!(writer, "# seed={}", self.seed)?;
        if let Some(s) = self.shot_noise_rel_uncertainty {
            writeln!(writer, "# shot_noise_rel_uncertainty={s}")?;
        }
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(COLUMNS)?;
        for row in self.samples.row_iter() {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut m = None;
        let mut seed = None;
        let mut sigma = None;
        let mut body = String::new();
        for line in reader.lines() {
            let line = line?;
            if let Some(meta) = line.strip_prefix('#') {
                let (key, value) = meta
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| Error::Format(format!("bad header line `{line}`")))?;
                let bad = |_| Error::Format(format!("bad value in `{line}`"));
                match key.trim() {
                    "m" => m = Some(value.trim().parse::<usize>().map_err(|e| bad(e.to_string()))?),
                    "seed" => seed = Some(value.trim().parse::<u64>().map_err(|e| bad(e.to_string()))?),
                    "shot_noise_rel_uncertainty" => {
                        sigma = Some(value.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?)
                    }
                    other => return Err(Error::Format(format!("unknown header key `{other}`"))),
                }
            } else {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != COLUMNS {
            return Err(Error::Format(format!("expected columns {COLUMNS:?}")));
        }
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            for field in rec.iter() {
                values.push(
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Format(format!("bad sample `{field}`: {e}")))?,
                );
            }
        }
        let rows = values.len() / 4;
        if let Some(m) = m {
            if m != rows {
                return Err(Error::Format(format!("header says m={m}, found {rows} rows")));
            }
        }
        let seed = seed.ok_or_else(|| Error::Format("missing `# seed=` header".into()))?;
        let mut ds = Self::new(DMatrix::from_row_slice(rows, 4, &values), seed)?;
        ds.shot_noise_rel_uncertainty = sigma;
        Ok(ds)
    }
}

/// `M` independent draws from `N(mean, cov)` of `g`, in the units of
/// [`GaussianState`].
pub fn sample_homodyne(g: &GaussianState, m: usize, seed: u64) -> Result<QuadratureDataset> {
    if m < 2 {
        return Err(Error::InsufficientSamples { required: 2, found: m });
    }
    let chol = Cholesky::new(*g.cov())
        .ok_or_else(|| Error::UnphysicalCovariance("covariance is not positive definite".into()))?;
    let l = chol.l();
    let mean = g.mean();
    let mut rng = substream(seed, DATA_STREAM);
    let mut samples = DMatrix::zeros(m, 4);
    for i in 0..m {
        let z = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let x = mean + l * z;
        for k in 0..4 {
            samples[(i, k)] = x[k];
        }
    }
    QuadratureDataset::new(samples, seed)
}

/// Like [`sample_homodyne`], but every sample is divided by `√(1+ε)` for a
/// shot-noise reference misjudged by `ε ~ N(0, σ)`. Returns the dataset and
/// the hidden `ε`.
pub fn sample_homodyne_miscalibrated(
    g: &GaussianState,
    m: usize,
    cal: &CalibrationModel,
    seed: u64,
) -> Result<(QuadratureDataset, f64)> {
    let ds = sample_homodyne(g, m, seed)?;
    let mut rng = substream(seed, CALIBRATION_STREAM);
    let eps = Normal::new(0.0, cal.sigma())
        .map_err(|e| Error::InvalidSpec(e.to_string()))?
        .sample(&mut rng)
        .max(-0.5);
    let samples = ds.samples / (1.0 + eps).sqrt();
    Ok((QuadratureDataset::new(samples, seed)?.with_calibration(cal), eps))
}

/// Sample mean and unbiased covariance, rescaled for a shot-noise reference
/// that was off by the factor `1 + ε`: covariance `/(1+ε)`, mean `/√(1+ε)`.
pub fn estimate_covariance(
    ds: &QuadratureDataset,
    cal: &CalibrationModel,
    cal_draw: Option<f64>,
) -> Result<GaussianMoments> {
    let m = ds.len();
    if m < 5 {
        return Err(Error::InsufficientSamples { required: 5, found: m });
    }
    let eps = cal_draw.unwrap_or(0.0);
    if !(eps > -0.5 && eps.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "calibration draw {eps} out of range (model σ = {})",
            cal.sigma()
        )));
    }
    let x = ds.samples();
    let mean = Vector4::from_fn(|k, _| x.column(k).mean());
    let mut cov = Matrix4::zeros();
    for row in x.row_iter() {
        let d = Vector4::from_fn(|k, _| row[k] - mean[k]);
        cov += d * d.transpose();
    }
    cov /= (m - 1) as f64;
    for k in 0..4 {
        if !(cov[(k, k)] > 0.0) {
            return Err(Error::DegenerateDataset { column: k });
        }
    }
    let scale = 1.0 + eps;
    Ok(GaussianMoments::new(
        mean / scale.sqrt(),
        (cov + cov.transpose()) * (0.5 / scale),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_samples_have_unit_covariance() {
        let m = 200_000;
        let ds = sample_homodyne(&GaussianState::vacuum(), m, 11).unwrap();
        let est = estimate_covariance(&ds, &CalibrationModel::default(), None).unwrap();
        let tol = 6.0 / (m as f64).sqrt();
        assert!((est.cov - Matrix4::identity()).amax() < 2.0 * tol);
        assert!(est.mean.amax() < tol);
    }

    #[test]
    fn displaced_mean() {
        let m = 100_000;
        let g = GaussianState::new(Vector4::new(2f64.sqrt(), 0.0, 0.0, 0.0), Matrix4::identity()).unwrap();
        let ds = sample_homodyne(&g, m, 5).unwrap();
        let mean = ds.samples().column(0).mean();
        assert!((mean - 2f64.sqrt()).abs() < 6.0 / (m as f64).sqrt());
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let a = sample_homodyne(&GaussianState::vacuum(), 100, 42).unwrap();
        let b = sample_homodyne(&GaussianState::vacuum(), 100, 42).unwrap();
        let c = sample_homodyne(&GaussianState::vacuum(), 100, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn calibration_draw_rescales() {
        let ds = sample_homodyne(&GaussianState::vacuum(), 1000, 1).unwrap();
        let cal = CalibrationModel::default();
        let base = estimate_covariance(&ds, &cal, None).unwrap();
        let off = estimate_covariance(&ds, &cal, Some(0.01)).unwrap();
        assert!((off.cov * 1.01 - base.cov).amax() < 1e-14);
        assert!((off.mean * 1.01f64.sqrt() - base.mean).amax() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_and_small_datasets() {
        let mut x = DMatrix::from_fn(10, 4, |i, k| (i * (k + 1)) as f64);
        x.column_mut(2).fill(1.0);
        let ds = QuadratureDataset::new(x, 0).unwrap();
        assert!(matches!(
            estimate_covariance(&ds, &CalibrationModel::default(), None),
            Err(Error::DegenerateDataset { column: 2 })
        ));
        let small = QuadratureDataset::new(DMatrix::from_element(3, 4, 1.0), 0).unwrap();
        assert!(estimate_covariance(&small, &CalibrationModel::default(), None).is_err());
        assert!(QuadratureDataset::new(DMatrix::from_element(1, 4, 1.0), 0).is_err());
    }

    #[test]
    fn miscalibration_is_recoverable() {
        let g = GaussianState::vacuum();
        let cal = CalibrationModel::new(0.05).unwrap();
        let (ds, eps) = sample_homodyne_miscalibrated(&g, 400, &cal, 4).unwrap();
        let clean = sample_homodyne(&g, 400, 4).unwrap();
        assert!(eps != 0.0);
        let a = estimate_covariance(&ds, &cal, Some(-eps / (1.0 + eps))).unwrap();
        let b = estimate_covariance(&clean, &cal, None).unwrap();
        assert!((a.cov - b.cov).amax() < 1e-12);
    }

    #[test]
    fn calibration_bounds() {
        assert!(CalibrationModel::new(0.5).is_err());
        assert!(CalibrationModel::new(-0.1).is_err());
        assert!(CalibrationModel::new(0.0).is_ok());
    }

    #[test]
    fn csv_round_trip() {
        let ds = sample_homodyne(&GaussianState::vacuum(), 50, 9)
            .unwrap()
            .with_calibration(&CalibrationModel::default());
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = QuadratureDataset::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }
}
