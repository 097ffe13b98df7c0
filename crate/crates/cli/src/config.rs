use std::path::{Path, PathBuf};

use num_complex::Complex64;
use polardeg::gaussian::{db_to_spec, ModeSpec, StateSpec};
use polardeg::tomography::DEFAULT_SHOT_NOISE_UNCERTAINTY;
use polardeg::TruncatedFockSpace;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub state: Option<StateSource>,
    #[serde(default)]
    pub space: SpaceConfig,
    #[serde(default)]
    pub analysis: Analysis,
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub fig1: Fig1Config,
    #[serde(default)]
    pub fig2: Fig2Config,
    #[serde(default)]
    pub fig4: Fig4Config,
    #[serde(default)]
    pub tomography: TomographyConfig,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Exactly one way of describing the state.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSource {
    Gaussian(StateSpec),
    Fock(Vec<FockAmplitude>),
    Xi { phi: f64 },
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockAmplitude {
    pub m: usize,
    pub n: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub dim: Option<usize>,
    pub n_max: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    #[default]
    Analytic,
    Homodyne,
    Pnrd,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        linspace(self.start, self.stop, self.steps)
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    pub photons_max: f64,
    pub steps: usize,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            photons_max: 3.0,
            steps: 61,
        }
    }
}

/// Axis ranges are read off the published plots and only approximate.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Config {
    pub steps: usize,
    pub r_max: f64,
    pub alpha_max: f64,
    pub r_h_fixed: f64,
    pub r_v_fixed: f64,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            steps: 41,
            r_max: 1.0,
            alpha_max: 2.0,
            r_h_fixed: 0.2,
            r_v_fixed: 0.6,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig4Config {
    pub sqz_db: f64,
    pub antisqz_db: f64,
    pub theta: f64,
    pub alpha_start: f64,
    pub alpha_stop: f64,
    pub steps: usize,
    pub inset_alpha: f64,
    pub shot_noise_rel_uncertainty: f64,
}

impl Default for Fig4Config {
    fn default() -> Self {
        Self {
            sqz_db: 3.2,
            antisqz_db: 7.4,
            theta: 0.0,
            alpha_start: 0.25,
            alpha_stop: 4.0,
            steps: 76,
            inset_alpha: 1.0,
            shot_noise_rel_uncertainty: DEFAULT_SHOT_NOISE_UNCERTAINTY,
        }
    }
}

impl Fig4Config {
    pub fn h_mode(&self) -> CliResult<ModeSpec> {
        db_to_spec(self.sqz_db, self.antisqz_db, self.theta).map_err(|e| CliError::Config(format!("fig4: {e}")))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomographyConfig {
    /// Homodyne samples `M`.
    pub samples: usize,
    /// PNRD shots per basis.
    pub shots: u64,
    pub replicates: usize,
    pub shot_noise_rel_uncertainty: f64,
    /// Reads measured data instead of simulating it.
    pub input: Option<PathBuf>,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            shots: 100_000,
            replicates: 200,
            shot_noise_rel_uncertainty: DEFAULT_SHOT_NOISE_UNCERTAINTY,
            input: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::ConfigParse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn state(&self) -> CliResult<&StateSource> {
        self.state
            .as_ref()
            .ok_or_else(|| CliError::Config("`state` is required: give one of `gaussian`, `fock` or `xi`".into()))
    }

    /// Cutoff from `--dim`/config, or a default sized to the state.
    /// Default cutoff covering the state and every point of its sweep.
    pub fn default_dim(&self) -> CliResult<usize> {
        let source = self.state()?;
        let mut dim = source.default_dim();
        if let Some(sweep) = &self.sweep {
            for v in sweep.values()? {
                dim = dim.max(source.with_parameter(&sweep.parameter, v)?.default_dim());
            }
        }
        Ok(dim.max(4))
    }

    pub fn space(&self, fallback: usize) -> CliResult<(TruncatedFockSpace, usize)> {
        let dim = self.space.dim.unwrap_or(fallback);
        let space = TruncatedFockSpace::two_mode(dim).map_err(|e| CliError::Config(format!("space.dim: {e}")))?;
        let n_max = self.space.n_max.unwrap_or(dim - 1);
        if n_max > 2 * (dim - 1) {
            return Err(CliError::Config(format!(
                "space.n_max = {n_max} exceeds the largest manifold {} of a d = {dim} space",
                2 * (dim - 1)
            )));
        }
        Ok((space, n_max))
    }
}

/// Room for the coherent Poisson tail and for six standard deviations of the
/// photon number, with a small margin on top.
fn mode_dim(m: &ModeSpec) -> usize {
    let g = polardeg::gaussian::spec_to_gaussian(&StateSpec::new(*m, ModeSpec::vacuum()));
    let spread = g.mean_photons() + 6.0 * g.photon_number_variance().max(0.0).sqrt();
    let lambda = m.alpha().norm_sqr();
    // smallest n with Poisson(λ) mass beyond n below 1e-12
    let (mut n, mut log_p, mut tail) = (0usize, -lambda, 1.0f64);
    while tail > 1e-12 && n < 10_000 {
        tail -= log_p.exp();
        n += 1;
        log_p += lambda.max(f64::MIN_POSITIVE).ln() - (n as f64).ln();
    }
    (spread.ceil() as usize).max(n) + 4
}

pub fn linspace(start: f64, stop: f64, steps: usize) -> CliResult<Vec<f64>> {
    if steps == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Config(format!(
            "range needs finite ends and at least one step (got {start}..{stop}, {steps} steps)"
        )));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let h = (stop - start) / (steps - 1) as f64;
    Ok((0..steps).map(|k| start + h * k as f64).collect())
}

impl StateSource {
    /// Cutoff that comfortably holds the state.
    pub fn default_dim(&self) -> usize {
        match self {
            StateSource::Gaussian(spec) => mode_dim(&spec.h).max(mode_dim(&spec.v)),
            StateSource::Fock(amps) => amps.iter().map(|a| a.m.max(a.n)).max().unwrap_or(0) + 2,
            StateSource::Xi { .. } => 4,
        }
    }

    /// Copy with the named parameter set to `value`.
    pub fn with_parameter(&self, name: &str, value: f64) -> CliResult<Self> {
        let unknown = || {
            CliError::Config(format!(
                "sweep parameter `{name}` does not exist in this state (use h.|v. + alpha_re, alpha_im, r, theta, n_th, or phi for xi)"
            ))
        };
        match self {
            StateSource::Xi { .. } if name == "phi" => Ok(StateSource::Xi { phi: value }),
            StateSource::Gaussian(spec) => {
                let (mode, field) = name.split_once('.').ok_or_else(unknown)?;
                let mut spec = *spec;
                let target = match mode {
                    "h" => &mut spec.h,
                    "v" => &mut spec.v,
                    _ => return Err(unknown()),
                };
                let m = *target;
                let (mut alpha, mut r, mut theta, mut n_th) = (m.alpha(), m.r(), m.theta(), m.n_th());
                match field {
                    "alpha_re" => alpha = Complex64::new(value, alpha.im),
                    "alpha_im" => alpha = Complex64::new(alpha.re, value),
                    "r" => r = value,
                    "theta" => theta = value,
                    "n_th" => n_th = value,
                    _ => return Err(unknown()),
                }
                *target = ModeSpec::new(alpha, r, theta, n_th)
                    .map_err(|e| CliError::Config(format!("sweep `{name}` = {value}: {e}")))?;
                Ok(StateSource::Gaussian(spec))
            }
            _ => Err(unknown()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_sources_are_rejected() {
        let text = r#"{"state": {"xi": {"phi": 0.0}, "fock": []}}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"stat": {}}"#).is_err());
    }

    #[test]
    fn sweep_parameter_must_exist() {
        let xi = StateSource::Xi { phi: 0.0 };
        assert!(xi.with_parameter("phi", 1.0).is_ok());
        assert!(xi.with_parameter("h.r", 1.0).is_err());
        let g: StateSource =
            serde_json::from_str(r#"{"gaussian": {"h": {"alpha_re": 1.0, "alpha_im": 0.0}}}"#).unwrap();
        assert!(g.with_parameter("v.r", 0.3).is_ok());
        assert!(g.with_parameter("h.gain", 0.3).is_err());
    }

    #[test]
    fn linspace_ends() {
        assert_eq!(linspace(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(linspace(0.0, 1.0, 0).is_err());
    }
}
