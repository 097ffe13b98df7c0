use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of one mode of `D(α) S(ξ) ρ_th(n_th) S(ξ)† D(α)†`, with
/// `ξ = r e^{iθ}` and `S(ξ) = exp[(ξ* a² - ξ a†²)/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModeSpecRecord", into = "ModeSpecRecord")]
pub struct ModeSpec {
    alpha: Complex64,
    r: f64,
    theta: f64,
    n_th: f64,
}

impl ModeSpec {
    pub fn new(alpha: Complex64, r: f64, theta: f64, n_th: f64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::InvalidSpec("displacement must be finite".into()));
        }
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "squeezing r must be finite and >= 0, got {r}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidSpec("squeezing angle must be finite".into()));
        }
        if !n_th.is_finite() || n_th < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "thermal occupancy must be finite and >= 0, got {n_th}"
            )));
        }
        Ok(Self {
            alpha,
            r,
            theta: theta.rem_euclid(TAU),
            n_th,
        })
    }

    pub fn vacuum() -> Self {
        Self {
            alpha: Complex64::from(0.0),
            r: 0.0,
            theta: 0.0,
            n_th: 0.0,
        }
    }

    pub fn coherent(alpha: Complex64) -> Result<Self> {
        Self::new(alpha, 0.0, 0.0, 0.0)
    }

    pub fn squeezed_vacuum(r: f64, theta: f64) -> Result<Self> {
        Self::new(Complex64::from(0.0), r, theta, 0.0)
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n_th(&self) -> f64 {
        self.n_th
    }

    /// Complex squeezing parameter `ξ = r e^{iθ}`.
    pub fn xi(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }

    pub fn with_alpha(mut self, alpha: Complex64) -> Result<Self> {
        self.alpha = alpha;
        Self::new(self.alpha, self.r, self.theta, self.n_th)
    }

    pub fn is_pure(&self) -> bool {
        self.n_th == 0.0
    }

    /// `⟨n⟩ = |α|² + (n_th + ½) cosh 2r - ½`.
    pub fn mean_photons(&self) -> f64 {
        self.alpha.norm_sqr() + (self.n_th + 0.5) * (2.0 * self.r).cosh() - 0.5
    }
}

impl Default for ModeSpec {
    fn default() -> Self {
        Self::vacuum()
    }
}

/// Serialised form of [`ModeSpec`]. Either `r`/`n_th` or the
/// `sqz_db`/`antisqz_db` pair may be given, not both.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpecRecord {
    #[serde(default)]
    pub alpha_re: f64,
    #[serde(default)]
    pub alpha_im: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default)]
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_th: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sqz_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antisqz_db: Option<f64>,
}

impl TryFrom<ModeSpecRecord> for ModeSpec {
    type Error = Error;

    fn try_from(rec: ModeSpecRecord) -> Result<Self> {
        let alpha = Complex64::new(rec.alpha_re, rec.alpha_im);
        match (rec.sqz_db, rec.antisqz_db) {
            (None, None) => ModeSpec::new(alpha, rec.r.unwrap_or(0.0), rec.theta, rec.n_th.unwrap_or(0.0)),
            (Some(sqz), Some(anti)) => {
                if rec.r.is_some() || rec.n_th.is_some() {
                    return Err(Error::InvalidSpec(
                        "give either r/n_th or sqz_db/antisqz_db, not both".into(),
                    ));
                }
                db_to_spec(sqz, anti, rec.theta)?.with_alpha(alpha)
            }
            _ => Err(Error::InvalidSpec(
                "sqz_db and antisqz_db must be given together".into(),
            )),
        }
    }
}

impl From<ModeSpec> for ModeSpecRecord {
    fn from(s: ModeSpec) -> Self {
        Self {
            alpha_re: s.alpha.re,
            alpha_im: s.alpha.im,
            r: Some(s.r),
            theta: s.theta,
            n_th: Some(s.n_th),
            sqz_db: None,
            antisqz_db: None,
        }
    }
}

/// Two-mode product state `ρ_H ⊗ ρ_V`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    #[serde(default)]
    pub h: ModeSpec,
    #[serde(default)]
    pub v: ModeSpec,
}

impl StateSpec {
    pub fn new(h: ModeSpec, v: ModeSpec) -> Self {
        Self { h, v }
    }

    pub fn mean_photons(&self) -> f64 {
        self.h.mean_photons() + self.v.mean_photons()
    }
}

/// Maps measured squeezing / antisqueezing levels (dB relative to shot noise)
/// to a squeezed thermal mode.
///
/// `V_min = 10^{-sqz/10}`, `V_max = 10^{antisqz/10}`; then
/// `r = ¼ ln(V_max / V_min)` and `2 n_th + 1 = √(V_min V_max)`.
pub fn db_to_spec(sqz_db: f64, antisqz_db: f64, theta: f64) -> Result<ModeSpec> {
    if !sqz_db.is_finite() || !antisqz_db.is_finite() {
        return Err(Error::InvalidSpec("dB levels must be finite".into()));
    }
    let v_min = 10f64.powf(-sqz_db / 10.0);
    let v_max = 10f64.powf(antisqz_db / 10.0);
    let product = v_min * v_max;
    if product < 1.0 - 1e-12 {
        return Err(Error::InvalidSpec(format!(
            "unphysical variance pair: V_min * V_max = {product:.6} < 1"
        )));
    }
    if v_max < v_min {
        return Err(Error::InvalidSpec(format!(
            "antisqueezed variance {v_max:.6} is below squeezed variance {v_min:.6}"
        )));
    }
    let nu = product.max(1.0).sqrt();
    let n_th = ((nu - 1.0) / 2.0).max(0.0);
    let r = 0.25 * (v_max / v_min).ln();
    ModeSpec::new(Complex64::from(0.0), r, theta, n_th)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_db_is_vacuum() {
        let s = db_to_spec(0.0, 0.0, 0.0).unwrap();
        assert_eq!(s.r(), 0.0);
        assert_eq!(s.n_th(), 0.0);
    }

    #[test]
    fn equal_db_is_pure() {
        let s = db_to_spec(3.0, 3.0, 0.0).unwrap();
        assert!(s.n_th() < 1e-12);
        // V_max / V_min = 10^{0.6} = e^{4r}
        assert!((s.r() - 0.6 * 10f64.ln() / 4.0).abs() < 1e-14);
    }

    #[test]
    fn experimental_levels_match_one_photon() {
        let s = db_to_spec(3.2, 7.4, 0.0).unwrap();
        // Independent inversion: V_min = (2n+1) e^{-2r}, V_max = (2n+1) e^{2r}.
        let v_min = 10f64.powf(-0.32);
        let v_max = 10f64.powf(0.74);
        let nu = 2.0 * s.n_th() + 1.0;
        assert!((nu * (-2.0 * s.r()).exp() - v_min).abs() < 1e-12);
        assert!((nu * (2.0 * s.r()).exp() - v_max).abs() < 1e-12);
        assert!((s.n_th() - 0.310905).abs() < 1e-6);
        assert!((s.r() - 0.610185).abs() < 1e-6);
        assert!((s.mean_photons() - (v_min + v_max - 2.0) / 4.0).abs() < 1e-12);
        assert!((s.mean_photons() - 0.99).abs() < 0.01);
    }

    #[test]
    fn rejects_unphysical_pairs() {
        assert!(db_to_spec(6.0, 3.0, 0.0).is_err());
        assert!(db_to_spec(-5.0, 3.0, 0.0).is_err());
        assert!(ModeSpec::new(Complex64::from(0.0), -0.1, 0.0, 0.0).is_err());
        assert!(ModeSpec::new(Complex64::from(0.0), 0.1, 0.0, -1.0).is_err());
    }

    #[test]
    fn record_accepts_db_alternative() {
        let json = r#"{"alpha_re": 0.5, "sqz_db": 3.2, "antisqz_db": 7.4}"#;
        let s: ModeSpec = serde_json::from_str(json).unwrap();
        assert!((s.alpha().re - 0.5).abs() < 1e-15);
        assert!((s.n_th() - 0.310905).abs() < 1e-6);
    }

    #[test]
    fn record_rejects_mixed_parameterisation() {
        let rec = ModeSpecRecord {
            r: Some(0.3),
            sqz_db: Some(3.0),
            antisqz_db: Some(4.0),
            ..Default::default()
        };
        assert!(ModeSpec::try_from(rec).is_err());
        let rec = ModeSpecRecord {
            sqz_db: Some(3.0),
            ..Default::default()
        };
        assert!(ModeSpec::try_from(rec).is_err());
    }

    #[test]
    fn record_round_trip() {
        let s = ModeSpec::new(Complex64::new(0.3, -0.2), 0.4, 1.0, 0.1).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: ModeSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
