use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use polardeg::gaussian::{
    gaussian_to_fock, product_fock, repair, spec_to_gaussian, xi_state, GaussianMoments, ModeSpec, StateSpec,
    DEFAULT_REPAIR_TOL,
};
use polardeg::polarimetry::{analyse, closed_form_p1_coherent, closed_form_p1_squeezed, PolarisationReport};
use polardeg::tomography::{
    analyse_homodyne, bootstrap_counts, estimate_p1_from_counts, read_counts_csv, sample_homodyne_miscalibrated,
    sample_pnrd, write_counts_csv, BootstrapConfig, CalibrationModel, PnrdBasis, QuadratureDataset,
};
use polardeg::{TruncatedFockSpace, TwoModeDensityMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{linspace, Analysis, RunConfig, StateSource};
use crate::error::{CliError, CliResult, Context};

/// Allowed gap between numerical and closed-form curves on top of the
/// reported tail bound.
pub const ORACLE_TOL: f64 = 1e-6;

pub struct Outputs {
    dir: PathBuf,
}

impl Outputs {
    pub fn new(dir: PathBuf) -> CliResult<Self> {
        std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Self { dir })
    }

    fn create(&self, name: &str) -> CliResult<(PathBuf, BufWriter<File>)> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok((path, BufWriter::new(file)))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let (path, mut w) = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e.into(),
        })?;
        writeln!(w).and_then(|_| w.flush()).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }

    fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> CliResult<PathBuf> {
        let (path, w) = self.create(name)?;
        let mut w = csv::Writer::from_writer(w);
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Output {
                path: path.clone(),
                source: e.into(),
            })?;
        }
        w.flush().map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }

    fn with<F>(&self, name: &str, f: F) -> CliResult<PathBuf>
    where
        F: FnOnce(&mut BufWriter<File>) -> polardeg::Result<()>,
    {
        let (path, mut w) = self.create(name)?;
        f(&mut w).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?;
        w.flush().map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}

pub fn build_state(source: &StateSource, space: TruncatedFockSpace) -> CliResult<TwoModeDensityMatrix> {
    match source {
        StateSource::Gaussian(spec) => product_fock(spec, space).context(|| "building the Gaussian state".into()),
        StateSource::Xi { phi } => xi_state(*phi, space).context(|| "building the Ξ state".into()),
        StateSource::Fock(amps) => {
            let norm: f64 = amps.iter().map(|a| a.re * a.re + a.im * a.im).sum();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(CliError::Config(format!(
                    "fock amplitudes have squared norm {norm}, expected 1"
                )));
            }
            let triples: Vec<_> = amps.iter().map(|a| (a.m, a.n, Complex64::new(a.re, a.im))).collect();
            TwoModeDensityMatrix::from_fock_amplitudes(space, &triples)
                .context(|| "building the Fock state (raise space.dim?)".into())
        }
    }
}

fn analyse_state(source: &StateSource, space: TruncatedFockSpace, n_max: usize) -> CliResult<PolarisationReport> {
    let rho = build_state(source, space)?;
    analyse(&rho, n_max).context(|| "analysing the state".into())
}

#[derive(Serialize)]
struct SweepRow {
    value: f64,
    mean_photons: f64,
    p1: f64,
    p1sc: f64,
    tail_bound: f64,
}

pub fn polarisation(cfg: &RunConfig, out: &Outputs) -> CliResult<Vec<PathBuf>> {
    if cfg.analysis != Analysis::Analytic {
        return Err(CliError::Config(
            "`polarisation` is analytic only; use `tomo` for homodyne or pnrd".into(),
        ));
    }
    let source = cfg.state()?;
    let (space, n_max) = cfg.space(cfg.default_dim()?)?;
    let report = analyse_state(source, space, n_max)?;
    let mut files = vec![
        out.json("report.json", &report)?,
        out.with("manifolds.csv", |w| report.write_manifold_csv(w))?,
    ];
    if let Some(sweep) = &cfg.sweep {
        let points = sweep
            .values()?
            .into_iter()
            .map(|v| source.with_parameter(&sweep.parameter, v).map(|s| (v, s)))
            .collect::<CliResult<Vec<_>>>()?;
        let rows = points
            .par_iter()
            .map(|(v, s)| {
                let r = analyse_state(s, space, n_max)?;
                Ok(SweepRow {
                    value: *v,
                    mean_photons: r.mean_photons,
                    p1: r.p1,
                    p1sc: r.p1sc,
                    tail_bound: r.tail_bound,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        files.push(out.csv("sweep.csv", &rows)?);
    }
    Ok(files)
}

#[derive(Serialize)]
struct Fig1Row {
    mean_photons: f64,
    p1_coherent: f64,
    p1_squeezed: f64,
    p1sc: f64,
}

/// Coherent and squeezed-vacuum curves against the mean photon number; the
/// squeezed state with `⟨n⟩ = sinh² r`.
pub fn sweep_fig1(cfg: &RunConfig, out: &Outputs) -> CliResult<Vec<PathBuf>> {
    let (space, n_max) = cfg.space(96)?;
    let photons = linspace(0.0, cfg.fig1.photons_max, cfg.fig1.steps)?;
    if cfg.fig1.photons_max < 0.0 {
        return Err(CliError::Config("fig1.photons_max must be non-negative".into()));
    }
    let rows = photons
        .par_iter()
        .map(|&n| {
            let alpha = Complex64::new(n.sqrt(), 0.0);
            let r = n.sqrt().asinh();
            let coherent = StateSource::Gaussian(StateSpec::new(
                ModeSpec::coherent(alpha).context(|| format!("coherent mode at ⟨n⟩ = {n}"))?,
                ModeSpec::vacuum(),
            ));
            let squeezed = StateSource::Gaussian(StateSpec::new(
                ModeSpec::squeezed_vacuum(r, 0.0).context(|| format!("squeezed mode at ⟨n⟩ = {n}"))?,
                ModeSpec::vacuum(),
            ));
            let c = analyse_state(&coherent, space, n_max)?;
            let s = analyse_state(&squeezed, space, n_max)?;
            let checks = [
                (
                    "coherent P1",
                    c.p1,
                    closed_form_p1_coherent(alpha, Complex64::from(0.0)),
                    c.tail_bound,
                ),
                (
                    "squeezed P1",
                    s.p1,
                    closed_form_p1_squeezed(Complex64::from(0.0), Complex64::from(r)),
                    s.tail_bound,
                ),
                ("coherent P1sc", c.p1sc, if n > 0.0 { 1.0 } else { 0.0 }, 0.0),
                ("squeezed P1sc", s.p1sc, if n > 0.0 { 1.0 } else { 0.0 }, 0.0),
            ];
            for (what, got, want, tail) in checks {
                if (got - want).abs() > ORACLE_TOL + tail {
                    return Err(CliError::Oracle(format!(
                        "{what} at ⟨n⟩ = {n}: numerical {got}, closed form {want} (raise --dim?)"
                    )));
                }
            }
            Ok(Fig1Row {
                mean_photons: n,
                p1_coherent: c.p1,
                p1_squeezed: s.p1,
                p1sc: c.p1sc,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(vec![out.csv("fig1.csv", &rows)?])
}

#[derive(Serialize)]
struct GridRow {
    param1: f64,
    param2: f64,
    p1: f64,
    p1sc: f64,
}

/// The three two-mode families: (a) squeezed vacua `(r_H, r_V)`, (b) coherent
/// H and squeezed vacuum V `(α_H, r_V)`, (c) displaced squeezed states with
/// fixed squeezing `(α_H, β_V)`.
pub fn grid_fig2(cfg: &RunConfig, out: &Outputs) -> CliResult<Vec<PathBuf>> {
    let g = cfg.fig2;
    let (space, n_max) = cfg.space(48)?;
    let rs = linspace(0.0, g.r_max, g.steps)?;
    let alphas = linspace(0.0, g.alpha_max, g.steps)?;
    let real = |x: f64| Complex64::new(x, 0.0);
    type Family = Box<dyn Fn(f64, f64) -> polardeg::Result<StateSpec> + Sync>;
    let families: [(&str, &[f64], &[f64], Family); 3] = [
        (
            "fig2_a.csv",
            &rs,
            &rs,
            Box::new(|rh, rv| {
                Ok(StateSpec::new(
                    ModeSpec::squeezed_vacuum(rh, 0.0)?,
                    ModeSpec::squeezed_vacuum(rv, 0.0)?,
                ))
            }),
        ),
        (
            "fig2_b.csv",
            &alphas,
            &rs,
            Box::new(move |a, rv| {
                Ok(StateSpec::new(
                    ModeSpec::coherent(real(a))?,
                    ModeSpec::squeezed_vacuum(rv, 0.0)?,
                ))
            }),
        ),
        (
            "fig2_c.csv",
            &alphas,
            &alphas,
            Box::new(move |a, b| {
                Ok(StateSpec::new(
                    ModeSpec::new(real(a), g.r_h_fixed, 0.0, 0.0)?,
                    ModeSpec::new(real(b), g.r_v_fixed, 0.0, 0.0)?,
                ))
            }),
        ),
    ];
    let mut files = Vec::new();
    for (name, xs, ys, family) in &families {
        let points: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
        let rows = points
            .par_iter()
            .map(|&(x, y)| {
                let spec = family(x, y).map_err(|e| CliError::Config(format!("{name} at ({x}, {y}): {e}")))?;
                let r = analyse_state(&StateSource::Gaussian(spec), space, n_max)?;
                Ok(GridRow {
                    param1: x,
                    param2: y,
                    p1: r.p1,
                    p1sc: r.p1sc,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        files.push(out.csv(name, &rows)?);
    }
    Ok(files)
}

#[derive(Serialize)]
struct Fig4Row {
    alpha: f64,
    n_v: f64,
    p1: f64,
    p1sc: f64,
    p1_err: f64,
    p1sc_err: f64,
}

/// Moments as seen through a shot-noise reference off by `1 + eps`.
fn miscalibrated(m: &GaussianMoments, eps: f64) -> GaussianMoments {
    GaussianMoments::new(m.mean / (1.0 + eps).sqrt(), m.cov / (1.0 + eps))
}

fn fig4_point(
    h: ModeSpec,
    alpha: f64,
    sigma: f64,
    space: TruncatedFockSpace,
    n_max: usize,
) -> CliResult<(Fig4Row, PolarisationReport)> {
    let v = ModeSpec::coherent(Complex64::new(alpha, 0.0)).context(|| format!("V mode at α = {alpha}"))?;
    let spec = StateSpec::new(h, v);
    let report = analyse_state(&StateSource::Gaussian(spec), space, n_max)?;
    let truth = spec_to_gaussian(&spec);
    let shifted = [sigma, -sigma]
        .into_iter()
        .map(|eps| {
            let fixed = repair(&miscalibrated(truth.moments(), eps), DEFAULT_REPAIR_TOL)
                .context(|| format!("calibration shift {eps} at α = {alpha}"))?;
            let rho = gaussian_to_fock(&fixed.state, space).context(|| format!("calibration shift at α = {alpha}"))?;
            analyse(&rho, n_max).context(|| format!("calibration shift at α = {alpha}"))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let row = Fig4Row {
        alpha,
        n_v: alpha * alpha,
        p1: report.p1,
        p1sc: report.p1sc,
        p1_err: 0.5 * (shifted[0].p1 - shifted[1].p1).abs(),
        p1sc_err: 0.5 * (shifted[0].p1sc - shifted[1].p1sc).abs(),
    };
    Ok((row, report))
}

/// Squeezed thermal H mode against a coherent V mode of growing amplitude.
/// Error columns propagate a `±σ` shot-noise miscalibration.
pub fn sweep_fig4(cfg: &RunConfig, out: &Outputs) -> CliResult<Vec<PathBuf>> {
    let f = cfg.fig4;
    let h = f.h_mode()?;
    let (space, n_max) = cfg.space(64)?;
    CalibrationModel::new(f.shot_noise_rel_uncertainty).map_err(|e| CliError::Config(format!("fig4: {e}")))?;
    let alphas = linspace(f.alpha_start, f.alpha_stop, f.steps)?;
    let rows = alphas
        .par_iter()
        .map(|&a| fig4_point(h, a, f.shot_noise_rel_uncertainty, space, n_max).map(|p| p.0))
        .collect::<CliResult<Vec<_>>>()?;
    let (_, inset) = fig4_point(h, f.inset_alpha, f.shot_noise_rel_uncertainty, space, n_max)?;
    Ok(vec![
        out.csv("fig4.csv", &rows)?,
        out.with("fig4_inset.csv", |w| inset.write_manifold_csv(w))?,
    ])
}

#[derive(Serialize)]
struct TomoSummary<'a> {
    analysis: Analysis,
    seed: u64,
    samples: Option<usize>,
    shots_per_basis: Option<u64>,
    replicates: usize,
    shot_noise_rel_uncertainty: f64,
    data_file: String,
    report: &'a PolarisationReport,
}

pub fn tomo(cfg: &RunConfig, out: &Outputs) -> CliResult<Vec<PathBuf>> {
    let seed = cfg
        .seed
        .ok_or_else(|| CliError::Config("`tomo` needs a seed (config `seed` or --seed)".into()))?;
    let t = &cfg.tomography;
    let cal = CalibrationModel::new(t.shot_noise_rel_uncertainty)
        .map_err(|e| CliError::Config(format!("tomography: {e}")))?;
    let source = cfg.state()?;
    let (space, n_max) = cfg.space(cfg.default_dim()?)?;
    let open = |p: &Path| {
        File::open(p).map(BufReader::new).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        })
    };
    match cfg.analysis {
        Analysis::Analytic => Err(CliError::Config("`tomo` needs analysis = homodyne or pnrd".into())),
        Analysis::Homodyne => {
            let StateSource::Gaussian(spec) = source else {
                return Err(CliError::Config("homodyne tomography needs a `gaussian` state".into()));
            };
            let ds = match &t.input {
                Some(p) => QuadratureDataset::read_csv(open(p)?).context(|| format!("reading {}", p.display()))?,
                None => {
                    sample_homodyne_miscalibrated(&spec_to_gaussian(spec), t.samples, &cal, seed)
                        .context(|| "simulating homodyne data".into())?
                        .0
                }
            };
            let boot = BootstrapConfig::new(t.replicates, seed, space, n_max);
            let (report, _) = analyse_homodyne(&ds, &cal, &boot).context(|| "homodyne estimate".into())?;
            let data = out.with("quadratures.csv", |w| ds.write_csv(w))?;
            let summary = TomoSummary {
                analysis: Analysis::Homodyne,
                seed,
                samples: Some(ds.len()),
                shots_per_basis: None,
                replicates: t.replicates,
                shot_noise_rel_uncertainty: cal.sigma(),
                data_file: "quadratures.csv".into(),
                report: &report,
            };
            Ok(vec![
                out.json("report.json", &summary)?,
                out.with("manifolds.csv", |w| report.write_manifold_csv(w))?,
                data,
            ])
        }
        Analysis::Pnrd => {
            let records = match &t.input {
                Some(p) => read_counts_csv(open(p)?).context(|| format!("reading {}", p.display()))?,
                None => {
                    let rho = build_state(source, space)?;
                    PnrdBasis::ALL
                        .iter()
                        .map(|&b| {
                            sample_pnrd(&rho, b, t.shots, seed).context(|| format!("simulating {} counts", b.name()))
                        })
                        .collect::<CliResult<Vec<_>>>()?
                }
            };
            let report = estimate_p1_from_counts(&records, Some(n_max)).context(|| "PNRD estimate".into())?;
            let boot =
                bootstrap_counts(&records, t.replicates, seed, Some(n_max)).context(|| "PNRD bootstrap".into())?;
            let report = report.with_error_bars(boot.bars);
            let data = out.with("counts.csv", |w| write_counts_csv(&records, w))?;
            let summary = TomoSummary {
                analysis: Analysis::Pnrd,
                seed,
                samples: None,
                shots_per_basis: records.first().map(|r| r.shots()),
                replicates: t.replicates,
                shot_noise_rel_uncertainty: cal.sigma(),
                data_file: "counts.csv".into(),
                report: &report,
            };
            Ok(vec![
                out.json("report.json", &summary)?,
                out.with("manifolds.csv", |w| report.write_manifold_csv(w))?,
                data,
            ])
        }
    }
}
