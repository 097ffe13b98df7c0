use std::io::Write;

use serde::Serialize;

use super::manifold::{
    decompose, degree_p1, degree_p1sc, p1sc_from_decomposition, stokes_expectations, ManifoldDecomposition, EPS_0,
};
use crate::error::Result;
use crate::fock::TwoModeDensityMatrix;

/// One row of the per-manifold contribution table.
///
/// `contribution_sc_*` is `p_N ⟨S⟩_N / ⟨S0⟩`, so `P1sc` is the norm of their
/// column sums; `contribution_p1` is `p_N ‖⟨S⟩_N‖ / N`, so `P1` is its column
/// sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ManifoldRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "p_N")]
    pub p_n: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub contribution_sc_1: f64,
    pub contribution_sc_2: f64,
    pub contribution_sc_3: f64,
    pub contribution_p1: f64,
}

/// Spread of the two degrees over bootstrap replicates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorBars {
    pub p1_mean: f64,
    pub p1_std: f64,
    pub p1sc_mean: f64,
    pub p1sc_std: f64,
    pub replicates: usize,
    pub aborted: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolarisationReport {
    pub p1: f64,
    pub p1sc: f64,
    pub tail_bound: f64,
    pub mean_photons: f64,
    pub n_max: usize,
    /// `1 - Tr ρ`; zero for estimates that never formed a density matrix.
    pub truncation_loss: f64,
    /// Population in the top levels of either mode.
    pub edge_population: f64,
    pub decomposition: ManifoldDecomposition,
    pub manifolds: Vec<ManifoldRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bars: Option<ErrorBars>,
}

impl PolarisationReport {
    /// Builds the report from a decomposition, the full `P1sc` and the
    /// (unnormalised) `⟨S0⟩` used to scale the semi-classical contributions.
    pub fn from_parts(decomposition: ManifoldDecomposition, p1sc: f64, s0: f64) -> Self {
        let p1 = degree_p1(&decomposition);
        let manifolds = decomposition
            .entries
            .iter()
            .map(|e| {
                let scale = if s0 < EPS_0 { 0.0 } else { 1.0 / s0 };
                ManifoldRow {
                    n: e.n,
                    p_n: e.probability,
                    s1: e.stokes[0],
                    s2: e.stokes[1],
                    s3: e.stokes[2],
                    contribution_sc_1: scale * e.weighted[0],
                    contribution_sc_2: scale * e.weighted[1],
                    contribution_sc_3: scale * e.weighted[2],
                    contribution_p1: if e.defined { e.probability * e.degree() } else { 0.0 },
                }
            })
            .collect();
        Self {
            p1: p1.value,
            p1sc,
            tail_bound: p1.tail_bound,
            mean_photons: s0,
            n_max: decomposition.n_max,
            truncation_loss: 0.0,
            edge_population: 0.0,
            decomposition,
            manifolds,
            error_bars: None,
        }
    }

    /// Report for an estimate known only through its manifold statistics.
    pub fn from_decomposition(decomposition: ManifoldDecomposition) -> Self {
        let p1sc = p1sc_from_decomposition(&decomposition);
        let s0 = decomposition.mean_photons();
        Self::from_parts(decomposition, p1sc, s0)
    }

    pub fn with_error_bars(mut self, bars: ErrorBars) -> Self {
        self.error_bars = Some(bars);
        self
    }

    /// Column sums of the semi-classical contributions.
    pub fn sc_contribution_sum(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for r in &self.manifolds {
            s[0] += r.contribution_sc_1;
            s[1] += r.contribution_sc_2;
            s[2] += r.contribution_sc_3;
        }
        s
    }

    pub fn write_manifold_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.manifolds {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Decomposes `ρ` up to `n_max` and evaluates both degrees.
pub fn analyse(rho: &TwoModeDensityMatrix, n_max: usize) -> Result<PolarisationReport> {
    let dec = decompose(rho, n_max)?;
    let s0 = stokes_expectations(rho)[0];
    let mut report = PolarisationReport::from_parts(dec, degree_p1sc(rho), s0);
    report.truncation_loss = rho.truncation_loss();
    report.edge_population = rho.edge_population();
    Ok(report)
}
