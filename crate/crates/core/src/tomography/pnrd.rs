use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;

use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bootstrap::{summarise, BootstrapResult, MIN_REPLICATES};
use super::rng::{substream, DATA_STREAM, REPLICATE_STREAM_BASE};
use crate::error::{Error, Result};
use crate::fock::TwoModeDensityMatrix;
use crate::polarimetry::{
    su2_rotate, ManifoldDecomposition, ManifoldEntry, PolarisationReport, EPS_P, S1_AXIS, S2_AXIS,
};

/// Largest missing probability mass tolerated before sampling.
pub const PNRD_MASS_TOL: f64 = 1e-6;

/// Measurement basis of the two photon-number-resolving detectors. The
/// difference of the two counts estimates `S3`, `S1` or `S2` respectively.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PnrdBasis {
    Intensity,
    Diagonal,
    Circular,
}

impl PnrdBasis {
    pub const ALL: [PnrdBasis; 3] = [PnrdBasis::Intensity, PnrdBasis::Diagonal, PnrdBasis::Circular];

    pub fn name(self) -> &'static str {
        match self {
            PnrdBasis::Intensity => "intensity",
            PnrdBasis::Diagonal => "diagonal",
            PnrdBasis::Circular => "circular",
        }
    }

    /// Index of the Stokes component this basis measures (0 for `S1`).
    pub fn stokes_index(self) -> usize {
        match self {
            PnrdBasis::Diagonal => 0,
            PnrdBasis::Circular => 1,
            PnrdBasis::Intensity => 2,
        }
    }

    fn index(self) -> u64 {
        match self {
            PnrdBasis::Intensity => 0,
            PnrdBasis::Diagonal => 1,
            PnrdBasis::Circular => 2,
        }
    }

    /// The state seen by the detectors: `S3` of the result equals the
    /// measured component of `rho`.
    pub fn rotate(self, rho: &TwoModeDensityMatrix) -> Result<TwoModeDensityMatrix> {
        match self {
            PnrdBasis::Intensity => Ok(rho.clone()),
            PnrdBasis::Diagonal => su2_rotate(rho, S2_AXIS, -std::f64::consts::FRAC_PI_2),
            PnrdBasis::Circular => su2_rotate(rho, S1_AXIS, std::f64::consts::FRAC_PI_2),
        }
    }
}

impl FromStr for PnrdBasis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PnrdBasis::ALL
            .into_iter()
            .find(|b| b.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidCounts(format!("unknown basis `{s}`")))
    }
}

/// Joint count distribution `q(m, n)` in one basis.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisDistribution {
    pub basis: PnrdBasis,
    pub probs: BTreeMap<(usize, usize), f64>,
}

impl BasisDistribution {
    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }
}

/// Exact detector distribution for `rho` in `basis`.
pub fn basis_distribution(rho: &TwoModeDensityMatrix, basis: PnrdBasis) -> Result<BasisDistribution> {
    let rotated = basis.rotate(rho)?;
    let space = rotated.space();
    let probs = rotated
        .populations()
        .into_iter()
        .enumerate()
        .map(|(i, p)| (space.occupations(i), p.max(0.0)))
        .collect();
    Ok(BasisDistribution { basis, probs })
}

/// Counts of joint detection events `(m, n)` in one basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountRecord {
    pub basis: PnrdBasis,
    pub counts: BTreeMap<(usize, usize), u64>,
}

impl CountRecord {
    pub fn shots(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn frequencies(&self) -> BasisDistribution {
        let shots = self.shots().max(1) as f64;
        BasisDistribution {
            basis: self.basis,
            probs: self.counts.iter().map(|(&k, &c)| (k, c as f64 / shots)).collect(),
        }
    }
}

fn multinomial(
    rng: &mut ChaCha20Rng,
    shots: u64,
    probs: &[((usize, usize), f64)],
) -> Result<BTreeMap<(usize, usize), u64>> {
    let mut counts = BTreeMap::new();
    let mut left = shots;
    let mut mass: f64 = probs.iter().map(|p| p.1).sum();
    for (i, &(key, p)) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        let c = if i + 1 == probs.len() {
            left
        } else {
            let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
            Binomial::new(left, q)
                .map_err(|e| Error::Bootstrap(e.to_string()))?
                .sample(rng)
        };
        if c > 0 {
            counts.insert(key, c);
        }
        left -= c;
        mass -= p;
    }
    Ok(counts)
}

/// Simulates `shots` detection events in `basis`.
pub fn sample_pnrd(rho: &TwoModeDensityMatrix, basis: PnrdBasis, shots: u64, seed: u64) -> Result<CountRecord> {
    if shots == 0 {
        return Err(Error::InsufficientSamples { required: 1, found: 0 });
    }
    let dist = basis_distribution(rho, basis)?;
    let total = dist.total();
    if total < 1.0 - PNRD_MASS_TOL {
        return Err(Error::ProbabilityDeficit {
            total,
            required: 1.0 - PNRD_MASS_TOL,
        });
    }
    let probs: Vec<_> = dist.probs.into_iter().filter(|p| p.1 > 0.0).collect();
    let mut rng = substream(seed, DATA_STREAM + 1 + basis.index());
    Ok(CountRecord {
        basis,
        counts: multinomial(&mut rng, shots, &probs)?,
    })
}

fn one_per_basis<T>(items: &[T], basis_of: impl Fn(&T) -> PnrdBasis) -> Result<[&T; 3]> {
    let mut found: [Option<&T>; 3] = [None; 3];
    for item in items {
        let slot = &mut found[basis_of(item).stokes_index()];
        if slot.is_some() {
            return Err(Error::InvalidCounts(format!(
                "basis `{}` appears twice",
                basis_of(item).name()
            )));
        }
        *slot = Some(item);
    }
    let mut out = Vec::with_capacity(3);
    for (k, f) in found.into_iter().enumerate() {
        let basis = PnrdBasis::ALL
            .into_iter()
            .find(|b| b.stokes_index() == k)
            .unwrap_or(PnrdBasis::Intensity);
        out.push(f.ok_or_else(|| Error::InvalidCounts(format!("missing basis `{}`", basis.name())))?);
    }
    Ok([out[0], out[1], out[2]])
}

/// Manifold decomposition from the three detector distributions.
///
/// `p_N` is pooled over the bases. Component `j` of `⟨S⟩_N` is the mean count
/// difference within manifold `N` of the basis measuring `S_j`. A manifold
/// with no weight in some basis is left undefined and enters the tail bound.
pub fn estimate_from_distributions(dists: &[BasisDistribution], n_max: Option<usize>) -> Result<ManifoldDecomposition> {
    let by_component = one_per_basis(dists, |d| d.basis)?;
    let top = dists
        .iter()
        .flat_map(|d| d.probs.keys().map(|&(m, n)| m + n))
        .max()
        .unwrap_or(0);
    let n_max = n_max.unwrap_or(top);
    let mut p = vec![[0.0; 3]; n_max + 1];
    let mut moment = vec![[0.0; 3]; n_max + 1];
    for (j, d) in by_component.iter().enumerate() {
        for (&(m, n), &q) in &d.probs {
            if m + n <= n_max {
                p[m + n][j] += q;
                moment[m + n][j] += (m as f64 - n as f64) * q;
            }
        }
    }
    let entries: Vec<ManifoldEntry> = (0..=n_max)
        .map(|n| {
            let probability = p[n].iter().sum::<f64>() / 3.0;
            let defined = probability > EPS_P && p[n].iter().all(|&x| x > EPS_P);
            let (stokes, weighted) = if defined {
                let stokes = [0, 1, 2].map(|j| moment[n][j] / p[n][j]);
                (stokes, stokes.map(|v| probability * v))
            } else {
                ([0.0; 3], moment[n])
            };
            ManifoldEntry {
                n,
                probability,
                stokes,
                weighted,
                defined,
            }
        })
        .collect();
    let total: f64 = entries.iter().map(|e| e.probability).sum();
    Ok(ManifoldDecomposition {
        n_max,
        entries,
        tail: (1.0 - total).max(0.0),
    })
}

/// `P1` and `P1sc` estimated from one count record per basis.
pub fn estimate_p1_from_counts(records: &[CountRecord], n_max: Option<usize>) -> Result<PolarisationReport> {
    for r in records {
        if r.shots() == 0 {
            return Err(Error::InvalidCounts(format!(
                "basis `{}` has no counts",
                r.basis.name()
            )));
        }
    }
    let dists: Vec<_> = records.iter().map(CountRecord::frequencies).collect();
    Ok(PolarisationReport::from_decomposition(estimate_from_distributions(
        &dists, n_max,
    )?))
}

/// Nonparametric bootstrap: every replicate redraws each basis from its own
/// empirical distribution with the same number of shots.
pub fn bootstrap_counts(
    records: &[CountRecord],
    replicates: usize,
    seed: u64,
    n_max: Option<usize>,
) -> Result<BootstrapResult> {
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidSpec(format!(
            "bootstrap needs at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    one_per_basis(records, |r| r.basis)?;
    type Empirical = (PnrdBasis, u64, Vec<((usize, usize), f64)>);
    let empirical: Vec<Empirical> = records
        .iter()
        .map(|r| (r.basis, r.shots(), r.frequencies().probs.into_iter().collect()))
        .collect();
    let values: Vec<(f64, f64)> = (0..replicates)
        .into_par_iter()
        .filter_map(|b| {
            let mut rng = substream(seed, REPLICATE_STREAM_BASE + b as u64);
            let redrawn: Option<Vec<CountRecord>> = empirical
                .iter()
                .map(|(basis, shots, probs)| {
                    multinomial(&mut rng, *shots, probs)
                        .ok()
                        .map(|counts| CountRecord { basis: *basis, counts })
                })
                .collect();
            let report = estimate_p1_from_counts(&redrawn?, n_max).ok()?;
            Some((report.p1, report.p1sc))
        })
        .collect();
    summarise(&values, replicates)
}

#[derive(Serialize, Deserialize)]
struct CountRow {
    basis: PnrdBasis,
    m: usize,
    n: usize,
    count: u64,
}

/// Writes records as `basis,m,n,count` rows, zero counts omitted.
pub fn write_counts_csv<W: Write>(records: &[CountRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        for (&(m, n), &count) in &r.counts {
            w.serialize(CountRow {
                basis: r.basis,
                m,
                n,
                count,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_counts_csv<R: Read>(reader: R) -> Result<Vec<CountRecord>> {
    let mut by_basis: BTreeMap<PnrdBasis, BTreeMap<(usize, usize), u64>> = BTreeMap::new();
    for row in csv::Reader::from_reader(reader).deserialize::<CountRow>() {
        let row = row?;
        let slot = by_basis
            .entry(row.basis)
            .or_default()
            .entry((row.m, row.n))
            .or_insert(0);
        *slot = slot
            .checked_add(row.count)
            .ok_or_else(|| Error::InvalidCounts("count overflow".into()))?;
    }
    Ok(by_basis
        .into_iter()
        .map(|(basis, counts)| CountRecord { basis, counts })
        .collect())
}
