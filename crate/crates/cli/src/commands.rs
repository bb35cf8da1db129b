//! The computations behind each subcommand and their reports.

use dmspec::ids::default_grid;
use dmspec::spectrum::orbit_bands;
use dmspec::{
    gap_report, ids_estimate, integrality_check, rotation_number, union_spectrum, Band,
    DichotomyParams, Error, Gap, IdsTable, IntegralityVerdict, RotationParams, SpectrumApprox,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::output::Tabular;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitBands {
    pub orbit: String,
    pub period: u32,
    pub bands: Vec<Band>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandsReport {
    pub orbits: Vec<OrbitBands>,
    pub spectrum: SpectrumApprox,
}

#[derive(Serialize)]
pub struct BandRow {
    kind: &'static str,
    orbit: String,
    period: u32,
    index: usize,
    lo: f64,
    hi: f64,
}

impl Tabular for BandsReport {
    type Row = BandRow;
    const HEADER: &'static [&'static str] = &["kind", "orbit", "period", "index", "lo", "hi"];

    fn rows(&self) -> Vec<BandRow> {
        let mut rows = Vec::new();
        for o in &self.orbits {
            for (i, b) in o.bands.iter().enumerate() {
                rows.push(BandRow {
                    kind: "orbit",
                    orbit: o.orbit.clone(),
                    period: o.period,
                    index: i,
                    lo: b.lo,
                    hi: b.hi,
                });
            }
        }
        for (i, b) in self.spectrum.bands.iter().enumerate() {
            rows.push(BandRow {
                kind: "merged",
                orbit: String::new(),
                period: self.spectrum.max_period_used,
                index: i,
                lo: b.lo,
                hi: b.hi,
            });
        }
        rows
    }
}

pub fn bands(config: &RunConfig) -> dmspec::Result<BandsReport> {
    let c = &config.command;
    let per_orbit = orbit_bands(&config.sampling, c.max_period, config.base, c.tol)?;
    let all = per_orbit.iter().flat_map(|(_, b)| b.iter().copied()).collect();
    let spectrum = SpectrumApprox::from_bands(all, c.max_period, c.tol)?;
    Ok(BandsReport {
        orbits: per_orbit
            .into_iter()
            .map(|(o, bands)| OrbitBands {
                orbit: o.label(),
                period: o.period(),
                bands,
            })
            .collect(),
        spectrum,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectrumReport(pub SpectrumApprox);

#[derive(Serialize)]
pub struct SpectrumRow {
    index: usize,
    lo: f64,
    hi: f64,
}

impl Tabular for SpectrumReport {
    type Row = SpectrumRow;
    const HEADER: &'static [&'static str] = &["index", "lo", "hi"];

    fn rows(&self) -> Vec<SpectrumRow> {
        self.0
            .bands
            .iter()
            .enumerate()
            .map(|(index, b)| SpectrumRow {
                index,
                lo: b.lo,
                hi: b.hi,
            })
            .collect()
    }
}

pub fn spectrum(config: &RunConfig) -> dmspec::Result<SpectrumReport> {
    let c = &config.command;
    union_spectrum(&config.sampling, c.max_period, config.base, c.tol).map(SpectrumReport)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapsReport {
    pub max_period: u32,
    pub hull: Band,
    pub gaps: Vec<Gap>,
}

#[derive(Serialize)]
pub struct GapRow {
    lo: f64,
    hi: f64,
    length: f64,
    below_resolution: bool,
}

impl Tabular for GapsReport {
    type Row = GapRow;
    const HEADER: &'static [&'static str] = &["lo", "hi", "length", "below_resolution"];

    fn rows(&self) -> Vec<GapRow> {
        self.gaps
            .iter()
            .map(|g| GapRow {
                lo: g.lo,
                hi: g.hi,
                length: g.length,
                below_resolution: g.below_resolution,
            })
            .collect()
    }
}

pub fn gaps(config: &RunConfig) -> dmspec::Result<GapsReport> {
    let s = spectrum(config)?.0;
    Ok(GapsReport {
        max_period: s.max_period_used,
        hull: s.hull,
        gaps: gap_report(&s),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdsReport {
    pub table: IdsTable,
    pub tolerance: f64,
}

#[derive(Serialize)]
pub struct IdsRow {
    energy: f64,
    k: f64,
}

impl Tabular for IdsReport {
    type Row = IdsRow;
    const HEADER: &'static [&'static str] = &["energy", "k"];

    fn rows(&self) -> Vec<IdsRow> {
        self.table
            .energies
            .iter()
            .zip(&self.table.k_values)
            .map(|(&energy, &k)| IdsRow { energy, k })
            .collect()
    }
}

/// The configured grid, filling unspecified ends from the spectral hull.
pub fn energy_grid(config: &RunConfig, hull: &Band) -> Vec<f64> {
    let Some(g) = &config.command.grid else {
        return default_grid(hull, dmspec::ids::DEFAULT_GRID_POINTS);
    };
    let lo = g.lo.unwrap_or(hull.lo - 1.0);
    let hi = g.hi.unwrap_or(hull.hi + 1.0);
    if g.points < 2 {
        return vec![lo];
    }
    (0..g.points)
        .map(|i| lo + (hi - lo) * i as f64 / (g.points - 1) as f64)
        .collect()
}

/// Returns the report and the band union used to place the grid.
pub fn ids(config: &RunConfig) -> dmspec::Result<(IdsReport, SpectrumApprox)> {
    let c = &config.command;
    let s = spectrum(config)?.0;
    let grid = energy_grid(config, &s.hull);
    let table = ids_estimate(
        &config.sampling,
        &grid,
        c.truncation_size,
        c.samples,
        config.seed,
        config.base,
    )?;
    let tolerance = table.tolerance();
    Ok((IdsReport { table, tolerance }, s))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationRow {
    pub energy: f64,
    pub hyperbolic: bool,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub verdict: Option<IntegralityVerdict>,
    pub steps: usize,
    pub omega_samples: usize,
    pub max_reanchor_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationReport {
    pub integrality_tol: f64,
    pub rows: Vec<RotationRow>,
}

pub fn verdict_label(v: &IntegralityVerdict) -> String {
    match v {
        IntegralityVerdict::Integer(n) => format!("integer {n}"),
        IntegralityVerdict::NonInteger => "non-integer".into(),
        IntegralityVerdict::Inconclusive => "inconclusive".into(),
    }
}

#[derive(Serialize)]
pub struct RotationCsvRow {
    energy: f64,
    hyperbolic: bool,
    value: Option<f64>,
    stderr: Option<f64>,
    verdict: Option<String>,
    steps: usize,
    omega_samples: usize,
    max_reanchor_residual: Option<f64>,
}

impl Tabular for RotationReport {
    type Row = RotationCsvRow;
    const HEADER: &'static [&'static str] = &[
        "energy",
        "hyperbolic",
        "value",
        "stderr",
        "verdict",
        "steps",
        "omega_samples",
        "max_reanchor_residual",
    ];

    fn rows(&self) -> Vec<RotationCsvRow> {
        self.rows
            .iter()
            .map(|r| RotationCsvRow {
                energy: r.energy,
                hyperbolic: r.hyperbolic,
                value: r.value,
                stderr: r.stderr,
                verdict: r.verdict.as_ref().map(verdict_label),
                steps: r.steps,
                omega_samples: r.omega_samples,
                max_reanchor_residual: r.max_reanchor_residual,
            })
            .collect()
    }
}

pub fn rotation_params(config: &RunConfig) -> RotationParams {
    let c = &config.command;
    RotationParams {
        omega_samples: c.omega_samples,
        steps: c.steps,
        substeps: c.substeps,
        reanchor_every: c.reanchor_every,
        depth: c.depth,
        seed: config.seed,
        dichotomy: DichotomyParams {
            sample_count: c.dichotomy_samples,
            depth: c.depth,
            max_depth: c.depth * 8,
            seed: config.seed,
            base: config.base,
            ..Default::default()
        },
    }
}

pub fn rotation_row(config: &RunConfig, energy: f64) -> dmspec::Result<RotationRow> {
    let params = rotation_params(config);
    match rotation_number(&config.sampling, energy, &params) {
        Ok(est) => Ok(RotationRow {
            energy,
            hyperbolic: true,
            value: Some(est.value),
            stderr: Some(est.stderr),
            verdict: Some(integrality_check(&est, config.command.integrality_tol)),
            steps: est.steps_used,
            omega_samples: est.omega_samples,
            max_reanchor_residual: Some(est.max_reanchor_residual),
        }),
        Err(Error::NotHyperbolic { .. }) => Ok(RotationRow {
            energy,
            hyperbolic: false,
            value: None,
            stderr: None,
            verdict: None,
            steps: params.steps,
            omega_samples: params.omega_samples,
            max_reanchor_residual: None,
        }),
        Err(e) => Err(e),
    }
}

/// Energies from the config, or one above and one below the hull.
pub fn rotation(config: &RunConfig) -> dmspec::Result<RotationReport> {
    let energies = if config.command.energies.is_empty() {
        let hull = spectrum(config)?.0.hull;
        vec![hull.lo - 0.5, hull.hi + 0.5]
    } else {
        config.command.energies.clone()
    };
    let rows = energies
        .iter()
        .map(|&e| rotation_row(config, e))
        .collect::<dmspec::Result<_>>()?;
    Ok(RotationReport {
        integrality_tol: config.command.integrality_tol,
        rows,
    })
}
