//! Run configuration: one JSON document, unknown keys rejected, every
//! omitted section filled from documented defaults.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use fracflow::norms::NormSpec;
use fracflow::solver::{DataSpec, FlowConfig, PicardConfig, ProblemSpec, TimeGrid};
use fracflow::spectral::{Grid, MultIndex};
use fracflow::verify::{DecaySpec, ProbeSpec, SmoothingSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: Grid,
    pub problem: ProblemSpec,
    /// Default: homogeneous self-similar φ of amplitude 0.01, ψ = 0.
    #[serde(default)]
    pub data: Option<DataSpec>,
    /// Default: uniform on [0, 1] with 32 steps.
    #[serde(default = "default_timegrid")]
    pub timegrid: TimeGrid,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default)]
    pub norms: NormsConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_timegrid() -> TimeGrid {
    TimeGrid::uniform(1.0, 32)
}

/// Morrey norm settings for `norms` and the per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    pub spec: NormSpec,
    pub stride: usize,
    pub per_octave: usize,
}

impl Default for NormsConfig {
    fn default() -> Self {
        NormsConfig { spec: NormSpec::new(2.0, 0.5, 0.0), stride: 1, per_octave: 2 }
    }
}

/// Parameters of the flow and smoothing checks. Tolerances are the
/// calibrated acceptance values; `--tolerance-scale` multiplies them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub gammas: Vec<f64>,
    pub probe: ProbeSpec,
    pub selfsim_tol: f64,
    pub decay: DecaySpec,
    pub decay_tol: f64,
    pub symmetry_tol: f64,
    pub stability_scales: Vec<f64>,
    pub stability_tol: f64,
    pub profile_tol: f64,
    pub smoothing: Vec<SmoothingSpec>,
    pub smoothing_grid: Grid,
    pub smoothing_times: (f64, f64, usize),
    pub smoothing_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let item = |j, gamma2, p1, p2| SmoothingSpec { alpha: 1.5, gamma1: 0.0, gamma2, p1, p2, mu: 0.5, j, dim: 2 };
        VerifyConfig {
            gammas: vec![2f64.powf(0.25), 2f64.sqrt()],
            probe: ProbeSpec::default(),
            selfsim_tol: 0.05,
            decay: DecaySpec::default(),
            decay_tol: 0.1,
            symmetry_tol: 1e-10,
            stability_scales: vec![1e-3, 1e-2],
            stability_tol: 2.0,
            profile_tol: 0.05,
            smoothing: vec![
                item(MultIndex::One, 1.0, 2.0, 3.0),
                item(MultIndex::One, 1.0, 1.5, 4.5),
                item(MultIndex::Two, 0.0, 2.0, 3.0),
                item(MultIndex::AlphaAlpha, 1.0, 2.0, 3.0),
            ],
            smoothing_grid: Grid { dim: 2, points_per_axis: 512, length: 6.0 },
            smoothing_times: (1e-2, 1.0, 9),
            smoothing_tol: 10.0,
        }
    }
}

impl RunConfig {
    /// Configuration of the self-similarity acceptance run at 256².
    pub fn reference() -> Self {
        RunConfig {
            grid: Grid { dim: 2, points_per_axis: 256, length: 16.0 },
            problem: ProblemSpec::new(1.5, 3.0, 1.0, 1.0),
            data: Some(DataSpec::self_similar(1.5, 3.0, 0.005, 0.0)),
            timegrid: TimeGrid::uniform(3.0, 48),
            picard: PicardConfig::default(),
            norms: NormsConfig::default(),
            verify: VerifyConfig::default(),
            seed: 0,
        }
    }

    /// Fill `data` and validate the grid.
    pub fn effective(mut self) -> Result<Self> {
        let g = self.grid;
        Grid::new(g.dim, g.points_per_axis, g.length).context("grid")?;
        self.timegrid.validate().context("timegrid")?;
        if self.data.is_none() {
            self.data = Some(DataSpec::self_similar(self.problem.alpha, self.problem.rho, 0.01, 0.0));
        }
        Ok(self)
    }

    pub fn flow(&self) -> FlowConfig {
        FlowConfig {
            grid: self.grid,
            problem: self.problem,
            data: self.data.clone().unwrap_or_else(|| DataSpec::self_similar(self.problem.alpha, self.problem.rho, 0.01, 0.0)),
            timegrid: self.timegrid,
            picard: self.picard,
        }
    }
}

/// Read and validate a configuration; schema errors name the offending key path.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    parse_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

pub fn parse_str(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| anyhow::anyhow!("schema error at `{}`: {}", e.path(), e.inner()))?;
    cfg.effective()
}
