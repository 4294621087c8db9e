//! `--config` files.
//!
//! Every key is optional and flags given on the command line win. Unknown
//! keys are an input error.

use std::path::{Path, PathBuf};

use current1d::suite::SuiteSizes;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub suite: Option<SuiteSizes>,
    pub rickman: Option<RickmanParams>,
    pub approx: Option<ApproxParams>,
    pub homotopy: Option<HomotopyParams>,
    pub normalize: Option<NormalizeParams>,
    pub flatnorm: Option<FlatParams>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RickmanParams {
    pub s_grid: Option<usize>,
    pub alpha: Option<f64>,
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxParams {
    pub eps: Option<f64>,
    pub mesh: Option<f64>,
    pub length_cap: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomotopyParams {
    pub panel_seed: Option<u64>,
    pub quad_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizeParams {
    pub hyperplane: Option<[f64; 3]>,
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatParams {
    /// `[nx, ny, h]`.
    pub grid: Option<(usize, usize, f64)>,
    pub origin: Option<[f64; 2]>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        Ok(current1d::io::from_json(&text, "config")?)
    }
}
