//! Shared flags, the optional JSON config file, and their merge.
//!
//! Precedence is flag > config file > built-in default. The config file is a
//! flat JSON object holding the same names as the global flags, so a run is
//! reproducible from either source alone.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use crate::report::CliError;

#[derive(Args, Clone, Debug)]
pub struct CommonArgs {
    /// JSON file with the same keys as the global flags; flags win on conflict
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory that receives summary.json and the CSV artifacts
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    pub out: PathBuf,

    /// Map family: integrable | strange | user_table
    #[arg(long, global = true, value_name = "KIND")]
    pub map: Option<String>,

    /// Leaf amplitude profile for the strange family:
    /// zero | abs_gauss | abs_linear | smooth_gauss
    #[arg(long, global = true, value_name = "NAME")]
    pub eps_profile: Option<String>,

    /// Scale of the amplitude profile (default 1/(8*pi))
    #[arg(long, global = true, value_name = "X")]
    pub eps_scale: Option<f64>,

    /// Half-width of the strange family's leaf-label range
    #[arg(long, global = true, value_name = "X")]
    pub c_max: Option<f64>,

    /// Conjugacy applied to the integrable family: none | angle_warp
    #[arg(long, global = true, value_name = "NAME")]
    pub conjugate: Option<String>,

    /// CSV with columns x,r,fx,fr (user_table map)
    #[arg(long, global = true, value_name = "FILE")]
    pub map_table: Option<PathBuf>,

    /// CSV with columns theta,c,eta (user_table foliation)
    #[arg(long, global = true, value_name = "FILE")]
    pub foliation_table: Option<PathBuf>,

    /// Lower edge of the leaf-label window
    #[arg(long, global = true, value_name = "X")]
    pub window_lo: Option<f64>,

    /// Upper edge of the leaf-label window
    #[arg(long, global = true, value_name = "X")]
    pub window_hi: Option<f64>,

    /// Seed for every randomized sample in the run
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Deserialize, Default, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub map: Option<String>,
    pub eps_profile: Option<String>,
    pub eps_scale: Option<f64>,
    pub c_max: Option<f64>,
    pub conjugate: Option<String>,
    pub map_table: Option<PathBuf>,
    pub foliation_table: Option<PathBuf>,
    pub window_lo: Option<f64>,
    pub window_hi: Option<f64>,
    pub seed: Option<u64>,
}

/// Fully resolved run settings.
#[derive(Clone, Debug)]
pub struct Settings {
    pub kind: String,
    pub eps_profile: String,
    pub eps_scale: f64,
    pub c_max: f64,
    pub conjugate: String,
    pub map_table: Option<PathBuf>,
    pub foliation_table: Option<PathBuf>,
    /// None means "use the family's natural window".
    pub window: Option<(f64, f64)>,
    pub seed: u64,
}

pub const DEFAULT_EPS_SCALE: f64 = 1.0 / (8.0 * PI);

pub fn resolve(common: &CommonArgs) -> Result<Settings, CliError> {
    let file: FileConfig = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };

    let kind = common
        .map
        .clone()
        .or(file.map)
        .unwrap_or_else(|| "integrable".to_string());
    let window_lo = common.window_lo.or(file.window_lo);
    let window_hi = common.window_hi.or(file.window_hi);
    let window = match (window_lo, window_hi) {
        (Some(lo), Some(hi)) if lo < hi => Some((lo, hi)),
        (Some(lo), Some(hi)) => {
            return Err(CliError::Usage(format!(
                "window is empty: lo {lo} must be below hi {hi}"
            )));
        }
        (None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "window needs both --window-lo and --window-hi".to_string(),
            ));
        }
    };

    Ok(Settings {
        kind,
        eps_profile: common
            .eps_profile
            .clone()
            .or(file.eps_profile)
            .unwrap_or_else(|| "abs_gauss".to_string()),
        eps_scale: common
            .eps_scale
            .or(file.eps_scale)
            .unwrap_or(DEFAULT_EPS_SCALE),
        c_max: common.c_max.or(file.c_max).unwrap_or(1.0),
        conjugate: common
            .conjugate
            .clone()
            .or(file.conjugate)
            .unwrap_or_else(|| "none".to_string()),
        map_table: common.map_table.clone().or(file.map_table),
        foliation_table: common.foliation_table.clone().or(file.foliation_table),
        window,
        seed: common.seed.or(file.seed).unwrap_or(0),
    })
}
