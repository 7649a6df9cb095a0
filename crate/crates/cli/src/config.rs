//! `--config` file: TOML with one optional table per subcommand.
//!
//! Every key is optional; a command-line flag wins over the file, and the
//! file wins over the built-in default. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub georef: GeorefConfig,
    #[serde(default)]
    pub calibrate: CalibrateConfig,
    #[serde(default)]
    pub recommend: RecommendConfig,
    #[serde(default)]
    pub krige: KrigeConfig,
    #[serde(default)]
    pub compare: CompareConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeorefConfig {
    pub emi: Option<PathBuf>,
    pub gnss: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub gnss_format: Option<String>,
    pub day_start: Option<f64>,
    pub max_gap: Option<f64>,
    pub accept: Option<String>,
    pub field_id: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    pub table: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub field: Option<String>,
    pub pcc_csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommendConfig {
    pub calib: Option<PathBuf>,
    pub reports: Option<Vec<PathBuf>>,
    pub out: Option<PathBuf>,
    pub pcc_min: Option<f64>,
    pub converge_tol: Option<f64>,
    pub osc_sigma_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrigeConfig {
    pub track: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub like: Option<PathBuf>,
    pub cell_size: Option<f64>,
    pub k_nearest: Option<usize>,
    pub max_radius: Option<f64>,
    pub lag_width: Option<f64>,
    pub max_lag: Option<f64>,
    pub nugget: Option<f64>,
    pub sill: Option<f64>,
    pub range: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub raster_a: Option<PathBuf>,
    pub raster_b: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub n_points: Option<usize>,
    pub k_sigma: Option<f64>,
    pub degree: Option<usize>,
    pub series_csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub heightmap: Option<PathBuf>,
    pub terrain: Option<String>,
    pub seed: Option<u64>,
    pub extent_x: Option<f64>,
    pub extent_y: Option<f64>,
    pub cell_size: Option<f64>,
    pub trajectory: Option<PathBuf>,
    pub passes: Option<usize>,
    pub d_b: Option<f64>,
    pub d_h: Option<f64>,
    pub step: Option<f64>,
    pub out: Option<PathBuf>,
    pub clearance_csv: Option<PathBuf>,
    pub sweep: Option<bool>,
    pub sweep_csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }
}

/// Flag, then config, then nothing.
pub fn pick<T>(flag: Option<T>, cfg: &Option<T>) -> Option<T>
where
    T: Clone,
{
    flag.or_else(|| cfg.clone())
}

pub fn require<T>(v: Option<T>, flag: &str, section: &str) -> Result<T, CliError> {
    v.ok_or_else(|| {
        CliError::input(format!(
            "missing --{flag} (or `{}` under [{section}] in the config file)",
            flag.replace('-', "_")
        ))
    })
}

/// Inputs must be readable files.
pub fn check_input(p: &Path) -> Result<(), CliError> {
    match std::fs::metadata(p) {
        Ok(m) if m.is_file() => Ok(()),
        Ok(_) => Err(CliError::input(format!("{}: not a file", p.display()))),
        Err(e) => Err(CliError::input(format!("{}: {e}", p.display()))),
    }
}

/// Outputs need an existing parent directory.
pub fn check_output(p: &Path) -> Result<(), CliError> {
    let parent = match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => return Ok(()),
    };
    if parent.is_dir() {
        Ok(())
    } else {
        Err(CliError::input(format!(
            "{}: output directory {} does not exist",
            p.display(),
            parent.display()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("[krige]\ncell = 1.0\n").is_err());
        assert!(toml::from_str::<RunConfig>("[nope]\n").is_err());
        let ok: RunConfig =
            toml::from_str("[krige]\ncell_size = 1.0\n[simulate]\nseed = 3\n").unwrap();
        assert_eq!(ok.krige.cell_size, Some(1.0));
        assert_eq!(ok.simulate.seed, Some(3));
    }

    #[test]
    fn flag_beats_config() {
        assert_eq!(pick(Some(2), &Some(1)), Some(2));
        assert_eq!(pick(None, &Some(1)), Some(1));
        assert_eq!(pick::<i32>(None, &None), None);
    }
}
