//! `eca`: command-line front end for the survey pipeline.
//!
//! Exit codes: 0 success, 2 input or format error, 3 empty result,
//! 4 infeasible placement policy, 5 numerical failure.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            msg: msg.into(),
        }
    }
}

impl From<eca_core::Error> for CliError {
    fn from(e: eca_core::Error) -> Self {
        use eca_core::Error as E;
        let code = match &e {
            E::Empty(_) => 3,
            E::Infeasible { .. } => 4,
            E::Singular { .. } | E::Numerical(_) => 5,
            _ => 2,
        };
        Self {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::input(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "eca", version, about = "Soil ECa survey pipeline")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Print the command tree as JSON and exit.
    #[arg(long)]
    json: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Attach GNSS positions to EMI samples.
    Georef(GeorefArgs),
    /// Per-distance statistics and regressions from an interference table.
    Calibrate(CalibrateArgs),
    /// Pick a probe placement from calibration and oscillation reports.
    Recommend(RecommendArgs),
    /// Fit a variogram and krige a track onto a raster.
    Krige(KrigeArgs),
    /// Compare two surveys of the same path.
    Compare(CompareArgs),
    /// Probe-clearance simulation over a heightmap.
    Simulate(SimulateArgs),
    /// Write seeded synthetic inputs.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Debug, Args)]
pub struct GeorefArgs {
    /// EMI log (csv).
    #[arg(long)]
    pub emi: Option<PathBuf>,
    /// GNSS log (csv or NMEA GGA).
    #[arg(long)]
    pub gnss: Option<PathBuf>,
    /// Output track csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `csv` (default) or `nmea`.
    #[arg(long)]
    pub gnss_format: Option<String>,
    /// Epoch second of the UTC midnight an NMEA log starts on [default: 0].
    #[arg(long)]
    pub day_start: Option<f64>,
    /// Largest gap between bracketing fixes, s [default: 1].
    #[arg(long)]
    pub max_gap: Option<f64>,
    /// Fix filter: `rtk` (default) or `any`.
    #[arg(long)]
    pub accept: Option<String>,
    /// Field identifier stored with the track.
    #[arg(long)]
    pub field_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Interference table csv: `field,baseline,<d_b>...`.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Calibration JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Restrict to one field; all rows are pooled by default.
    #[arg(long)]
    pub field: Option<String>,
    /// Also write the per-distance csv here.
    #[arg(long)]
    pub pcc_csv: Option<PathBuf>,
    /// PCC-versus-distance SVG.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    /// Calibration JSON from `calibrate`.
    #[arg(long)]
    pub calib: Option<PathBuf>,
    /// Oscillation reports from `simulate` (repeatable).
    #[arg(long)]
    pub reports: Vec<PathBuf>,
    /// Write the recommendation as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// [default: 0.98]
    #[arg(long)]
    pub pcc_min: Option<f64>,
    /// Convergence tolerance, mS/m [default: 0.5].
    #[arg(long)]
    pub converge_tol: Option<f64>,
    /// Largest acceptable oscillation sigma, cm [default: 3.1].
    #[arg(long)]
    pub osc_sigma_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct KrigeArgs {
    /// Georeferenced track csv.
    #[arg(long)]
    pub track: Option<PathBuf>,
    /// Output ESRI ASCII raster; `.prj` and `.json` sidecars go next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reuse the grid of an existing raster.
    #[arg(long)]
    pub like: Option<PathBuf>,
    /// Cell size, m [default: median sample spacing].
    #[arg(long)]
    pub cell_size: Option<f64>,
    /// Neighbours per cell [default: 16].
    #[arg(long = "k")]
    pub k_nearest: Option<usize>,
    /// Search radius, m [default: 10 x median nearest-neighbour spacing].
    #[arg(long = "radius")]
    pub max_radius: Option<f64>,
    /// Variogram lag width, m [default: max_lag / 15].
    #[arg(long)]
    pub lag_width: Option<f64>,
    /// Variogram max lag, m [default: half the sample bounding-box diagonal].
    #[arg(long)]
    pub max_lag: Option<f64>,
    /// Pin the model instead of fitting (needs sill and range too).
    #[arg(long)]
    pub nugget: Option<f64>,
    /// Partial sill of the pinned model.
    #[arg(long)]
    pub sill: Option<f64>,
    /// Practical range of the pinned model, m.
    #[arg(long)]
    pub range: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// First track csv.
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Second track csv.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Raster of the first survey.
    #[arg(long)]
    pub raster_a: Option<PathBuf>,
    /// Raster of the second survey.
    #[arg(long)]
    pub raster_b: Option<PathBuf>,
    /// Report JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Resampling points [default: shorter track's sample count].
    #[arg(long)]
    pub n_points: Option<usize>,
    /// Outlier threshold in sigmas [default: 2].
    #[arg(long)]
    pub k_sigma: Option<f64>,
    /// Polynomial degree [default: 8].
    #[arg(long)]
    pub degree: Option<usize>,
    /// Aligned series csv `s_m,a,b`.
    #[arg(long)]
    pub series_csv: Option<PathBuf>,
    /// Series and fits SVG.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Heightmap raster; otherwise terrain is synthesised.
    #[arg(long)]
    pub heightmap: Option<PathBuf>,
    /// Synthetic terrain: smooth, rocky (default) or mixed.
    #[arg(long)]
    pub terrain: Option<String>,
    /// Terrain seed [default: 7].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Synthetic extent along x, m [default: 60].
    #[arg(long)]
    pub extent_x: Option<f64>,
    /// Synthetic extent along y, m [default: 8].
    #[arg(long)]
    pub extent_y: Option<f64>,
    /// Synthetic cell size, m [default: 0.05].
    #[arg(long)]
    pub cell_size: Option<f64>,
    /// Trajectory csv `x_m,y_m` [default: straight passes along x].
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// Default straight passes in sweep mode [default: 5].
    #[arg(long)]
    pub passes: Option<usize>,
    /// Probe distance from the body, m [default: 0.6].
    #[arg(long)]
    pub d_b: Option<f64>,
    /// Probe height, m [default: 0.06].
    #[arg(long)]
    pub d_h: Option<f64>,
    /// Step along the trajectory, m [default: 0.02].
    #[arg(long)]
    pub step: Option<f64>,
    /// Report JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-step clearance csv (single run).
    #[arg(long)]
    pub clearance_csv: Option<PathBuf>,
    /// Run every tested (d_b, d_h) combination.
    #[arg(long)]
    pub sweep: bool,
    /// Sweep table csv.
    #[arg(long)]
    pub sweep_csv: Option<PathBuf>,
    /// Clearance SVG (single run).
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Manual and robot tracks over one synthetic field.
    Twin {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Robot minus manual offset, mS/m.
        #[arg(long, default_value_t = 3.7)]
        offset: f64,
    },
    /// Synthetic heightmap raster.
    Terrain {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "rocky")]
        kind: String,
        #[arg(long, default_value_t = eca_core::terrasim::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = eca_core::terrasim::DEFAULT_EXTENT_M.0)]
        extent_x: f64,
        #[arg(long, default_value_t = eca_core::terrasim::DEFAULT_EXTENT_M.1)]
        extent_y: f64,
        #[arg(long, default_value_t = eca_core::terrasim::DEFAULT_CELL_M)]
        cell_size: f64,
    },
    /// Raw interference readings (three fields, ten distances).
    Table {
        #[arg(long)]
        out: PathBuf,
    },
}

fn json_help() -> serde_json::Value {
    fn describe(cmd: &clap::Command) -> serde_json::Value {
        let args: Vec<serde_json::Value> = cmd
            .get_arguments()
            .filter(|a| a.get_id() != "help" && a.get_id() != "version")
            .map(|a| {
                serde_json::json!({
                    "name": a.get_id().as_str(),
                    "long": a.get_long(),
                    "help": a.get_help().map(|h| h.to_string()),
                    "required": a.is_required_set(),
                    "takes_value": a.get_action().takes_values(),
                    "default": a.get_default_values().iter()
                        .map(|v| v.to_string_lossy().into_owned()).collect::<Vec<_>>(),
                })
            })
            .collect();
        let subs: Vec<serde_json::Value> = cmd
            .get_subcommands()
            .filter(|s| s.get_name() != "help")
            .map(describe)
            .collect();
        serde_json::json!({
            "name": cmd.get_name(),
            "about": cmd.get_about().map(|a| a.to_string()),
            "args": args,
            "subcommands": subs,
        })
    }
    let mut v = describe(&Cli::command());
    v["version"] = env!("CARGO_PKG_VERSION").into();
    v["exit_codes"] = serde_json::json!({
        "0": "success",
        "2": "input or format error",
        "3": "empty result",
        "4": "infeasible placement policy",
        "5": "numerical failure",
    });
    v
}

fn run(cli: Cli) -> CliResult {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&json_help())?);
        return Ok(());
    }
    let Some(command) = cli.command else {
        Cli::command().print_help()?;
        return Err(CliError::input("no command given"));
    };
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match command {
        Command::Georef(a) => commands::georef(a, &cfg.georef),
        Command::Calibrate(a) => commands::calibrate(a, &cfg.calibrate),
        Command::Recommend(a) => commands::recommend(a, &cfg.recommend),
        Command::Krige(a) => commands::krige(a, &cfg.krige),
        Command::Compare(a) => commands::compare(a, &cfg.compare),
        Command::Simulate(a) => commands::simulate(a, &cfg.simulate),
        Command::Synth(s) => commands::synth(s),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        use eca_core::Error as E;
        let code = |e: E| CliError::from(e).code;
        assert_eq!(code(E::InvalidInput("x".into())), 2);
        assert_eq!(code(E::InsufficientOverlap { overlap: 0 }), 2);
        assert_eq!(code(E::Empty("x".into())), 3);
        assert_eq!(code(E::Infeasible { gate: "g".into() }), 4);
        assert_eq!(code(E::Singular { cell: 1 }), 5);
        assert_eq!(code(E::Numerical("n".into())), 5);
    }

    #[test]
    fn json_help_lists_commands() {
        let v = json_help();
        let names: Vec<&str> = v["subcommands"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| s["name"].as_str().unwrap())
            .collect();
        for want in [
            "georef",
            "calibrate",
            "recommend",
            "krige",
            "compare",
            "simulate",
            "synth",
        ] {
            assert!(names.contains(&want), "{want}");
        }
    }
}
