//! Command line front end.
//!
//! ```text
//! dmimo-outage run <config.json> [--out DIR] [--set key=value ...]
//! dmimo-outage presets [name]
//! dmimo-outage plot <results.csv> [--out DIR]
//! ```
//!
//! Exit status is 0 on success, 1 for configuration or input errors and 2 for
//! runtime or numerical failures.

pub mod config;
pub mod output;
pub mod plot;
pub mod presets;
pub mod validation;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::montecarlo::{run_sweep, SimError};

use config::{Experiment, ExperimentFile};
use output::{Manifest, PointRecord, ResultRow, MANIFEST_FILE, RESULTS_FILE};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DMIMO_OUTAGE_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        if e.is_config_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dmimo-outage", version, about = "Uplink outage of centralized vs distributed massive MIMO in a factory hall")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment file (or a previous manifest.json).
    Run {
        config: PathBuf,
        /// Output directory. Falls back to the config's `output_dir`, then `results/<name>`.
        #[arg(long, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
        /// Override a config value, e.g. `--set fading=50` or `--set radio.tx_power_w=0.2`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print a built-in experiment file, or list the preset names.
    Presets { name: Option<String> },
    /// Render results.csv as an SVG and a plot-data text file.
    Plot {
        results: PathBuf,
        /// Output directory, default: next to the results file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let res = match cli.command {
        Command::Run { config, out, overrides } => cmd_run(&config, out.as_deref(), &overrides).map(|_| ()),
        Command::Presets { name } => cmd_presets(name.as_deref()).map(|text| print!("{text}")),
        Command::Plot { results, out } => cmd_plot(&results, out.as_deref()).map(|_| ()),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn resolve_out_dir(out: Option<&Path>, file: &ExperimentFile) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| file.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results").join(&file.name))
}

/// Runs an experiment and writes its artifacts. Returns the output directory.
pub fn cmd_run(config_path: &Path, out: Option<&Path>, overrides: &[String]) -> Result<PathBuf, CliError> {
    let file = ExperimentFile::load(config_path, overrides)?;
    let dir = resolve_out_dir(out, &file);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut manifest = Manifest::new(&file);

    match &file.experiment {
        Experiment::OutageSweep(_) => {
            let plan = file.sweep_plan()?;
            let points = run_sweep(&plan)?;
            let rows: Vec<ResultRow> = points.iter().map(|p| ResultRow::from_point(plan.axis, p)).collect();
            manifest.points = points.iter().map(PointRecord::from_point).collect();
            output::write_results_csv(&dir.join(RESULTS_FILE), &rows)?;
            let dat = output::plot_data_file_name(plan.axis);
            output::write_text(&dir.join(&dat), &output::plot_data_text(&rows))?;
            manifest.artifacts.insert("results".into(), RESULTS_FILE.into());
            manifest.artifacts.insert("plot_data".into(), dat);
        }
        Experiment::AlarmValidation(v) => {
            let event = v.alarm.event(&file.site);
            let rep = validation::validate_alarm_sampler(
                &event,
                &file.site,
                v.devices_per_realization,
                v.network_realizations,
                v.bins,
                file.master_seed,
            );
            for (name, text) in [("pdf_x.dat", &rep.pdf_x), ("pdf_y.dat", &rep.pdf_y), ("heatmap.dat", &rep.heatmap)] {
                output::write_text(&dir.join(name), text)?;
                manifest.artifacts.insert(name.trim_end_matches(".dat").into(), name.into());
            }
            let mut summary = serde_json::to_string_pretty(&rep.summary).expect("summary serializes");
            summary.push('\n');
            output::write_text(&dir.join("validation.json"), &summary)?;
            manifest.artifacts.insert("summary".into(), "validation.json".into());
            eprintln!(
                "alarm sampler: n={} KS_x={:.5} KS_y={:.5} (95% critical {:.5}), density integral {:.6}",
                rep.summary.samples,
                rep.summary.ks_x,
                rep.summary.ks_y,
                rep.summary.ks_critical_95,
                rep.summary.density_integral
            );
        }
    }
    manifest.write(&dir.join(MANIFEST_FILE))?;
    Ok(dir)
}

/// JSON text of a preset, or the list of preset names when `name` is `None`.
pub fn cmd_presets(name: Option<&str>) -> Result<String, CliError> {
    match name {
        Some(n) => Ok(presets::preset(n)?.to_pretty_json()),
        None => Ok(presets::PRESET_NAMES.iter().map(|n| format!("{n}\n")).collect()),
    }
}

/// Writes `outage_vs_<axis>.svg` and `.dat` for a results file. Returns the output directory.
pub fn cmd_plot(results: &Path, out: Option<&Path>) -> Result<PathBuf, CliError> {
    let rows = output::read_results_csv(results)?;
    let axis = rows[0].axis;
    if rows.iter().any(|r| r.axis != axis) {
        return Err(CliError::Config(format!("{}: mixed sweep axes", results.display())));
    }
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| results.parent().map(Path::to_path_buf).unwrap_or_default());
    let dir = if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let dat = dir.join(output::plot_data_file_name(axis));
    output::write_text(&dat, &output::plot_data_text(&rows))?;
    plot::render_svg(&rows, &dat.with_extension("svg"))?;
    Ok(dir)
}
