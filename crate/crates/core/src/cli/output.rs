//! Result files: `results.csv`, `manifest.json` and plot-data text.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::DeploymentKind;
use crate::montecarlo::{PointOutcome, SweepAxis, SweepPoint, TrafficKind};

use super::config::ExperimentFile;
use super::CliError;

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

/// Column order of `results.csv`. Kept stable across versions.
pub const CSV_HEADER: &str = "deployment,traffic,axis,axis_value,M,Q,S,K,l_m,p_out,ci_halfwidth,trials,seed";

/// One line of `results.csv`. Skipped points keep their row with empty
/// numeric fields; the reason is in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub deployment: DeploymentKind,
    pub traffic: TrafficKind,
    pub axis: SweepAxis,
    pub axis_value: f64,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "Q")]
    pub q: Option<usize>,
    #[serde(rename = "S")]
    pub s: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub l_m: Option<f64>,
    pub p_out: Option<f64>,
    pub ci_halfwidth: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

impl ResultRow {
    pub fn from_point(axis: SweepAxis, p: &SweepPoint) -> Self {
        let cfg = p.config.as_ref();
        let res = match &p.outcome {
            PointOutcome::Done(r) => Some(r),
            PointOutcome::Skipped(_) => None,
        };
        ResultRow {
            deployment: p.deployment,
            traffic: p.traffic,
            axis,
            axis_value: p.axis_value,
            m: cfg.map(|c| c.deployment.total_antennas),
            q: cfg.map(|c| c.deployment.ap_count),
            s: cfg.map(|c| c.deployment.antennas_per_ap),
            k: cfg.map(|c| c.traffic.active_count),
            l_m: cfg.map(|c| c.site.side_length_m),
            p_out: res.map(|r| r.p_out),
            ci_halfwidth: res.map(|r| r.ci_halfwidth_95),
            trials: res.map(|r| r.total_decode_trials),
            seed: cfg.map(|c| c.master_seed),
        }
    }
}

pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let header = r
        .headers()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(CliError::Config(format!("{}: unexpected header '{header}'", path.display())));
    }
    let rows = r
        .deserialize()
        .collect::<Result<Vec<ResultRow>, _>>()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        return Err(CliError::Config(format!("{}: no result rows", path.display())));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub axis_value: f64,
    pub deployment: DeploymentKind,
    pub traffic: TrafficKind,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl PointRecord {
    pub fn from_point(p: &SweepPoint) -> Self {
        let (status, digest, reason) = match &p.outcome {
            PointOutcome::Done(r) => ("done", Some(r.config_digest.clone()), None),
            PointOutcome::Skipped(why) => ("skipped", None, Some(why.clone())),
        };
        PointRecord {
            axis_value: p.axis_value,
            deployment: p.deployment,
            traffic: p.traffic,
            status: status.into(),
            seed: p.config.as_ref().map(|c| c.master_seed),
            config_digest: digest,
            reason,
        }
    }
}

/// Everything needed to rerun an experiment. `run manifest.json` reads `config` back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub master_seed: u64,
    pub config_digest: String,
    pub config: ExperimentFile,
    #[serde(default)]
    pub points: Vec<PointRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub artifacts: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(config: &ExperimentFile) -> Self {
        let bytes = serde_json::to_vec(config).expect("experiment serializes");
        let hash: [u8; 32] = Sha256::digest(&bytes).into();
        Manifest {
            manifest_version: MANIFEST_VERSION,
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            master_seed: config.master_seed,
            config_digest: hash.iter().map(|b| format!("{b:02x}")).collect(),
            config: config.clone(),
            points: Vec::new(),
            artifacts: BTreeMap::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

fn series_key(d: DeploymentKind, t: TrafficKind) -> String {
    format!("{}_{}", d.as_str(), t.as_str())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| format!("{x:e}"))
}

/// Whitespace-separated table: `x`, then `p_out` and `ci` for each
/// deployment x traffic series present in `rows`. Missing points are `nan`.
pub fn plot_data_text(rows: &[ResultRow]) -> String {
    let axis = rows.first().map_or(SweepAxis::ActiveDevices, |r| r.axis);
    let mut series: Vec<(DeploymentKind, TrafficKind)> = Vec::new();
    for d in DeploymentKind::ALL {
        for t in TrafficKind::ALL {
            if rows.iter().any(|r| r.deployment == d && r.traffic == t) {
                series.push((d, t));
            }
        }
    }
    let mut xs: Vec<f64> = rows.iter().map(|r| r.axis_value).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut out = String::new();
    writeln!(out, "# outage probability vs {}", axis.label()).unwrap();
    let mut cols = vec![axis.as_str().to_string()];
    for &(d, t) in &series {
        cols.push(format!("{}_p_out", series_key(d, t)));
        cols.push(format!("{}_ci", series_key(d, t)));
    }
    writeln!(out, "{}", cols.join(" ")).unwrap();
    for &x in &xs {
        let mut line = vec![format!("{x}")];
        for &(d, t) in &series {
            let row = rows.iter().find(|r| r.axis_value == x && r.deployment == d && r.traffic == t);
            line.push(fmt_opt(row.and_then(|r| r.p_out)));
            line.push(fmt_opt(row.and_then(|r| r.ci_halfwidth)));
        }
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn plot_data_file_name(axis: SweepAxis) -> String {
    format!("outage_vs_{}.dat", axis.as_str())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
