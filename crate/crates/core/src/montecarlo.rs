//! Nested Monte Carlo estimation of the uplink outage probability.
//!
//! The outer loop draws network realizations (device positions and
//! shadowing), the inner loop draws small-scale fading. Each realization owns
//! streams derived from `(master_seed, [realization, purpose])`, and the
//! per-realization tallies are integers merged in index order, so results are
//! bit-identical for any thread count.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::{build_large_scale, draw_channel_into, noise_power_w, ChannelError, ChannelMatrix, LargeScaleMap, RadioConfig};
use crate::geometry::{DeploymentKind, DeploymentSpec, GeometryError, Position, SiteConfig};
use crate::receiver::{build_combiner, sinr_per_user, CombinerKind, ReceiverError};
use crate::stream::{derive_seed, purpose};
use crate::traffic::{AlarmEvent, TrafficError, TrafficMode, TrafficModel};

pub use crate::stream::{derive_stream, RandomStream};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Receiver(#[from] ReceiverError),
}

impl SimError {
    /// True for errors caused by the configuration rather than the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(self, SimError::ConfigInvalid(_) | SimError::Geometry(_) | SimError::Traffic(_))
            || matches!(self, SimError::Channel(ChannelError::InvalidRadio(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub deployment: DeploymentSpec,
    pub site: SiteConfig,
    pub radio: RadioConfig,
    pub traffic: TrafficModel,
    pub network_realizations: usize,
    pub fading_realizations_per_network: usize,
    pub combiner: CombinerKind,
    pub master_seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.site.validate()?;
        self.deployment.validate()?;
        self.radio.validate().map_err(SimError::Channel)?;
        self.traffic.validate(&self.site)?;
        if self.network_realizations == 0 || self.fading_realizations_per_network == 0 {
            return Err(SimError::ConfigInvalid("realization counts must be at least 1".into()));
        }
        if self.deployment.total_antennas < self.traffic.active_count {
            return Err(SimError::ConfigInvalid(format!(
                "need M >= K, got M={} K={}",
                self.deployment.total_antennas, self.traffic.active_count
            )));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("SimConfig serializes");
        let hash: [u8; 32] = Sha256::digest(&bytes).into();
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageResult {
    pub p_out: f64,
    pub ci_halfwidth_95: f64,
    /// Device decode attempts, `K * N * fading draws`.
    pub total_decode_trials: u64,
    pub decoded: u64,
    pub config_digest: String,
    pub seed: u64,
}

/// Integer sufficient statistics of a batch of fading draws.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    /// Fading draws (slots).
    pub slots: u64,
    /// Sum of decoded devices over slots.
    pub decoded: u64,
    /// Sum of squared per-slot decoded counts.
    pub decoded_sq: u64,
}

impl Tally {
    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            slots: self.slots + other.slots,
            decoded: self.decoded + other.decoded,
            decoded_sq: self.decoded_sq + other.decoded_sq,
        }
    }

    /// Outage `1 - sum(D) / (K * slots)`.
    pub fn outage(&self, k: usize) -> f64 {
        1.0 - self.decoded as f64 / (k as f64 * self.slots as f64)
    }

    /// Standard error of the outage estimate from the per-slot decoded fraction.
    pub fn std_error(&self, k: usize) -> f64 {
        if self.slots < 2 {
            return 0.0;
        }
        let n = self.slots as f64;
        let kf = k as f64;
        let mean = self.decoded as f64 / n;
        let var = ((self.decoded_sq as f64 - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt() / kf
    }

    pub fn ci_halfwidth_95(&self, k: usize) -> f64 {
        Z_95 * self.std_error(k)
    }
}

/// Runs `draws` fading realizations over a fixed large-scale map.
pub fn simulate_fading(
    ls: &LargeScaleMap,
    deployment: &DeploymentSpec,
    radio: &RadioConfig,
    combiner: CombinerKind,
    draws: usize,
    rng: &mut RandomStream,
) -> Result<Tally, SimError> {
    let noise = noise_power_w(radio);
    let threshold = radio.sinr_threshold();
    let mut g = ChannelMatrix::new(DMatrix::zeros(deployment.total_antennas, ls.device_count()));
    let mut tally = Tally::default();
    for _ in 0..draws {
        draw_channel_into(ls, deployment, rng, &mut g.g)?;
        let v = build_combiner(combiner, &g, noise, radio.tx_power_w)?;
        let sinr = sinr_per_user(&v, &g, radio.tx_power_w, noise)?;
        let d = sinr.iter().filter(|&&s| s >= threshold).count() as u64;
        tally.slots += 1;
        tally.decoded += d;
        tally.decoded_sq += d * d;
    }
    Ok(tally)
}

/// One network realization: positions, large-scale map, then fading draws.
pub fn simulate_realization(cfg: &SimConfig, aps: &[Position], index: u64) -> Result<Tally, SimError> {
    let mut pos_rng = derive_stream(cfg.master_seed, &[index, purpose::POSITIONS]);
    let mut shadow_rng = derive_stream(cfg.master_seed, &[index, purpose::SHADOWING]);
    let mut fading_rng = derive_stream(cfg.master_seed, &[index, purpose::FADING]);
    let mtds = cfg.traffic.sample(&cfg.site, &mut pos_rng);
    let ls = build_large_scale(&mtds, aps, &cfg.radio, &mut shadow_rng)?;
    simulate_fading(&ls, &cfg.deployment, &cfg.radio, cfg.combiner, cfg.fading_realizations_per_network, &mut fading_rng)
}

/// Estimates the outage probability of one configuration.
pub fn run_point(cfg: &SimConfig) -> Result<OutageResult, SimError> {
    cfg.validate()?;
    let aps = cfg.deployment.ap_positions(&cfg.site)?;
    let tallies: Vec<Tally> = (0..cfg.network_realizations as u64)
        .into_par_iter()
        .map(|i| simulate_realization(cfg, &aps, i))
        .collect::<Result<_, _>>()?;
    let total = tallies.into_iter().fold(Tally::default(), Tally::merge);
    let k = cfg.traffic.active_count;
    Ok(OutageResult {
        p_out: total.outage(k).clamp(0.0, 1.0),
        ci_halfwidth_95: total.ci_halfwidth_95(k),
        total_decode_trials: total.slots * k as u64,
        decoded: total.decoded,
        config_digest: cfg.digest(),
        seed: cfg.master_seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Active devices.
    #[serde(rename = "K")]
    ActiveDevices,
    /// Total antennas.
    #[serde(rename = "M")]
    TotalAntennas,
    /// Hall side length.
    #[serde(rename = "l")]
    SideLength,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::ActiveDevices => "K",
            SweepAxis::TotalAntennas => "M",
            SweepAxis::SideLength => "l",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::ActiveDevices => "Number of active MTDs, K",
            SweepAxis::TotalAntennas => "Total number of antennas, M",
            SweepAxis::SideLength => "Side length of the hall, l [m]",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "K" | "k" => Ok(SweepAxis::ActiveDevices),
            "M" | "m" => Ok(SweepAxis::TotalAntennas),
            "l" | "L" => Ok(SweepAxis::SideLength),
            other => Err(format!("unknown sweep axis '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficKind {
    Regular,
    Alarm,
}

impl TrafficKind {
    pub const ALL: [TrafficKind; 2] = [TrafficKind::Regular, TrafficKind::Alarm];

    pub fn as_str(self) -> &'static str {
        match self {
            TrafficKind::Regular => "regular",
            TrafficKind::Alarm => "alarm",
        }
    }
}

impl std::str::FromStr for TrafficKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "regular" => Ok(TrafficKind::Regular),
            "alarm" => Ok(TrafficKind::Alarm),
            other => Err(format!("unknown traffic mode '{other}'")),
        }
    }
}

/// Alarm event with its epicenter given as fractions of the side length, so
/// it follows the hall when `l` is swept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlarmSpec {
    pub epicenter_fraction: [f64; 2],
    pub intensity_m: f64,
}

impl AlarmSpec {
    pub fn event(&self, site: &SiteConfig) -> AlarmEvent {
        let l = site.side_length_m;
        AlarmEvent::new(
            Position::new(self.epicenter_fraction[0] * l, self.epicenter_fraction[1] * l, 0.0),
            self.intensity_m,
        )
    }
}

impl Default for AlarmSpec {
    fn default() -> Self {
        Self { epicenter_fraction: [0.25, 0.25], intensity_m: 50.0 }
    }
}

/// A sweep over one axis for every deployment and traffic mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    /// Supplies the non-swept parameters. Its deployment gives M; its traffic gives K.
    pub base: SimConfig,
    /// Antennas per AP for the distributed deployments.
    pub antennas_per_ap: usize,
    pub alarm: AlarmSpec,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub deployments: Vec<DeploymentKind>,
    pub traffic: Vec<TrafficKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointOutcome {
    Done(OutageResult),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub deployment: DeploymentKind,
    pub traffic: TrafficKind,
    /// Resolved configuration, or `None` when the point could not be built.
    pub config: Option<SimConfig>,
    pub outcome: PointOutcome,
}

fn as_count(axis: SweepAxis, v: f64) -> Result<usize, String> {
    if v >= 1.0 && v.fract() == 0.0 && v < u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(format!("{} must be a positive integer, got {v}", axis.as_str()))
    }
}

fn deployment_index(kind: DeploymentKind) -> u64 {
    match kind {
        DeploymentKind::Centralized => 0,
        DeploymentKind::Grid => 1,
        DeploymentKind::Linear => 2,
    }
}

impl SweepPlan {
    /// Resolves the configuration of a single point.
    pub fn point_config(
        &self,
        value_index: usize,
        value: f64,
        deployment: DeploymentKind,
        traffic: TrafficKind,
    ) -> Result<SimConfig, String> {
        let mut cfg = self.base.clone();
        let mut m = cfg.deployment.total_antennas;
        match self.axis {
            SweepAxis::ActiveDevices => cfg.traffic.active_count = as_count(self.axis, value)?,
            SweepAxis::TotalAntennas => m = as_count(self.axis, value)?,
            SweepAxis::SideLength => cfg.site.side_length_m = value,
        }
        cfg.site.validate().map_err(|e| e.to_string())?;
        cfg.deployment = DeploymentSpec::with_total(deployment, m, self.antennas_per_ap).map_err(|e| e.to_string())?;
        cfg.traffic.mode = match traffic {
            TrafficKind::Regular => TrafficMode::Regular,
            TrafficKind::Alarm => TrafficMode::Alarm(self.alarm.event(&cfg.site)),
        };
        cfg.master_seed = derive_seed(
            self.base.master_seed,
            &[value_index as u64, deployment_index(deployment), traffic as u64],
        );
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

/// Evaluates every `(value, deployment, traffic)` point in that nesting order.
/// Invalid combinations are skipped with a warning and reported in the output.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<SweepPoint>, SimError> {
    let mut out = Vec::new();
    for (vi, &value) in plan.values.iter().enumerate() {
        for &deployment in &plan.deployments {
            for &traffic in &plan.traffic {
                let point = match plan.point_config(vi, value, deployment, traffic) {
                    Ok(cfg) => {
                        log::info!(
                            "{}={} {} {}: M={} Q={} S={} K={}",
                            plan.axis.as_str(),
                            value,
                            deployment,
                            traffic.as_str(),
                            cfg.deployment.total_antennas,
                            cfg.deployment.ap_count,
                            cfg.deployment.antennas_per_ap,
                            cfg.traffic.active_count
                        );
                        let res = run_point(&cfg)?;
                        SweepPoint { axis_value: value, deployment, traffic, config: Some(cfg), outcome: PointOutcome::Done(res) }
                    }
                    Err(reason) => {
                        log::warn!("skipping {}={} {} {}: {reason}", plan.axis.as_str(), value, deployment, traffic.as_str());
                        SweepPoint { axis_value: value, deployment, traffic, config: None, outcome: PointOutcome::Skipped(reason) }
                    }
                };
                out.push(point);
            }
        }
    }
    Ok(out)
}
