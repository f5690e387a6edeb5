//! Spatial distribution of active machine-type devices.
//!
//! Regular traffic places devices uniformly on the floor. Alarm traffic
//! concentrates them around an epicenter: the activation probability decays
//! as a Gaussian of the distance to the epicenter (the alarm triggering
//! probability function), which makes the active-device positions follow a
//! 2D Gaussian truncated to the hall.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::geometry::{distance_3d, Position, SiteConfig};
use crate::stream::RandomStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrafficError {
    #[error("distance must be non-negative, got {0}")]
    NegativeDistance(f64),
    #[error("point ({0}, {1}) lies outside the hall")]
    OutOfHall(f64, f64),
    #[error("invalid alarm event: {0}")]
    InvalidEvent(String),
    #[error("active device count must be at least 1")]
    NoActiveDevices,
}

/// A single alarm: epicenter and intensity `nu` (the Gaussian spread, meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlarmEvent {
    pub epicenter: Position,
    pub intensity_m: f64,
}

impl AlarmEvent {
    pub fn new(epicenter: Position, intensity_m: f64) -> Self {
        Self { epicenter, intensity_m }
    }

    pub fn validate(&self, site: &SiteConfig) -> Result<(), TrafficError> {
        if !(self.intensity_m.is_finite() && self.intensity_m > 0.0) {
            return Err(TrafficError::InvalidEvent(format!("intensity must be > 0, got {}", self.intensity_m)));
        }
        if !site.contains_xy(self.epicenter.x, self.epicenter.y) {
            return Err(TrafficError::InvalidEvent(format!(
                "epicenter ({}, {}) outside the hall",
                self.epicenter.x, self.epicenter.y
            )));
        }
        Ok(())
    }

    /// Truncated marginal along x.
    pub fn marginal_x(&self, site: &SiteConfig) -> TruncatedGaussian {
        TruncatedGaussian::new(self.epicenter.x, self.intensity_m, 0.0, site.side_length_m)
    }

    /// Truncated marginal along y.
    pub fn marginal_y(&self, site: &SiteConfig) -> TruncatedGaussian {
        TruncatedGaussian::new(self.epicenter.y, self.intensity_m, 0.0, site.side_length_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum TrafficMode {
    Regular,
    Alarm(AlarmEvent),
}

impl TrafficMode {
    pub fn name(&self) -> &'static str {
        match self {
            TrafficMode::Regular => "regular",
            TrafficMode::Alarm(_) => "alarm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficModel {
    pub mode: TrafficMode,
    pub active_count: usize,
}

impl TrafficModel {
    pub fn validate(&self, site: &SiteConfig) -> Result<(), TrafficError> {
        if self.active_count == 0 {
            return Err(TrafficError::NoActiveDevices);
        }
        if let TrafficMode::Alarm(ev) = &self.mode {
            ev.validate(site)?;
        }
        Ok(())
    }

    /// Draws the active-device positions for one network realization.
    pub fn sample(&self, site: &SiteConfig, rng: &mut RandomStream) -> Vec<Position> {
        match &self.mode {
            TrafficMode::Regular => sample_regular(self.active_count, site, rng),
            TrafficMode::Alarm(ev) => sample_alarm(self.active_count, ev, site, rng),
        }
    }
}

/// A 1D Gaussian restricted to `[lo, hi]` and renormalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedGaussian {
    pub mean: f64,
    pub std: f64,
    pub lo: f64,
    pub hi: f64,
}

impl TruncatedGaussian {
    pub fn new(mean: f64, std: f64, lo: f64, hi: f64) -> Self {
        Self { mean, std, lo, hi }
    }

    fn phi(&self, x: f64) -> f64 {
        0.5 * erfc(-(x - self.mean) / (self.std * std::f64::consts::SQRT_2))
    }

    /// Untruncated probability mass inside `[lo, hi]`.
    pub fn mass(&self) -> f64 {
        self.phi(self.hi) - self.phi(self.lo)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            return 0.0;
        }
        let z = (x - self.mean) / self.std;
        (-0.5 * z * z).exp() / (self.std * (2.0 * std::f64::consts::PI).sqrt()) / self.mass()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            0.0
        } else if x >= self.hi {
            1.0
        } else {
            ((self.phi(x) - self.phi(self.lo)) / self.mass()).clamp(0.0, 1.0)
        }
    }
}

/// Uniform positions over the floor at device height.
pub fn sample_regular(k: usize, site: &SiteConfig, rng: &mut RandomStream) -> Vec<Position> {
    let l = site.side_length_m;
    (0..k)
        .map(|_| {
            let x = rng.random::<f64>() * l;
            let y = rng.random::<f64>() * l;
            Position::new(x, y, site.mtd_height_m)
        })
        .collect()
}

/// Alarm triggering probability at `distance_m` from the epicenter.
pub fn atpf(distance_m: f64, intensity_m: f64) -> Result<f64, TrafficError> {
    if distance_m.is_nan() || distance_m < 0.0 {
        return Err(TrafficError::NegativeDistance(distance_m));
    }
    Ok((-(distance_m * distance_m) / (2.0 * intensity_m * intensity_m)).exp())
}

/// Density of active-device `(x, y)` under `event`, normalized over the hall.
pub fn alarm_density(x: f64, y: f64, event: &AlarmEvent, site: &SiteConfig) -> Result<f64, TrafficError> {
    if !site.contains_xy(x, y) {
        return Err(TrafficError::OutOfHall(x, y));
    }
    let nu = event.intensity_m;
    let mass = event.marginal_x(site).mass() * event.marginal_y(site).mass();
    let u = (x - event.epicenter.x) / nu;
    let v = (y - event.epicenter.y) / nu;
    let untruncated = (-0.5 * (u * u + v * v)).exp() / (2.0 * std::f64::consts::PI * nu * nu);
    Ok(untruncated / mass)
}

/// Draws `k` positions from the truncated alarm density by rejection: a pair
/// is drawn from the untruncated Gaussian and redrawn until it lands inside
/// the hall.
pub fn sample_alarm(k: usize, event: &AlarmEvent, site: &SiteConfig, rng: &mut RandomStream) -> Vec<Position> {
    let nu = event.intensity_m;
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        let x = event.epicenter.x + nu * zx;
        let y = event.epicenter.y + nu * zy;
        if site.contains_xy(x, y) {
            out.push(Position::new(x, y, site.mtd_height_m));
        }
    }
    out
}

/// Keeps each candidate independently with probability `atpf(d)`, where `d`
/// is the 3D distance between the epicenter and the candidate.
pub fn thin_by_atpf(candidates: &[Position], event: &AlarmEvent, rng: &mut RandomStream) -> Vec<Position> {
    candidates
        .iter()
        .filter(|p| {
            let d = distance_3d(&event.epicenter, p);
            let keep = atpf(d, event.intensity_m).unwrap_or(0.0);
            rng.random::<f64>() < keep
        })
        .copied()
        .collect()
}
