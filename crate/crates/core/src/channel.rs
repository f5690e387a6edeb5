//! Indoor-factory NLOS channel: log-distance path loss, log-normal shadowing,
//! and i.i.d. Rayleigh small-scale fading.
//!
//! Sampling follows the dependency chain positions -> distances -> path loss
//! -> shadowing -> large-scale gain -> small-scale fading -> channel matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{distance_3d, DeploymentSpec, Position};
use crate::stream::RandomStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid radio configuration: {0}")]
    InvalidRadio(String),
}

/// Link-budget parameters. Frequencies in GHz, powers in W, PSD in dBm/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConfig {
    pub carrier_freq_ghz: f64,
    pub path_loss_exponent: f64,
    pub shadowing_std_db: f64,
    pub tx_power_w: f64,
    pub noise_psd_dbm_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub target_rate_bpshz: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self::indoor_factory()
    }
}

impl RadioConfig {
    /// 3.5 GHz NLOS indoor factory, 20 dBm devices, 20 MHz, 7 dB noise figure, R = 1.
    pub fn indoor_factory() -> Self {
        Self {
            carrier_freq_ghz: 3.5,
            path_loss_exponent: 3.19,
            shadowing_std_db: 7.56,
            tx_power_w: 0.1,
            noise_psd_dbm_hz: -174.0,
            bandwidth_hz: 20e6,
            noise_figure_db: 7.0,
            target_rate_bpshz: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let positive = [
            ("carrier_freq_ghz", self.carrier_freq_ghz),
            ("path_loss_exponent", self.path_loss_exponent),
            ("tx_power_w", self.tx_power_w),
            ("bandwidth_hz", self.bandwidth_hz),
            ("target_rate_bpshz", self.target_rate_bpshz),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ChannelError::InvalidRadio(format!("{name} must be > 0, got {v}")));
            }
        }
        // zero disables shadowing
        if !(self.shadowing_std_db.is_finite() && self.shadowing_std_db >= 0.0) {
            return Err(ChannelError::InvalidRadio(format!(
                "shadowing_std_db must be >= 0, got {}",
                self.shadowing_std_db
            )));
        }
        if !self.noise_psd_dbm_hz.is_finite() || !self.noise_figure_db.is_finite() {
            return Err(ChannelError::InvalidRadio("noise parameters must be finite".into()));
        }
        Ok(())
    }

    /// Decoding threshold `2^R - 1` on the linear SINR.
    pub fn sinr_threshold(&self) -> f64 {
        self.target_rate_bpshz.exp2() - 1.0
    }
}

/// Mean path loss in dB at `distance_m` meters.
pub fn path_loss_db(distance_m: f64, cfg: &RadioConfig) -> Result<f64, ChannelError> {
    if !(distance_m > 0.0) {
        return Err(ChannelError::NonPositiveDistance(distance_m));
    }
    Ok(32.5 + 20.0 * cfg.carrier_freq_ghz.log10() + 10.0 * cfg.path_loss_exponent * distance_m.log10())
}

/// One zero-mean shadowing draw in dB.
pub fn shadowing_db(cfg: &RadioConfig, rng: &mut RandomStream) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    cfg.shadowing_std_db * z
}

/// Linear large-scale gain `10^(-(PL + X)/10)`.
pub fn large_scale_gain(distance_m: f64, shadow_db: f64, cfg: &RadioConfig) -> Result<f64, ChannelError> {
    let pl = path_loss_db(distance_m, cfg)?;
    Ok(db_to_linear(-(pl + shadow_db)))
}

/// Receiver noise power `N0 * B * NF` in watts.
pub fn noise_power_w(cfg: &RadioConfig) -> f64 {
    let n0_w_per_hz = db_to_linear(cfg.noise_psd_dbm_hz - 30.0);
    n0_w_per_hz * cfg.bandwidth_hz * db_to_linear(cfg.noise_figure_db)
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Per-link distances and large-scale gains, `K x Q` (devices by APs).
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleMap {
    pub beta: DMatrix<f64>,
    pub distances: DMatrix<f64>,
}

impl LargeScaleMap {
    /// A map with given gains and no geometry; distances are NaN.
    pub fn from_beta(beta: DMatrix<f64>) -> Self {
        let distances = DMatrix::from_element(beta.nrows(), beta.ncols(), f64::NAN);
        Self { beta, distances }
    }

    pub fn device_count(&self) -> usize {
        self.beta.nrows()
    }

    pub fn ap_count(&self) -> usize {
        self.beta.ncols()
    }
}

/// Distances, shadowing and gains for every device/AP pair. One independent
/// shadowing draw per link, consumed device-major.
pub fn build_large_scale(
    mtds: &[Position],
    aps: &[Position],
    cfg: &RadioConfig,
    rng: &mut RandomStream,
) -> Result<LargeScaleMap, ChannelError> {
    if mtds.is_empty() || aps.is_empty() {
        return Err(ChannelError::DimensionMismatch(format!(
            "need at least one device and one AP, got {} and {}",
            mtds.len(),
            aps.len()
        )));
    }
    let (k, q) = (mtds.len(), aps.len());
    let mut beta = DMatrix::zeros(k, q);
    let mut distances = DMatrix::zeros(k, q);
    for (i, dev) in mtds.iter().enumerate() {
        for (j, ap) in aps.iter().enumerate() {
            let d = distance_3d(dev, ap);
            let shadow = shadowing_db(cfg, rng);
            distances[(i, j)] = d;
            beta[(i, j)] = large_scale_gain(d, shadow, cfg)?;
        }
    }
    Ok(LargeScaleMap { beta, distances })
}

/// Collective `M x K` channel. Column `k` stacks the `S`-element blocks of
/// device `k` in AP order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub g: DMatrix<Complex64>,
}

impl ChannelMatrix {
    pub fn new(g: DMatrix<Complex64>) -> Self {
        Self { g }
    }

    pub fn antennas(&self) -> usize {
        self.g.nrows()
    }

    pub fn devices(&self) -> usize {
        self.g.ncols()
    }
}

/// Draws `g_{k,q} ~ CN(0, beta_kq I_S)` for every block.
pub fn draw_channel(
    ls: &LargeScaleMap,
    spec: &DeploymentSpec,
    rng: &mut RandomStream,
) -> Result<ChannelMatrix, ChannelError> {
    let mut g = DMatrix::zeros(spec.total_antennas, ls.device_count());
    draw_channel_into(ls, spec, rng, &mut g)?;
    Ok(ChannelMatrix::new(g))
}

/// Same as [`draw_channel`] but reuses `out`, which must already be `M x K`.
pub fn draw_channel_into(
    ls: &LargeScaleMap,
    spec: &DeploymentSpec,
    rng: &mut RandomStream,
    out: &mut DMatrix<Complex64>,
) -> Result<(), ChannelError> {
    if ls.ap_count() != spec.ap_count {
        return Err(ChannelError::DimensionMismatch(format!(
            "large-scale map has {} APs, deployment has {}",
            ls.ap_count(),
            spec.ap_count
        )));
    }
    let (m, k, s) = (spec.total_antennas, ls.device_count(), spec.antennas_per_ap);
    if out.nrows() != m || out.ncols() != k {
        return Err(ChannelError::DimensionMismatch(format!(
            "output is {}x{}, expected {m}x{k}",
            out.nrows(),
            out.ncols()
        )));
    }
    for dev in 0..k {
        let mut col = out.column_mut(dev);
        for ap in 0..spec.ap_count {
            let b = ls.beta[(dev, ap)];
            if !(b >= 0.0 && b.is_finite()) {
                return Err(ChannelError::DimensionMismatch(format!("invalid gain {b} at ({dev}, {ap})")));
            }
            let scale = (b / 2.0).sqrt();
            for e in 0..s {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                col[ap * s + e] = Complex64::new(scale * re, scale * im);
            }
        }
    }
    Ok(())
}
