//! Centralized linear combining (MMSE, ZF, MRC), per-user SINR and decoding.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelMatrix;

/// Largest condition number of `G^H G` accepted by zero forcing.
pub const ZF_MAX_GRAM_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReceiverError {
    #[error("regularized system could not be factorized")]
    NumericalFailure,
    #[error("channel is rank deficient for zero forcing: {0}")]
    RankDeficient(String),
    #[error("combiner column {0} is zero")]
    ZeroCombinerColumn(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CombinerKind {
    #[default]
    Mmse,
    Zf,
    Mrc,
}

impl CombinerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CombinerKind::Mmse => "mmse",
            CombinerKind::Zf => "zf",
            CombinerKind::Mrc => "mrc",
        }
    }
}

impl std::str::FromStr for CombinerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mmse" => Ok(CombinerKind::Mmse),
            "zf" => Ok(CombinerKind::Zf),
            "mrc" => Ok(CombinerKind::Mrc),
            other => Err(format!("unknown combiner '{other}'")),
        }
    }
}

/// `M x K` receive matrix; column `k` is the combining vector of device `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    pub v: DMatrix<Complex64>,
    pub kind: CombinerKind,
}

/// Which side the MMSE normal equations are solved on. Both give the same
/// combiner by the push-through identity `(G G^H + eI)^-1 G = G (G^H G + eI)^-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmseForm {
    /// `M x M` system `(G G^H + eI) V = G`.
    Antenna,
    /// `K x K` system `(G^H G + eI) V^H = G^H`.
    User,
    /// Whichever system is smaller.
    Auto,
}

pub fn mmse_combiner(g: &ChannelMatrix, noise_w: f64, tx_power_w: f64) -> Result<Combiner, ReceiverError> {
    mmse_combiner_with(g, noise_w / tx_power_w, MmseForm::Auto)
}

/// MMSE combiner with regularizer `reg = sigma^2 / p_u`.
pub fn mmse_combiner_with(g: &ChannelMatrix, reg: f64, form: MmseForm) -> Result<Combiner, ReceiverError> {
    let (m, k) = (g.antennas(), g.devices());
    if m == 0 || k == 0 {
        return Err(ReceiverError::DimensionMismatch(format!("empty channel {m}x{k}")));
    }
    if !(reg.is_finite() && reg > 0.0) {
        return Err(ReceiverError::NumericalFailure);
    }
    let form = match form {
        MmseForm::Auto if k <= m => MmseForm::User,
        MmseForm::Auto => MmseForm::Antenna,
        f => f,
    };
    let gh = g.g.adjoint();
    let v = match form {
        MmseForm::User => {
            let mut gram = &gh * &g.g;
            add_to_diagonal(&mut gram, reg);
            let chol = Cholesky::new(gram).ok_or(ReceiverError::NumericalFailure)?;
            chol.solve(&gh).adjoint()
        }
        _ => {
            let mut outer = &g.g * &gh;
            add_to_diagonal(&mut outer, reg);
            let chol = Cholesky::new(outer).ok_or(ReceiverError::NumericalFailure)?;
            chol.solve(&g.g)
        }
    };
    if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(ReceiverError::NumericalFailure);
    }
    Ok(Combiner { v, kind: CombinerKind::Mmse })
}

fn add_to_diagonal(a: &mut DMatrix<Complex64>, value: f64) {
    for i in 0..a.nrows() {
        a[(i, i)].re += value;
    }
}

/// Zero forcing `V = G (G^H G)^-1`, computed from the SVD of `G` so that
/// `V^H G = I` holds to roughly `cond(G) * eps`.
pub fn zf_combiner(g: &ChannelMatrix) -> Result<Combiner, ReceiverError> {
    let (m, k) = (g.antennas(), g.devices());
    if k == 0 || m < k {
        return Err(ReceiverError::RankDeficient(format!("need M >= K >= 1, got M={m} K={k}")));
    }
    let svd = g.g.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 0.0) || (smax / smin).powi(2) > ZF_MAX_GRAM_CONDITION {
        return Err(ReceiverError::RankDeficient(format!(
            "Gram condition number {:e} exceeds {:e}",
            (smax / smin).powi(2),
            ZF_MAX_GRAM_CONDITION
        )));
    }
    let u = svd.u.ok_or(ReceiverError::NumericalFailure)?;
    let v_t = svd.v_t.ok_or(ReceiverError::NumericalFailure)?;
    let mut scaled = u;
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col /= Complex64::new(sv[j], 0.0);
    }
    Ok(Combiner { v: scaled * v_t, kind: CombinerKind::Zf })
}

/// Matched filter `V = G`.
pub fn mrc_combiner(g: &ChannelMatrix) -> Combiner {
    Combiner { v: g.g.clone(), kind: CombinerKind::Mrc }
}

pub fn build_combiner(
    kind: CombinerKind,
    g: &ChannelMatrix,
    noise_w: f64,
    tx_power_w: f64,
) -> Result<Combiner, ReceiverError> {
    match kind {
        CombinerKind::Mmse => mmse_combiner(g, noise_w, tx_power_w),
        CombinerKind::Zf => zf_combiner(g),
        CombinerKind::Mrc => Ok(mrc_combiner(g)),
    }
}

/// SINR of every device after combining:
/// `p |v_k^H g_k|^2 / (p sum_{j != k} |v_k^H g_j|^2 + sigma^2 ||v_k||^2)`.
pub fn sinr_per_user(
    v: &Combiner,
    g: &ChannelMatrix,
    tx_power_w: f64,
    noise_w: f64,
) -> Result<Vec<f64>, ReceiverError> {
    if v.v.shape() != g.g.shape() {
        return Err(ReceiverError::DimensionMismatch(format!(
            "combiner is {:?}, channel is {:?}",
            v.v.shape(),
            g.g.shape()
        )));
    }
    let cross = v.v.adjoint() * &g.g;
    let k = g.devices();
    let mut out = Vec::with_capacity(k);
    for user in 0..k {
        let vnorm2 = v.v.column(user).norm_squared();
        if vnorm2 == 0.0 {
            return Err(ReceiverError::ZeroCombinerColumn(user));
        }
        let row = cross.row(user);
        let signal = row[user].norm_sqr();
        let interference: f64 = row.iter().enumerate().filter(|&(j, _)| j != user).map(|(_, c)| c.norm_sqr()).sum();
        out.push(tx_power_w * signal / (tx_power_w * interference + noise_w * vnorm2));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub sinr: Vec<f64>,
    pub decoded: Vec<bool>,
    pub decoded_count: usize,
}

/// A device is decoded when its SINR reaches `2^R - 1` (inclusive).
pub fn decode(sinrs: &[f64], rate_bpshz: f64) -> SinrReport {
    let threshold = rate_bpshz.exp2() - 1.0;
    let decoded: Vec<bool> = sinrs.iter().map(|&s| s >= threshold).collect();
    let decoded_count = decoded.iter().filter(|&&d| d).count();
    SinrReport { sinr: sinrs.to_vec(), decoded, decoded_count }
}
