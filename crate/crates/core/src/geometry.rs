//! Hall geometry and antenna placement for the three deployment architectures.
//!
//! All placements are deterministic. AP order is fixed so that the channel
//! matrix layout is reproducible: row-major `(q_x, q_y)` for the grid and
//! bottom, left, top, right walls for the linear (radio stripe) layout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid site: {0}")]
    InvalidSite(String),
    #[error("grid deployment needs a perfect-square AP count, got {0}")]
    NotPerfectSquare(usize),
    #[error("linear deployment needs an AP count divisible by 4, got {0}")]
    NotDivisibleByFour(usize),
    #[error("invalid deployment: {0}")]
    InvalidDeployment(String),
}

/// Square factory hall of side `side_length_m`, APs mounted at `ap_height_m`,
/// devices at `mtd_height_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteConfig {
    pub side_length_m: f64,
    pub ap_height_m: f64,
    pub mtd_height_m: f64,
}

impl SiteConfig {
    pub fn new(side_length_m: f64, ap_height_m: f64, mtd_height_m: f64) -> Result<Self, GeometryError> {
        let site = Self { side_length_m, ap_height_m, mtd_height_m };
        site.validate()?;
        Ok(site)
    }

    /// 6 m AP height and 1.5 m device height.
    pub fn factory_hall(side_length_m: f64) -> Self {
        Self { side_length_m, ap_height_m: 6.0, mtd_height_m: 1.5 }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let ok = self.side_length_m.is_finite()
            && self.side_length_m > 0.0
            && self.mtd_height_m.is_finite()
            && self.mtd_height_m >= 0.0
            && self.ap_height_m.is_finite()
            && self.ap_height_m > self.mtd_height_m;
        if ok {
            Ok(())
        } else {
            Err(GeometryError::InvalidSite(format!(
                "need side > 0 and ap height > device height >= 0, got l={} h={} h_mtd={}",
                self.side_length_m, self.ap_height_m, self.mtd_height_m
            )))
        }
    }

    /// True if `(x, y)` lies on the floor plan (boundary included).
    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        (0.0..=self.side_length_m).contains(&x) && (0.0..=self.side_length_m).contains(&y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeploymentKind {
    Centralized,
    Grid,
    Linear,
}

impl DeploymentKind {
    pub const ALL: [DeploymentKind; 3] = [DeploymentKind::Centralized, DeploymentKind::Grid, DeploymentKind::Linear];

    pub fn as_str(self) -> &'static str {
        match self {
            DeploymentKind::Centralized => "centralized",
            DeploymentKind::Grid => "grid",
            DeploymentKind::Linear => "linear",
        }
    }
}

impl std::fmt::Display for DeploymentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DeploymentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "centralized" => Ok(DeploymentKind::Centralized),
            "grid" => Ok(DeploymentKind::Grid),
            "linear" => Ok(DeploymentKind::Linear),
            other => Err(format!("unknown deployment '{other}'")),
        }
    }
}

/// Architecture plus antenna budget: `total_antennas = ap_count * antennas_per_ap`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentSpec {
    pub kind: DeploymentKind,
    pub total_antennas: usize,
    pub ap_count: usize,
    pub antennas_per_ap: usize,
}

impl DeploymentSpec {
    /// A single co-located array of `m` antennas.
    pub fn centralized(m: usize) -> Result<Self, GeometryError> {
        Self::new(DeploymentKind::Centralized, 1, m)
    }

    /// `q` APs with `s` antennas each.
    pub fn distributed(kind: DeploymentKind, q: usize, s: usize) -> Result<Self, GeometryError> {
        Self::new(kind, q, s)
    }

    /// Splits `m` antennas into APs of `s` antennas; centralized ignores `s`.
    pub fn with_total(kind: DeploymentKind, m: usize, s: usize) -> Result<Self, GeometryError> {
        match kind {
            DeploymentKind::Centralized => Self::centralized(m),
            _ => {
                if s == 0 || !m.is_multiple_of(s) {
                    return Err(GeometryError::InvalidDeployment(format!(
                        "M={m} is not divisible by S={s}"
                    )));
                }
                Self::new(kind, m / s, s)
            }
        }
    }

    fn new(kind: DeploymentKind, q: usize, s: usize) -> Result<Self, GeometryError> {
        let spec = Self { kind, total_antennas: q * s, ap_count: q, antennas_per_ap: s };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let (m, q, s) = (self.total_antennas, self.ap_count, self.antennas_per_ap);
        if q == 0 || s == 0 || m != q * s {
            return Err(GeometryError::InvalidDeployment(format!(
                "need M = Q*S with Q, S >= 1, got M={m} Q={q} S={s}"
            )));
        }
        match self.kind {
            DeploymentKind::Centralized if q != 1 => Err(GeometryError::InvalidDeployment(format!(
                "centralized deployment has exactly one AP, got Q={q}"
            ))),
            DeploymentKind::Grid if integer_sqrt(q).is_none() => Err(GeometryError::NotPerfectSquare(q)),
            DeploymentKind::Linear if q % 4 != 0 => Err(GeometryError::NotDivisibleByFour(q)),
            _ => Ok(()),
        }
    }

    /// AP positions in channel-matrix block order.
    pub fn ap_positions(&self, site: &SiteConfig) -> Result<Vec<Position>, GeometryError> {
        self.validate()?;
        match self.kind {
            DeploymentKind::Centralized => Ok(vec![place_centralized(site)]),
            DeploymentKind::Grid => place_grid(site, self.ap_count),
            DeploymentKind::Linear => place_linear(site, self.ap_count),
        }
    }
}

fn integer_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Single BS at the hall center.
pub fn place_centralized(site: &SiteConfig) -> Position {
    let half = site.side_length_m / 2.0;
    Position::new(half, half, site.ap_height_m)
}

/// `q_count` APs on a regular `sqrt(Q) x sqrt(Q)` ceiling grid, each at the
/// center of its cell.
pub fn place_grid(site: &SiteConfig, q_count: usize) -> Result<Vec<Position>, GeometryError> {
    let side = integer_sqrt(q_count)
        .filter(|&r| r >= 1)
        .ok_or(GeometryError::NotPerfectSquare(q_count))?;
    let pitch = site.side_length_m / side as f64;
    let mut out = Vec::with_capacity(q_count);
    for qx in 1..=side {
        for qy in 1..=side {
            out.push(Position::new(
                (qx as f64 - 0.5) * pitch,
                (qy as f64 - 0.5) * pitch,
                site.ap_height_m,
            ));
        }
    }
    Ok(out)
}

/// `q_count / 4` APs evenly spaced along each wall.
pub fn place_linear(site: &SiteConfig, q_count: usize) -> Result<Vec<Position>, GeometryError> {
    if q_count == 0 || !q_count.is_multiple_of(4) {
        return Err(GeometryError::NotDivisibleByFour(q_count));
    }
    let l = site.side_length_m;
    let h = site.ap_height_m;
    let per_wall = q_count / 4;
    let pitch = 4.0 * l / q_count as f64;
    let offset = |i: usize| (i as f64 - 0.5) * pitch;

    let mut out = Vec::with_capacity(q_count);
    out.extend((1..=per_wall).map(|i| Position::new(offset(i), 0.0, h)));
    out.extend((1..=per_wall).map(|i| Position::new(0.0, offset(i), h)));
    out.extend((1..=per_wall).map(|i| Position::new(offset(i), l, h)));
    out.extend((1..=per_wall).map(|i| Position::new(l, offset(i), h)));
    Ok(out)
}

#[inline]
pub fn distance_3d(a: &Position, b: &Position) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn site(l: f64) -> SiteConfig {
        SiteConfig::factory_hall(l)
    }

    #[test]
    fn centralized_is_hall_center() {
        assert_eq!(place_centralized(&site(250.0)), Position::new(125.0, 125.0, 6.0));
        assert_eq!(place_centralized(&site(1000.0)), Position::new(500.0, 500.0, 6.0));
        let tiny = SiteConfig::new(2.0, 1.0, 0.0).unwrap();
        assert_eq!(place_centralized(&tiny), Position::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn grid_four_aps() {
        let got = place_grid(&site(250.0), 4).unwrap();
        let want = [
            Position::new(62.5, 62.5, 6.0),
            Position::new(62.5, 187.5, 6.0),
            Position::new(187.5, 62.5, 6.0),
            Position::new(187.5, 187.5, 6.0),
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn grid_single_ap_is_center() {
        assert_eq!(place_grid(&site(250.0), 1).unwrap(), vec![place_centralized(&site(250.0))]);
    }

    #[test]
    fn grid_rejects_non_square() {
        assert_eq!(place_grid(&site(250.0), 8), Err(GeometryError::NotPerfectSquare(8)));
        assert_eq!(place_grid(&site(250.0), 0), Err(GeometryError::NotPerfectSquare(0)));
    }

    #[test]
    fn grid_centroid_and_reflection() {
        for q in [1usize, 4, 9, 16, 25, 36] {
            let aps = place_grid(&site(250.0), q).unwrap();
            let n = aps.len() as f64;
            let cx: f64 = aps.iter().map(|p| p.x).sum::<f64>() / n;
            let cy: f64 = aps.iter().map(|p| p.y).sum::<f64>() / n;
            assert!((cx - 125.0).abs() < 1e-9 && (cy - 125.0).abs() < 1e-9, "Q={q}");
            for p in &aps {
                let mirrored = aps
                    .iter()
                    .any(|o| (o.x - (250.0 - p.x)).abs() < 1e-9 && (o.y - (250.0 - p.y)).abs() < 1e-9);
                assert!(mirrored, "Q={q} missing mirror of {p:?}");
            }
        }
    }

    #[test]
    fn linear_four_aps() {
        let got = place_linear(&site(250.0), 4).unwrap();
        let want = [
            Position::new(125.0, 0.0, 6.0),
            Position::new(0.0, 125.0, 6.0),
            Position::new(125.0, 250.0, 6.0),
            Position::new(250.0, 125.0, 6.0),
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn linear_eight_bottom_wall() {
        let got = place_linear(&site(250.0), 8).unwrap();
        assert_eq!(got[0], Position::new(62.5, 0.0, 6.0));
        assert_eq!(got[1], Position::new(187.5, 0.0, 6.0));
    }

    #[test]
    fn linear_on_perimeter_with_even_spacing() {
        let l = 250.0;
        let aps = place_linear(&site(l), 16).unwrap();
        assert_eq!(aps.len(), 16);
        for p in &aps {
            assert!(p.x == 0.0 || p.x == l || p.y == 0.0 || p.y == l, "{p:?}");
        }
        let pitch = 4.0 * l / 16.0;
        for wall in aps.chunks(4) {
            for pair in wall.windows(2) {
                assert!((distance_3d(&pair[0], &pair[1]) - pitch).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn linear_rejects_bad_count() {
        assert_eq!(place_linear(&site(250.0), 6), Err(GeometryError::NotDivisibleByFour(6)));
        assert_eq!(place_linear(&site(250.0), 0), Err(GeometryError::NotDivisibleByFour(0)));
    }

    #[test]
    fn distances() {
        assert_eq!(distance_3d(&Position::new(0.0, 0.0, 0.0), &Position::new(3.0, 4.0, 0.0)), 5.0);
        assert_eq!(distance_3d(&Position::new(1.0, 1.0, 1.0), &Position::new(1.0, 1.0, 1.0)), 0.0);
        assert_eq!(distance_3d(&Position::new(0.0, 0.0, 1.5), &Position::new(0.0, 0.0, 6.0)), 4.5);
    }

    #[test]
    fn deployment_invariants() {
        assert!(DeploymentSpec::with_total(DeploymentKind::Grid, 64, 4).is_ok());
        assert_eq!(
            DeploymentSpec::with_total(DeploymentKind::Grid, 32, 4),
            Err(GeometryError::NotPerfectSquare(8))
        );
        assert!(DeploymentSpec::with_total(DeploymentKind::Linear, 32, 4).is_ok());
        assert_eq!(
            DeploymentSpec::with_total(DeploymentKind::Linear, 24, 4),
            Err(GeometryError::NotDivisibleByFour(6))
        );
        assert!(DeploymentSpec::with_total(DeploymentKind::Linear, 30, 4).is_err());
        let c = DeploymentSpec::centralized(64).unwrap();
        assert_eq!((c.ap_count, c.antennas_per_ap), (1, 64));
        let bad = DeploymentSpec { kind: DeploymentKind::Grid, total_antennas: 10, ap_count: 4, antennas_per_ap: 4 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn site_validation() {
        assert!(SiteConfig::new(250.0, 6.0, 1.5).is_ok());
        assert!(SiteConfig::new(0.0, 6.0, 1.5).is_err());
        assert!(SiteConfig::new(250.0, 1.0, 1.5).is_err());
        assert!(SiteConfig::new(250.0, 6.0, -1.0).is_err());
    }
}
