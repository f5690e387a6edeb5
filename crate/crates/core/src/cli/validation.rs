//! Statistical check of the alarm position sampler.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{Position, SiteConfig};
use crate::stream::{derive_stream, purpose};
use crate::traffic::{alarm_density, sample_alarm, AlarmEvent, TruncatedGaussian};

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Midpoint-rule integral of the alarm density over the hall on an `n x n` grid.
pub fn density_integral(event: &AlarmEvent, site: &SiteConfig, n: usize) -> f64 {
    let h = site.side_length_m / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = (i as f64 + 0.5) * h;
            let y = (j as f64 + 0.5) * h;
            sum += alarm_density(x, y, event, site).expect("event validated");
        }
    }
    sum * h * h
}

/// Draws `devices` alarm positions for each of `realizations` independent streams.
pub fn sample_positions(
    event: &AlarmEvent,
    site: &SiteConfig,
    devices: usize,
    realizations: usize,
    seed: u64,
) -> Vec<Position> {
    (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = derive_stream(seed, &[r, purpose::POSITIONS]);
            sample_alarm(devices, event, site, &mut rng)
        })
        .collect::<Vec<_>>()
        .concat()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub samples: usize,
    pub ks_x: f64,
    pub ks_y: f64,
    /// Asymptotic 95% critical value `1.358 / sqrt(n)`.
    pub ks_critical_95: f64,
    pub density_integral: f64,
}

pub struct ValidationReport {
    pub summary: ValidationSummary,
    pub pdf_x: String,
    pub pdf_y: String,
    pub heatmap: String,
}

fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts.iter().map(|&c| c as f64 / (values.len() as f64 * width)).collect()
}

fn pdf_table(name: &str, values: &[f64], marginal: &TruncatedGaussian, l: f64, bins: usize) -> String {
    let emp = histogram(values, 0.0, l, bins);
    let width = l / bins as f64;
    let mut out = String::new();
    writeln!(out, "# marginal pdf of {name}: histogram vs truncated Gaussian").unwrap();
    writeln!(out, "{name} empirical_pdf theoretical_pdf").unwrap();
    for (i, e) in emp.iter().enumerate() {
        let c = (i as f64 + 0.5) * width;
        writeln!(out, "{c} {e:e} {:e}", marginal.pdf(c)).unwrap();
    }
    out
}

pub fn validate_alarm_sampler(
    event: &AlarmEvent,
    site: &SiteConfig,
    devices: usize,
    realizations: usize,
    bins: usize,
    seed: u64,
) -> ValidationReport {
    let pos = sample_positions(event, site, devices, realizations, seed);
    let xs: Vec<f64> = pos.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = pos.iter().map(|p| p.y).collect();
    let mx = event.marginal_x(site);
    let my = event.marginal_y(site);
    let l = site.side_length_m;

    let width = l / bins as f64;
    let mut grid = vec![0usize; bins * bins];
    for p in &pos {
        let i = ((p.x / width) as usize).min(bins - 1);
        let j = ((p.y / width) as usize).min(bins - 1);
        grid[i * bins + j] += 1;
    }
    let norm = pos.len() as f64 * width * width;
    let mut heatmap = String::new();
    writeln!(heatmap, "# joint alarm density on a {bins}x{bins} grid").unwrap();
    writeln!(heatmap, "x y empirical_density theoretical_density").unwrap();
    for i in 0..bins {
        for j in 0..bins {
            let x = (i as f64 + 0.5) * width;
            let y = (j as f64 + 0.5) * width;
            let th = alarm_density(x, y, event, site).expect("event validated");
            writeln!(heatmap, "{x} {y} {:e} {th:e}", grid[i * bins + j] as f64 / norm).unwrap();
        }
    }

    let n = pos.len();
    ValidationReport {
        summary: ValidationSummary {
            samples: n,
            ks_x: ks_statistic(&xs, |x| mx.cdf(x)),
            ks_y: ks_statistic(&ys, |y| my.cdf(y)),
            ks_critical_95: 1.358 / (n as f64).sqrt(),
            density_integral: density_integral(event, site, 400),
        },
        pdf_x: pdf_table("x", &xs, &mx, l, bins),
        pdf_y: pdf_table("y", &ys, &my, l, bins),
        heatmap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_exact_quantiles_is_half_step() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn ks_detects_shift() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0 * 0.5).collect();
        assert!(ks_statistic(&xs, |x| x.clamp(0.0, 1.0)) > 0.49);
    }

    #[test]
    fn small_validation_run_passes() {
        let site = SiteConfig::factory_hall(250.0);
        let ev = AlarmEvent::new(Position::new(62.5, 125.0, 0.0), 25.0);
        let rep = validate_alarm_sampler(&ev, &site, 100, 50, 20, 3);
        assert_eq!(rep.summary.samples, 5000);
        assert!(rep.summary.ks_x < 3.0 * rep.summary.ks_critical_95);
        assert!(rep.summary.ks_y < 3.0 * rep.summary.ks_critical_95);
        assert!((rep.summary.density_integral - 1.0).abs() < 1e-3);
        assert_eq!(rep.pdf_x.lines().count(), 22);
        assert_eq!(rep.heatmap.lines().count(), 2 + 400);
    }
}
