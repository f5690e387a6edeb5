//! SVG rendering of sweep results. The plot-data text files are the
//! contract; images are a convenience.

use std::path::Path;

use plotters::prelude::*;

use crate::geometry::DeploymentKind;
use crate::montecarlo::TrafficKind;

use super::output::ResultRow;
use super::CliError;

fn colour(d: DeploymentKind) -> RGBColor {
    match d {
        DeploymentKind::Centralized => RGBColor(31, 119, 180),
        DeploymentKind::Grid => RGBColor(214, 39, 40),
        DeploymentKind::Linear => RGBColor(44, 160, 44),
    }
}

/// Renders outage vs the sweep axis on a log y-axis. Zero outage cannot be
/// shown on a log scale, so it is drawn at the lower edge of the plot.
pub fn render_svg(rows: &[ResultRow], path: &Path) -> Result<(), CliError> {
    let axis = rows[0].axis;
    let done: Vec<&ResultRow> = rows.iter().filter(|r| r.p_out.is_some()).collect();
    let min_pos = done.iter().filter_map(|r| r.p_out).filter(|&p| p > 0.0).fold(1.0_f64, f64::min);
    let floor = 10f64.powf(min_pos.log10().floor() - 1.0).max(1e-7);
    let (x_lo, x_hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.axis_value), b.max(r.axis_value)));
    let pad = if x_hi > x_lo { 0.03 * (x_hi - x_lo) } else { 1.0 };

    let err = |e: &dyn std::fmt::Display| CliError::Runtime(format!("plotting {}: {e}", path.display()));
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .margin(16)
        .x_label_area_size(44)
        .y_label_area_size(64)
        .build_cartesian_2d((x_lo - pad)..(x_hi + pad), (floor..1.0).log_scale())
        .map_err(|e| err(&e))?;
    chart
        .configure_mesh()
        .x_desc(axis.label())
        .y_desc("Outage probability")
        .y_label_formatter(&|v| format!("{v:.0e}"))
        .draw()
        .map_err(|e| err(&e))?;

    for d in DeploymentKind::ALL {
        for t in TrafficKind::ALL {
            let mut pts: Vec<(f64, f64, f64)> = done
                .iter()
                .filter(|r| r.deployment == d && r.traffic == t)
                .map(|r| (r.axis_value, r.p_out.unwrap(), r.ci_halfwidth.unwrap_or(0.0)))
                .collect();
            if pts.is_empty() {
                continue;
            }
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let c = colour(d);
            let clamp = |v: f64| v.clamp(floor, 1.0);

            let mut band: Vec<(f64, f64)> = pts.iter().map(|&(x, p, ci)| (x, clamp(p + ci))).collect();
            band.extend(pts.iter().rev().map(|&(x, p, ci)| (x, clamp(p - ci))));
            chart.draw_series(std::iter::once(Polygon::new(band, c.mix(0.15)))).map_err(|e| err(&e))?;

            let style = if t == TrafficKind::Regular { c.stroke_width(2) } else { c.stroke_width(1) };
            let line: Vec<(f64, f64)> = pts.iter().map(|&(x, p, _)| (x, clamp(p))).collect();
            chart
                .draw_series(LineSeries::new(line.clone(), style))
                .map_err(|e| err(&e))?
                .label(format!("{} {}", d.as_str(), t.as_str()))
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], style));
            match t {
                TrafficKind::Regular => {
                    chart.draw_series(line.iter().map(|&p| Circle::new(p, 3, c.filled()))).map_err(|e| err(&e))?;
                }
                TrafficKind::Alarm => {
                    chart.draw_series(line.iter().map(|&p| Cross::new(p, 4, c))).map_err(|e| err(&e))?;
                }
            }
        }
    }
    chart
        .configure_series_labels()
        .border_style(BLACK)
        .background_style(WHITE.mix(0.8))
        .position(SeriesLabelPosition::LowerRight)
        .draw()
        .map_err(|e| err(&e))?;
    root.present().map_err(|e| err(&e))?;
    Ok(())
}
