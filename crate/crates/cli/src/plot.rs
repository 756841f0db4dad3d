//! Static SVG result displays. Text is omitted so no font backend is needed.

use std::ops::Range;
use std::path::Path;

use plotters::prelude::*;

use sublorentz::GroupPoint;

use crate::CliError;

type Projection = fn(&GroupPoint) -> (f64, f64);

const XY: Projection = |q| (q.x, q.y);
const XZ: Projection = |q| (q.x, q.z);

fn plot_error(e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("plot: {e}"))
}

fn bounds<'a>(points: impl IntoIterator<Item = &'a GroupPoint>, proj: Projection) -> (Range<f64>, Range<f64>) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for q in points {
        let (x, y) = proj(q);
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let pad = |lo: f64, hi: f64| {
        if !lo.is_finite() {
            return -1.0..1.0;
        }
        let m = 0.05 * (hi - lo).max(1e-6);
        (lo - m)..(hi + m)
    };
    (pad(x0, x1), pad(y0, y1))
}

fn panel<DB: DrawingBackend>(
    area: &DrawingArea<DB, plotters::coord::Shift>,
    proj: Projection,
    all: &[GroupPoint],
    lines: &[Vec<GroupPoint>],
    sources: &[GroupPoint],
    targets: &[GroupPoint],
) -> Result<(), CliError> {
    let (xr, yr) = bounds(all, proj);
    let mut chart = ChartBuilder::on(area).margin(15).build_cartesian_2d(xr, yr).map_err(plot_error)?;
    for line in lines {
        chart
            .draw_series(LineSeries::new(line.iter().map(proj), BLUE.mix(0.6)))
            .map_err(plot_error)?;
    }
    chart
        .draw_series(sources.iter().map(|q| Circle::new(proj(q), 3, BLACK.filled())))
        .map_err(plot_error)?;
    chart
        .draw_series(targets.iter().map(|q| Circle::new(proj(q), 3, RED.filled())))
        .map_err(plot_error)?;
    Ok(())
}

/// Side-by-side `(x, y)` and `(x, z)` projections.
fn two_projections(
    path: &Path,
    lines: &[Vec<GroupPoint>],
    sources: &[GroupPoint],
    targets: &[GroupPoint],
) -> Result<(), CliError> {
    let root = SVGBackend::new(path, (960, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_error)?;
    let all: Vec<GroupPoint> = lines.iter().flatten().chain(sources).chain(targets).copied().collect();
    let panels = root.split_evenly((1, 2));
    panel(&panels[0], XY, &all, lines, sources, targets)?;
    panel(&panels[1], XZ, &all, lines, sources, targets)?;
    root.present().map_err(plot_error)
}

pub fn geodesic(path: &Path, trace: &[GroupPoint]) -> Result<(), CliError> {
    let ends: Vec<GroupPoint> = trace.first().into_iter().chain(trace.last()).copied().collect();
    two_projections(path, &[trace.to_vec()], &ends[..1], &ends[1..])
}

/// Atoms with straight arrows for each transported pair.
pub fn transport(
    path: &Path,
    sources: &[GroupPoint],
    targets: &[GroupPoint],
    pairs: &[(GroupPoint, GroupPoint)],
) -> Result<(), CliError> {
    let lines: Vec<Vec<GroupPoint>> = pairs.iter().map(|&(a, b)| vec![a, b]).collect();
    two_projections(path, &lines, sources, targets)
}

/// Atoms with the geodesic traces of the displacement interpolation.
pub fn interpolation(
    path: &Path,
    sources: &[GroupPoint],
    targets: &[GroupPoint],
    traces: &[Vec<GroupPoint>],
) -> Result<(), CliError> {
    two_projections(path, traces, sources, targets)
}
