//! Measure files, plan and trajectory CSV, seeded generators and histograms.
//!
//! A measure file is line oriented:
//!
//! ```text
//! sublorentz-measure v1
//! # comments and blank lines are ignored
//! atom 0.5 -0.25 0.125 0.5
//! atom 2 0 0 0.5
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::causality::{classify, AxisBox, CausalRelation};
use crate::group::GroupPoint;
use crate::transport::{CostMatrix, DiscreteMeasure, TransportPlan};

pub const MEASURE_HEADER: &str = "sublorentz-measure v1";
/// Weight sums within this distance of 1 are renormalised on load.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;
const GENERATION_ATTEMPTS: usize = 1000;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}, {field}: {message}")]
    Parse { line: usize, field: String, message: String },
    #[error("weights: {0}")]
    Weight(String),
    #[error("no valid instance after {attempts} attempts")]
    GenerationFailure { attempts: usize },
}

fn parse_error(line: usize, field: &str, message: impl Into<String>) -> IoError {
    IoError::Parse { line, field: field.to_string(), message: message.into() }
}

/// Parse a measure document.
pub fn parse_measure(text: &str) -> Result<DiscreteMeasure, IoError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    let header = lines.by_ref().find(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match header {
        Some((_, MEASURE_HEADER)) => {}
        Some((n, other)) => return Err(parse_error(n, "header", format!("expected `{MEASURE_HEADER}`, found `{other}`"))),
        None => return Err(parse_error(1, "header", "empty document")),
    }
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for (n, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("atom") => {}
            Some(other) => return Err(parse_error(n, "keyword", format!("expected `atom`, found `{other}`"))),
            None => continue,
        }
        let mut values = [0.0; 4];
        for (slot, name) in values.iter_mut().zip(["x", "y", "z", "w"]) {
            let token = tokens.next().ok_or_else(|| parse_error(n, name, "missing value"))?;
            *slot = token
                .parse::<f64>()
                .map_err(|e| parse_error(n, name, format!("`{token}`: {e}")))?;
            if !slot.is_finite() {
                return Err(parse_error(n, name, "value is not finite"));
            }
        }
        if let Some(extra) = tokens.next() {
            return Err(parse_error(n, "atom", format!("unexpected trailing `{extra}`")));
        }
        if values[3] < 0.0 {
            return Err(IoError::Weight(format!("line {n}: negative weight {}", values[3])));
        }
        atoms.push(GroupPoint::new(values[0], values[1], values[2]));
        weights.push(values[3]);
    }
    if atoms.is_empty() {
        return Err(IoError::Weight("measure has no atoms".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > RENORMALIZE_TOLERANCE {
        return Err(IoError::Weight(format!("weights sum to {sum}")));
    }
    if (sum - 1.0).abs() > 1e-12 {
        weights.iter_mut().for_each(|w| *w /= sum);
    }
    DiscreteMeasure::new(atoms, weights).map_err(|e| IoError::Weight(e.to_string()))
}

/// Render a measure with 17 significant digits per value.
pub fn format_measure(measure: &DiscreteMeasure) -> String {
    let mut out = String::from(MEASURE_HEADER);
    out.push('\n');
    for (q, w) in measure.iter() {
        let _ = writeln!(out, "atom {:.16e} {:.16e} {:.16e} {:.16e}", q.x, q.y, q.z, w);
    }
    out
}

pub fn load_measure(path: impl AsRef<Path>) -> Result<DiscreteMeasure, IoError> {
    parse_measure(&fs::read_to_string(path)?)
}

pub fn save_measure(measure: &DiscreteMeasure, path: impl AsRef<Path>) -> Result<(), IoError> {
    fs::write(path, format_measure(measure))?;
    Ok(())
}

/// One positive entry of a transport plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanRecord {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
    /// `mass · c(x_source, y_target)`.
    pub cost: f64,
}

pub fn plan_records(plan: &TransportPlan, cost: &CostMatrix) -> Vec<PlanRecord> {
    plan.support(0.0)
        .into_iter()
        .map(|(i, j)| {
            let mass = plan.mass(i, j);
            PlanRecord { source: i, target: j, mass, cost: mass * cost.get(i, j).unwrap_or(0.0) }
        })
        .collect()
}

/// `i,j,mass,cost` rows with a header line.
pub fn write_plan_csv(records: &[PlanRecord], mut out: impl Write) -> Result<(), IoError> {
    writeln!(out, "i,j,mass,cost")?;
    for r in records {
        writeln!(out, "{},{},{:.16e},{:.16e}", r.source, r.target, r.mass, r.cost)?;
    }
    Ok(())
}

/// `t,x,y,z` rows with a header line.
pub fn write_trajectory_csv(samples: &[(f64, GroupPoint)], mut out: impl Write) -> Result<(), IoError> {
    writeln!(out, "t,x,y,z")?;
    for (t, q) in samples {
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", t, q.x, q.y, q.z)?;
    }
    Ok(())
}

/// `n` uniform atoms drawn from `bbox` with equal weights.
pub fn sample_uniform_box(bbox: &AxisBox, n: usize, seed: u64) -> DiscreteMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = (0..n.max(1)).map(|_| bbox.sample(&mut rng)).collect();
    DiscreteMeasure::uniform(atoms).expect("at least one atom")
}

/// Source and target measures with every source/target pair chronological.
///
/// Sources fill a small box around a random centre, targets a box around a
/// random chronological displacement of that centre; candidates failing the
/// rectangle check are redrawn.
pub fn sample_chronological_pair(
    n: usize,
    m: usize,
    seed: u64,
) -> Result<(DiscreteMeasure, DiscreteMeasure), IoError> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GENERATION_ATTEMPTS {
        let center = GroupPoint::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let shift = GroupPoint::new(rng.random_range(2.0..3.0), rng.random_range(-0.5..0.5), rng.random_range(-0.3..0.3));
        let spread = AxisBox::new([-0.3; 3], [0.3; 3]);
        let sources: Vec<GroupPoint> = (0..n.max(1)).map(|_| center.mul(spread.sample(&mut rng))).collect();
        let targets: Vec<GroupPoint> =
            (0..m.max(1)).map(|_| center.mul(shift).mul(spread.sample(&mut rng))).collect();
        let ok = sources
            .iter()
            .all(|&x| targets.iter().all(|&y| classify(x, y) == CausalRelation::Chronological));
        if ok {
            let mu = DiscreteMeasure::uniform(sources).expect("non-empty");
            let nu = DiscreteMeasure::uniform(targets).expect("non-empty");
            return Ok((mu, nu));
        }
    }
    Err(IoError::GenerationFailure { attempts: GENERATION_ATTEMPTS })
}

/// Piecewise-constant density from weighted points on a regular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    bbox: AxisBox,
    bins: [usize; 3],
    density: Vec<f64>,
}

impl Histogram {
    fn bin_of(&self, q: GroupPoint) -> Option<usize> {
        if !self.bbox.contains(q) {
            return None;
        }
        let p = q.to_array();
        let mut index = 0;
        for k in 0..3 {
            let width = self.bbox.hi[k] - self.bbox.lo[k];
            let cell = (((p[k] - self.bbox.lo[k]) / width) * self.bins[k] as f64) as usize;
            index = index * self.bins[k] + cell.min(self.bins[k] - 1);
        }
        Some(index)
    }

    /// Density at `q`, zero outside the grid.
    pub fn density(&self, q: GroupPoint) -> f64 {
        self.bin_of(q).map_or(0.0, |b| self.density[b])
    }

    pub fn bin_volume(&self) -> f64 {
        self.bbox.volume() / self.density.len() as f64
    }

    /// Densities of all bins, `z` fastest.
    pub fn values(&self) -> &[f64] {
        &self.density
    }

    /// Mass captured by the grid.
    pub fn total_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_volume()
    }
}

/// Normalised bin masses per unit coordinate volume; points outside `bbox` are dropped.
pub fn histogram_density(points: &[GroupPoint], weights: Option<&[f64]>, bbox: AxisBox, bins: [usize; 3]) -> Histogram {
    let bins = bins.map(|b| b.max(1));
    let mut hist = Histogram { bbox, bins, density: vec![0.0; bins.iter().product()] };
    let mut total = 0.0;
    for (k, &q) in points.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[k]);
        total += w;
        if let Some(b) = hist.bin_of(q) {
            hist.density[b] += w;
        }
    }
    let scale = hist.bin_volume() * if total > 0.0 { total } else { 1.0 };
    hist.density.iter_mut().for_each(|d| *d /= scale);
    hist
}
