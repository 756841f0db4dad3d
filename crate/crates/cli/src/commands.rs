use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sublorentz::brenier::{interpolate, transport_map_from_duals, MapReport, SemiDiscretePotential};
use sublorentz::causality::{classify, tau};
use sublorentz::geodesics::{energy, flow, log_map};
use sublorentz::io::{format_measure, load_measure, plan_records, write_plan_csv, write_trajectory_csv};
use sublorentz::minkowski::{right_translation_instance, right_translation_verdict, Verdict};
use sublorentz::transport::{
    check_cyclical_monotonicity, cost_matrix, duality_gap, solve_kantorovich, CostParams, CycleSearch, DiscreteMeasure,
    DualPotentials, TransportPlan,
};
use sublorentz::verify::run_suites;
use sublorentz::{FrameCovector, GroupPoint};

use crate::format::{covector, point, sig};
use crate::plot;
use crate::{Cli, CliError, Command, GlobalOpts};

const MONOTONICITY_CYCLES: usize = 6;

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let g = &cli.global;
    let params = g.params()?;
    if !(g.tol.is_finite() && g.tol >= 0.0) {
        return Err(CliError::Parse(format!("tolerance must be a nonnegative number, got {}", g.tol)));
    }
    for path in [&g.out, &g.svg].into_iter().flatten() {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            if !dir.is_dir() {
                return Err(CliError::Io(format!("output directory {} does not exist", dir.display())));
            }
        }
    }
    match &cli.command {
        Command::Tau { from, to } => cmd_tau(g, GroupPoint::from_array(*from), GroupPoint::from_array(*to), stdout),
        Command::Geodesic { from, cov, t, n } => {
            let cov = FrameCovector::new(cov[0], cov[1], cov[2]);
            cmd_geodesic(g, GroupPoint::from_array(*from), cov, *t, *n, stdout)
        }
        Command::Logmap { from, to } => cmd_logmap(g, GroupPoint::from_array(*from), GroupPoint::from_array(*to), stdout),
        Command::Solve { mu, nu } => cmd_solve(g, params, mu, nu, stdout),
        Command::Brenier { mu, nu, times } => cmd_brenier(g, params, mu, nu, times, stdout),
        Command::Interpolate { mu, nu, t } => cmd_interpolate(g, params, mu, nu, *t, stdout),
        Command::RightTranslation { q0, mu, vertices } => {
            cmd_right_translation(g, params, GroupPoint::from_array(*q0), mu.as_deref(), *vertices, stdout)
        }
        Command::Verify => cmd_verify(g, params, stdout),
    }
}

/// Run `write` against the `--out` file, or stdout when none was given.
fn with_output(
    g: &GlobalOpts,
    stdout: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match &g.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            write(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => write(stdout),
    }
}

fn cmd_tau(g: &GlobalOpts, from: GroupPoint, to: GroupPoint, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "tau = {}", sig(tau(from, to), g.digits))?;
    writeln!(out, "relation = {}", classify(from, to))?;
    Ok(())
}

fn cmd_geodesic(
    g: &GlobalOpts,
    from: GroupPoint,
    cov: FrameCovector,
    t: f64,
    n: usize,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::Parse(format!("need at least two samples, got {n}")));
    }
    if !t.is_finite() {
        return Err(CliError::Parse(format!("duration {t} is not finite")));
    }
    let rows: Vec<(f64, GroupPoint)> = (0..n)
        .map(|k| {
            let s = t * k as f64 / (n - 1) as f64;
            (s, flow(from, cov, s).point)
        })
        .collect();
    with_output(g, stdout, |w| Ok(write_trajectory_csv(&rows, w)?))?;
    if let Some(svg) = &g.svg {
        let points: Vec<GroupPoint> = rows.iter().map(|r| r.1).collect();
        plot::geodesic(svg, &points)?;
    }
    Ok(())
}

fn cmd_logmap(g: &GlobalOpts, from: GroupPoint, to: GroupPoint, out: &mut dyn Write) -> Result<(), CliError> {
    let h = log_map(from, to).map_err(|e| CliError::Infeasible(e.to_string()))?;
    writeln!(out, "covector = {}", covector(h, g.digits))?;
    writeln!(out, "arclength = {}", sig((2.0 * energy(h)).sqrt(), g.digits))?;
    Ok(())
}

fn load_pair(mu: &Path, nu: &Path) -> Result<(DiscreteMeasure, DiscreteMeasure), CliError> {
    Ok((load_measure(mu)?, load_measure(nu)?))
}

fn cmd_solve(g: &GlobalOpts, params: CostParams, mu: &Path, nu: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (mu, nu) = load_pair(mu, nu)?;
    let (plan, duals) = solve_kantorovich(&mu, &nu, params)?;
    let cost = cost_matrix(&mu, &nu, params);
    let gap = duality_gap(&plan, &duals, &cost, &mu, &nu)?;
    let report = check_cyclical_monotonicity(&plan, &cost, MONOTONICITY_CYCLES);
    let d = g.digits;
    writeln!(stdout, "value = {}", sig(plan.value(), d))?;
    writeln!(stdout, "lp_distance = {}", sig(params.distance_from_value(plan.value()), d))?;
    writeln!(stdout, "duality_gap = {}", sig(gap, d))?;
    writeln!(stdout, "support = {}", report.support_size)?;
    let search = match report.search {
        CycleSearch::Exhaustive => "exhaustive",
        CycleSearch::ClosedWalks => "closed walks",
    };
    writeln!(
        stdout,
        "cyclical_monotonicity = {} (worst gain {}, cycles up to {}, {search}{})",
        if report.is_monotone(g.tol) { "ok" } else { "violated" },
        sig(report.worst_violation, d),
        report.max_cycle,
        if report.is_advisory() { ", advisory: support rectangle not causal" } else { "" },
    )?;
    if let Some(path) = &g.out {
        let mut file = BufWriter::new(File::create(path)?);
        write_plan_csv(&plan_records(&plan, &cost), &mut file)?;
        file.flush()?;
    }
    if let Some(svg) = &g.svg {
        let arrows: Vec<(GroupPoint, GroupPoint)> =
            plan.support(g.tol).into_iter().map(|(i, j)| (mu.atoms()[i], nu.atoms()[j])).collect();
        plot::transport(svg, mu.atoms(), nu.atoms(), &arrows)?;
    }
    Ok(())
}

struct SolvedMap {
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    plan: TransportPlan,
    map: MapReport,
    /// Indices into `mu` of the mapped samples, in order.
    mapped: Vec<usize>,
}

fn solve_map(params: CostParams, mu: &Path, nu: &Path) -> Result<SolvedMap, CliError> {
    let (mu, nu) = load_pair(mu, nu)?;
    let (plan, duals): (TransportPlan, DualPotentials) = solve_kantorovich(&mu, &nu, params)?;
    let pot = SemiDiscretePotential::forward_from_duals(&nu, &duals, params)?;
    let map = transport_map_from_duals(&mu, &pot);
    let mapped = (0..mu.len()).filter(|i| map.skipped.iter().all(|(k, _)| k != i)).collect();
    Ok(SolvedMap { mu, nu, plan, map, mapped })
}

fn check_times(times: &[f64]) -> Result<(), CliError> {
    match times.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        Some(t) => Err(CliError::Parse(format!("interpolation time {t} is outside [0, 1]"))),
        None if times.is_empty() => Err(CliError::Parse("no interpolation times given".into())),
        None => Ok(()),
    }
}

fn cmd_brenier(
    g: &GlobalOpts,
    params: CostParams,
    mu: &Path,
    nu: &Path,
    times: &[f64],
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    check_times(times)?;
    let solved = solve_map(params, mu, nu)?;
    let d = g.digits;
    let mut summary = Vec::new();
    writeln!(summary, "value = {}", sig(solved.plan.value(), d))?;
    writeln!(summary, "mapped = {} of {}", solved.map.samples.len(), solved.mu.len())?;
    for (i, e) in &solved.map.skipped {
        writeln!(summary, "skipped atom {i}: {e}")?;
    }
    if let Some(assignment) = solved.plan.assignment(g.tol) {
        let worst = solved
            .map
            .samples
            .iter()
            .zip(&solved.mapped)
            .map(|(s, &i)| s.image.max_abs_diff(&solved.nu.atoms()[assignment[i]]))
            .fold(0.0, f64::max);
        writeln!(summary, "max_image_deviation = {}", sig(worst, d))?;
    }
    with_output(g, stdout, |w| {
        writeln!(w, "i,t,x,y,z")?;
        for (s, &i) in solved.map.samples.iter().zip(&solved.mapped) {
            for &t in times {
                let q = interpolate(s, t);
                writeln!(w, "{i},{},{}", sig(t, d), point(q, 17))?;
            }
        }
        Ok(())
    })?;
    if g.out.is_some() {
        stdout.write_all(&summary)?;
    } else {
        std::io::stderr().write_all(&summary)?;
    }
    if let Some(svg) = &g.svg {
        let traces: Vec<Vec<GroupPoint>> = solved
            .map
            .samples
            .iter()
            .map(|s| (0..=20).map(|k| interpolate(s, k as f64 / 20.0)).collect())
            .collect();
        plot::interpolation(svg, solved.mu.atoms(), solved.nu.atoms(), &traces)?;
    }
    Ok(())
}

fn cmd_interpolate(
    g: &GlobalOpts,
    params: CostParams,
    mu: &Path,
    nu: &Path,
    t: f64,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    check_times(&[t])?;
    let solved = solve_map(params, mu, nu)?;
    if let Some((i, e)) = solved.map.skipped.first() {
        return Err(CliError::Failed(format!("atom {i} has no Brenier image: {e}")));
    }
    let atoms = solved.map.samples.iter().map(|s| interpolate(s, t)).collect();
    let measure = DiscreteMeasure::new(atoms, solved.mu.weights().to_vec())?;
    with_output(g, stdout, |w| Ok(w.write_all(format_measure(&measure).as_bytes())?))
}

fn cmd_right_translation(
    g: &GlobalOpts,
    params: CostParams,
    q0: GroupPoint,
    mu: Option<&Path>,
    vertices: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mu = match mu {
        Some(path) => load_measure(path)?,
        None => right_translation_instance(q0, vertices, params, &mut ChaCha8Rng::seed_from_u64(g.seed)),
    };
    let report = right_translation_verdict(&mu, q0, params)?;
    let d = g.digits;
    writeln!(out, "predicate = {}", report.predicate)?;
    match report.verdict {
        Verdict::Optimal => writeln!(out, "verdict = optimal")?,
        Verdict::NotOptimal { gap } => writeln!(out, "verdict = not optimal (gap {})", sig(gap, d))?,
    }
    writeln!(out, "translation_cost = {}", sig(report.translation_cost, d))?;
    writeln!(out, "optimal_value = {}", sig(report.optimal_value, d))?;
    writeln!(out, "agrees = {}", report.agrees())?;
    if let Some(svg) = &g.svg {
        let moved: Vec<GroupPoint> = mu.atoms().iter().map(|&q| q * q0).collect();
        let arrows: Vec<_> = mu.atoms().iter().copied().zip(moved.iter().copied()).collect();
        plot::transport(svg, mu.atoms(), &moved, &arrows)?;
    }
    Ok(())
}

fn cmd_verify(g: &GlobalOpts, params: CostParams, out: &mut dyn Write) -> Result<(), CliError> {
    let results = run_suites(g.seed, params);
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &results {
        writeln!(
            out,
            "{}  {:width$}  worst {}  tolerance {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            sig(r.worst, 3),
            sig(r.tolerance, 3),
        )?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} suites failed", results.len())));
    }
    Ok(())
}
