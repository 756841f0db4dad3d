use std::path::PathBuf;
use std::process::{Command, Output};

use sublorentz::io::{load_measure, parse_measure};
use sublorentz::GroupPoint;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sublorentz")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .to_string()
}

#[test]
fn tau_prints_value_and_relation() {
    let o = run(&["tau", "--from", "0,0,0", "--to", "2,1,0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(field(&text, "tau"), "1.73205081");
    assert_eq!(field(&text, "relation"), "Chronological");

    let o = run(&["tau", "--from", "0,0,0", "--to", "1,0,0.3"]);
    let text = stdout(&o);
    assert_eq!(field(&text, "tau"), "0");
    assert_eq!(field(&text, "relation"), "Unrelated");
}

#[test]
fn malformed_triple_exits_with_parse_code() {
    assert_eq!(run(&["tau", "--from", "0,0", "--to", "1,0,0"]).status.code(), Some(2));
    assert_eq!(run(&["tau", "--from", "a,b,c", "--to", "1,0,0"]).status.code(), Some(2));
    assert_eq!(run(&["--p", "1.5", "tau", "--from", "0,0,0", "--to", "1,0,0"]).status.code(), Some(2));
}

#[test]
fn geodesic_rows_and_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    let svg = dir.path().join("g.svg");
    let o = run(&[
        "geodesic", "--from", "0,0,0", "--cov", "-1,0,1", "--t", "1", "--n", "2",
        "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "t,x,y,z");
    assert_eq!(rows.len(), 3);
    let end: Vec<f64> = rows[2].split(',').map(|v| v.parse().unwrap()).collect();
    let expected = sublorentz::flow(GroupPoint::IDENTITY, sublorentz::FrameCovector::new(-1.0, 0.0, 1.0), 1.0).point;
    assert!((end[1] - 1f64.sinh()).abs() < 1e-12);
    assert!((end[1] - expected.x).abs() < 1e-15 && (end[2] - expected.y).abs() < 1e-15 && (end[3] - expected.z).abs() < 1e-15);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn straight_geodesic_is_a_line() {
    let o = run(&["geodesic", "--from", "0,0,0", "--cov", "-1,0,0", "--t", "2", "--n", "5"]);
    let text = stdout(&o);
    for row in text.lines().skip(1) {
        let v: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[1] - v[0]).abs() < 1e-15 && v[2] == 0.0 && v[3] == 0.0, "{row}");
    }
}

#[test]
fn geodesic_io_error_exits_with_io_code() {
    let o = run(&["geodesic", "--from", "0,0,0", "--cov", "-1,0,0", "--out", "/nonexistent-dir/g.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn solve_two_by_two_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.csv");
    let o = run(&[
        "solve", "--mu", fixture("pair_mu.txt").to_str().unwrap(), "--nu", fixture("pair_nu.txt").to_str().unwrap(),
        "--out", plan.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let value: f64 = field(&text, "value").parse().unwrap();
    assert!((value - 3.087534).abs() < 5e-7, "{value}");
    assert!(field(&text, "cyclical_monotonicity").starts_with("ok"));
    let gap: f64 = field(&text, "duality_gap").parse().unwrap();
    assert!(gap.abs() < 1e-9);
    let rows: Vec<String> = std::fs::read_to_string(&plan).unwrap().lines().map(String::from).collect();
    assert_eq!(rows[0], "i,j,mass,cost");
    let pairs: Vec<(usize, usize)> = rows[1..]
        .iter()
        .map(|r| {
            let v: Vec<&str> = r.split(',').collect();
            (v[0].parse().unwrap(), v[1].parse().unwrap())
        })
        .collect();
    assert_eq!(pairs, vec![(0, 0), (1, 1)]);
}

#[test]
fn solve_identical_measures_is_zero() {
    let mu = fixture("pair_mu.txt");
    let o = run(&["solve", "--mu", mu.to_str().unwrap(), "--nu", mu.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "value"), "0");
}

#[test]
fn solve_infeasible_fixture_exits_with_code_four() {
    let o = run(&[
        "solve", "--mu", fixture("origin.txt").to_str().unwrap(), "--nu", fixture("unrelated.txt").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NoCausalCoupling"));
}

#[test]
fn missing_measure_file_exits_with_io_code() {
    let o = run(&["solve", "--mu", "/nonexistent/mu.txt", "--nu", fixture("pair_nu.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn brenier_recovers_right_translation() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("map.csv");
    let svg = dir.path().join("map.svg");
    let mu_path = fixture("translate_mu.txt");
    let o = run(&[
        "brenier", "--mu", mu_path.to_str().unwrap(), "--nu", fixture("translate_nu.txt").to_str().unwrap(),
        "--times", "0,0.5,1", "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(field(&stdout(&o), "mapped"), "4 of 4");
    let mu = load_measure(&mu_path).unwrap();
    let q0 = GroupPoint::new(1.5, 0.5, 0.0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut rows = 0;
    for row in text.lines().skip(1) {
        let v: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
        let (i, t, q) = (v[0] as usize, v[1], GroupPoint::new(v[2], v[3], v[4]));
        if t == 0.0 {
            assert!(q.max_abs_diff(&mu.atoms()[i]) < 1e-12);
        }
        if t == 1.0 {
            assert!(q.max_abs_diff(&(mu.atoms()[i] * q0)) < 1e-9, "atom {i}: {q}");
        }
        rows += 1;
    }
    assert_eq!(rows, 12);
}

#[test]
fn interpolate_writes_a_measure() {
    let o = run(&[
        "interpolate", "--mu", fixture("translate_mu.txt").to_str().unwrap(), "--nu",
        fixture("translate_nu.txt").to_str().unwrap(), "--t", "1",
    ]);
    assert!(o.status.success());
    let moved = parse_measure(&stdout(&o)).unwrap();
    let target = load_measure(fixture("translate_nu.txt")).unwrap();
    for (a, b) in moved.atoms().iter().zip(target.atoms()) {
        assert!(a.max_abs_diff(b) < 1e-9);
    }
    let bad = run(&[
        "interpolate", "--mu", fixture("translate_mu.txt").to_str().unwrap(), "--nu",
        fixture("translate_nu.txt").to_str().unwrap(), "--t", "1.5",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn right_translation_reports_and_is_reproducible() {
    let a = run(&["--seed", "4", "right-translation", "--q0", "2,0.5,0.3"]);
    let b = run(&["--seed", "4", "right-translation", "--q0", "2,0.5,0.3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(field(&text, "predicate"), "false");
    assert!(field(&text, "verdict").starts_with("not optimal"));
    assert_eq!(field(&text, "agrees"), "true");

    let flat = stdout(&run(&["right-translation", "--q0", "1,0.5,0"]));
    assert_eq!(field(&flat, "verdict"), "optimal");
    assert_eq!(run(&["right-translation", "--q0", "1,0.5,0.3"]).status.code(), Some(4));
}

#[test]
fn verify_passes_every_suite() {
    let o = run(&["verify", "--seed", "7"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().count() >= 5);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert_eq!(o.stdout, run(&["verify", "--seed", "7"]).stdout);
}
