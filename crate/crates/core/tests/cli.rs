use std::path::Path;
use std::process::{Command, Output};

use figure_eight::cli::{RunConfig, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION};
use figure_eight::refiner::RefinedSolution;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_figure-eight")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_refine_verify_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = run(&["solve", "--out", s(out)]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("loop.json").exists());
    let log = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(log.starts_with("iteration,action,gradient_norm,min_pair_distance,step_size"));

    assert_eq!(code(&run(&["refine", s(&out.join("loop.json")), "--out", s(out)])), EXIT_OK);
    let text = std::fs::read_to_string(out.join("solution.json")).unwrap();
    let sol = RefinedSolution::from_json(&text).unwrap();
    assert!(sol.residual_norm < 2e-11);
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x1,y1,vx1,vy1,ax1,ay1,l1,k1,x2"));
    assert_eq!(csv.lines().count(), 2502);

    // refining a refined file changes nothing
    let again = out.join("again");
    assert_eq!(code(&run(&["refine", s(&out.join("solution.json")), "--out", s(&again)])), EXIT_OK);
    assert_eq!(std::fs::read_to_string(again.join("solution.json")).unwrap(), text);

    let o = run(&["verify", s(&out.join("solution.json")), "--out", s(out), "--synthetic"]);
    assert_eq!(code(&o), EXIT_OK);
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("three_tangents_synthetic"));
    assert!(!table.contains("FAIL"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["exponent"], -1.0);

    assert_eq!(code(&run(&["plot", s(&out.join("solution.json")), "--out", s(out)])), EXIT_OK);
    let svg = std::fs::read_to_string(out.join("eight.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    for label in ["1s<", "1e<", "2s<", "2e<", "3s<", "3e<"] {
        assert!(svg.contains(label), "{label}");
    }
    assert_eq!(svg.matches("<path id=\"arc").count(), 3);
}

#[test]
fn seed_loop_plots() {
    let dir = tempfile::tempdir().unwrap();
    let seed = figure_eight::loop_space::FourierLoop::seed_eight(12.0, 0.3).unwrap();
    let path = dir.path().join("seed.json");
    std::fs::write(&path, seed.to_json().unwrap()).unwrap();
    assert_eq!(code(&run(&["plot", s(&path), "--out", s(dir.path())])), EXIT_OK);
}

#[test]
fn usage_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    assert_eq!(code(&run(&["solve", "--a", "0", "--out", out])), EXIT_USAGE);
    assert_eq!(code(&run(&["solve", "--a", "-2", "--out", out])), EXIT_USAGE);
    assert_eq!(code(&run(&["solve", "--grid", "10", "--out", out])), EXIT_USAGE);
    assert_eq!(code(&run(&["verify", "/no/such/file.json"])), EXIT_USAGE);
    assert_eq!(code(&run(&["bogus"])), EXIT_USAGE);
    let corrupt = dir.path().join("corrupt.json");
    std::fs::write(&corrupt, "{\"T\": 12, \"N\": ").unwrap();
    let o = run(&["refine", s(&corrupt), "--out", out]);
    assert_eq!(code(&o), EXIT_USAGE);
    assert_ne!(code(&o), EXIT_NUMERICAL);
}

#[test]
fn numerical_failure_has_its_own_code() {
    let dir = tempfile::tempdir().unwrap();
    // a start this far off collides before the end of the arc
    let bad = r#"{"potential_exponent": -1.0, "T": 12.0,
        "unknowns": {"x2_start": -0.05, "y3_start": 0.01, "u_start": 0.0, "w_start": 0.0},
        "residual_norm": 0.0}"#;
    let path = dir.path().join("bad.json");
    std::fs::write(&path, bad).unwrap();
    let o = run(&["refine", s(&path), "--out", s(dir.path())]);
    assert_eq!(code(&o), EXIT_NUMERICAL, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig { a: -1.1, modes: 18, grid: 384, out: dir.path().join("from_file"), ..RunConfig::default() };
    let path = dir.path().join("run.json");
    std::fs::write(&path, config.to_json().unwrap()).unwrap();
    let out = dir.path().join("from_flag");
    assert_eq!(code(&run(&["solve", "--config", s(&path), "--a", "-1.2", "--out", s(&out)])), EXIT_OK);
    let l = figure_eight::loop_space::FourierLoop::from_json(&std::fs::read_to_string(out.join("loop.json")).unwrap())
        .unwrap();
    assert_eq!(l.modes(), 18);
    assert!(!dir.path().join("from_file").exists());
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&run(&["solve", "--out", s(out)])), EXIT_OK);
        assert_eq!(code(&run(&["refine", s(&out.join("loop.json")), "--out", s(out)])), EXIT_OK);
        assert_eq!(code(&run(&["verify", s(&out.join("solution.json")), "--out", s(out), "--seed", "3"])), EXIT_OK);
    }
    for f in ["loop.json", "convergence.csv", "solution.json", "trajectory.csv", "report.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn sweep_skips_the_degenerate_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sweep", "-1.1", "-2", "-0.9", "--jobs", "2", "--out", s(dir.path())]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stdout));
    let mut rdr = csv::Reader::from_path(dir.path().join("sweep_summary.csv")).unwrap();
    let rows: Vec<figure_eight::cli::SweepRow> = rdr.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1].status, figure_eight::cli::SweepStatus::Skipped);
    assert!(rows[1].reason.contains("scaling-degenerate"));
    assert!(rows[0].all_passed && rows[2].all_passed);
    assert!(dir.path().join("a_-0.9000").join("solution.json").exists());
}

#[test]
fn perturbed_solution_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(code(&run(&["solve", "--out", s(out)])), EXIT_OK);
    assert_eq!(code(&run(&["refine", s(&out.join("loop.json")), "--out", s(out)])), EXIT_OK);
    let mut sol = RefinedSolution::from_json(&std::fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    sol.unknowns.w_start += 0.01;
    let path = out.join("perturbed.json");
    std::fs::write(&path, sol.to_json().unwrap()).unwrap();
    let o = run(&["verify", s(&path), "--out", s(out)]);
    assert_eq!(code(&o), EXIT_VERIFICATION);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
