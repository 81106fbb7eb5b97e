//! Acceptance suite: one pass/fail line per criterion, tolerances pinned below.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use figure_eight::action::{action_and_gradient, Quadrature};
use figure_eight::cli::{self, RunConfig, SolutionInput, SweepStatus};
use figure_eight::dynamics::{
    angular_momenta, center_of_mass, energies, integrate_at, pairwise_distances, torque_body3, uniform_times, Bodies,
    IntegrateOptions, PotentialSpec,
};
use figure_eight::geometry::{dp_dt, tangent_line_intersection_param, Line2, Vec2};
use figure_eight::loop_space::{apply_s, apply_sigma};
use figure_eight::refiner::{fundamental_trajectory, RESIDUAL_TOLERANCE};
use figure_eight::verifier::{self, tangent_concurrency, SyntheticOptions, TANGENT_TOLERANCE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PIPELINE_BUDGET: Duration = Duration::from_secs(300);
const SHOOTING_RESIDUAL: f64 = RESIDUAL_TOLERANCE; // 1e−11
const SYMMETRY_RESIDUAL: f64 = 1e-9;
const CONSERVATION_DRIFT: f64 = 1e-10;
const TOTAL_ANGULAR_MOMENTUM: f64 = 1e-11;
const GRADIENT_RELATIVE: f64 = 1e-6;
const GRADIENT_LOOPS: usize = 20;
const TORQUE_RELATIVE: f64 = 1e-12;
const TORQUE_CONFIGURATIONS: usize = 100;
const DP_DT_RELATIVE: f64 = 1e-6;
const TORQUE_IDENTITY_RELATIVE: f64 = 1e-6;
const TORQUE_IDENTITY_SAMPLES: usize = 256;
const TANGENT_SAMPLES: usize = 512;
const TANGENT_TRIPLES: usize = 50;
const SPLITTING_SOLUTIONS: usize = 100;
const SWEEP: [f64; 5] = [-2.5, -1.2, -1.1, -1.0, -0.9];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn pipeline() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig { out: dir.path().to_path_buf(), ..RunConfig::default() };
    let start = Instant::now();
    let run = || -> figure_eight::Result<_> {
        cli::cmd_solve(&config)?;
        cli::cmd_refine(&dir.path().join(cli::LOOP_FILE), &config)?;
        cli::cmd_verify(&dir.path().join(cli::SOLUTION_FILE), &config)
    };
    let report = match run() {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("pipeline error: {e}")),
    };
    let elapsed = start.elapsed();
    let e = common::eight();
    let residual = e.refinement.residuals.max_abs();
    let positive = report.checks.iter().all(|c| c.passed && c.worst_margin > 0.0);
    let kappa = cli::interior_min_abs_curvature(&e.trajectories.fundamental);
    let k1_negative = e
        .trajectories
        .fundamental
        .samples()
        .iter()
        .filter(|s| s.time() < -verifier::ENDPOINT_WINDOW * 12.0)
        .all(|s| s.curvatures[0] < 0.0);
    outcome(
        elapsed < PIPELINE_BUDGET && residual < SHOOTING_RESIDUAL && positive && kappa[1] > 0.0 && kappa[2] > 0.0 && k1_negative,
        format!(
            "{:.2?}, residual {residual:.2e}, {} checks all positive: {positive}, min|k| = ({:.3e}, {:.3e}, {:.3e})",
            elapsed,
            report.checks.len(),
            kappa[0],
            kappa[1],
            kappa[2]
        ),
    )
}

fn symmetry() -> Outcome {
    let e = common::eight();
    let orbit = &e.trajectories.orbit;
    let p = e.trajectories.potential;
    let len = orbit.len() - 1;
    let m = len / 12;
    let period = 12.0;
    // independent integration over one full period from the refined start at −T/12
    let start = e.trajectories.fundamental.first().unwrap().state;
    let times = uniform_times(-period / 12.0, period * 11.0 / 12.0, len);
    let direct = match integrate_at(&start, &p, &times[1..], &IntegrateOptions::default()) {
        Ok(d) => d,
        Err(err) => return outcome(false, format!("integration error: {err}")),
    };
    let q = |k: usize| -> Bodies {
        let k = k % len;
        if k == 0 { start.positions } else { direct[k - 1].positions }
    };
    // direct index k sits at orbit index k − m
    let time_index = |t: f64| (((t + 1.0) / period * len as f64).round() as i64).rem_euclid(len as i64) as usize;
    let (mut d6, mut chore, mut recon, mut com) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let closure = (0..3)
        .map(|i| (direct[len - 1].positions[i] - start.positions[i]).norm())
        .fold(0.0, f64::max);
    for k in 0..len {
        let now = q(k);
        let s_image = apply_s(|t| q(time_index(t)), times[k], period);
        let sigma_image = apply_sigma(|t| q(time_index(t)), times[k]);
        let reconstructed = orbit.samples()[(k + len - m) % len].state.positions;
        for i in 0..3 {
            d6 = d6.max((s_image[i] - now[i]).norm()).max((sigma_image[i] - now[i]).norm());
            recon = recon.max((reconstructed[i] - now[i]).norm());
            // q_{i+1}(t) = q_1(t + iT/3)
            chore = chore.max((now[i] - q(k + 4 * m * i)[0]).norm());
        }
        com = com.max(center_of_mass(&now).norm());
    }
    let worst = d6.max(chore).max(recon).max(com).max(closure);
    outcome(
        worst < SYMMETRY_RESIDUAL,
        format!(
            "D6 {d6:.2e}, choreography {chore:.2e}, direct vs reconstructed {recon:.2e}, closure {closure:.2e}, center of mass {com:.2e}"
        ),
    )
}

fn conservation() -> Outcome {
    let e = common::eight();
    let f = &e.trajectories.fundamental;
    let p = e.trajectories.potential;
    let energy: Vec<f64> = f.states().map(|s| energies(s, &p).unwrap().total).collect();
    let e0 = energy[0];
    let energy_drift = energy.iter().map(|x| (x - e0).abs()).fold(0.0, f64::max) / e0.abs();
    let l: Vec<f64> = f.states().map(|s| angular_momenta(s).total).collect();
    let l_scale = f.samples().iter().flat_map(|s| s.angular_momenta).fold(0.0f64, |m, x| m.max(x.abs()));
    let l_drift = l.iter().map(|x| (x - l[0]).abs()).fold(0.0, f64::max) / l_scale;
    let l_max = l.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    outcome(
        energy_drift < CONSERVATION_DRIFT && l_drift < CONSERVATION_DRIFT && l_max < TOTAL_ANGULAR_MOMENTUM,
        format!("energy drift {energy_drift:.2e}, angular momentum drift {l_drift:.2e}, max |L| {l_max:.2e}"),
    )
}

fn oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let p = PotentialSpec::newtonian();
    let mut gradient = 0.0f64;
    for _ in 0..GRADIENT_LOOPS {
        let l = common::perturbed_seed(&mut rng);
        let quad = Quadrature::for_loop(&l, 256).unwrap();
        let g = action_and_gradient(&l, &p, &quad).unwrap().gradient;
        let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let c = l.packed();
        for j in 0..c.len() {
            let h = 1e-5;
            let at = |delta: f64| {
                let mut cc = c.clone();
                cc[j] += delta;
                action_and_gradient(&l.with_packed(&cc).unwrap(), &p, &quad).unwrap().action
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            gradient = gradient.max((fd - g[j]).abs() / scale);
        }
    }

    let mut torque = 0.0f64;
    for _ in 0..TORQUE_CONFIGURATIONS {
        let q1 = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let q2 = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let q: Bodies = [q1, q2, -(q1 + q2)];
        if pairwise_distances(&q).min() < 0.1 {
            continue;
        }
        let acc = figure_eight::dynamics::accelerations(&q, &p).unwrap();
        let direct = q[2].wedge(acc[2]);
        let closed = torque_body3(&q, &p).unwrap();
        torque = torque.max((closed - direct).abs() / (q[2].norm() * acc[2].norm()));
    }

    // P(t) along an ellipse against a disjoint line, short of the parallel tangent near t = 2.11
    let m = Line2::new(Vec2::new(0.0, -2.0), Vec2::new(1.0, 0.3)).unwrap();
    let curve = |t: f64| {
        let (s, c) = t.sin_cos();
        (Vec2::new(2.0 * c, s), Vec2::new(-2.0 * s, c), Vec2::new(-2.0 * c, -s))
    };
    let mut dp = 0.0f64;
    for k in 0..50 {
        let t = 0.2 + 1.7 * k as f64 / 49.0;
        let param = |t: f64| {
            let (q, v, _) = curve(t);
            tangent_line_intersection_param(q, v, &m).unwrap().finite()
        };
        let (q, v, a) = curve(t);
        let h = 1e-3;
        let (Some(analytic), Some(f2), Some(f1), Some(b1), Some(b2)) =
            (dp_dt(q, v, a, &m).unwrap().finite(), param(t + 2.0 * h), param(t + h), param(t - h), param(t - 2.0 * h))
        else {
            continue;
        };
        let fd = (b2 - 8.0 * b1 + 8.0 * f1 - f2) / (12.0 * h);
        dp = dp.max((fd - analytic).abs() / analytic.abs());
    }
    outcome(
        gradient < GRADIENT_RELATIVE && torque < TORQUE_RELATIVE && dp < DP_DT_RELATIVE,
        format!("gradient {gradient:.2e}, torque {torque:.2e}, dP/dt {dp:.2e}"),
    )
}

fn torque_identity() -> Outcome {
    let e = common::eight();
    let f = &e.trajectories.fundamental;
    let samples = f.samples();
    let h = samples[1].time() - samples[0].time();
    let n = samples.len();
    let mut worst = 0.0f64;
    for k in 0..TORQUE_IDENTITY_SAMPLES {
        let j = 2 + (k * (n - 5)) / (TORQUE_IDENTITY_SAMPLES - 1);
        let l3 = |i: usize| samples[i].angular_momenta[2];
        // fourth-order central difference
        let fd = (l3(j - 2) - 8.0 * l3(j - 1) + 8.0 * l3(j + 1) - l3(j + 2)) / (12.0 * h);
        let q = samples[j].state.positions;
        let r = samples[j].distances;
        let formula = (1.0 / r.r31.powi(3) - 1.0 / r.r23.powi(3)) * q[0].wedge(q[1]);
        worst = worst.max((fd - formula).abs() / formula.abs());
    }
    outcome(
        worst < TORQUE_IDENTITY_RELATIVE,
        format!("max relative difference {worst:.2e} at {TORQUE_IDENTITY_SAMPLES} samples"),
    )
}

fn three_tangents() -> Outcome {
    let e = common::eight();
    let f = fundamental_trajectory(&e.solution.unknowns, &e.trajectories.potential, 12.0, TANGENT_SAMPLES + 1).unwrap();
    let interior = &f.samples()[1..=TANGENT_SAMPLES];
    let eight = interior
        .iter()
        .map(|s| tangent_concurrency(&s.state.positions, &s.state.velocities).unwrap())
        .fold(0.0f64, f64::max);
    let synthetic = verifier::check_synthetic_tangents(&SyntheticOptions::default(), TANGENT_TRIPLES).unwrap();
    let synthetic_worst = TANGENT_TOLERANCE - synthetic.worst_margin;
    outcome(
        eight < TANGENT_TOLERANCE && synthetic.passed,
        format!("eight {eight:.2e} at {} samples, {TANGENT_TRIPLES} synthetic triples {synthetic_worst:.2e}", interior.len()),
    )
}

fn splitting() -> Outcome {
    let opts = SyntheticOptions { solutions: SPLITTING_SOLUTIONS, ..SyntheticOptions::default() };
    match verifier::check_splitting_lemma(&PotentialSpec::newtonian(), &opts) {
        Ok(r) => outcome(r.passed && r.detail.contains(" 0 counterexamples"), r.detail),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn sweep() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig { out: dir.path().to_path_buf(), ..RunConfig::default() };
    let mut list = SWEEP.to_vec();
    list.push(-2.0);
    let rows = match cli::sweep(&list, &config) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("error: {e}")),
    };
    let passed: Vec<bool> = rows[..SWEEP.len()]
        .iter()
        .map(|r| {
            r.status == SweepStatus::Passed
                && [r.min_abs_kappa1, r.min_abs_kappa2, r.min_abs_kappa3].iter().all(|k| k.is_some_and(|k| k > 0.0))
        })
        .collect();
    let refused = rows[SWEEP.len()].status == SweepStatus::Skipped
        && matches!(cli::solve(&RunConfig { a: -2.0, ..RunConfig::default() }), Err(figure_eight::Error::ScalingDegenerate));
    let summary: Vec<String> = rows.iter().map(|r| format!("{}: {:?}", r.a, r.status)).collect();
    outcome(passed.iter().all(|&b| b) && refused, summary.join(", "))
}

fn robustness() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut sol = common::eight().solution;
    sol.unknowns.u_start += 0.02;
    let path = dir.path().join("perturbed.json");
    std::fs::write(&path, sol.to_json().unwrap()).unwrap();
    let report = cli::verify_input(&SolutionInput::Refined(sol), &RunConfig::default());
    let o = Command::new(env!("CARGO_BIN_EXE_figure-eight"))
        .args(["verify", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    let code = o.status.code();
    let failing = report.as_ref().map(|r| r.checks.iter().filter(|c| !c.passed).count()).unwrap_or(0);
    outcome(
        code == Some(cli::EXIT_VERIFICATION) && failing > 0,
        format!("exit code {code:?}, {failing} failing checks"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("pipeline end to end", pipeline),
        ("symmetry suite", symmetry),
        ("conservation suite", conservation),
        ("oracle agreements", oracles),
        ("torque identity along the eight", torque_identity),
        ("three tangents", three_tangents),
        ("splitting lemma Monte Carlo", splitting),
        ("exponent sweep", sweep),
        ("robustness", robustness),
    ];
    let mut failures = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.passed {
            failures += 1;
        }
        println!("criterion {} {} {name}: {}", n + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
