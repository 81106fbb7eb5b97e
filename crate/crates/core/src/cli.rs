//! Command-line front end: solve → refine → verify, the exponent sweep and
//! SVG export.
//!
//! Exit codes are a stable contract: 0 success, 1 usage or configuration
//! error, 2 numerical failure, 3 verification failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{minimize, MinimizeOptions, Minimization};
use crate::dynamics::{PhaseState, PotentialSpec, Trajectory};
use crate::error::{Error, Result};
use crate::loop_space::{FourierLoop, DEFAULT_GRID, DEFAULT_MODES, DEFAULT_PERIOD};
use crate::refiner::{
    extract_unknowns, reconstruct_full_orbit_unchecked, refine, RefineOptions, RefinedSolution, Refinement,
    FUNDAMENTAL_INTERVALS, RESIDUAL_TOLERANCE,
};
use crate::verifier::{run_all, SyntheticOptions, VerificationReport, VerifyOptions, ENDPOINT_WINDOW};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

/// Exponent every sweep continues from.
pub const SWEEP_ANCHOR: f64 = -1.0;

pub const LOOP_FILE: &str = "loop.json";
pub const LOG_FILE: &str = "convergence.csv";
pub const SOLUTION_FILE: &str = "solution.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const REPORT_FILE: &str = "report.json";
pub const PLOT_FILE: &str = "eight.svg";
pub const SUMMARY_FILE: &str = "sweep_summary.csv";

/// Everything a run depends on. Read from a JSON document; missing fields
/// take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub a: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub modes: usize,
    pub grid: usize,
    /// `λ` of the Lissajous seed `y = λ sin(4πt/T)`.
    pub seed_amplitude: f64,
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    /// Sample intervals on the fundamental domain.
    pub intervals: usize,
    pub out: PathBuf,
    /// Seed of the random synthetic solutions.
    pub seed: u64,
    pub synthetic_solutions: usize,
    /// Worker threads for the sweep; 0 uses every core.
    pub jobs: usize,
    pub synthetic: bool,
    pub sweep_exponents: Vec<f64>,
    pub max_continuation_step: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            a: -1.0,
            period: DEFAULT_PERIOD,
            modes: DEFAULT_MODES,
            grid: DEFAULT_GRID,
            seed_amplitude: 0.3,
            gradient_tolerance: 1e-9,
            max_iterations: 2000,
            residual_tolerance: RESIDUAL_TOLERANCE,
            intervals: FUNDAMENTAL_INTERVALS,
            out: PathBuf::from("out"),
            seed: 0,
            synthetic_solutions: 100,
            jobs: 0,
            synthetic: false,
            sweep_exponents: vec![-2.5, -1.2, -1.1, -1.0, -0.9],
            max_continuation_step: 0.25,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Rejects anything the pipeline would reject later, including the
    /// exponents 0 and −2.
    pub fn validate(&self) -> Result<()> {
        self.potential()?.ensure_solvable()?;
        self.validate_numerics()
    }

    // Everything except the exponent, which a sweep replaces.
    fn validate_numerics(&self) -> Result<()> {
        positive("T", self.period)?;
        positive("seed_amplitude", self.seed_amplitude)?;
        positive("gradient_tolerance", self.gradient_tolerance)?;
        positive("residual_tolerance", self.residual_tolerance)?;
        positive("max_continuation_step", self.max_continuation_step)?;
        if self.modes < 2 {
            return Err(Error::InvalidArgument(format!("modes must be at least 2, got {}", self.modes)));
        }
        if self.grid <= 2 * self.modes {
            return Err(Error::Aliasing { grid: self.grid, modes: self.modes });
        }
        if self.intervals < 8 {
            return Err(Error::InvalidArgument(format!("intervals must be at least 8, got {}", self.intervals)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be positive".into()));
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<PotentialSpec> {
        PotentialSpec::new(self.a)
    }

    pub fn minimize_options(&self) -> MinimizeOptions {
        MinimizeOptions {
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            grid: self.grid,
            ..MinimizeOptions::default()
        }
    }

    pub fn refine_options(&self) -> RefineOptions {
        RefineOptions { tolerance: self.residual_tolerance, intervals: self.intervals, ..RefineOptions::default() }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            synthetic: SyntheticOptions { seed: self.seed, solutions: self.synthetic_solutions, ..Default::default() },
            synthetic_tangents: self.synthetic,
        }
    }

    fn with_exponent(&self, a: f64) -> Self {
        Self { a, ..self.clone() }
    }
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

/// Seed → minimize.
pub fn solve(config: &RunConfig) -> Result<Minimization> {
    config.validate()?;
    let seed = FourierLoop::seed_eight_with_modes(config.period, config.seed_amplitude, config.modes)?;
    let mut m = minimize(&seed, &config.potential()?, &config.minimize_options())?;
    m.solution = m.solution.canonicalized();
    Ok(m)
}

pub fn cmd_solve(config: &RunConfig) -> Result<Minimization> {
    let m = solve(config)?;
    write(&config.out.join(LOOP_FILE), &m.solution.to_json()?)?;
    let mut log = Vec::new();
    m.log.write_csv(&mut log)?;
    write(&config.out.join(LOG_FILE), &String::from_utf8_lossy(&log))?;
    info!("action {:.12} after {} iterations, |grad| {:.3e}", m.action, m.iterations, m.gradient_norm);
    Ok(m)
}

/// Contents of a file given to refine, verify or plot.
#[derive(Clone, Debug, PartialEq)]
pub enum SolutionInput {
    Loop(FourierLoop),
    Refined(RefinedSolution),
}

impl SolutionInput {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("unknowns").is_some() {
            Ok(Self::Refined(serde_json::from_value(value)?))
        } else {
            Ok(Self::Loop(serde_json::from_value(value)?))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    /// The file's own exponent for refined solutions, the configured one for loops.
    pub fn potential(&self, config: &RunConfig) -> Result<PotentialSpec> {
        match self {
            Self::Loop(_) => config.potential(),
            Self::Refined(s) => s.potential(),
        }
    }

    pub fn period(&self) -> f64 {
        match self {
            Self::Loop(l) => l.period(),
            Self::Refined(s) => s.period,
        }
    }
}

/// Shooting refinement warm-started from a loop, or restarted from an
/// already refined solution.
pub fn refine_input(input: &SolutionInput, config: &RunConfig) -> Result<(RefinedSolution, Refinement)> {
    config.validate_numerics()?;
    let potential = input.potential(config)?;
    let warm = match input {
        SolutionInput::Loop(l) => extract_unknowns(l).0,
        SolutionInput::Refined(s) => s.unknowns,
    };
    let r = refine(&warm, &potential, input.period(), &config.refine_options())?;
    Ok((RefinedSolution::from_refinement(&r, &potential, input.period()), r))
}

pub fn cmd_refine(input: &Path, config: &RunConfig) -> Result<RefinedSolution> {
    let (solution, r) = refine_input(&SolutionInput::load(input)?, config)?;
    write(&config.out.join(SOLUTION_FILE), &solution.to_json()?)?;
    let mut csv = Vec::new();
    r.trajectory.write_csv(&mut csv)?;
    write(&config.out.join(TRAJECTORY_FILE), &String::from_utf8_lossy(&csv))?;
    info!(
        "{} Newton iterations, residual {:.3e}, condition {:.3e}",
        r.iterations,
        r.residuals.max_abs(),
        r.jacobian_condition
    );
    Ok(solution)
}

/// Fundamental-domain and full-period trajectories of an input, with the
/// seam mismatch when the orbit was rebuilt by symmetry.
pub struct Trajectories {
    pub potential: PotentialSpec,
    pub fundamental: Trajectory,
    pub orbit: Trajectory,
    pub seam: Option<f64>,
}

fn sample_loop(l: &FourierLoop, potential: PotentialSpec, t0: f64, t1: f64, intervals: usize) -> Result<Trajectory> {
    let states = (0..=intervals)
        .map(|j| {
            let t = if j == intervals { t1 } else { t0 + (t1 - t0) * j as f64 / intervals as f64 };
            PhaseState::new(t, l.evaluate(t, 0), l.evaluate(t, 1))
        })
        .collect();
    Trajectory::from_states(states, potential)
}

pub fn trajectories(input: &SolutionInput, config: &RunConfig) -> Result<Trajectories> {
    let potential = input.potential(config)?;
    match input {
        SolutionInput::Refined(s) => {
            s.unknowns.validate()?;
            let fundamental =
                crate::refiner::fundamental_trajectory(&s.unknowns, &potential, s.period, config.intervals)?;
            let (orbit, seam) = reconstruct_full_orbit_unchecked(&fundamental)?;
            Ok(Trajectories { potential, fundamental, orbit, seam: Some(seam) })
        }
        SolutionInput::Loop(l) => {
            let unit = l.period() / 12.0;
            Ok(Trajectories {
                potential,
                fundamental: sample_loop(l, potential, -unit, 0.0, config.intervals)?,
                orbit: sample_loop(l, potential, 0.0, l.period(), 12 * config.intervals)?,
                seam: None,
            })
        }
    }
}

pub fn verify_input(input: &SolutionInput, config: &RunConfig) -> Result<VerificationReport> {
    config.validate_numerics()?;
    let t = trajectories(input, config)?;
    run_all(&t.fundamental, &t.orbit, t.seam, &t.potential, &config.verify_options())
}

pub fn cmd_verify(input: &Path, config: &RunConfig) -> Result<VerificationReport> {
    let report = verify_input(&SolutionInput::load(input)?, config)?;
    write(&config.out.join(REPORT_FILE), &report.to_json()?)?;
    Ok(report)
}

/// Exponents visited when continuing from `from` to `to` in steps of at
/// most `max_step`, excluding `from`. The scaling-degenerate exponent −2 is
/// stepped over.
pub fn continuation_path(from: f64, to: f64, max_step: f64) -> Vec<f64> {
    let span = to - from;
    let mut n = ((span.abs() / max_step).ceil() as usize).max(1);
    loop {
        let path: Vec<f64> =
            (1..=n).map(|k| if k == n { to } else { from + span * k as f64 / n as f64 }).collect();
        if path.iter().all(|a| (a + 2.0).abs() > 1e-6) || n > 10_000 {
            return path;
        }
        n += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStatus {
    Passed,
    ChecksFailed,
    /// A numerical failure in minimization, refinement or verification.
    Failed,
    Skipped,
}

/// One row of the sweep summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a: f64,
    pub status: SweepStatus,
    pub converged: bool,
    pub all_passed: bool,
    pub action: Option<f64>,
    pub residual_norm: Option<f64>,
    pub min_abs_kappa1: Option<f64>,
    pub min_abs_kappa2: Option<f64>,
    pub min_abs_kappa3: Option<f64>,
    pub reason: String,
}

impl SweepRow {
    fn unsolved(a: f64, status: SweepStatus, reason: String) -> Self {
        Self {
            a,
            status,
            converged: false,
            all_passed: false,
            action: None,
            residual_norm: None,
            min_abs_kappa1: None,
            min_abs_kappa2: None,
            min_abs_kappa3: None,
            reason,
        }
    }
}

/// Smallest `|κ_j|` over the fundamental domain away from its endpoints.
pub fn interior_min_abs_curvature(fundamental: &Trajectory) -> [f64; 3] {
    let (Some(first), Some(last)) = (fundamental.first(), fundamental.last()) else {
        return [f64::NAN; 3];
    };
    let window = ENDPOINT_WINDOW * 12.0 * (last.time() - first.time());
    let (a, b) = (first.time() + window, last.time() - window);
    let mut out = [f64::INFINITY; 3];
    for s in fundamental.samples().iter().filter(|s| s.time() > a && s.time() < b) {
        for (o, k) in out.iter_mut().zip(s.curvatures) {
            *o = o.min(k.abs());
        }
    }
    out
}

fn run_dir(out: &Path, a: f64) -> PathBuf {
    out.join(format!("a_{a:+.4}"))
}

// A converged loop waiting to be refined and verified.
struct Reached {
    a: f64,
    minimization: Result<Minimization>,
}

// Walks one continuation chain through `targets` (ordered away from the
// anchor), warm-starting every minimization from the previous loop.
fn follow(anchor: &Minimization, targets: &[f64], config: &RunConfig) -> Vec<Reached> {
    let mut out = Vec::with_capacity(targets.len());
    let mut current: std::result::Result<(f64, Minimization), String> = Ok((SWEEP_ANCHOR, anchor.clone()));
    for &target in targets {
        let step = match &current {
            Ok((from, loop_)) => continuation_path(*from, target, config.max_continuation_step).into_iter().try_fold(
                loop_.clone(),
                |prev, a| {
                    let p = PotentialSpec::new(a)?;
                    let mut m = minimize(&prev.solution, &p, &config.minimize_options()).map_err(|e| {
                        Error::InvalidArgument(format!("continuation broke at a = {a}: {e}"))
                    })?;
                    m.solution = m.solution.canonicalized();
                    Ok(m)
                },
            ),
            Err(reason) => Err(Error::InvalidArgument(reason.clone())),
        };
        current = match &step {
            Ok(m) => Ok((target, m.clone())),
            Err(e) => Err(e.to_string()),
        };
        out.push(Reached { a: target, minimization: step });
    }
    out
}

fn finish(reached: Reached, config: &RunConfig) -> Result<SweepRow> {
    let a = reached.a;
    let m = match reached.minimization {
        Ok(m) => m,
        Err(e) => return Ok(SweepRow::unsolved(a, SweepStatus::Failed, e.to_string())),
    };
    let cfg = RunConfig { out: run_dir(&config.out, a), ..config.with_exponent(a) };
    write(&cfg.out.join(LOOP_FILE), &m.solution.to_json()?)?;
    let (solution, r) = match refine_input(&SolutionInput::Loop(m.solution.clone()), &cfg) {
        Ok(x) => x,
        Err(e) if e.is_numerical() => {
            return Ok(SweepRow { action: Some(m.action), ..SweepRow::unsolved(a, SweepStatus::Failed, e.to_string()) })
        }
        Err(e) => return Err(e),
    };
    write(&cfg.out.join(SOLUTION_FILE), &solution.to_json()?)?;
    let report = match verify_input(&SolutionInput::Refined(solution), &cfg) {
        Ok(r) => r,
        Err(e) if e.is_numerical() => {
            return Ok(SweepRow {
                converged: true,
                action: Some(m.action),
                residual_norm: Some(solution.residual_norm),
                ..SweepRow::unsolved(a, SweepStatus::Failed, format!("verification aborted: {e}"))
            })
        }
        Err(e) => return Err(e),
    };
    write(&cfg.out.join(REPORT_FILE), &report.to_json()?)?;
    let kappa = interior_min_abs_curvature(&r.trajectory);
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    Ok(SweepRow {
        a,
        status: if failed.is_empty() { SweepStatus::Passed } else { SweepStatus::ChecksFailed },
        converged: true,
        all_passed: failed.is_empty(),
        action: Some(m.action),
        residual_norm: Some(solution.residual_norm),
        min_abs_kappa1: Some(kappa[0]),
        min_abs_kappa2: Some(kappa[1]),
        min_abs_kappa3: Some(kappa[2]),
        reason: failed.join(" "),
    })
}

/// Solves, refines and verifies every exponent by continuation from the
/// anchor `a = −1`. Rows come back in the order the exponents were given.
pub fn sweep(exponents: &[f64], config: &RunConfig) -> Result<Vec<SweepRow>> {
    config.validate_numerics()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| {
        let mut skipped = Vec::new();
        let (mut below, mut above) = (Vec::new(), Vec::new());
        for &a in exponents {
            match PotentialSpec::new(a).and_then(|p| p.ensure_solvable()) {
                Err(e) => skipped.push(SweepRow::unsolved(a, SweepStatus::Skipped, e.to_string())),
                Ok(()) if a <= SWEEP_ANCHOR => below.push(a),
                Ok(()) => above.push(a),
            }
        }
        below.sort_by(|x, y| y.total_cmp(x));
        below.dedup();
        above.sort_by(|x, y| x.total_cmp(y));
        above.dedup();
        let anchor = solve(&config.with_exponent(SWEEP_ANCHOR))?;
        let (down, up) = rayon::join(|| follow(&anchor, &below, config), || follow(&anchor, &above, config));
        let solved: Vec<SweepRow> =
            down.into_iter().chain(up).collect::<Vec<_>>().into_par_iter().map(|r| finish(r, config)).collect::<Result<_>>()?;
        Ok(exponents
            .iter()
            .map(|&a| {
                solved
                    .iter()
                    .chain(&skipped)
                    .find(|r| r.a.to_bits() == a.to_bits())
                    .cloned()
                    .expect("every exponent gets a row")
            })
            .collect())
    })
}

pub fn write_summary(rows: &[SweepRow], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_sweep(exponents: &[f64], config: &RunConfig) -> Result<Vec<SweepRow>> {
    let rows = sweep(exponents, config)?;
    write_summary(&rows, &config.out.join(SUMMARY_FILE))?;
    Ok(rows)
}

const ARC_COLORS: [&str; 3] = ["#d62728", "#2ca02c", "#1f77b4"];

/// SVG of the whole curve with the three fundamental arcs colored and
/// their endpoints marked `js`, `je`.
pub fn render_svg(fundamental: &Trajectory, orbit: &Trajectory) -> Result<String> {
    if fundamental.is_empty() || orbit.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let points: Vec<_> = orbit.states().flat_map(|s| s.positions).chain(fundamental.states().flat_map(|s| s.positions)).collect();
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in &points {
        lo = crate::geometry::Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = crate::geometry::Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    const WIDTH: f64 = 800.0;
    const PAD: f64 = 40.0;
    let scale = (WIDTH - 2.0 * PAD) / (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
    let height = (hi.y - lo.y) * scale + 2.0 * PAD;
    let px = |p: crate::geometry::Vec2| ((p.x - lo.x) * scale + PAD, (hi.y - p.y) * scale + PAD);
    let path = |pts: &mut dyn Iterator<Item = crate::geometry::Vec2>| {
        let mut d = String::new();
        for (n, p) in pts.enumerate() {
            let (x, y) = px(p);
            let _ = write!(d, "{}{x:.2},{y:.2} ", if n == 0 { "M" } else { "L" });
        }
        d
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.0}" viewBox="0 0 {WIDTH} {height:.0}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (ox, oy) = px(crate::geometry::Vec2::ZERO);
    let _ = writeln!(svg, r##"<line x1="0" y1="{oy:.2}" x2="{WIDTH}" y2="{oy:.2}" stroke="#ddd"/>"##);
    let _ = writeln!(svg, r##"<line x1="{ox:.2}" y1="0" x2="{ox:.2}" y2="{height:.0}" stroke="#ddd"/>"##);
    let curve = path(&mut orbit.states().map(|s| s.positions[0]));
    let _ = writeln!(svg, r##"<path d="{curve}" fill="none" stroke="#999" stroke-width="1.5"/>"##);
    for (i, color) in ARC_COLORS.iter().enumerate() {
        let arc = path(&mut fundamental.states().map(|s| s.positions[i]));
        let _ = writeln!(svg, r#"<path id="arc{}" d="{arc}" fill="none" stroke="{color}" stroke-width="3"/>"#, i + 1);
        for (label, sample) in [("s", fundamental.first()), ("e", fundamental.last())] {
            let (x, y) = px(sample.expect("checked non-empty").state.positions[i]);
            let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="{color}"/>"#);
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" fill="{color}">{}{label}</text>"#,
                x + 7.0,
                y - 7.0,
                i + 1
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn cmd_plot(input: &Path, config: &RunConfig) -> Result<PathBuf> {
    let t = trajectories(&SolutionInput::load(input)?, config)?;
    let path = config.out.join(PLOT_FILE);
    write(&path, &render_svg(&t.fundamental, &t.orbit)?)?;
    Ok(path)
}

#[derive(Debug, Parser)]
#[command(name = "figure-eight", version, about = "Find, refine and certify the figure-eight three-body choreography")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize the action from the Lissajous seed and write the loop.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Refine a loop (or a refined solution) by shooting.
    Refine {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run every check on a loop or refined solution.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Continue in the exponent and verify each entry.
    Sweep {
        /// Exponents; defaults to the configured list.
        #[arg(allow_negative_numbers = true)]
        exponents: Vec<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Draw the curve as SVG.
    Plot {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long = "T")]
    pub period: Option<f64>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Shooting residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also test tangent concurrency on random balanced curve triples.
    #[arg(long)]
    pub synthetic: bool,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_json(&read(path)?)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.a {
            c.a = v;
        }
        if let Some(v) = self.period {
            c.period = v;
        }
        if let Some(v) = self.modes {
            c.modes = v;
        }
        if let Some(v) = self.grid {
            c.grid = v;
        }
        if let Some(v) = self.tol {
            c.residual_tolerance = v;
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.jobs {
            c.jobs = v;
        }
        c.synthetic |= self.synthetic;
        Ok(c)
    }
}

fn execute(command: &Command) -> Result<i32> {
    match command {
        Command::Solve { common } => {
            let config = common.resolve()?;
            let m = cmd_solve(&config)?;
            println!("action {:.12}  iterations {}  |grad| {:.3e}", m.action, m.iterations, m.gradient_norm);
            println!("wrote {}", config.out.join(LOOP_FILE).display());
            Ok(EXIT_OK)
        }
        Command::Refine { file, common } => {
            let config = common.resolve()?;
            let s = cmd_refine(file, &config)?;
            println!("residual norm {:.3e}", s.residual_norm);
            println!("wrote {}", config.out.join(SOLUTION_FILE).display());
            Ok(EXIT_OK)
        }
        Command::Verify { file, common } => {
            let config = common.resolve()?;
            let report = cmd_verify(file, &config)?;
            print!("{report}");
            Ok(if report.all_passed() { EXIT_OK } else { EXIT_VERIFICATION })
        }
        Command::Sweep { exponents, common } => {
            let config = common.resolve()?;
            let list = if exponents.is_empty() { config.sweep_exponents.clone() } else { exponents.clone() };
            let rows = cmd_sweep(&list, &config)?;
            for r in &rows {
                println!("a = {:+.4}  {:?}  {}", r.a, r.status, r.reason);
            }
            let code = if rows.iter().any(|r| r.status == SweepStatus::Failed) {
                EXIT_NUMERICAL
            } else if rows.iter().any(|r| r.status == SweepStatus::ChecksFailed) {
                EXIT_VERIFICATION
            } else {
                EXIT_OK
            };
            Ok(code)
        }
        Command::Plot { file, common } => {
            let config = common.resolve()?;
            println!("wrote {}", cmd_plot(file, &config)?.display());
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            if code == EXIT_NUMERICAL {
                warn!("numerical failure: {e}");
            }
            eprintln!("error: {e}");
            code
        }
    }
}
