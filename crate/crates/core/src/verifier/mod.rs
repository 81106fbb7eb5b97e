//! Numerical certification of the qualitative properties of the eight.
//!
//! Every check reports a margin that is positive exactly when the property
//! holds. Sign conditions are evaluated on the open fundamental domain with
//! an endpoint window of `1e−4·T`, through the Lipschitz lower bound of
//! [`sampled_margin`].

mod margin;
pub mod synthetic;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{torque, PotentialSpec, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{
    concurrency_residual, curvature, dp_dt, tangent_line_intersection_param, Line2, Side, Vec2,
};

pub use margin::{sampled_margin, tolerance_margin, CurveSamples, Margin, ENDPOINT_WINDOW};
pub use synthetic::SyntheticOptions;

pub const COM_TOLERANCE: f64 = 1e-9;
pub const WEDGE_TOLERANCE: f64 = 1e-9;
pub const ENDPOINT_TOLERANCE: f64 = 1e-9;
pub const IDENTITY_TOLERANCE: f64 = 1e-8;
/// Concurrency residual allowed, relative to the configuration diameter.
pub const TANGENT_TOLERANCE: f64 = 1e-7;

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    #[serde(with = "finite_or_null")]
    pub worst_margin: f64,
    #[serde(with = "finite_or_null")]
    pub worst_time: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn from_margin(name: &str, margin: Margin, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed: margin.holds(),
            worst_margin: margin.value,
            worst_time: margin.time,
            detail,
        }
    }

    fn refused(name: &str, reason: String) -> Self {
        Self::from_margin(name, Margin::UNDEFINED, format!("not evaluated: {reason}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gauge {
    #[serde(rename = "T")]
    pub period: f64,
    pub masses: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub gauge: Gauge,
    pub exponent: f64,
    /// Sample intervals on the fundamental domain.
    pub samples: usize,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "a = {}, T = {}, {} samples", self.exponent, self.gauge.period, self.samples)?;
        writeln!(f, "{:<24} {:<6} {:>13} {:>11}  detail", "check", "result", "margin", "time")?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<24} {:<6} {:>13.4e} {:>11.6}  {}",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.worst_margin,
                c.worst_time,
                c.detail
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VerifyOptions {
    pub synthetic: SyntheticOptions,
    /// Also test tangent concurrency on random balanced curve triples.
    pub synthetic_tangents: bool,
}

fn bounds(traj: &Trajectory) -> Result<(f64, f64, f64)> {
    let (first, last) = (traj.first().ok_or(Error::EmptyTrajectory)?, traj.last().ok_or(Error::EmptyTrajectory)?);
    let (t0, t1) = (first.time(), last.time());
    let period = 12.0 * (t1 - t0);
    Ok((t0, t1, ENDPOINT_WINDOW * period))
}

fn signal(traj: &Trajectory, f: impl Fn(&crate::dynamics::Sample) -> f64) -> Vec<f64> {
    traj.samples().iter().map(f).collect()
}

// Interior margins of several named signals, with a per-signal summary.
fn interior(traj: &Trajectory, named: Vec<(&str, Vec<f64>)>) -> Result<(Margin, String)> {
    let (_, _, window) = bounds(traj)?;
    let times = traj.times();
    let mut worst = Margin::new(f64::INFINITY, f64::NAN);
    let mut parts = Vec::new();
    for (name, values) in named {
        let m = sampled_margin(&times, &values, window);
        parts.push(format!("{name} {:.3e}", m.value));
        worst = worst.min(m);
    }
    Ok((worst, parts.join(", ")))
}

pub fn check_center_of_mass(fundamental: &Trajectory, orbit: &Trajectory, _p: &PotentialSpec) -> Result<CheckResult> {
    let mut m = Margin::new(COM_TOLERANCE, f64::NAN);
    for traj in [fundamental, orbit] {
        m = m.min(tolerance_margin(&traj.times(), signal(traj, |s| s.state.center_of_mass().norm()), COM_TOLERANCE));
    }
    Ok(CheckResult::from_margin(
        "center_of_mass",
        m,
        format!("max |q1+q2+q3| = {:.3e}", COM_TOLERANCE - m.value),
    ))
}

pub fn check_quadrants(fundamental: &Trajectory, _o: &Trajectory, _p: &PotentialSpec) -> Result<CheckResult> {
    let q = |i: usize, y: bool, sign: f64| {
        signal(fundamental, move |s| sign * if y { s.state.positions[i].y } else { s.state.positions[i].x })
    };
    let (m, detail) = interior(
        fundamental,
        vec![
            ("x1", q(0, false, 1.0)),
            ("-y1", q(0, true, -1.0)),
            ("-x2", q(1, false, -1.0)),
            ("-y2", q(1, true, -1.0)),
            ("x3", q(2, false, 1.0)),
            ("y3", q(2, true, 1.0)),
        ],
    )?;
    Ok(CheckResult::from_margin("quadrants", m, detail))
}

pub fn check_distance_ordering(fundamental: &Trajectory, _o: &Trajectory, _p: &PotentialSpec) -> Result<CheckResult> {
    let (m, detail) = interior(
        fundamental,
        vec![
            ("r12-r13", signal(fundamental, |s| s.distances.r12 - s.distances.r31)),
            ("r23-r12", signal(fundamental, |s| s.distances.r23 - s.distances.r12)),
        ],
    )?;
    Ok(CheckResult::from_margin("distance_ordering", m, detail))
}

fn wedges(s: &crate::dynamics::Sample) -> [f64; 3] {
    let [q1, q2, q3] = s.state.positions;
    [q1.wedge(q2), q2.wedge(q3), q3.wedge(q1)]
}

pub fn check_orientation(fundamental: &Trajectory, _o: &Trajectory, _p: &PotentialSpec) -> Result<CheckResult> {
    let times = fundamental.times();
    let spread = tolerance_margin(
        &times,
        signal(fundamental, |s| {
            let w = wedges(s);
            (w[0] - w[1]).abs().max((w[1] - w[2]).abs())
        }),
        WEDGE_TOLERANCE,
    );
    let (sign, detail) = interior(fundamental, vec![("-q1^q2", signal(fundamental, |s| -wedges(s)[0]))])?;
    Ok(CheckResult::from_margin(
        "orientation",
        sign.unless_violated(spread),
        format!("{detail}, wedge spread {:.3e}", WEDGE_TOLERANCE - spread.value),
    ))
}

fn torques(traj: &Trajectory, p: &PotentialSpec) -> Result<[Vec<f64>; 3]> {
    let mut out: [Vec<f64>; 3] = Default::default();
    for s in traj.samples() {
        for (i, o) in out.iter_mut().enumerate() {
            o.push(torque(i, &s.state.positions, p)?);
        }
    }
    Ok(out)
}

pub fn check_angular_momentum(fundamental: &Trajectory, orbit: &Trajectory, p: &PotentialSpec) -> Result<CheckResult> {
    let l = |i: usize, sign: f64| signal(fundamental, move |s| sign * s.angular_momenta[i]);
    // the closed-form torque needs a centered configuration
    let [t1, t2, t3] = match torques(fundamental, p) {
        Ok(t) => t,
        Err(Error::CenterOfMass { offset, .. }) => {
            return Ok(CheckResult::refused("angular_momentum", format!("center of mass off by {offset:.3e}")))
        }
        Err(e) => return Err(e),
    };
    let (mut m, mut detail) = interior(
        fundamental,
        vec![
            ("-l1", l(0, -1.0)),
            ("l2", l(1, 1.0)),
            ("-l3", l(2, -1.0)),
            ("dl1", t1),
            ("dl2", t2),
            ("-dl3", t3.into_iter().map(|x| -x).collect()),
        ],
    )?;

    // ℓ₁ = ℓ₃ = −ℓ₂/2 < 0 at the isosceles start
    let start = fundamental.first().ok_or(Error::EmptyTrajectory)?;
    let [l1, l2, l3] = start.angular_momenta;
    let deviation = (l1 - l3).abs().max((l1 + 0.5 * l2).abs());
    let relation = Margin::new(ENDPOINT_TOLERANCE - deviation, start.time());
    m = m.min(Margin::new(-l1, start.time())).unless_violated(relation);
    detail += &format!(", start l = ({l1:.6}, {l2:.6}, {l3:.6})");

    // ℓ < 0 on the lobe x > 0
    let (_, _, window) = bounds(fundamental)?;
    let period = 12.0 * (fundamental.last().unwrap().time() - start.time());
    match CurveSamples::of_body(orbit, 0).right_lobe(period) {
        Some(lobe) => {
            let values: Vec<f64> = lobe.pos.iter().zip(&lobe.vel).map(|(q, v)| -q.wedge(*v)).collect();
            let lm = sampled_margin(&lobe.times, &values, window);
            detail += &format!(", lobe -l {:.3e}", lm.value);
            m = m.min(lm);
        }
        None => {
            detail += ", no lobe with x > 0";
            m = m.min(Margin::UNDEFINED);
        }
    }
    Ok(CheckResult::from_margin("angular_momentum", m, detail))
}

/// Star-shapedness of a curve arc about the origin: `ℓ = q ∧ q̇` keeps one
/// sign away from the ends, the polar angle is monotone and sweeps less
/// than a full turn. Returns the margin and the swept angle.
pub fn star_shaped_margin(lobe: &CurveSamples, window: f64) -> (Margin, f64) {
    if lobe.len() < 3 {
        return (Margin::UNDEFINED, f64::NAN);
    }
    let mid = lobe.len() / 2;
    let sign = lobe.pos[mid].wedge(lobe.vel[mid]).signum();
    let values: Vec<f64> = lobe.pos.iter().zip(&lobe.vel).map(|(q, v)| sign * q.wedge(*v)).collect();
    let mut m = sampled_margin(&lobe.times, &values, window);
    // the polar angle is undefined at the origin, so the end windows are skipped
    let (a, b) = (lobe.times[0] + window, lobe.times[lobe.len() - 1] - window);
    let inner: Vec<usize> = (0..lobe.len()).filter(|&j| lobe.times[j] > a && lobe.times[j] < b).collect();
    let mut swept = 0.0;
    for w in inner.windows(2) {
        let (p, q) = (lobe.pos[w[0]], lobe.pos[w[1]]);
        let d = p.wedge(q).atan2(p.dot(q));
        swept += d;
        if sign * d <= 0.0 {
            m = m.min(Margin::new(-(d.abs()), lobe.times[w[0]]));
        }
    }
    let turn = Margin::new(std::f64::consts::TAU - swept.abs(), b);
    (m.min(turn), swept)
}

pub fn check_star_shaped(fundamental: &Trajectory, orbit: &Trajectory, _p: &PotentialSpec) -> Result<CheckResult> {
    let (t0, t1, window) = bounds(fundamental)?;
    let Some(lobe) = CurveSamples::of_body(orbit, 0).right_lobe(12.0 * (t1 - t0)) else {
        return Ok(CheckResult::refused("star_shaped", "no lobe with x > 0".into()));
    };
    let (m, swept) = star_shaped_margin(&lobe, window);
    Ok(CheckResult::from_margin("star_shaped", m, format!("polar angle swept {swept:.6} rad")))
}

/// Curvature keeps one sign on the arc away from its ends.
pub fn convex_arc_margin(arc: &CurveSamples, window: f64) -> Margin {
    if arc.len() < 3 {
        return Margin::UNDEFINED;
    }
    let kappa: Vec<f64> =
        arc.vel.iter().zip(&arc.acc).map(|(v, a)| curvature(*v, *a).unwrap_or(f64::NAN)).collect();
    let sign = kappa[arc.len() / 2].signum();
    let values: Vec<f64> = kappa.iter().map(|k| sign * k).collect();
    sampled_margin(&arc.times, &values, window)
}

pub fn check_convexity(fundamental: &Trajectory, orbit: &Trajectory, _p: &PotentialSpec) -> Result<CheckResult> {
    let k = |i: usize, sign: f64| signal(fundamental, move |s| sign * s.curvatures[i]);
    let (mut m, mut detail) = interior(fundamental, vec![("-k1", k(0, -1.0)), ("k2", k(1, 1.0)), ("-k3", k(2, -1.0))])?;
    let min_abs = |i: usize| fundamental.samples().iter().map(|s| s.curvatures[i].abs()).fold(f64::INFINITY, f64::min);
    detail += &format!(", min|k| = ({:.4e}, {:.4e}, {:.4e})", min_abs(0), min_abs(1), min_abs(2));

    let (t0, t1, window) = bounds(fundamental)?;
    let period = 12.0 * (t1 - t0);
    let curve = CurveSamples::of_body(orbit, 0);
    let reflected = CurveSamples { pos: curve.pos.iter().map(|p| p.reflect_y()).collect(), ..curve.clone() };
    for (label, c) in [("right", curve), ("left", reflected)] {
        let lm = c.right_lobe(period).map_or(Margin::UNDEFINED, |lobe| convex_arc_margin(&lobe, window));
        detail += &format!(", {label} lobe {:.3e}", lm.value);
        m = m.min(lm);
    }
    Ok(CheckResult::from_margin("convexity", m, detail))
}

/// `ℓ̇ẏ − ℓÿ − y v³ κ`, which vanishes for any smooth planar motion.
pub fn arc_identity_residual(q: Vec2, v: Vec2, a: Vec2) -> (f64, f64) {
    let l = q.wedge(v);
    let ldot = q.wedge(a);
    let lhs = ldot * v.y - l * a.y;
    let rhs = q.y * v.wedge(a);
    (lhs - rhs, (ldot * v.y).abs() + (l * a.y).abs() + rhs.abs())
}

pub fn check_arc1_auxiliary(fundamental: &Trajectory, _o: &Trajectory, _p: &PotentialSpec) -> Result<CheckResult> {
    let (m, detail) = interior(
        fundamental,
        vec![
            ("ddy1", signal(fundamental, |s| s.accelerations[0].y)),
            ("dy1", signal(fundamental, |s| s.state.velocities[0].y)),
        ],
    )?;
    let identity = tolerance_margin(
        &fundamental.times(),
        signal(fundamental, |s| {
            let (r, scale) = arc_identity_residual(s.state.positions[0], s.state.velocities[0], s.accelerations[0]);
            r / scale.max(f64::MIN_POSITIVE)
        }),
        IDENTITY_TOLERANCE,
    );
    Ok(CheckResult::from_margin(
        "arc1_auxiliary",
        m.unless_violated(identity),
        format!("{detail}, identity residual {:.3e}", IDENTITY_TOLERANCE - identity.value),
    ))
}

pub fn check_arc2_gauss_map(fundamental: &Trajectory, _o: &Trajectory, _p: &PotentialSpec) -> Result<CheckResult> {
    let times = fundamental.times();
    let ddx = signal(fundamental, |s| s.accelerations[1].x);
    let whole = sampled_margin(&times, &ddx, 0.0);
    let (m, detail) = interior(
        fundamental,
        vec![
            ("dx2", signal(fundamental, |s| s.state.velocities[1].x)),
            ("v2^a2", signal(fundamental, |s| s.state.velocities[1].wedge(s.accelerations[1]))),
        ],
    )?;
    // discrete monotonicity of the unit tangent direction
    let mut turn = Margin::new(f64::INFINITY, f64::NAN);
    for w in fundamental.samples().windows(2) {
        let (a, b) = (w[0].state.velocities[1], w[1].state.velocities[1]);
        let d = a.wedge(b).atan2(a.dot(b));
        if d <= 0.0 {
            turn = turn.min(Margin::new(d, w[0].time()));
        }
    }
    Ok(CheckResult::from_margin(
        "arc2_gauss_map",
        m.min(whole).min(turn),
        format!("{detail}, ddx2 on closed arc {:.3e}", whole.value),
    ))
}

fn tangents(positions: &[Vec2; 3], velocities: &[Vec2; 3]) -> Result<[Line2; 3]> {
    Ok([
        Line2::tangent(positions[0], velocities[0])?,
        Line2::tangent(positions[1], velocities[1])?,
        Line2::tangent(positions[2], velocities[2])?,
    ])
}

/// Concurrency residual of the three tangent lines over the configuration diameter.
pub fn tangent_concurrency(positions: &[Vec2; 3], velocities: &[Vec2; 3]) -> Result<f64> {
    let [a, b, c] = tangents(positions, velocities)?;
    let diameter = crate::dynamics::pairwise_distances(positions).max();
    Ok(concurrency_residual(&a, &b, &c) / diameter)
}

pub fn check_three_tangents(fundamental: &Trajectory, _o: &Trajectory, _p: &PotentialSpec) -> Result<CheckResult> {
    let (t0, t1, window) = bounds(fundamental)?;
    let mut m = Margin::new(TANGENT_TOLERANCE, f64::NAN);
    for s in fundamental.samples().iter().filter(|s| s.time() > t0 + window && s.time() < t1 - window) {
        let r = tangent_concurrency(&s.state.positions, &s.state.velocities)?;
        m = m.min(Margin::new(TANGENT_TOLERANCE - r, s.time()));
    }
    let interior_worst = TANGENT_TOLERANCE - m.value;
    // at the isosceles start the tangents of bodies 1 and 3 pass through body 2
    let start = fundamental.first().ok_or(Error::EmptyTrajectory)?;
    let [q1, q2, q3] = start.state.positions;
    let [v1, _, v3] = start.state.velocities;
    let diameter = start.distances.max();
    let through = Line2::tangent(q1, v1)?.distance(q2).max(Line2::tangent(q3, v3)?.distance(q2)) / diameter;
    m = m.min(Margin::new(TANGENT_TOLERANCE - through, start.time()));
    Ok(CheckResult::from_margin(
        "three_tangents",
        m,
        format!("max residual/diameter {interior_worst:.3e}, start tangents miss body 2 by {through:.3e}"),
    ))
}

pub fn check_synthetic_tangents(opts: &SyntheticOptions, triples: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut m = Margin::new(TANGENT_TOLERANCE, f64::NAN);
    for (n, (q, v)) in synthetic::balanced_curve_triple(&mut rng, triples).into_iter().enumerate() {
        m = m.min(Margin::new(TANGENT_TOLERANCE - tangent_concurrency(&q, &v)?, n as f64));
    }
    Ok(CheckResult::from_margin(
        "three_tangents_synthetic",
        m,
        format!("{triples} balanced curve triples, worst index in time column"),
    ))
}

pub fn check_splitting_lemma(potential: &PotentialSpec, opts: &SyntheticOptions) -> Result<CheckResult> {
    let solutions = synthetic::random_solutions(potential, opts);
    let mut m = Margin::new(f64::INFINITY, f64::NAN);
    let (mut count, mut on_line, mut counter) = (0, 0, 0);
    for traj in &solutions {
        for inf in synthetic::inflections(traj, opts)? {
            count += 1;
            match inf.side {
                Side::OnLine => on_line += 1,
                Side::SameSide => counter += 1,
                Side::Split => {}
            }
            m = m.min(Margin::new(inf.margin, inf.time));
        }
    }
    if solutions.len() < opts.solutions {
        m = Margin::UNDEFINED;
    }
    Ok(CheckResult::from_margin(
        "splitting_lemma",
        m,
        format!(
            "{} random solutions, {count} inflections, {on_line} collinear, {counter} counterexamples",
            solutions.len()
        ),
    ))
}

/// Outcome of following the point where a convex arc's tangent meets a fixed line.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentSweep {
    /// Smallest `s · dP/dt · (ẋ/|v|)²` over the samples, `s` the sign of the
    /// rate and `ẋ` the velocity across `m`. The weight removes the poles at
    /// parallel instants without changing the sign.
    pub rate: Margin,
    /// Samples where `P` moved against `s` within one branch.
    pub reversals: usize,
    pub params: Vec<Option<f64>>,
}

/// Follows `P(t)` along a convex arc that does not meet `m`. Refuses when
/// the arc is not convex or touches the line.
pub fn tangent_sweep(arc: &CurveSamples, m: &Line2, window: f64) -> Result<TangentSweep> {
    let sides: Vec<f64> = arc.pos.iter().map(|p| m.signed_distance(*p)).collect();
    if !(sides.iter().all(|&d| d > 0.0) || sides.iter().all(|&d| d < 0.0)) {
        return Err(Error::Precondition("the arc meets the line".into()));
    }
    if !convex_arc_margin(arc, window).holds() {
        return Err(Error::Precondition("the arc is not convex".into()));
    }
    let across = |j: usize| m.unit_direction().wedge(arc.vel[j]);
    let mut rates = Vec::with_capacity(arc.len());
    let mut params = Vec::with_capacity(arc.len());
    for j in 0..arc.len() {
        let weight = (across(j) / arc.vel[j].norm()).powi(2);
        // at a parallel instant the weighted rate is the limit −v x κ
        let rate = match dp_dt(arc.pos[j], arc.vel[j], arc.acc[j], m)? {
            crate::geometry::LineMeet::Finite(r) => r * weight,
            crate::geometry::LineMeet::AtInfinity => {
                // the frame x coordinate is minus the signed distance
                arc.vel[j].norm() * m.signed_distance(arc.pos[j]) * curvature(arc.vel[j], arc.acc[j])?
            }
        };
        rates.push(rate);
        params.push(tangent_line_intersection_param(arc.pos[j], arc.vel[j], m)?.finite());
    }
    let sign = rates.iter().copied().find(|r| *r != 0.0).unwrap_or(0.0).signum();
    let vals: Vec<f64> = rates.iter().map(|r| sign * r).collect();
    let rate = sampled_margin(&arc.times, &vals, window);
    let across = |j: usize| m.direction().wedge(arc.vel[j]);
    let mut reversals = 0;
    for j in 1..arc.len() {
        // pairs straddling a parallel instant belong to different branches
        if let (Some(a), Some(b), true) = (params[j - 1], params[j], across(j - 1) * across(j) > 0.0) {
            if sign * (b - a) <= 0.0 {
                reversals += 1;
            }
        }
    }
    Ok(TangentSweep { rate, reversals, params })
}

pub fn check_convexity_proposition(fundamental: &Trajectory, _o: &Trajectory, _p: &PotentialSpec) -> Result<CheckResult> {
    const NAME: &str = "convexity_proposition";
    let (_, _, window) = bounds(fundamental)?;
    let (start, end) = (fundamental.first().unwrap(), fundamental.last().unwrap());
    let m_line = match Line2::through(start.state.positions[1], end.state.positions[1]) {
        Ok(l) => l,
        Err(e) => return Ok(CheckResult::refused(NAME, e.to_string())),
    };
    let arc = CurveSamples::of_body(fundamental, 0);
    let sweep = match tangent_sweep(&arc, &m_line, window) {
        Ok(s) => s,
        Err(Error::Precondition(reason)) => return Ok(CheckResult::refused(NAME, reason)),
        Err(e) => return Err(e),
    };
    let mut m = sweep.rate;
    if sweep.reversals > 0 {
        m = m.min(Margin::new(-(sweep.reversals as f64), f64::NAN));
    }
    // where the tangent meets m: inside the quadrant x < 0, y > 0
    let meet: Vec<Option<Vec2>> = arc
        .pos
        .iter()
        .zip(&arc.vel)
        .map(|(p, v)| Line2::tangent(*p, *v).ok().and_then(|l| l.intersection(&m_line)))
        .collect();
    let coord = |f: fn(Vec2) -> f64| -> Vec<f64> { meet.iter().map(|q| q.map_or(f64::NAN, f)).collect() };
    let times = &arc.times;
    let quadrant = sampled_margin(times, &coord(|q| -q.x), window).min(sampled_margin(times, &coord(|q| q.y), window));
    m = m.min(quadrant);
    Ok(CheckResult::from_margin(
        NAME,
        m,
        format!(
            "min weighted dP/dt {:.3e}, {} reversals, meeting point quadrant margin {:.3e}",
            sweep.rate.value, sweep.reversals, quadrant.value
        ),
    ))
}

pub fn check_no_degenerate_times(fundamental: &Trajectory, _o: &Trajectory, _p: &PotentialSpec) -> Result<CheckResult> {
    let d = |f: fn(&crate::dynamics::PairDistances) -> f64| signal(fundamental, move |s| f(&s.distances).abs());
    let (m, detail) = interior(
        fundamental,
        vec![
            ("|q1^q2|", signal(fundamental, |s| wedges(s)[0].abs())),
            ("|r12-r13|", d(|r| r.r12 - r.r31)),
            ("|r23-r12|", d(|r| r.r23 - r.r12)),
            ("|r23-r13|", d(|r| r.r23 - r.r31)),
        ],
    )?;
    Ok(CheckResult::from_margin("no_degenerate_times", m, detail))
}

/// Boundary conditions of the fundamental domain: isosceles with body 2 on
/// the x axis moving vertically at the start; Euler with body 1 at the
/// origin and bodies 2, 3 moving together at the end. Also the seam
/// mismatch of the reconstructed orbit when given.
pub fn check_endpoint_conditions(fundamental: &Trajectory, seam: Option<f64>) -> Result<CheckResult> {
    let (start, end) = (
        fundamental.first().ok_or(Error::EmptyTrajectory)?,
        fundamental.last().ok_or(Error::EmptyTrajectory)?,
    );
    let s = &start.state;
    let e = &end.state;
    let start_dev = [
        s.positions[1].y,
        s.velocities[1].x,
        start.distances.r12 - start.distances.r23,
        s.positions[0].x - s.positions[2].x,
        s.positions[0].y + s.positions[2].y,
    ];
    let end_dev = [
        e.positions[0].x,
        e.positions[0].y,
        e.velocities[1].x - e.velocities[2].x,
        e.velocities[1].y - e.velocities[2].y,
    ];
    let worst = |devs: &[f64]| devs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let (ws, we) = (worst(&start_dev), worst(&end_dev));
    let mut m = Margin::new(ENDPOINT_TOLERANCE - ws, start.time()).min(Margin::new(ENDPOINT_TOLERANCE - we, end.time()));
    let mut detail = format!("start deviation {ws:.3e}, end deviation {we:.3e}");
    if let Some(seam) = seam {
        m = m.min(Margin::new(crate::refiner::SEAM_TOLERANCE - seam, f64::NAN));
        detail += &format!(", seam mismatch {seam:.3e}");
    }
    Ok(CheckResult::from_margin("endpoint_conditions", m, detail))
}

/// Every check, in a fixed order.
pub fn run_all(
    fundamental: &Trajectory,
    orbit: &Trajectory,
    seam: Option<f64>,
    potential: &PotentialSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    type Check = fn(&Trajectory, &Trajectory, &PotentialSpec) -> Result<CheckResult>;
    let (t0, t1, _) = bounds(fundamental)?;
    let checks: [Check; 12] = [
        check_center_of_mass,
        check_quadrants,
        check_distance_ordering,
        check_orientation,
        check_angular_momentum,
        check_star_shaped,
        check_convexity,
        check_arc1_auxiliary,
        check_arc2_gauss_map,
        check_three_tangents,
        check_convexity_proposition,
        check_no_degenerate_times,
    ];
    let mut results = Vec::with_capacity(15);
    for (n, check) in checks.iter().enumerate() {
        if n == 10 {
            results.push(check_splitting_lemma(potential, &opts.synthetic)?);
        }
        results.push(check(fundamental, orbit, potential)?);
    }
    results.push(check_endpoint_conditions(fundamental, seam)?);
    if opts.synthetic_tangents {
        results.push(check_synthetic_tangents(&opts.synthetic, 50)?);
    }
    Ok(VerificationReport {
        gauge: Gauge { period: 12.0 * (t1 - t0), masses: [1.0; 3] },
        exponent: potential.exponent(),
        samples: fundamental.len().saturating_sub(1),
        checks: results,
    })
}
