//! Shooting refinement on the fundamental domain `[−T/12, 0]` and
//! reconstruction of the full period from its three arcs.
//!
//! The start state is an isosceles triangle with body 2 on the negative x
//! axis; the end state must be an Euler configuration with body 1 at the
//! origin and bodies 2, 3 moving with equal velocities.

use log::warn;
use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    angular_momenta, integrate, propagate, IntegrateOptions, PhaseState, PotentialSpec, Trajectory,
};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::loop_space::FourierLoop;

pub const RESIDUAL_TOLERANCE: f64 = 1e-11;
pub const SEAM_TOLERANCE: f64 = 1e-9;
/// Sample intervals on `[−T/12, 0]`. With 2500 intervals the verifier's
/// endpoint window of `1e−4·T` is exactly three intervals, so the window
/// edges are samples.
pub const FUNDAMENTAL_INTERVALS: usize = 2500;
/// Warn when the warm start is further than this (× loop diameter) from isosceles.
pub const PROJECTION_WARNING: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootingUnknowns {
    pub x2_start: f64,
    pub y3_start: f64,
    pub u_start: f64,
    pub w_start: f64,
}

impl ShootingUnknowns {
    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.x2_start, self.y3_start, self.u_start, self.w_start)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self { x2_start: v[0], y3_start: v[1], u_start: v[2], w_start: v[3] }
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.to_vector();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite shooting unknowns".into()));
        }
        if !(self.x2_start < 0.0 && self.y3_start > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "isosceles start needs x2 < 0 and y3 > 0, got ({}, {})",
                self.x2_start, self.y3_start
            )));
        }
        Ok(())
    }

    /// The encoded state at `t = −T/12`. Center of mass and total momentum
    /// vanish identically; total angular momentum is `6Xw − 2y₃u` with
    /// `X = −x₂/2`, which is zero only at a solution.
    pub fn initial_state(&self, period: f64) -> PhaseState {
        let (x2, y3, u, w) = (self.x2_start, self.y3_start, self.u_start, self.w_start);
        PhaseState::new(
            -period / 12.0,
            [Vec2::new(-x2 / 2.0, -y3), Vec2::new(x2, 0.0), Vec2::new(-x2 / 2.0, y3)],
            [Vec2::new(-u, w), Vec2::new(0.0, -2.0 * w), Vec2::new(u, w)],
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootingResiduals {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
}

impl ShootingResiduals {
    pub fn from_end_state(s: &PhaseState) -> Self {
        let [q1, _, _] = s.positions;
        let [_, v2, v3] = s.velocities;
        Self { r1: q1.x, r2: q1.y, r3: v2.x - v3.x, r4: v2.y - v3.y }
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.r1, self.r2, self.r3, self.r4)
    }

    pub fn max_abs(&self) -> f64 {
        self.to_vector().amax()
    }
}

/// Orthogonal projection (in R¹²) of a state onto the isosceles
/// parameterization. Returns the unknowns and the Euclidean displacement.
pub fn project_isosceles(s: &PhaseState) -> (ShootingUnknowns, f64) {
    let [q1, q2, q3] = s.positions;
    let [v1, v2, v3] = s.velocities;
    let unknowns = ShootingUnknowns {
        x2_start: (2.0 * q2.x - q1.x - q3.x) / 3.0,
        y3_start: (q3.y - q1.y) / 2.0,
        u_start: (v3.x - v1.x) / 2.0,
        w_start: (v1.y + v3.y - 2.0 * v2.y) / 6.0,
    };
    let projected = unknowns.initial_state(0.0).to_array();
    let original = s.to_array();
    let displacement = original.iter().zip(&projected).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    (unknowns, displacement)
}

/// Warm start from a minimized loop: the canonically oriented state at
/// `t = −T/12`, projected onto the isosceles parameterization.
pub fn extract_unknowns(l: &FourierLoop) -> (ShootingUnknowns, f64) {
    let c = l.canonicalized();
    let t0 = -c.period() / 12.0;
    let state = PhaseState::new(t0, c.evaluate(t0, 0), c.evaluate(t0, 1));
    let (unknowns, displacement) = project_isosceles(&state);
    let diameter = c.diameter(256);
    if displacement > PROJECTION_WARNING * diameter {
        warn!(
            "loop is {displacement:.3e} from the isosceles start (diameter {diameter:.3}); refinement may fail"
        );
    }
    (unknowns, displacement)
}

fn shooting_options() -> IntegrateOptions {
    IntegrateOptions::default()
}

/// Integrates from `−T/12` to 0 and evaluates the end conditions.
pub fn shoot(unknowns: &ShootingUnknowns, potential: &PotentialSpec, period: f64) -> Result<ShootingResiduals> {
    potential.ensure_solvable()?;
    unknowns.validate()?;
    let end = propagate(&unknowns.initial_state(period), potential, 0.0, &shooting_options())?;
    Ok(ShootingResiduals::from_end_state(&end))
}

/// Densely sampled fundamental-domain trajectory with `intervals + 1` samples.
pub fn fundamental_trajectory(
    unknowns: &ShootingUnknowns,
    potential: &PotentialSpec,
    period: f64,
    intervals: usize,
) -> Result<Trajectory> {
    unknowns.validate()?;
    integrate(&unknowns.initial_state(period), potential, 0.0, &shooting_options().with_samples(intervals))
}

#[derive(Clone, Debug)]
pub struct Refinement {
    pub unknowns: ShootingUnknowns,
    pub residuals: ShootingResiduals,
    pub iterations: usize,
    /// 2-norm condition number of the last Jacobian.
    pub jacobian_condition: f64,
    pub trajectory: Trajectory,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub fd_step: f64,
    pub intervals: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            tolerance: RESIDUAL_TOLERANCE,
            max_iterations: 30,
            fd_step: 1e-7,
            intervals: FUNDAMENTAL_INTERVALS,
        }
    }
}

fn jacobian(u: &ShootingUnknowns, potential: &PotentialSpec, period: f64, rel_step: f64) -> Result<Matrix4<f64>> {
    let base = u.to_vector();
    let columns: Vec<Result<Vector4<f64>>> = (0..4)
        .into_par_iter()
        .map(|j| {
            let h = rel_step * base[j].abs().max(1.0);
            let mut plus = base;
            let mut minus = base;
            plus[j] += h;
            minus[j] -= h;
            let rp = shoot(&ShootingUnknowns::from_vector(&plus), potential, period)?.to_vector();
            let rm = shoot(&ShootingUnknowns::from_vector(&minus), potential, period)?.to_vector();
            Ok((rp - rm) / (2.0 * h))
        })
        .collect();
    let mut jac = Matrix4::zeros();
    for (j, col) in columns.into_iter().enumerate() {
        jac.set_column(j, &col?);
    }
    Ok(jac)
}

fn condition_number(m: &Matrix4<f64>) -> f64 {
    let sv = m.singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Damped Newton iteration on the shooting residuals.
pub fn refine(
    warm_start: &ShootingUnknowns,
    potential: &PotentialSpec,
    period: f64,
    opts: &RefineOptions,
) -> Result<Refinement> {
    potential.ensure_solvable()?;
    let mut u = *warm_start;
    let mut res = shoot(&u, potential, period)?;
    let mut iterations = 0;
    let mut condition = f64::NAN;
    while res.max_abs() >= opts.tolerance {
        if iterations >= opts.max_iterations {
            return Err(Error::Divergence { iterations, residual: res.max_abs() });
        }
        iterations += 1;
        let jac = jacobian(&u, potential, period, opts.fd_step)?;
        condition = condition_number(&jac);
        if !condition.is_finite() || condition > 1e14 {
            return Err(Error::SingularJacobian { condition });
        }
        let step = jac.lu().solve(&(-res.to_vector())).ok_or(Error::SingularJacobian { condition })?;
        let norm0 = res.to_vector().norm();
        let mut lambda = 1.0;
        let mut next = None;
        while lambda > 1e-6 {
            let candidate = ShootingUnknowns::from_vector(&(u.to_vector() + step * lambda));
            if let Ok(r) = shoot(&candidate, potential, period) {
                if r.to_vector().norm() < norm0 {
                    next = Some((candidate, r));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((candidate, r)) = next else {
            return Err(Error::Divergence { iterations, residual: res.max_abs() });
        };
        log::debug!("newton {iterations}: |F| = {:.3e} (damping {lambda})", r.max_abs());
        u = candidate;
        res = r;
    }
    if condition.is_nan() {
        condition = condition_number(&jacobian(&u, potential, period, opts.fd_step)?);
    }
    let trajectory = fundamental_trajectory(&u, potential, period, opts.intervals)?;
    let start = trajectory.first().ok_or(Error::EmptyTrajectory)?;
    let total = angular_momenta(&start.state).total;
    if total.abs() >= RESIDUAL_TOLERANCE {
        warn!("total angular momentum {total:e} at the refined start exceeds {RESIDUAL_TOLERANCE:e}");
    }
    Ok(Refinement { unknowns: u, residuals: res, iterations, jacobian_condition: condition, trajectory })
}

/// Persisted form of a refined solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinedSolution {
    pub potential_exponent: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub unknowns: ShootingUnknowns,
    pub residual_norm: f64,
}

impl RefinedSolution {
    pub fn from_refinement(r: &Refinement, potential: &PotentialSpec, period: f64) -> Self {
        Self {
            potential_exponent: potential.exponent(),
            period,
            unknowns: r.unknowns,
            residual_norm: r.residuals.to_vector().norm(),
        }
    }

    pub fn potential(&self) -> Result<PotentialSpec> {
        PotentialSpec::new(self.potential_exponent)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

// One element of the twelve-element group: which arc, whether time is
// reversed, and whether the half-period reflection is applied.
#[derive(Clone, Copy)]
struct Piece {
    arc: usize,
    reversed: bool,
    reflected: bool,
}

const PIECES: [Piece; 12] = {
    let mut out = [Piece { arc: 0, reversed: false, reflected: false }; 12];
    let mut idx = 0;
    while idx < 12 {
        out[idx] = Piece { arc: idx % 3, reversed: (idx / 3) % 2 == 1, reflected: idx >= 6 };
        idx += 1;
    }
    out
};

impl Piece {
    // Fundamental sample index for orbit index `n`, given `m` intervals per twelfth.
    fn source(&self, n: i64, m: i64) -> Option<usize> {
        let period = 12 * m;
        let n = if self.reflected { n - 6 * m } else { n };
        let shift = 4 * m * self.arc as i64;
        let f = if self.reversed { m - n - shift } else { n + m - shift };
        let f = f.rem_euclid(period);
        (f <= m).then_some(f as usize)
    }

    fn apply(&self, pos: Vec2, vel: Vec2) -> (Vec2, Vec2) {
        let (p, v) = if self.reversed { (-pos, vel) } else { (pos, vel) };
        if self.reflected {
            (p.reflect_y(), v.reflect_y())
        } else {
            (p, v)
        }
    }
}

/// Rebuilds the whole period `[0, T]` from the fundamental-domain arcs and
/// returns the largest disagreement between alternative constructions at
/// the seams.
pub fn reconstruct_full_orbit_unchecked(fundamental: &Trajectory) -> Result<(Trajectory, f64)> {
    let samples = fundamental.samples();
    if samples.len() < 2 {
        return Err(Error::EmptyTrajectory);
    }
    let m = samples.len() - 1;
    let t0 = samples[0].time();
    let t1 = samples[m].time();
    let unit = t1 - t0;
    if !(unit > 0.0) || t1.abs() > 1e-12 * unit {
        return Err(Error::Precondition("fundamental trajectory must end at t = 0".into()));
    }
    for (j, s) in samples.iter().enumerate() {
        if (s.time() - (t0 + unit * j as f64 / m as f64)).abs() > 1e-9 * unit {
            return Err(Error::Precondition("fundamental samples must be uniformly spaced".into()));
        }
    }
    let period = 12.0 * unit;
    let mi = m as i64;
    let mut curve = Vec::with_capacity(12 * m);
    let mut seam = 0.0f64;
    for n in 0..12 * mi {
        let mut first: Option<(Vec2, Vec2)> = None;
        for piece in &PIECES {
            if let Some(f) = piece.source(n, mi) {
                let st = &samples[f].state;
                let (p, v) = piece.apply(st.positions[piece.arc], st.velocities[piece.arc]);
                match first {
                    None => first = Some((p, v)),
                    Some((p0, v0)) => seam = seam.max((p - p0).norm()).max((v - v0).norm()),
                }
            }
        }
        curve.push(first.expect("the twelve pieces cover the period"));
    }
    let len = 12 * m;
    let states: Vec<PhaseState> = (0..=len)
        .map(|n| {
            let time = if n == len { period } else { period * n as f64 / len as f64 };
            let body = |i: usize| curve[(n + 4 * m * i) % len];
            PhaseState::new(
                time,
                std::array::from_fn(|i| body(i).0),
                std::array::from_fn(|i| body(i).1),
            )
        })
        .collect();
    Ok((Trajectory::from_states(states, fundamental.potential())?, seam))
}

/// As [`reconstruct_full_orbit_unchecked`], failing when the seams disagree
/// by more than 1e−9.
pub fn reconstruct_full_orbit(fundamental: &Trajectory) -> Result<Trajectory> {
    let (orbit, seam) = reconstruct_full_orbit_unchecked(fundamental)?;
    if seam > SEAM_TOLERANCE {
        return Err(Error::SeamMismatch { time: f64::NAN, mismatch: seam, tolerance: SEAM_TOLERANCE });
    }
    Ok(orbit)
}
