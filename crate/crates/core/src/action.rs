//! Action of a choreography over one period, its analytic gradient in the
//! symmetric coefficient space, and a limited-memory quasi-Newton minimizer.

use std::collections::VecDeque;
use std::io::Write;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::dynamics::{accelerations, pairwise_distances, Bodies, PotentialSpec, COLLISION_FLOOR};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::loop_space::{Axis, FourierLoop, DEFAULT_GRID};

/// A closed curve traversed by three bodies a third of a period apart.
pub trait PeriodicChoreography {
    fn period(&self) -> f64;
    fn curve(&self, t: f64, order: u8) -> Vec2;

    fn bodies(&self, t: f64, order: u8) -> Bodies {
        let shift = self.period() / 3.0;
        std::array::from_fn(|i| self.curve(t + i as f64 * shift, order))
    }
}

impl PeriodicChoreography for FourierLoop {
    fn period(&self) -> f64 {
        FourierLoop::period(self)
    }

    fn curve(&self, t: f64, order: u8) -> Vec2 {
        FourierLoop::curve(self, t, order)
    }

    fn bodies(&self, t: f64, order: u8) -> Bodies {
        self.evaluate(t, order)
    }
}

/// Uniform rotation on a circle, the Lagrange choreography.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleChoreography {
    pub radius: f64,
    pub period: f64,
}

impl PeriodicChoreography for CircleChoreography {
    fn period(&self) -> f64 {
        self.period
    }

    fn curve(&self, t: f64, order: u8) -> Vec2 {
        let w = 2.0 * std::f64::consts::PI / self.period;
        let (s, c) = (w * t).sin_cos();
        let p = Vec2::new(c, s) * self.radius;
        match order {
            0 => p,
            1 => p.perp() * w,
            _ => p * (-w * w),
        }
    }
}

fn lagrangian(vel: &Bodies, pos: &Bodies, potential: &PotentialSpec, t: f64) -> Result<(f64, f64)> {
    let r = pairwise_distances(pos);
    if r.min() < COLLISION_FLOOR {
        return Err(Error::Collision { time: t, distance: r.min() });
    }
    let kinetic: f64 = 0.5 * vel.iter().map(|v| v.norm_sq()).sum::<f64>();
    let pot = potential.pair_energy(r.r12) + potential.pair_energy(r.r23) + potential.pair_energy(r.r31);
    Ok((kinetic - pot, r.min()))
}

/// Action on the default 512-point grid.
pub fn action_value<C: PeriodicChoreography + ?Sized>(curve: &C, potential: &PotentialSpec) -> Result<f64> {
    action_value_on_grid(curve, potential, DEFAULT_GRID)
}

/// Trapezoidal (equivalently rectangle) rule on `grid` uniform points, which
/// is spectrally accurate for smooth periodic integrands.
pub fn action_value_on_grid<C: PeriodicChoreography + ?Sized>(
    curve: &C,
    potential: &PotentialSpec,
    grid: usize,
) -> Result<f64> {
    if grid == 0 {
        return Err(Error::InvalidArgument("quadrature grid must be nonempty".into()));
    }
    let h = curve.period() / grid as f64;
    let mut total = 0.0;
    for m in 0..grid {
        let t = m as f64 * h;
        total += lagrangian(&curve.bodies(t, 1), &curve.bodies(t, 0), potential, t)?.0;
    }
    Ok(total * h)
}

/// Basis tables for a fixed period, mode cutoff and grid, so repeated
/// action/gradient evaluations avoid recomputing trigonometric functions.
#[derive(Clone, Debug)]
pub struct Quadrature {
    period: f64,
    modes: usize,
    grid: usize,
    layout: Vec<(Axis, usize)>,
    // sin/cos of k ω (t_m + iT/3) for each packed entry, indexed [(m * 3 + i) * len + p]
    sin: Vec<f64>,
    cos: Vec<f64>,
}

impl Quadrature {
    pub fn new(period: f64, modes: usize, grid: usize) -> Result<Self> {
        if grid <= 2 * modes {
            return Err(Error::Aliasing { grid, modes });
        }
        let layout = FourierLoop::zero(period, modes)?.packed_layout();
        let w = 2.0 * std::f64::consts::PI / period;
        let n = layout.len();
        let mut sin = vec![0.0; grid * 3 * n];
        let mut cos = vec![0.0; grid * 3 * n];
        for m in 0..grid {
            for i in 0..3 {
                let tau = period * (m as f64 / grid as f64 + i as f64 / 3.0);
                for (p, &(_, k)) in layout.iter().enumerate() {
                    let (s, c) = (k as f64 * w * tau).sin_cos();
                    sin[(m * 3 + i) * n + p] = s;
                    cos[(m * 3 + i) * n + p] = c;
                }
            }
        }
        Ok(Self { period, modes, grid, layout, sin, cos })
    }

    pub fn for_loop(l: &FourierLoop, grid: usize) -> Result<Self> {
        Self::new(l.period(), l.modes(), grid)
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    fn check(&self, l: &FourierLoop) -> Result<()> {
        if l.period() != self.period || l.modes() != self.modes {
            return Err(Error::InvalidArgument("quadrature does not match the loop".into()));
        }
        Ok(())
    }

    fn frequency(&self, p: usize) -> f64 {
        self.layout[p].1 as f64 * 2.0 * std::f64::consts::PI / self.period
    }

    fn state_at(&self, packed: &[f64], m: usize) -> (Bodies, Bodies) {
        let n = self.layout.len();
        let mut pos = [Vec2::ZERO; 3];
        let mut vel = [Vec2::ZERO; 3];
        for i in 0..3 {
            let row = (m * 3 + i) * n;
            for (p, &(axis, _)) in self.layout.iter().enumerate() {
                let c = packed[p];
                let (s, dc) = (c * self.sin[row + p], c * self.frequency(p) * self.cos[row + p]);
                match axis {
                    Axis::X => {
                        pos[i].x += s;
                        vel[i].x += dc;
                    }
                    Axis::Y => {
                        pos[i].y += s;
                        vel[i].y += dc;
                    }
                }
            }
        }
        (pos, vel)
    }
}

/// Value and packed gradient of the action, plus the smallest pairwise
/// distance seen on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionEvaluation {
    pub action: f64,
    pub gradient: Vec<f64>,
    pub min_pair_distance: f64,
}

impl ActionEvaluation {
    pub fn gradient_norm(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Gradient by the chain rule through the quadrature: `∂L/∂q̇_i = q̇_i` and
/// `∂L/∂q_i` is the force on body `i`, contracted with the basis functions.
/// Only symmetric coefficients appear, so the result is already projected.
pub fn action_and_gradient(
    l: &FourierLoop,
    potential: &PotentialSpec,
    quad: &Quadrature,
) -> Result<ActionEvaluation> {
    quad.check(l)?;
    let packed = l.packed();
    let n = packed.len();
    let h = quad.period / quad.grid as f64;
    let mut action = 0.0;
    let mut gradient = vec![0.0; n];
    let mut min_pair = f64::INFINITY;
    for m in 0..quad.grid {
        let t = m as f64 * h;
        let (pos, vel) = quad.state_at(&packed, m);
        let (lag, rmin) = lagrangian(&vel, &pos, potential, t)?;
        action += lag;
        min_pair = min_pair.min(rmin);
        let force = accelerations(&pos, potential)?;
        for i in 0..3 {
            let row = (m * 3 + i) * n;
            for (p, &(axis, _)) in quad.layout.iter().enumerate() {
                let (f, v) = match axis {
                    Axis::X => (force[i].x, vel[i].x),
                    Axis::Y => (force[i].y, vel[i].y),
                };
                gradient[p] += f * quad.sin[row + p] + v * quad.frequency(p) * quad.cos[row + p];
            }
        }
    }
    gradient.iter_mut().for_each(|g| *g *= h);
    Ok(ActionEvaluation { action: action * h, gradient, min_pair_distance: min_pair })
}

/// Packed gradient on the default grid.
pub fn action_gradient(l: &FourierLoop, potential: &PotentialSpec) -> Result<Vec<f64>> {
    Ok(action_and_gradient(l, potential, &Quadrature::for_loop(l, DEFAULT_GRID)?)?.gradient)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeOptions {
    pub max_iterations: usize,
    /// Euclidean norm of the packed coefficient gradient.
    pub gradient_tolerance: f64,
    pub grid: usize,
    /// Number of secant pairs kept.
    pub memory: usize,
    /// Sufficient-decrease constant.
    pub armijo: f64,
    pub max_backtracks: usize,
    /// Trial steps with `min r_ij < collision_guard × diameter` are rejected.
    pub collision_guard: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            gradient_tolerance: 1e-9,
            grid: DEFAULT_GRID,
            memory: 12,
            armijo: 1e-4,
            max_backtracks: 60,
            collision_guard: 0.05,
        }
    }
}

impl MinimizeOptions {
    fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.gradient_tolerance) || !positive(self.armijo) || self.armijo >= 0.5 {
            return Err(Error::InvalidArgument("tolerances must be positive (armijo < 0.5)".into()));
        }
        if self.memory == 0 || self.max_backtracks == 0 {
            return Err(Error::InvalidArgument("memory and max_backtracks must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.collision_guard) {
            return Err(Error::InvalidArgument("collision_guard must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub iteration: usize,
    pub action: f64,
    pub gradient_norm: f64,
    pub min_pair_distance: f64,
    pub step_size: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceLog(pub Vec<LogEntry>);

impl ConvergenceLog {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for e in &self.0 {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Minimization {
    pub solution: FourierLoop,
    pub action: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub log: ConvergenceLog,
}

// Optimization runs in z_p = k_p c_p. The kinetic part of the Hessian is
// then the constant 3Tω²/2 on every coordinate.
struct Scaled<'a> {
    base: &'a FourierLoop,
    scale: Vec<f64>,
    quad: Quadrature,
    potential: PotentialSpec,
    guard: f64,
}

enum Trial {
    Feasible(FourierLoop, ActionEvaluation, Vec<f64>),
    Rejected(String),
}

impl Scaled<'_> {
    fn to_loop(&self, z: &[f64]) -> Result<FourierLoop> {
        let c: Vec<f64> = z.iter().zip(&self.scale).map(|(z, k)| z / k).collect();
        self.base.with_packed(&c)
    }

    fn evaluate(&self, z: &[f64]) -> Result<Trial> {
        let l = self.to_loop(z)?;
        let eval = match action_and_gradient(&l, &self.potential, &self.quad) {
            Ok(e) => e,
            Err(Error::Collision { time, distance }) => {
                return Ok(Trial::Rejected(format!("collision at t = {time} (r = {distance:e})")))
            }
            Err(e) => return Err(e),
        };
        let diameter = l.diameter(128);
        if eval.min_pair_distance < self.guard * diameter {
            return Ok(Trial::Rejected(format!(
                "min pair distance {:e} below guard {:e}",
                eval.min_pair_distance,
                self.guard * diameter
            )));
        }
        let gz = eval.gradient.iter().zip(&self.scale).map(|(g, k)| g / k).collect();
        Ok(Trial::Feasible(l, eval, gz))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn two_loop(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, h0: f64) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    let gamma = memory.back().map(|(s, y, _)| dot(s, y) / dot(y, y)).unwrap_or(h0);
    q.iter_mut().for_each(|qi| *qi *= gamma);
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

/// Minimizes the action from `seed` over the symmetric loop space.
///
/// Steps must satisfy sufficient decrease. Near the minimum the decrease
/// drops below the rounding level of the action, so a step is also
/// accepted when the action does not rise beyond that level and the
/// directional derivative shows the step did not overshoot (approximate
/// Wolfe conditions).
pub fn minimize(seed: &FourierLoop, potential: &PotentialSpec, opts: &MinimizeOptions) -> Result<Minimization> {
    opts.validate()?;
    potential.ensure_solvable()?;
    let quad = Quadrature::for_loop(seed, opts.grid)?;
    let scale: Vec<f64> = seed.packed_layout().iter().map(|&(_, k)| k as f64).collect();
    let problem = Scaled { base: seed, scale, quad, potential: *potential, guard: opts.collision_guard };

    let w = seed.angular_frequency();
    let h0 = 1.0 / (1.5 * seed.period() * w * w);
    let mut z: Vec<f64> = seed.packed().iter().zip(&problem.scale).map(|(c, k)| c * k).collect();
    let (mut current, mut eval, mut gz) = match problem.evaluate(&z)? {
        Trial::Feasible(l, e, g) => (l, e, g),
        Trial::Rejected(reason) => {
            let min = action_and_gradient(seed, potential, &problem.quad).map(|e| e.min_pair_distance).unwrap_or(0.0);
            debug!("seed rejected: {reason}");
            return Err(Error::CollisionApproach { time: 0.0, distance: min });
        }
    };
    let mut log = ConvergenceLog::default();
    log.0.push(LogEntry {
        iteration: 0,
        action: eval.action,
        gradient_norm: eval.gradient_norm(),
        min_pair_distance: eval.min_pair_distance,
        step_size: 0.0,
    });
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iteration = 0;
    while eval.gradient_norm() >= opts.gradient_tolerance {
        if iteration >= opts.max_iterations {
            return Err(Error::NotConverged { iterations: iteration, gradient_norm: eval.gradient_norm() });
        }
        iteration += 1;
        let mut d = two_loop(&gz, &memory, h0);
        let mut slope = dot(&gz, &d);
        if !(slope < 0.0) {
            memory.clear();
            d = gz.iter().map(|g| -g * h0).collect();
            slope = dot(&gz, &d);
        }
        let noise = 1e-12 * eval.action.abs().max(1.0);
        let mut alpha = 1.0;
        let mut accepted = None;
        let mut last_reason = String::from("no sufficient decrease");
        for _ in 0..opts.max_backtracks {
            let z_new: Vec<f64> = z.iter().zip(&d).map(|(zi, di)| zi + alpha * di).collect();
            match problem.evaluate(&z_new)? {
                Trial::Feasible(l, e, g) => {
                    let new_slope = dot(&g, &d);
                    let armijo = e.action <= eval.action + opts.armijo * alpha * slope;
                    let approximate = e.action <= eval.action + noise
                        && new_slope <= -0.8 * slope
                        && new_slope >= 0.9 * slope;
                    if armijo || approximate {
                        accepted = Some((z_new, l, e, g));
                        break;
                    }
                }
                Trial::Rejected(reason) => last_reason = reason,
            }
            alpha *= 0.5;
        }
        let Some((z_new, l, e, g)) = accepted else {
            if last_reason.starts_with("min pair") || last_reason.starts_with("collision") {
                return Err(Error::CollisionApproach { time: 0.0, distance: eval.min_pair_distance });
            }
            return Err(Error::LineSearch { iteration, reason: last_reason });
        };
        let s: Vec<f64> = z_new.iter().zip(&z).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g.iter().zip(&gz).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if memory.len() == opts.memory {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        z = z_new;
        current = l;
        eval = e;
        gz = g;
        log.0.push(LogEntry {
            iteration,
            action: eval.action,
            gradient_norm: eval.gradient_norm(),
            min_pair_distance: eval.min_pair_distance,
            step_size: alpha,
        });
        debug!("iter {iteration}: A = {:.15} |g| = {:.3e} step {alpha}", eval.action, eval.gradient_norm());
    }
    Ok(Minimization {
        solution: current,
        action: eval.action,
        gradient_norm: eval.gradient_norm(),
        iterations: iteration,
        log,
    })
}
