//! Random test material for properties that hold beyond the eight:
//! generic three-body solutions and zero-momentum curve triples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    integrate_at, propagate, uniform_times, pairwise_distances, Bodies, IntegrateOptions, PhaseState, PotentialSpec,
    StepControl, Trajectory,
};
use crate::error::Result;
use crate::geometry::{splits_with_tolerance, Line2, Side, Vec2, COLLINEARITY_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticOptions {
    pub seed: u64,
    pub solutions: usize,
    pub duration: f64,
    pub samples: usize,
    /// Bisection stops once the bracket is shorter than this.
    pub time_tolerance: f64,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        Self { seed: 0, solutions: 100, duration: 3.0, samples: 600, time_tolerance: 1e-10 }
    }
}

fn center(mut b: Bodies) -> Bodies {
    let c = (b[0] + b[1] + b[2]) / 3.0;
    b.iter_mut().for_each(|p| *p -= c);
    b
}

fn random_bodies(rng: &mut ChaCha8Rng, scale: f64) -> Bodies {
    center(std::array::from_fn(|_| Vec2::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))))
}

/// Random initial state with zero center of mass and zero momentum whose
/// bodies are at least 0.3 apart.
pub fn random_initial_state(rng: &mut ChaCha8Rng) -> PhaseState {
    loop {
        let q = random_bodies(rng, 1.0);
        if pairwise_distances(&q).min() < 0.3 {
            continue;
        }
        return PhaseState::new(0.0, q, random_bodies(rng, 0.6));
    }
}

fn synthetic_options(samples: usize) -> IntegrateOptions {
    IntegrateOptions {
        control: StepControl { rtol: 1e-12, atol: 1e-12, max_steps: 200_000 },
        ..IntegrateOptions::default().with_samples(samples)
    }
}

/// Pair distance at which a random solution is cut off.
pub const CLOSE_APPROACH: f64 = 0.05;

// The solution from `s0` sampled up to its first close approach. Too short
// a segment (under a tenth of the window) is discarded.
fn segment(s0: &PhaseState, potential: &PotentialSpec, opts: &SyntheticOptions) -> Option<Trajectory> {
    let control = synthetic_options(opts.samples);
    let mut states = vec![*s0];
    for &t in &uniform_times(s0.time, s0.time + opts.duration, opts.samples)[1..] {
        match propagate(states.last()?, potential, t, &control) {
            Ok(s) if pairwise_distances(&s.positions).min() >= CLOSE_APPROACH => states.push(s),
            _ => break,
        }
    }
    if states.len() <= opts.samples / 10 {
        return None;
    }
    Trajectory::from_states(states, *potential).ok()
}

/// Integrates random initial states until `count` of them yield a usable
/// segment. Strong forces (`a < −2`) collapse most random states quickly,
/// so segments end at the first close approach.
pub fn random_solutions(potential: &PotentialSpec, opts: &SyntheticOptions) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::with_capacity(opts.solutions);
    let mut attempts = 0;
    while out.len() < opts.solutions && attempts < 20 * opts.solutions.max(1) {
        attempts += 1;
        if let Some(traj) = segment(&random_initial_state(&mut rng), potential, opts) {
            out.push(traj);
        }
    }
    out
}

/// An instant where one body's path has an inflection, and how the tangent
/// line there sits relative to the other two bodies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inflection {
    pub time: f64,
    pub body: usize,
    pub side: Side,
    /// Split: smaller distance of the other bodies to the tangent over the
    /// configuration diameter. On the line: the collinearity band. Same
    /// side: minus the smaller distance over the diameter.
    pub margin: f64,
}

fn classify(state: &PhaseState, body: usize) -> Result<Inflection> {
    let line = Line2::tangent(state.positions[body], state.velocities[body])?;
    let (j, k) = ((body + 1) % 3, (body + 2) % 3);
    let (pj, pk) = (state.positions[j], state.positions[k]);
    let side = splits_with_tolerance(&line, pj, pk, COLLINEARITY_TOLERANCE);
    let diameter = pairwise_distances(&state.positions).max();
    let nearest = line.distance(pj).min(line.distance(pk)) / diameter;
    let margin = match side {
        Side::Split => nearest,
        Side::OnLine => COLLINEARITY_TOLERANCE,
        Side::SameSide => -nearest,
    };
    Ok(Inflection { time: state.time, body, side, margin })
}

/// Locates every sign change of `v ∧ a` for every body by bisection and
/// classifies the tangent line at the located instant.
pub fn inflections(traj: &Trajectory, opts: &SyntheticOptions) -> Result<Vec<Inflection>> {
    let potential = traj.potential();
    let exact = synthetic_options(opts.samples);
    let mut out = Vec::new();
    let samples = traj.samples();
    for body in 0..3 {
        let turning = |acc: &Bodies, s: &PhaseState| s.velocities[body].wedge(acc[body]);
        for w in samples.windows(2) {
            let (f0, f1) = (turning(&w[0].accelerations, &w[0].state), turning(&w[1].accelerations, &w[1].state));
            if f0 == 0.0 {
                out.push(classify(&w[0].state, body)?);
                continue;
            }
            if !(f0 * f1 < 0.0) {
                continue;
            }
            let (mut lo, mut hi) = (w[0].time(), w[1].time());
            let base = w[0].state;
            let mut state = base;
            while hi - lo > opts.time_tolerance {
                let mid = 0.5 * (lo + hi);
                state = integrate_at(&base, &potential, &[mid], &exact)?[0];
                let acc = crate::dynamics::accelerations(&state.positions, &potential)?;
                if (turning(&acc, &state) > 0.0) == (f0 > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(classify(&state, body)?);
        }
    }
    Ok(out)
}

/// Positions and velocities of three bodies with zero total momentum and
/// zero total angular momentum but otherwise random.
///
/// Random centered positions and velocities are given a rigid rotation rate
/// `φ̇ = −Σ p∧ṗ / Σ|p|²`, which cancels the angular momentum and leaves the
/// momentum at zero.
pub fn balanced_triple(rng: &mut ChaCha8Rng) -> (Bodies, Bodies) {
    loop {
        let q = random_bodies(rng, 1.0);
        if pairwise_distances(&q).min() < 0.2 {
            continue;
        }
        let v = random_bodies(rng, 1.0);
        let spin: f64 = q.iter().zip(&v).map(|(p, u)| p.wedge(*u)).sum();
        let inertia: f64 = q.iter().map(|p| p.norm_sq()).sum();
        let rate = -spin / inertia;
        let v = std::array::from_fn(|i| v[i] + q[i].perp() * rate);
        return (q, v);
    }
}

/// Random smooth closed curves: three centered trigonometric polynomials,
/// made angular-momentum free at each requested instant. Returns the
/// instants' states.
pub fn balanced_curve_triple(rng: &mut ChaCha8Rng, instants: usize) -> Vec<(Bodies, Bodies)> {
    const HARMONICS: usize = 4;
    let coeffs: Vec<[[f64; 4]; 3]> = (1..=HARMONICS)
        .map(|k| std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0) / (k * k) as f64)))
        .collect();
    let mut out = Vec::with_capacity(instants);
    while out.len() < instants {
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut q = [Vec2::ZERO; 3];
        let mut v = [Vec2::ZERO; 3];
        for (k, c) in coeffs.iter().enumerate() {
            let kf = (k + 1) as f64;
            let (s, co) = (kf * t).sin_cos();
            for i in 0..3 {
                let [a, b, cc, d] = c[i];
                q[i] += Vec2::new(a * co + b * s, cc * co + d * s);
                v[i] += Vec2::new(kf * (b * co - a * s), kf * (d * co - cc * s));
            }
        }
        let (q, v) = (center(q), center(v));
        if pairwise_distances(&q).min() < 0.05 {
            continue;
        }
        let spin: f64 = q.iter().zip(&v).map(|(p, u)| p.wedge(*u)).sum();
        let inertia: f64 = q.iter().map(|p| p.norm_sq()).sum();
        out.push((q, std::array::from_fn(|i| v[i] + q[i].perp() * (-spin / inertia))));
    }
    out
}
