//! Three-body vector field for power-law potentials, monitored quantities,
//! and a high-order time integrator with output at requested times.

pub mod dop853;
mod potential;
mod state;
mod trajectory;

pub use dop853::StepControl;
pub use potential::PotentialSpec;
pub use state::{
    accelerations, angular_momenta, center_of_mass, energies, pairwise_distances, torque,
    torque_body3, AngularMomenta, Bodies, Energies, PairDistances, PhaseState, COLLISION_FLOOR,
    TORQUE_COM_TOLERANCE,
};
pub use trajectory::{Sample, Trajectory};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub control: StepControl,
    /// Number of uniform sampling intervals; the trajectory has `samples + 1` points.
    pub samples: usize,
    pub collision_floor: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { control: StepControl::default(), samples: 256, collision_floor: COLLISION_FLOOR }
    }
}

impl IntegrateOptions {
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
}

/// Uniform grid of `intervals + 1` times from `t0` to `t1`, both included exactly.
pub fn uniform_times(t0: f64, t1: f64, intervals: usize) -> Vec<f64> {
    let n = intervals.max(1);
    (0..=n)
        .map(|m| if m == n { t1 } else { t0 + (t1 - t0) * (m as f64 / n as f64) })
        .collect()
}

/// States at each of `times` (monotone, starting at or after `initial.time`
/// in the direction of integration).
pub fn integrate_at(
    initial: &PhaseState,
    potential: &PotentialSpec,
    times: &[f64],
    opts: &IntegrateOptions,
) -> Result<Vec<PhaseState>> {
    let floor = opts.collision_floor;
    let rhs = |t: f64, y: &[f64; 12]| -> Result<[f64; 12]> {
        let s = PhaseState::from_array(t, y);
        let acc = state::accelerations_with_floor(&s.positions, potential, floor, t)?;
        Ok([
            y[6], y[7], y[8], y[9], y[10], y[11], acc[0].x, acc[0].y, acc[1].x, acc[1].y, acc[2].x,
            acc[2].y,
        ])
    };
    let (ys, _) = dop853::integrate(rhs, initial.time, initial.to_array(), times, &opts.control)?;
    Ok(times.iter().zip(ys.iter()).map(|(&t, y)| PhaseState::from_array(t, y)).collect())
}

/// The state at `t_end`.
pub fn propagate(
    initial: &PhaseState,
    potential: &PotentialSpec,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<PhaseState> {
    Ok(integrate_at(initial, potential, &[t_end], opts)?[0])
}

/// Integrates to `t_end` and samples `opts.samples + 1` uniformly spaced
/// states, including both ends. Backward integration is allowed; the
/// trajectory is always stored in increasing time order.
pub fn integrate(
    initial: &PhaseState,
    potential: &PotentialSpec,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let times = uniform_times(initial.time, t_end, opts.samples);
    let mut states = integrate_at(initial, potential, &times, opts)?;
    if t_end < initial.time {
        states.reverse();
    }
    Trajectory::from_states(states, *potential)
}
