use std::io::Write;

use super::potential::PotentialSpec;
use super::state::{
    accelerations, angular_momenta, pairwise_distances, Bodies, PairDistances, PhaseState,
};
use crate::error::{Error, Result};
use crate::geometry::curvature;

/// One sample of a trajectory with its derived quantities.
///
/// Curvature is NaN for a body that is momentarily at rest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub state: PhaseState,
    pub accelerations: Bodies,
    pub angular_momenta: [f64; 3],
    pub curvatures: [f64; 3],
    pub distances: PairDistances,
}

impl Sample {
    pub fn from_state(state: PhaseState, potential: &PotentialSpec) -> Result<Self> {
        let acc = accelerations(&state.positions, potential).map_err(|e| match e {
            Error::Collision { distance, .. } => Error::Collision { time: state.time, distance },
            other => other,
        })?;
        let curvatures = std::array::from_fn(|i| curvature(state.velocities[i], acc[i]).unwrap_or(f64::NAN));
        Ok(Self {
            state,
            accelerations: acc,
            angular_momenta: angular_momenta(&state).per_body,
            curvatures,
            distances: pairwise_distances(&state.positions),
        })
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }
}

/// A densely sampled solution. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    potential: PotentialSpec,
    samples: Vec<Sample>,
}

impl Trajectory {
    /// Builds a trajectory from states with strictly increasing times,
    /// deriving every cached quantity from positions and velocities.
    pub fn from_states(states: Vec<PhaseState>, potential: PotentialSpec) -> Result<Self> {
        for w in states.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(Error::InvalidArgument(format!(
                    "sample times not strictly increasing at t = {}",
                    w[0].time
                )));
            }
        }
        let samples = states
            .into_iter()
            .map(|s| Sample::from_state(s, &potential))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { potential, samples })
    }

    pub fn potential(&self) -> PotentialSpec {
        self.potential
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time()).collect()
    }

    pub fn states(&self) -> impl Iterator<Item = &PhaseState> {
        self.samples.iter().map(|s| &s.state)
    }

    /// Applies a pointwise transformation and re-derives the caches. The
    /// result is re-sorted by time, so time reversals are allowed.
    pub fn map_states(&self, f: impl Fn(&PhaseState) -> PhaseState) -> Result<Self> {
        let mut states: Vec<PhaseState> = self.states().map(f).collect();
        states.sort_by(|a, b| a.time.total_cmp(&b.time));
        Self::from_states(states, self.potential)
    }

    /// Largest pairwise distance over all samples.
    pub fn diameter(&self) -> f64 {
        self.samples.iter().map(|s| s.distances.max()).fold(0.0, f64::max)
    }

    pub const CSV_HEADER: [&'static str; 28] = [
        "t", "x1", "y1", "vx1", "vy1", "ax1", "ay1", "l1", "k1", "x2", "y2", "vx2", "vy2", "ax2",
        "ay2", "l2", "k2", "x3", "y3", "vx3", "vy3", "ax3", "ay3", "l3", "k3", "r12", "r23", "r31",
    ];

    /// Writes one row per sample with columns
    /// `t, x_i, y_i, vx_i, vy_i, ax_i, ay_i, l_i, k_i (i = 1..3), r12, r23, r31`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(Self::CSV_HEADER)?;
        for s in &self.samples {
            let mut row = Vec::with_capacity(28);
            row.push(fmt(s.time()));
            for i in 0..3 {
                let (q, v, a) = (s.state.positions[i], s.state.velocities[i], s.accelerations[i]);
                for x in [q.x, q.y, v.x, v.y, a.x, a.y, s.angular_momenta[i], s.curvatures[i]] {
                    row.push(fmt(x));
                }
            }
            for x in [s.distances.r12, s.distances.r23, s.distances.r31] {
                row.push(fmt(x));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}
