use serde::{Deserialize, Serialize};

use super::potential::PotentialSpec;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Positions (or velocities, accelerations) of the three bodies.
pub type Bodies = [Vec2; 3];

/// Pairs closer than this are treated as a collision.
pub const COLLISION_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub time: f64,
    pub positions: Bodies,
    pub velocities: Bodies,
}

impl PhaseState {
    pub fn new(time: f64, positions: Bodies, velocities: Bodies) -> Self {
        Self { time, positions, velocities }
    }

    pub fn center_of_mass(&self) -> Vec2 {
        center_of_mass(&self.positions)
    }

    pub fn total_momentum(&self) -> Vec2 {
        self.velocities[0] + self.velocities[1] + self.velocities[2]
    }

    pub(crate) fn to_array(self) -> [f64; 12] {
        let p = self.positions;
        let v = self.velocities;
        [
            p[0].x, p[0].y, p[1].x, p[1].y, p[2].x, p[2].y, v[0].x, v[0].y, v[1].x, v[1].y,
            v[2].x, v[2].y,
        ]
    }

    pub(crate) fn from_array(time: f64, y: &[f64; 12]) -> Self {
        Self {
            time,
            positions: [
                Vec2::new(y[0], y[1]),
                Vec2::new(y[2], y[3]),
                Vec2::new(y[4], y[5]),
            ],
            velocities: [
                Vec2::new(y[6], y[7]),
                Vec2::new(y[8], y[9]),
                Vec2::new(y[10], y[11]),
            ],
        }
    }
}

pub fn center_of_mass(positions: &Bodies) -> Vec2 {
    (positions[0] + positions[1] + positions[2]) / 3.0
}

/// The three mutual distances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistances {
    pub r12: f64,
    pub r23: f64,
    pub r31: f64,
}

impl PairDistances {
    pub fn r13(&self) -> f64 {
        self.r31
    }

    pub fn min(&self) -> f64 {
        self.r12.min(self.r23).min(self.r31)
    }

    pub fn max(&self) -> f64 {
        self.r12.max(self.r23).max(self.r31)
    }

    /// Distance between bodies `i` and `j` (0-based).
    pub fn between(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.r12,
            (1, 2) => self.r23,
            (0, 2) => self.r31,
            _ => 0.0,
        }
    }
}

pub fn pairwise_distances(positions: &Bodies) -> PairDistances {
    PairDistances {
        r12: (positions[0] - positions[1]).norm(),
        r23: (positions[1] - positions[2]).norm(),
        r31: (positions[2] - positions[0]).norm(),
    }
}

/// Newtonian accelerations `q̈_i = Σ_{j≠i} (q_j − q_i) r_ij^(a−2)`.
pub fn accelerations(positions: &Bodies, potential: &PotentialSpec) -> Result<Bodies> {
    accelerations_with_floor(positions, potential, COLLISION_FLOOR, f64::NAN)
}

pub(crate) fn accelerations_with_floor(
    positions: &Bodies,
    potential: &PotentialSpec,
    floor: f64,
    time: f64,
) -> Result<Bodies> {
    let mut acc = [Vec2::ZERO; 3];
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        let d = positions[j] - positions[i];
        let r = d.norm();
        if !(r >= floor) {
            return Err(Error::Collision { time, distance: r });
        }
        let pull = d * potential.force_factor(r);
        acc[i] += pull;
        acc[j] -= pull;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

pub fn energies(state: &PhaseState, potential: &PotentialSpec) -> Result<Energies> {
    let kinetic = 0.5 * state.velocities.iter().map(|v| v.norm_sq()).sum::<f64>();
    let r = pairwise_distances(&state.positions);
    if !(r.min() >= COLLISION_FLOOR) {
        return Err(Error::Collision { time: state.time, distance: r.min() });
    }
    let pot = potential.pair_energy(r.r12) + potential.pair_energy(r.r23) + potential.pair_energy(r.r31);
    Ok(Energies { kinetic, potential: pot, total: kinetic + pot })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularMomenta {
    pub per_body: [f64; 3],
    pub total: f64,
}

/// `ℓ_j = q_j ∧ q̇_j` for each body, and their sum.
pub fn angular_momenta(state: &PhaseState) -> AngularMomenta {
    let per_body: [f64; 3] =
        std::array::from_fn(|i| state.positions[i].wedge(state.velocities[i]));
    AngularMomenta { per_body, total: per_body.iter().sum() }
}

/// Relative tolerance on `|Σ q_i|` accepted by the torque identities.
pub const TORQUE_COM_TOLERANCE: f64 = 1e-9;

/// `ℓ̇_i` from the closed form `(r_ij^(a−2) − r_ik^(a−2)) (q_1 ∧ q_2)`, where
/// `j` follows `i` cyclically and `k` precedes it. Requires a configuration
/// centered at the origin, where `q_1 ∧ q_2 = q_2 ∧ q_3 = q_3 ∧ q_1`.
pub fn torque(body: usize, positions: &Bodies, potential: &PotentialSpec) -> Result<f64> {
    if body > 2 {
        return Err(Error::InvalidArgument(format!("body index {body} out of range")));
    }
    let scale = positions.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let offset = (positions[0] + positions[1] + positions[2]).norm();
    if offset > TORQUE_COM_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::CenterOfMass { offset, tolerance: TORQUE_COM_TOLERANCE * scale });
    }
    let r = pairwise_distances(positions);
    if !(r.min() >= COLLISION_FLOOR) {
        return Err(Error::Collision { time: f64::NAN, distance: r.min() });
    }
    let next = (body + 1) % 3;
    let prev = (body + 2) % 3;
    let w = positions[0].wedge(positions[1]);
    Ok((potential.force_factor(r.between(body, next)) - potential.force_factor(r.between(body, prev))) * w)
}

/// Torque on body 3: `ℓ̇_3 = (r_13^(a−2) − r_23^(a−2)) (q_1 ∧ q_2)`.
pub fn torque_body3(positions: &Bodies, potential: &PotentialSpec) -> Result<f64> {
    torque(2, positions, potential)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn equilateral(side: f64) -> Bodies {
        let r = side / 3f64.sqrt();
        std::array::from_fn(|i| {
            let a = std::f64::consts::FRAC_PI_2 + i as f64 * 2.0 * std::f64::consts::PI / 3.0;
            v(r * a.cos(), r * a.sin())
        })
    }

    const EULER: Bodies = [Vec2::new(0.0, 0.0), Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)];

    #[test]
    fn distances_examples() {
        let d = pairwise_distances(&equilateral(1.0));
        assert_relative_eq!(d.r12, 1.0, max_relative = 1e-15);
        assert_relative_eq!(d.r23, 1.0, max_relative = 1e-15);
        assert_relative_eq!(d.r31, 1.0, max_relative = 1e-15);
        let d = pairwise_distances(&EULER);
        assert_eq!((d.r12, d.r23, d.r31), (1.0, 2.0, 1.0));
        let d = pairwise_distances(&[v(0.0, -1.0), v(0.0, 0.0), v(3.0, 3.0)]);
        assert_eq!(d.r12, 1.0);
        assert_eq!(d.r23, 18f64.sqrt());
        assert_eq!(d.r31, 5.0);
    }

    #[test]
    fn acceleration_examples() {
        let p = PotentialSpec::newtonian();
        let acc = accelerations(&EULER, &p).unwrap();
        assert_eq!(acc[0], Vec2::ZERO);
        // body 1 at distance 1 pulls with 1, body 2 at distance 2 with 1/4
        assert_eq!(acc[2], v(-1.25, 0.0));
        for a in [-1.0, -2.5, -0.7, 1.5] {
            let q = equilateral(1.3);
            let acc = accelerations(&q, &PotentialSpec::new(a).unwrap()).unwrap();
            for i in 0..3 {
                assert!(acc[i].wedge(q[i]).abs() < 1e-14);
                assert!(acc[i].dot(q[i]) < 0.0);
            }
        }
    }

    #[test]
    fn collision_detected() {
        let q = [v(0.0, 0.0), v(0.0, 0.0), v(1.0, 0.0)];
        assert!(matches!(
            accelerations(&q, &PotentialSpec::newtonian()),
            Err(Error::Collision { .. })
        ));
    }

    #[test]
    fn energy_examples() {
        let p = PotentialSpec::newtonian();
        let rest = [Vec2::ZERO; 3];
        let e = energies(&PhaseState::new(0.0, equilateral(1.0), rest), &p).unwrap();
        assert_eq!(e.kinetic, 0.0);
        assert_relative_eq!(e.potential, -3.0, max_relative = 1e-15);
        assert_relative_eq!(e.total, -3.0, max_relative = 1e-15);
        let e = energies(&PhaseState::new(0.0, EULER, rest), &p).unwrap();
        assert_eq!((e.kinetic, e.potential, e.total), (0.0, -2.5, -2.5));
    }

    #[test]
    fn angular_momentum_examples() {
        let t: f64 = 0.7;
        let s = PhaseState::new(
            0.0,
            [v(t.cos(), t.sin()), Vec2::ZERO, v(1.0, 2.0)],
            [v(-t.sin(), t.cos()), v(3.0, 1.0), Vec2::ZERO],
        );
        let l = angular_momenta(&s);
        assert_relative_eq!(l.per_body[0], 1.0, max_relative = 1e-15);
        assert_eq!(l.per_body[1], 0.0);
        assert_eq!(l.per_body[2], 0.0);
    }

    #[test]
    fn torque_examples() {
        let p = PotentialSpec::newtonian();
        // isosceles about body 3: q3 on the y axis, q1 and q2 mirrored
        let iso = [v(-1.0, -0.5), v(1.0, -0.5), v(0.0, 1.0)];
        assert_eq!(torque_body3(&iso, &p).unwrap(), 0.0);
        assert_eq!(torque_body3(&EULER, &p).unwrap(), 0.0);
        let off = [v(1.0, 0.0), v(0.0, 1.0), v(0.0, 0.0)];
        assert!(matches!(torque_body3(&off, &p), Err(Error::CenterOfMass { .. })));
    }

    fn centered() -> impl Strategy<Value = Bodies> {
        proptest::array::uniform4(-2.0..2.0f64).prop_map(|c| {
            let q1 = v(c[0], c[1]);
            let q2 = v(c[2], c[3]);
            [q1, q2, -(q1 + q2)]
        })
    }

    proptest! {
        #[test]
        fn forces_sum_to_zero(q in proptest::array::uniform6(-3.0..3.0f64), a in -3.0..-0.2f64) {
            let q = [v(q[0], q[1]), v(q[2], q[3]), v(q[4], q[5])];
            prop_assume!(pairwise_distances(&q).min() > 1e-2);
            let acc = accelerations(&q, &PotentialSpec::new(a).unwrap()).unwrap();
            let sum = acc[0] + acc[1] + acc[2];
            let scale: f64 = acc.iter().map(|x| x.norm()).sum();
            prop_assert!(sum.norm() <= 1e-14 * scale);
        }

        #[test]
        fn newtonian_matches_hand_expansion(q in proptest::array::uniform6(-3.0..3.0f64)) {
            let q = [v(q[0], q[1]), v(q[2], q[3]), v(q[4], q[5])];
            let r = pairwise_distances(&q);
            prop_assume!(r.min() > 1e-2);
            let acc = accelerations(&q, &PotentialSpec::newtonian()).unwrap();
            let y1dd = (q[2].y - q[0].y) / r.r31.powi(3) + (q[1].y - q[0].y) / r.r12.powi(3);
            let x1dd = (q[2].x - q[0].x) / r.r31.powi(3) + (q[1].x - q[0].x) / r.r12.powi(3);
            let scale = 1e-13 * (acc[0].norm() + 1.0 / r.min().powi(2));
            prop_assert!((acc[0].y - y1dd).abs() <= scale);
            prop_assert!((acc[0].x - x1dd).abs() <= scale);
        }

        #[test]
        fn torque_matches_force_oracle(q in centered(), a in -3.0..-0.3f64, body in 0usize..3) {
            prop_assume!(pairwise_distances(&q).min() > 0.05);
            let p = PotentialSpec::new(a).unwrap();
            let acc = accelerations(&q, &p).unwrap();
            let oracle = q[body].wedge(acc[body]);
            let closed = torque(body, &q, &p).unwrap();
            let scale = q[body].norm() * acc[body].norm();
            prop_assert!((oracle - closed).abs() <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn three_wedges_agree_when_centered(q in centered()) {
            let w12 = q[0].wedge(q[1]);
            let w23 = q[1].wedge(q[2]);
            let w31 = q[2].wedge(q[0]);
            let scale = q.iter().map(|p| p.norm_sq()).sum::<f64>();
            prop_assert!((w12 - w23).abs() <= 1e-14 * scale);
            prop_assert!((w12 - w31).abs() <= 1e-14 * scale);
        }
    }
}
