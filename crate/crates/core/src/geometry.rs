//! Planar geometric primitives.
//!
//! Everything here is a pure function of value inputs. The wedge product
//! `(x, y) ∧ (u, v) = xv − yu` is the scalar cross product; it is twice the
//! signed area of the triangle spanned by the two vectors.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-width of the "on the line" band, relative to the input scale.
pub const COLLINEARITY_TOLERANCE: f64 = 1e-10;

/// Relative threshold below which two directions are treated as parallel.
const PARALLEL_TOLERANCE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn wedge(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counterclockwise rotation by a quarter turn.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Reflection about the y axis, `(x, y) ↦ (−x, y)`.
    pub fn reflect_y(self) -> Vec2 {
        Vec2::new(-self.x, self.y)
    }

    /// Reflection about the x axis, `(x, y) ↦ (x, −y)`.
    pub fn reflect_x(self) -> Vec2 {
        Vec2::new(self.x, -self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

/// An infinite line through `point` along `direction`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line2 {
    point: Vec2,
    direction: Vec2,
}

impl Line2 {
    pub fn new(point: Vec2, direction: Vec2) -> Result<Self> {
        if !(direction.norm() > 0.0) || !point.is_finite() || !direction.is_finite() {
            return Err(Error::DegenerateLine);
        }
        Ok(Self { point, direction })
    }

    /// The line through two distinct points.
    pub fn through(a: Vec2, b: Vec2) -> Result<Self> {
        Self::new(a, b - a)
    }

    /// Tangent line of a curve at `point` moving with velocity `velocity`.
    pub fn tangent(point: Vec2, velocity: Vec2) -> Result<Self> {
        Self::new(point, velocity).map_err(|_| Error::DegenerateParameterization)
    }

    pub fn x_axis() -> Self {
        Self { point: Vec2::ZERO, direction: Vec2::new(1.0, 0.0) }
    }

    pub fn y_axis() -> Self {
        Self { point: Vec2::ZERO, direction: Vec2::new(0.0, 1.0) }
    }

    pub fn point(&self) -> Vec2 {
        self.point
    }

    pub fn direction(&self) -> Vec2 {
        self.direction
    }

    pub fn unit_direction(&self) -> Vec2 {
        self.direction / self.direction.norm()
    }

    /// Signed distance of `p`; positive on the left of the direction of travel.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        self.direction.wedge(p - self.point) / self.direction.norm()
    }

    pub fn distance(&self, p: Vec2) -> f64 {
        self.signed_distance(p).abs()
    }

    pub fn is_parallel(&self, other: &Line2) -> bool {
        let cross = self.direction.wedge(other.direction);
        cross.abs() <= PARALLEL_TOLERANCE * self.direction.norm() * other.direction.norm()
    }

    pub fn intersection(&self, other: &Line2) -> Option<Vec2> {
        if self.is_parallel(other) {
            return None;
        }
        let cross = self.direction.wedge(other.direction);
        let lambda = (other.point - self.point).wedge(other.direction) / cross;
        Some(self.point + self.direction * lambda)
    }

    /// Coordinates of `p` in the frame where this line is the y axis: the
    /// first component is the signed distance (positive on the right of the
    /// direction), the second the position along the line.
    fn frame_coordinates(&self, p: Vec2) -> (f64, f64) {
        let e_y = self.unit_direction();
        let e_x = Vec2::new(e_y.y, -e_y.x);
        let d = p - self.point;
        (d.dot(e_x), d.dot(e_y))
    }

    fn frame_velocity(&self, v: Vec2) -> (f64, f64) {
        let e_y = self.unit_direction();
        let e_x = Vec2::new(e_y.y, -e_y.x);
        (v.dot(e_x), v.dot(e_y))
    }
}

pub fn wedge(u: Vec2, v: Vec2) -> f64 {
    u.wedge(v)
}

/// Signed curvature `(ẋÿ − ẏẍ) / v³` of a curve with the given velocity and
/// acceleration.
pub fn curvature(vel: Vec2, acc: Vec2) -> Result<f64> {
    let speed = vel.norm();
    let cube = speed * speed * speed;
    if !(cube > 0.0) || !cube.is_finite() {
        return Err(Error::DegenerateParameterization);
    }
    Ok(vel.wedge(acc) / cube)
}

/// Where a tangent line meets a fixed line `m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LineMeet {
    /// Coordinate along `m` (measured from `m.point()` in units of arc length
    /// along the unit direction), or a rate of change of that coordinate.
    Finite(f64),
    /// The tangent is parallel to `m`; the meeting point is at infinity.
    AtInfinity,
}

impl LineMeet {
    pub fn finite(self) -> Option<f64> {
        match self {
            LineMeet::Finite(v) => Some(v),
            LineMeet::AtInfinity => None,
        }
    }
}

/// Coordinate along `m` of the point where the tangent line at `curve_point`
/// crosses `m`.
///
/// In the frame where `m` is the y axis this is `p = −(x ẏ − y ẋ) / ẋ`.
pub fn tangent_line_intersection_param(
    curve_point: Vec2,
    curve_vel: Vec2,
    m: &Line2,
) -> Result<LineMeet> {
    let speed = curve_vel.norm();
    if !(speed > 0.0) {
        return Err(Error::DegenerateParameterization);
    }
    let (x, y) = m.frame_coordinates(curve_point);
    let (xd, yd) = m.frame_velocity(curve_vel);
    if xd.abs() <= PARALLEL_TOLERANCE * speed {
        return Ok(LineMeet::AtInfinity);
    }
    Ok(LineMeet::Finite(-(x * yd - y * xd) / xd))
}

/// Time derivative of [`tangent_line_intersection_param`] along the curve,
/// `dp/dt = −v³ x κ / ẋ²` in the frame where `m` is the y axis.
pub fn dp_dt(curve_point: Vec2, vel: Vec2, acc: Vec2, m: &Line2) -> Result<LineMeet> {
    let kappa = curvature(vel, acc)?;
    let speed = vel.norm();
    let (x, _) = m.frame_coordinates(curve_point);
    let (xd, _) = m.frame_velocity(vel);
    if xd.abs() <= PARALLEL_TOLERANCE * speed {
        return Ok(LineMeet::AtInfinity);
    }
    Ok(LineMeet::Finite(-speed.powi(3) * x * kappa / (xd * xd)))
}

/// Position of two points relative to a line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// The points lie in opposite open half-planes.
    Split,
    /// Both points lie strictly in the same open half-plane.
    SameSide,
    /// At least one point lies within the collinearity band of the line.
    OnLine,
}

pub fn splits(line: &Line2, p1: Vec2, p2: Vec2) -> Side {
    splits_with_tolerance(line, p1, p2, COLLINEARITY_TOLERANCE)
}

/// Like [`splits`] with an explicit band. The band is `rel_tol` times the
/// larger distance from the line's anchor point to either input point, so
/// the outcome is unchanged by rigid motions.
pub fn splits_with_tolerance(line: &Line2, p1: Vec2, p2: Vec2, rel_tol: f64) -> Side {
    let scale = (p1 - line.point).norm().max((p2 - line.point).norm());
    let band = rel_tol * scale;
    let d1 = line.signed_distance(p1);
    let d2 = line.signed_distance(p2);
    if d1.abs() <= band || d2.abs() <= band {
        Side::OnLine
    } else if (d1 > 0.0) != (d2 > 0.0) {
        Side::Split
    } else {
        Side::SameSide
    }
}

/// How far three lines are from passing through a common point.
///
/// For every ordering whose first two lines intersect, takes the distance from
/// that intersection to the third line, and returns the smallest such
/// distance. Mutually parallel lines count as concurrent (at infinity) and
/// give zero.
pub fn concurrency_residual(l1: &Line2, l2: &Line2, l3: &Line2) -> f64 {
    let lines = [l1, l2, l3];
    let mut best: Option<f64> = None;
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        if let Some(p) = lines[i].intersection(lines[j]) {
            let d = lines[k].distance(p);
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    best.unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn line(px: f64, py: f64, dx: f64, dy: f64) -> Line2 {
        Line2::new(Vec2::new(px, py), Vec2::new(dx, dy)).unwrap()
    }

    #[test]
    fn wedge_examples() {
        assert_eq!(wedge(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)), 1.0);
        assert_eq!(wedge(Vec2::new(2.0, 3.0), Vec2::new(4.0, 6.0)), 0.0);
        assert_eq!(wedge(Vec2::new(1.0, 2.0), Vec2::new(3.0, 4.0)), -2.0);
    }

    #[test]
    fn curvature_examples() {
        let k = curvature(Vec2::new(0.0, 1.0), Vec2::new(-1.0, 0.0)).unwrap();
        assert_eq!(k, 1.0);
        assert_eq!(curvature(Vec2::new(1.0, 0.0), Vec2::ZERO).unwrap(), 0.0);
        assert_eq!(curvature(Vec2::new(1.0, 0.0), Vec2::new(0.0, 2.0)).unwrap(), 2.0);
        assert!(matches!(
            curvature(Vec2::ZERO, Vec2::new(1.0, 0.0)),
            Err(Error::DegenerateParameterization)
        ));
    }

    #[test]
    fn intersection_param_examples() {
        let m = Line2::y_axis();
        let p = tangent_line_intersection_param(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), &m);
        assert_eq!(p.unwrap(), LineMeet::AtInfinity);
        let p = tangent_line_intersection_param(Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0), &m);
        assert_eq!(p.unwrap(), LineMeet::Finite(0.0));
        let p = tangent_line_intersection_param(Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), &m);
        assert_eq!(p.unwrap(), LineMeet::Finite(-1.0));
    }

    #[test]
    fn dp_dt_examples() {
        let m = Line2::y_axis();
        // inflection: acceleration parallel to velocity
        let r = dp_dt(Vec2::new(3.0, 1.0), Vec2::new(1.0, 2.0), Vec2::new(2.0, 4.0), &m).unwrap();
        assert_eq!(r, LineMeet::Finite(0.0));
        let r = dp_dt(Vec2::new(2.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(-1.0, 0.0), &m).unwrap();
        assert_eq!(r, LineMeet::AtInfinity);

        // c(t) = (1 + t, 1 + t + t²/2): p(t) = −t − t²/2 exactly, so p'(0) = −1.
        let r = dp_dt(Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0), &m).unwrap();
        let p = |t: f64| {
            let pt = Vec2::new(1.0 + t, 1.0 + t + 0.5 * t * t);
            let v = Vec2::new(1.0, 1.0 + t);
            tangent_line_intersection_param(pt, v, &m).unwrap().finite().unwrap()
        };
        let h = 1e-5;
        let fd = (p(h) - p(-h)) / (2.0 * h);
        assert_relative_eq!(r.finite().unwrap(), fd, max_relative = 1e-8);
        assert_relative_eq!(r.finite().unwrap(), -1.0, max_relative = 1e-14);
    }

    #[test]
    fn splits_examples() {
        let x = Line2::x_axis();
        assert_eq!(splits(&x, Vec2::new(0.0, 1.0), Vec2::new(0.0, -1.0)), Side::Split);
        assert_eq!(splits(&x, Vec2::new(1.0, 1.0), Vec2::new(2.0, 3.0)), Side::SameSide);
        assert_eq!(splits(&x, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)), Side::OnLine);
    }

    #[test]
    fn concurrency_examples() {
        let dirs = [0.0f64, 60.0, 120.0].map(|deg| deg.to_radians());
        let ls = dirs.map(|a| line(0.0, 0.0, a.cos(), a.sin()));
        assert!(concurrency_residual(&ls[0], &ls[1], &ls[2]) < 1e-15);

        let r = concurrency_residual(
            &Line2::x_axis(),
            &Line2::y_axis(),
            &line(0.0, 1.0, 1.0, 1.0),
        );
        assert_relative_eq!(r, 1.0 / 2f64.sqrt(), max_relative = 1e-14);

        let r = concurrency_residual(
            &line(0.0, 0.0, 1.0, 0.0),
            &line(0.0, 1.0, 2.0, 0.0),
            &line(5.0, -3.0, -1.0, 0.0),
        );
        assert_eq!(r, 0.0);
    }

    #[test]
    fn degenerate_line_rejected() {
        assert!(matches!(Line2::new(Vec2::ZERO, Vec2::ZERO), Err(Error::DegenerateLine)));
    }

    fn vec2() -> impl Strategy<Value = Vec2> {
        (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| Vec2::new(x, y))
    }

    proptest! {
        #[test]
        fn wedge_is_antisymmetric(u in vec2(), v in vec2()) {
            prop_assert_eq!(wedge(u, v), -wedge(v, u));
        }

        #[test]
        fn curvature_symmetries(
            v in vec2(), a in vec2(), angle in -3.2..3.2f64, lambda in 0.1..10.0f64
        ) {
            prop_assume!(v.norm() > 1e-3);
            let k = curvature(v, a).unwrap();
            let scale = 1e-12 * (1.0 + k.abs() + a.norm() / v.norm_sq());
            let rotated = curvature(v.rotated(angle), a.rotated(angle)).unwrap();
            prop_assert!((rotated - k).abs() <= scale);
            let scaled = curvature(v * lambda, a * (lambda * lambda)).unwrap();
            prop_assert!((scaled - k).abs() <= scale);
            prop_assert_eq!(curvature(-v, a).unwrap(), -k);
        }

        #[test]
        fn dp_dt_matches_finite_differences(
            c in proptest::array::uniform6(-2.0..2.0f64),
            anchor in vec2(),
            dir_angle in -3.2..3.2f64,
        ) {
            // c(t) = p0 + v0 t + a0 t²/2 + j0 t³/6 with random coefficients
            let p0 = Vec2::new(c[0], c[1]);
            let v0 = Vec2::new(c[2], c[3]) + Vec2::new(1.0, 0.5);
            let a0 = Vec2::new(c[4], c[5]);
            let j0 = Vec2::new(c[5], -c[4]) * 0.3;
            let m = Line2::new(anchor, Vec2::new(dir_angle.cos(), dir_angle.sin())).unwrap();
            let pos = |t: f64| p0 + v0 * t + a0 * (0.5 * t * t) + j0 * (t * t * t / 6.0);
            let vel = |t: f64| v0 + a0 * t + j0 * (0.5 * t * t);
            let e_y = m.unit_direction();
            let xdot = vel(0.0).dot(Vec2::new(e_y.y, -e_y.x));
            prop_assume!(xdot.abs() > 0.2 * vel(0.0).norm());
            let p = |t: f64| tangent_line_intersection_param(pos(t), vel(t), &m)
                .unwrap().finite().unwrap();
            let h = 1e-4;
            let fd = (p(-2.0 * h) - 8.0 * p(-h) + 8.0 * p(h) - p(2.0 * h)) / (12.0 * h);
            let exact = dp_dt(p0, v0, a0, &m).unwrap().finite().unwrap();
            let scale = fd.abs().max(1e-3 * (1.0 + p(0.0).abs()));
            prop_assert!((exact - fd).abs() / scale < 1e-6, "exact {exact} fd {fd}");
        }

        #[test]
        fn splits_symmetric_and_rigid_invariant(
            anchor in vec2(), dir in vec2(), p1 in vec2(), p2 in vec2(),
            angle in -3.2..3.2f64, shift in vec2(),
        ) {
            prop_assume!(dir.norm() > 1e-3);
            let l = Line2::new(anchor, dir).unwrap();
            let side = splits(&l, p1, p2);
            prop_assert_eq!(side, splits(&l, p2, p1));
            let motion = |p: Vec2| p.rotated(angle) + shift;
            let moved = Line2::new(motion(anchor), dir.rotated(angle)).unwrap();
            let d1 = l.signed_distance(p1).abs();
            let d2 = l.signed_distance(p2).abs();
            let band = COLLINEARITY_TOLERANCE * (p1 - anchor).norm().max((p2 - anchor).norm());
            // Rigid motions perturb distances by roundoff; stay clear of the band edge.
            prop_assume!((d1 - band).abs() > 1e-9 && (d2 - band).abs() > 1e-9);
            prop_assert_eq!(side, splits(&moved, motion(p1), motion(p2)));
        }
    }
}
