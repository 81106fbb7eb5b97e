use crate::dynamics::Trajectory;
use crate::geometry::Vec2;

/// Fraction of the period treated as an endpoint neighbourhood.
pub const ENDPOINT_WINDOW: f64 = 1e-4;

/// A guaranteed-ish lower bound of a sampled quantity and where it occurs.
/// Positive means the condition holds. NaN means it could not be evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Margin {
    pub value: f64,
    pub time: f64,
}

impl Margin {
    pub const UNDEFINED: Margin = Margin { value: f64::NAN, time: f64::NAN };

    pub fn new(value: f64, time: f64) -> Self {
        Self { value, time }
    }

    /// Smaller of two margins; NaN wins.
    pub fn min(self, other: Margin) -> Margin {
        if self.value.is_nan() {
            self
        } else if other.value.is_nan() || other.value < self.value {
            other
        } else {
            self
        }
    }

    pub fn min_all(items: impl IntoIterator<Item = Margin>) -> Margin {
        items.into_iter().reduce(Margin::min).unwrap_or(Margin::UNDEFINED)
    }

    /// A tolerance sub-condition only matters when it is violated.
    pub fn unless_violated(self, tolerance: Margin) -> Margin {
        if tolerance.value > 0.0 {
            self
        } else {
            tolerance
        }
    }

    pub fn holds(&self) -> bool {
        self.value > 0.0
    }
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let j = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
    let (t0, t1) = (times[j - 1], times[j]);
    let w = (t - t0) / (t1 - t0);
    values[j - 1] * (1.0 - w) + values[j] * w
}

/// Lower bound of `values` on `[t_first + window, t_last − window]`.
///
/// Values at the window edges are interpolated. On each sample interval of
/// width `h` a function with Lipschitz constant `L` stays above
/// `(f_left + f_right − L h) / 2`, and one with `|f''| ≤ M` stays above the
/// parabola through both samples with curvature `−M`, whose minimum over
/// the interval is taken exactly. Both constants are estimated from divided
/// differences on the interval and its neighbours, and the larger bound is
/// used. The second form matters where the quantity vanishes to high order
/// at an endpoint.
pub fn sampled_margin(times: &[f64], values: &[f64], window: f64) -> Margin {
    let n = times.len();
    if n < 2 || values.len() != n {
        return Margin::UNDEFINED;
    }
    let (a, b) = (times[0] + window, times[n - 1] - window);
    if !(a < b) || values.iter().any(|v| v.is_nan()) {
        return Margin::UNDEFINED;
    }
    let mut pts = vec![(a, interpolate(times, values, a))];
    pts.extend(times.iter().zip(values).filter(|(&t, _)| t > a && t < b).map(|(&t, &v)| (t, v)));
    pts.push((b, interpolate(times, values, b)));
    let slopes: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    // |f''| estimates centred on each interior point
    let bends: Vec<f64> = (1..pts.len() - 1)
        .map(|k| 2.0 * (slopes[k] - slopes[k - 1]).abs() / (pts[k + 1].0 - pts[k - 1].0))
        .collect();
    let near = |v: &[f64], lo: usize, hi: usize| (lo..=hi).filter_map(|k| v.get(k)).fold(0.0f64, |m, x| m.max(x.abs()));
    let mut worst = Margin::new(f64::INFINITY, a);
    for (i, w) in pts.windows(2).enumerate() {
        let h = w[1].0 - w[0].0;
        let lip = near(&slopes, i.saturating_sub(1), i + 1);
        // bends[k] sits at point k + 1; points i − 1 ..= i + 2 surround the interval
        let bend = near(&bends, i.saturating_sub(2), i + 1);
        let first = 0.5 * (w[0].1 + w[1].1 - lip * h);
        let second = parabola_floor(w[0].1, w[1].1, h, bend);
        let bound = first.max(second);
        if bound < worst.value {
            let time = if w[0].1 <= w[1].1 { w[0].0 } else { w[1].0 };
            worst = Margin::new(bound, time);
        }
    }
    worst
}

// min over x ∈ [0, h] of f_l + s x − (M/2) x (h − x), s the chord slope
fn parabola_floor(fl: f64, fr: f64, h: f64, bend: f64) -> f64 {
    let low = fl.min(fr);
    if bend <= 0.0 {
        return low;
    }
    let s = (fr - fl) / h;
    let x = 0.5 * h - s / bend;
    if x > 0.0 && x < h {
        (fl + s * x - 0.5 * bend * x * (h - x)).min(low)
    } else {
        low
    }
}

/// `tolerance − max |values|`, attained at the worst sample.
pub fn tolerance_margin(times: &[f64], values: impl IntoIterator<Item = f64>, tolerance: f64) -> Margin {
    let mut worst = Margin::new(tolerance, f64::NAN);
    for (&t, v) in times.iter().zip(values) {
        let m = tolerance - v.abs();
        if m.is_nan() || m < worst.value {
            worst = Margin::new(m, t);
        }
        if m.is_nan() {
            break;
        }
    }
    worst
}

/// Position, velocity and acceleration samples of one curve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CurveSamples {
    pub times: Vec<f64>,
    pub pos: Vec<Vec2>,
    pub vel: Vec<Vec2>,
    pub acc: Vec<Vec2>,
}

impl CurveSamples {
    pub fn of_body(traj: &Trajectory, body: usize) -> Self {
        let s = traj.samples();
        Self {
            times: s.iter().map(|x| x.time()).collect(),
            pos: s.iter().map(|x| x.state.positions[body]).collect(),
            vel: s.iter().map(|x| x.state.velocities[body]).collect(),
            acc: s.iter().map(|x| x.accelerations[body]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn pick(&self, idx: impl Iterator<Item = (usize, f64)>) -> Self {
        let mut out = Self::default();
        for (j, shift) in idx {
            out.times.push(self.times[j] + shift);
            out.pos.push(self.pos[j]);
            out.vel.push(self.vel[j]);
            out.acc.push(self.acc[j]);
        }
        out
    }

    /// The longest run of samples with `x > 0`, treating the samples as one
    /// closed period (the last sample may repeat the first). Times after
    /// the wrap are shifted by `period` so they keep increasing.
    pub fn right_lobe(&self, period: f64) -> Option<Self> {
        let mut n = self.len();
        if n > 1 && (self.times[n - 1] - self.times[0] - period).abs() < 1e-9 * period {
            n -= 1;
        }
        if n == 0 {
            return None;
        }
        let inside: Vec<bool> = self.pos[..n].iter().map(|p| p.x > 0.0).collect();
        if inside.iter().all(|&b| b) {
            return Some(self.pick((0..n).map(|j| (j, 0.0))));
        }
        let start = (0..n).find(|&j| !inside[j])?;
        let (mut best, mut run): ((usize, usize), Option<usize>) = ((0, 0), None);
        for step in 1..=n {
            let j = (start + step) % n;
            match (inside[j], run) {
                (true, None) => run = Some(step),
                (false, Some(r)) => {
                    if step - r > best.1 - best.0 {
                        best = (r, step);
                    }
                    run = None;
                }
                _ => {}
            }
        }
        if best.1 == best.0 {
            return None;
        }
        Some(self.pick((best.0..best.1).map(|step| {
            let j = (start + step) % n;
            (j, if start + step >= n { period } else { 0.0 })
        })))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..=n).map(|j| a + (b - a) * j as f64 / n as f64).collect()
    }

    #[test]
    fn margin_bounds_a_dipping_function() {
        // minimum of (t − 0.503)² + 1e−4 falls between samples
        let t = grid(100, 0.0, 1.0);
        let f: Vec<f64> = t.iter().map(|t| (t - 0.503f64).powi(2) + 1e-4).collect();
        let m = sampled_margin(&t, &f, 0.0);
        assert!(m.value <= 1e-4 && m.value > 0.0);
        assert!((m.time - 0.5).abs() < 0.011);
        let g: Vec<f64> = f.iter().map(|v| v - 1.2e-4).collect();
        assert!(!sampled_margin(&t, &g, 0.0).holds());
    }

    #[test]
    fn window_excludes_endpoint_zeros() {
        let t = grid(64, -1.0, 0.0);
        let f: Vec<f64> = t.iter().map(|t| -t * (1.0 + t)).collect();
        assert!(!sampled_margin(&t, &f, 0.0).holds());
        let m = sampled_margin(&t, &f, 1e-3);
        assert!(m.holds());
        assert!(m.value < 1e-3);
    }

    #[test]
    fn nan_propagates() {
        let t = grid(4, 0.0, 1.0);
        let f = vec![1.0, 1.0, f64::NAN, 1.0, 1.0];
        assert!(sampled_margin(&t, &f, 0.0).value.is_nan());
        let m = Margin::new(1.0, 0.0).min(Margin::UNDEFINED);
        assert!(m.value.is_nan());
        assert!(!m.holds());
    }

    #[test]
    fn tolerance_override() {
        let sign = Margin::new(0.3, 1.0);
        assert_eq!(sign.unless_violated(Margin::new(1e-9, 2.0)), sign);
        assert_eq!(sign.unless_violated(Margin::new(-1e-3, 2.0)).value, -1e-3);
    }

    #[test]
    fn right_lobe_of_a_circle_wraps() {
        let times = grid(120, 0.0, 12.0);
        let pos: Vec<Vec2> = times
            .iter()
            .map(|t| {
                let a = std::f64::consts::PI / 6.0 * t + 1.0;
                Vec2::new(a.cos(), a.sin())
            })
            .collect();
        let c = CurveSamples { times: times.clone(), pos: pos.clone(), vel: pos.clone(), acc: pos };
        let lobe = c.right_lobe(12.0).unwrap();
        assert_eq!(lobe.len(), 60);
        assert!(lobe.pos.iter().all(|p| p.x > 0.0));
        assert!(lobe.times.windows(2).all(|w| w[1] > w[0]));
    }
}
