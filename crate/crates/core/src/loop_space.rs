//! Truncated Fourier representation of a single choreography curve `q(t)`
//! with the dihedral symmetry of the eight built into the coefficient layout.
//!
//! Body `i` (0-based) sits at `q(t + iT/3)`. The curve is a pure sine series
//! with `x` using odd frequencies and `y` even ones, none divisible by 3:
//!
//! * dropping multiples of 3 makes the three phase-shifted copies sum to zero,
//!   so the center of mass is the origin at every instant;
//! * a sine series is odd, `q(−t) = −q(t)`;
//! * `sin(kωt + kπ) = (−1)^k sin(kωt)` turns the parity split into
//!   `q(t + T/2) = (−x(t), y(t))`.
//!
//! Together these make every representable loop invariant under the
//! twelve-element symmetry group generated by the relabel–shift–reflect map
//! `s` and the time-reversal map `σ`.

use serde::{Deserialize, Serialize};

use crate::dynamics::Bodies;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

pub const DEFAULT_PERIOD: f64 = 12.0;
pub const DEFAULT_MODES: usize = 24;
pub const DEFAULT_GRID: usize = 512;

pub fn x_mode_allowed(k: usize) -> bool {
    k % 2 == 1 && k % 3 != 0
}

pub fn y_mode_allowed(k: usize) -> bool {
    k > 0 && k % 2 == 0 && k % 3 != 0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LoopDocument", into = "LoopDocument")]
pub struct FourierLoop {
    period: f64,
    modes: usize,
    // Indexed by frequency 0..=modes; forbidden entries are exactly zero.
    x_coeffs: Vec<f64>,
    y_coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LoopDocument {
    #[serde(rename = "T")]
    period: f64,
    #[serde(rename = "N")]
    modes: usize,
    x_coeffs: Vec<f64>,
    y_coeffs: Vec<f64>,
}

impl TryFrom<LoopDocument> for FourierLoop {
    type Error = Error;
    fn try_from(doc: LoopDocument) -> Result<Self> {
        if doc.x_coeffs.len() != doc.modes + 1 || doc.y_coeffs.len() != doc.modes + 1 {
            return Err(Error::InvalidArgument(format!(
                "coefficient arrays must have N + 1 = {} entries",
                doc.modes + 1
            )));
        }
        FourierLoop::new(doc.period, doc.x_coeffs, doc.y_coeffs)
    }
}

impl From<FourierLoop> for LoopDocument {
    fn from(l: FourierLoop) -> Self {
        LoopDocument { period: l.period, modes: l.modes, x_coeffs: l.x_coeffs, y_coeffs: l.y_coeffs }
    }
}

/// Uniform-grid samples of the curve `q` and its velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopSamples {
    pub times: Vec<f64>,
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
}

fn check_period(period: f64) -> Result<()> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("period must be positive, got {period}")))
    }
}

impl FourierLoop {
    /// Builds a loop from coefficient arrays indexed by frequency. Fails if a
    /// coefficient the symmetry forbids is nonzero.
    pub fn new(period: f64, x_coeffs: Vec<f64>, y_coeffs: Vec<f64>) -> Result<Self> {
        check_period(period)?;
        if x_coeffs.len() != y_coeffs.len() || x_coeffs.is_empty() {
            return Err(Error::InvalidArgument("coefficient arrays must have equal, nonzero length".into()));
        }
        if x_coeffs.iter().chain(&y_coeffs).any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        for (k, (&cx, &cy)) in x_coeffs.iter().zip(&y_coeffs).enumerate() {
            if (cx != 0.0 && !x_mode_allowed(k)) || (cy != 0.0 && !y_mode_allowed(k)) {
                return Err(Error::InvalidArgument(format!(
                    "frequency {k} coefficient breaks the loop symmetry"
                )));
            }
        }
        let modes = x_coeffs.len() - 1;
        Ok(Self { period, modes, x_coeffs, y_coeffs })
    }

    pub fn zero(period: f64, modes: usize) -> Result<Self> {
        Self::new(period, vec![0.0; modes + 1], vec![0.0; modes + 1])
    }

    /// Orthogonal projection of arbitrary sine coefficients onto the
    /// symmetric subspace: forbidden entries are zeroed, the rest kept.
    pub fn symmetrize(period: f64, x_dense: &[f64], y_dense: &[f64]) -> Result<Self> {
        let modes = x_dense.len().max(y_dense.len()).saturating_sub(1);
        let pick = |dense: &[f64], allowed: fn(usize) -> bool| -> Vec<f64> {
            (0..=modes)
                .map(|k| if allowed(k) { dense.get(k).copied().unwrap_or(0.0) } else { 0.0 })
                .collect()
        };
        Self::new(period, pick(x_dense, x_mode_allowed), pick(y_dense, y_mode_allowed))
    }

    /// Lissajous initial guess `x = sin(2πt/T)`, `y = λ sin(4πt/T)`.
    pub fn seed_eight(period: f64, amplitude_ratio: f64) -> Result<Self> {
        Self::seed_eight_with_modes(period, amplitude_ratio, DEFAULT_MODES)
    }

    pub fn seed_eight_with_modes(period: f64, amplitude_ratio: f64, modes: usize) -> Result<Self> {
        if modes < 2 {
            return Err(Error::InvalidArgument("seed needs at least 2 modes".into()));
        }
        let mut x = vec![0.0; modes + 1];
        let mut y = vec![0.0; modes + 1];
        x[1] = 1.0;
        y[2] = amplitude_ratio;
        Self::new(period, x, y)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn x_coeffs(&self) -> &[f64] {
        &self.x_coeffs
    }

    pub fn y_coeffs(&self) -> &[f64] {
        &self.y_coeffs
    }

    pub fn angular_frequency(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period
    }

    /// The same loop with a different mode cutoff (truncating or zero-padding).
    pub fn with_modes(&self, modes: usize) -> Self {
        let resize = |c: &[f64]| (0..=modes).map(|k| c.get(k).copied().unwrap_or(0.0)).collect();
        Self { period: self.period, modes, x_coeffs: resize(&self.x_coeffs), y_coeffs: resize(&self.y_coeffs) }
    }

    /// `q(t)` (order 0), `q̇(t)` (order 1) or `q̈(t)` (order 2) of the single curve.
    pub fn curve(&self, t: f64, order: u8) -> Vec2 {
        let w = self.angular_frequency();
        let mut out = Vec2::ZERO;
        for k in 1..=self.modes {
            let (cx, cy) = (self.x_coeffs[k], self.y_coeffs[k]);
            if cx == 0.0 && cy == 0.0 {
                continue;
            }
            let kw = k as f64 * w;
            let (s, c) = (kw * t).sin_cos();
            let basis = match order {
                0 => s,
                1 => kw * c,
                _ => -kw * kw * s,
            };
            out.x += cx * basis;
            out.y += cy * basis;
        }
        out
    }

    /// Positions (order 0), velocities (1) or accelerations (2) of the three
    /// bodies at time `t`.
    pub fn evaluate(&self, t: f64, order: u8) -> Bodies {
        let shift = self.period / 3.0;
        std::array::from_fn(|i| self.curve(t + i as f64 * shift, order))
    }

    /// Samples `q` and `q̇` on `t_m = mT/n`. Requires `n > 2N`, which makes
    /// the grid resolve every retained mode.
    pub fn resample(&self, n_points: usize) -> Result<LoopSamples> {
        if n_points <= 2 * self.modes {
            return Err(Error::Aliasing { grid: n_points, modes: self.modes });
        }
        let times: Vec<f64> = (0..n_points).map(|m| self.period * m as f64 / n_points as f64).collect();
        let positions = times.iter().map(|&t| self.curve(t, 0)).collect();
        let velocities = times.iter().map(|&t| self.curve(t, 1)).collect();
        Ok(LoopSamples { times, positions, velocities })
    }

    /// Discrete sine transform of uniform samples `q(mT/n)`, projected onto
    /// the symmetric subspace. Inverse of [`FourierLoop::resample`] for loops
    /// with at most `modes` modes.
    pub fn from_samples(period: f64, modes: usize, positions: &[Vec2]) -> Result<Self> {
        let n = positions.len();
        if n <= 2 * modes {
            return Err(Error::Aliasing { grid: n, modes });
        }
        let mut x = vec![0.0; modes + 1];
        let mut y = vec![0.0; modes + 1];
        for k in 1..=modes {
            let (mut sx, mut sy) = (0.0, 0.0);
            for (m, p) in positions.iter().enumerate() {
                let s = (2.0 * std::f64::consts::PI * (k * m % n) as f64 / n as f64).sin();
                sx += p.x * s;
                sy += p.y * s;
            }
            x[k] = 2.0 * sx / n as f64;
            y[k] = 2.0 * sy / n as f64;
        }
        Self::symmetrize(period, &x, &y)
    }

    /// The frequencies of the free coefficients, in packed order: all
    /// allowed `x` modes, then all allowed `y` modes.
    pub fn packed_layout(&self) -> Vec<(Axis, usize)> {
        let xs = (1..=self.modes).filter(|&k| x_mode_allowed(k)).map(|k| (Axis::X, k));
        let ys = (1..=self.modes).filter(|&k| y_mode_allowed(k)).map(|k| (Axis::Y, k));
        xs.chain(ys).collect()
    }

    pub fn packed(&self) -> Vec<f64> {
        self.packed_layout()
            .into_iter()
            .map(|(axis, k)| match axis {
                Axis::X => self.x_coeffs[k],
                Axis::Y => self.y_coeffs[k],
            })
            .collect()
    }

    /// A loop with the same period and cutoff whose free coefficients are `values`.
    pub fn with_packed(&self, values: &[f64]) -> Result<Self> {
        let layout = self.packed_layout();
        if values.len() != layout.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} packed coefficients, got {}",
                layout.len(),
                values.len()
            )));
        }
        let mut x = vec![0.0; self.modes + 1];
        let mut y = vec![0.0; self.modes + 1];
        for ((axis, k), &v) in layout.into_iter().zip(values) {
            match axis {
                Axis::X => x[k] = v,
                Axis::Y => y[k] = v,
            }
        }
        Self::new(self.period, x, y)
    }

    /// Reflects the loop so that at `t = −T/12` body 2 is on the negative
    /// x axis and body 1 is below it, matching the labeling used by the
    /// shooting refiner and the verifier. Reflections map solutions to
    /// solutions and preserve the symmetric subspace.
    pub fn canonicalized(&self) -> Self {
        let mut out = self.clone();
        if self.curve(self.period / 4.0, 0).x > 0.0 {
            out.x_coeffs.iter_mut().for_each(|c| *c = -*c);
        }
        if self.curve(-self.period / 12.0, 0).y > 0.0 {
            out.y_coeffs.iter_mut().for_each(|c| *c = -*c);
        }
        out
    }

    /// Largest distance between two points of the curve on a grid of `n` samples.
    pub fn diameter(&self, n: usize) -> f64 {
        let pts: Vec<Vec2> = (0..n).map(|m| self.curve(self.period * m as f64 / n as f64, 0)).collect();
        let mut best: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                best = best.max((*a - *b).norm());
            }
        }
        best
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// The map `s`: relabel bodies, shift time by `−T/6` and reflect in the y axis.
pub fn apply_s(triple_at: impl Fn(f64) -> Bodies, t: f64, period: f64) -> Bodies {
    let q = triple_at(t - period / 6.0);
    [q[2].reflect_y(), q[0].reflect_y(), q[1].reflect_y()]
}

/// The map `σ`: reverse time, reflect through the origin and swap bodies 2, 3.
pub fn apply_sigma(triple_at: impl Fn(f64) -> Bodies, t: f64) -> Bodies {
    let q = triple_at(-t);
    [-q[0], -q[2], -q[1]]
}
