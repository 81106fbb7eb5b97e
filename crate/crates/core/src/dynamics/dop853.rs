//! Dormand–Prince 8(5,3) explicit Runge–Kutta integrator.
//!
//! Adaptive step control uses the combined 5th/3rd-order error estimate of
//! Hairer, Nørsett & Wanner. Output is produced at caller-supplied times by
//! shortening the step that would cross each one, so samples carry the full
//! eighth-order accuracy of a regular step instead of an interpolant's.

use crate::error::{Error, Result};

const STAGES: usize = 12;

const C: [f64; STAGES] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
];

const A: [[f64; STAGES]; STAGES] = [
    [0.0; STAGES],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0,
    ],
    [
        0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0,
    ],
    [
        0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0,
    ],
    [
        0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328,
        -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671,
        20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843,
        21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0,
        0.0, 0.0,
    ],
    [
        -0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927,
        -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0,
        0.0,
    ],
    [
        2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188,
        27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303,
        0.6433927460157636, 0.0,
    ],
];

const B: [f64; STAGES] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];

// Error weights over the 12 stages plus f(t + h, y_new) (whose weights are zero).
const E3: [f64; STAGES] = [
    -0.18980075407240762,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    -0.4226823213237919,
    -0.1521609496625161,
    0.20136540080403034,
    0.02265179219836082,
];

const E5: [f64; STAGES] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rtol: 1e-13, atol: 1e-13, max_steps: 2_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each
/// time in `outputs`, which must be monotone in the direction of integration
/// (either direction is allowed). An output equal to `t0` returns `y0`.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    control: &StepControl,
) -> Result<(Vec<[f64; N]>, Stats)>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut stats = Stats::default();
    let mut result = Vec::with_capacity(outputs.len());
    let Some(&last) = outputs.last() else {
        return Ok((result, stats));
    };
    let direction = if last >= t0 { 1.0 } else { -1.0 };
    for w in outputs.windows(2) {
        if (w[1] - w[0]) * direction < 0.0 {
            return Err(Error::InvalidArgument("output times are not monotone".into()));
        }
    }
    if (outputs[0] - t0) * direction < 0.0 {
        return Err(Error::InvalidArgument("first output time precedes the start".into()));
    }

    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y)?;
    stats.evaluations += 1;
    let mut h_abs = initial_step(&mut f, t, &y, &k0, direction, control, &mut stats)?;

    for &target in outputs {
        while (target - t) * direction > 0.0 {
            if stats.accepted + stats.rejected >= control.max_steps {
                return Err(Error::TooManySteps(control.max_steps));
            }
            let remaining = (target - t).abs();
            let lands = h_abs >= remaining;
            let h = if lands { remaining } else { h_abs } * direction;
            let min_step = 16.0 * f64::EPSILON * t.abs().max(1.0);
            if h.abs() < min_step && !lands {
                return Err(Error::StepSizeUnderflow { time: t, step: h.abs() });
            }
            let (y_new, k_last, err) = step(&mut f, t, &y, &k0, h, control, &mut stats)?;
            if err <= 1.0 {
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-1.0 / 8.0)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                t = if lands { target } else { t + h };
                y = y_new;
                k0 = k_last;
                stats.accepted += 1;
                // A step shortened to hit an output says nothing about the
                // natural step size; keep the larger proposal.
                h_abs = if lands { h_abs.max(h.abs() * factor) } else { h.abs() * factor };
            } else {
                stats.rejected += 1;
                h_abs = h.abs() * (SAFETY * err.powf(-1.0 / 8.0)).max(MIN_FACTOR);
                if h_abs < min_step {
                    return Err(Error::StepSizeUnderflow { time: t, step: h_abs });
                }
            }
        }
        result.push(y);
    }
    Ok((result, stats))
}

fn scale<const N: usize>(y: &[f64; N], y_new: &[f64; N], control: &StepControl, i: usize) -> f64 {
    control.atol + control.rtol * y[i].abs().max(y_new[i].abs())
}

#[allow(clippy::type_complexity)]
fn step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k0: &[f64; N],
    h: f64,
    control: &StepControl,
    stats: &mut Stats,
) -> Result<([f64; N], [f64; N], f64)>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]> + ?Sized,
{
    let mut k = [[0.0; N]; STAGES];
    k[0] = *k0;
    for s in 1..STAGES {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = f(t + C[s] * h, &ys)?;
        stats.evaluations += 1;
    }
    let mut y_new = *y;
    for (s, ks) in k.iter().enumerate() {
        if B[s] != 0.0 {
            for i in 0..N {
                y_new[i] += h * B[s] * ks[i];
            }
        }
    }
    let k_last = f(t + h, &y_new)?;
    stats.evaluations += 1;

    let mut err5 = 0.0;
    let mut err3 = 0.0;
    for i in 0..N {
        let sc = scale(y, &y_new, control, i);
        let mut e5 = 0.0;
        let mut e3 = 0.0;
        for s in 0..STAGES {
            e5 += E5[s] * k[s][i];
            e3 += E3[s] * k[s][i];
        }
        err5 += (e5 / sc).powi(2);
        err3 += (e3 / sc).powi(2);
    }
    let err = if err5 == 0.0 && err3 == 0.0 {
        0.0
    } else {
        h.abs() * err5 / ((err5 + 0.01 * err3) * N as f64).sqrt()
    };
    Ok((y_new, k_last, err))
}

fn initial_step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k0: &[f64; N],
    direction: f64,
    control: &StepControl,
    stats: &mut Stats,
) -> Result<f64>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let norm = |v: &[f64; N]| -> f64 {
        let s: f64 = (0..N)
            .map(|i| (v[i] / (control.atol + control.rtol * y[i].abs())).powi(2))
            .sum();
        (s / N as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(k0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let mut y1 = *y;
    for i in 0..N {
        y1[i] += direction * h0 * k0[i];
    }
    let k1 = f(t + direction * h0, &y1)?;
    stats.evaluations += 1;
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = k1[i] - k0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (1e-6f64).max(h0 * 1e-3)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    Ok((100.0 * h0).min(h1))
}
