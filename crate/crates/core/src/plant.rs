//! Simulated plants and noise: integrator chains with a lumped disturbance,
//! the Lorenz system with a control input on its second state, and seeded
//! Gaussian white noise given by power in dBW.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::geometry::chain_euler;
use crate::timeopt::signum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("control gain b must be non-zero")]
    ZeroGain,
    #[error("state magnitude {magnitude:e} exceeds divergence guard {DIVERGENCE_LIMIT:e}")]
    Divergence { magnitude: f64 },
    #[error("chain state must have at least 2 levels, got {0}")]
    Order(usize),
}

/// Any state coordinate beyond this is treated as numerical blow-up.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Fixed stream ids so that each noise source gets its own sequence.
pub mod streams {
    pub const REFERENCE: u64 = 1;
    pub const MEASUREMENT: u64 = 2;
    pub const DISTURBANCE: u64 = 3;
}

/// Deterministic Gaussian source keyed by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { rng }
    }

    /// Zero-mean sample with variance `10^(dbw/10)`.
    pub fn wgn(&mut self, dbw: f64) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        10f64.powf(dbw / 20.0) * z
    }
}

/// Noise level used throughout the examples, std 0.1.
pub const DEFAULT_DBW: f64 = -20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbanceKind {
    None,
    /// `A [sin(0.2 w t) + sin(0.1 w t) + sin(0.05 w t)]`
    Sines,
    /// `A [sign sin(0.2 w t) + sign sin(0.1 w t) + sign sin(0.05 w t)]`
    Squares,
    /// `A` for all t
    Constant,
    /// `A` from `at` seconds on, 0 before
    Step {
        at: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceSpec {
    pub kind: DisturbanceKind,
    pub amplitude: f64,
    pub omega: f64,
    pub noise_gain: f64,
    pub noise_dbw: f64,
}

impl DisturbanceSpec {
    pub fn none() -> Self {
        Self {
            kind: DisturbanceKind::None,
            amplitude: 0.0,
            omega: 0.0,
            noise_gain: 0.0,
            noise_dbw: DEFAULT_DBW,
        }
    }

    /// Noise-free part `f_1(t)`.
    pub fn clean(&self, t: f64) -> f64 {
        let (a, w) = (self.amplitude, self.omega);
        match self.kind {
            DisturbanceKind::None => 0.0,
            DisturbanceKind::Sines => {
                a * ((0.2 * w * t).sin() + (0.1 * w * t).sin() + (0.05 * w * t).sin())
            }
            DisturbanceKind::Squares => {
                let sq = |x: f64| signum(x.sin()) as f64;
                a * (sq(0.2 * w * t) + sq(0.1 * w * t) + sq(0.05 * w * t))
            }
            DisturbanceKind::Constant => a,
            DisturbanceKind::Step { at } => {
                if t >= at {
                    a
                } else {
                    0.0
                }
            }
        }
    }
}

/// `f(t) = f_1(t) + A g wgn`. One sample is drawn on every call.
pub fn disturbance(spec: &DisturbanceSpec, t: f64, ns: &mut NoiseStream) -> f64 {
    let n = ns.wgn(spec.noise_dbw);
    spec.clean(t) + spec.amplitude * spec.noise_gain * n
}

/// Euler step of the chain with `f + b u` driving the last level.
pub fn chain_step_with(x: &[f64], u: f64, f: f64, b: f64, h: f64) -> Result<Vec<f64>, PlantError> {
    if b == 0.0 {
        return Err(PlantError::ZeroGain);
    }
    if x.len() < 2 {
        return Err(PlantError::Order(x.len()));
    }
    let next = chain_euler(x, f + b * u, h);
    guard(&next)?;
    Ok(next)
}

/// As [`chain_step_with`], drawing `f` from the disturbance at time `t`.
pub fn chain_step(
    x: &[f64],
    u: f64,
    spec: &DisturbanceSpec,
    b: f64,
    h: f64,
    t: f64,
    ns: &mut NoiseStream,
) -> Result<Vec<f64>, PlantError> {
    let f = disturbance(spec, t, ns);
    chain_step_with(x, u, f, b, h)
}

fn guard(x: &[f64]) -> Result<(), PlantError> {
    match x.iter().find(|v| !(v.abs() <= DIVERGENCE_LIMIT)) {
        Some(v) => Err(PlantError::Divergence { magnitude: v.abs() }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub b1: f64,
    pub x0: [f64; 3],
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            b1: 8.0 / 3.0,
            x0: [-4.47, -0.505, 28.02],
        }
    }
}

fn lorenz_rhs(x: &[f64; 3], u: f64, p: &LorenzParams) -> [f64; 3] {
    [
        p.sigma * (x[1] - x[0]),
        p.rho * x[0] - x[1] - x[0] * x[2] + u,
        -p.b1 * x[2] + x[0] * x[1],
    ]
}

/// Forward Euler step, `u` entering the second equation.
pub fn lorenz_step(x: &[f64; 3], u: f64, p: &LorenzParams, h: f64) -> Result<[f64; 3], PlantError> {
    let d = lorenz_rhs(x, u, p);
    let next = [x[0] + h * d[0], x[1] + h * d[1], x[2] + h * d[2]];
    guard(&next)?;
    Ok(next)
}

/// Classical fourth-order Runge-Kutta step with `u` held over the step.
pub fn lorenz_step_rk4(
    x: &[f64; 3],
    u: f64,
    p: &LorenzParams,
    h: f64,
) -> Result<[f64; 3], PlantError> {
    let add =
        |a: &[f64; 3], b: &[f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = lorenz_rhs(x, u, p);
    let k2 = lorenz_rhs(&add(x, &k1, h / 2.0), u, p);
    let k3 = lorenz_rhs(&add(x, &k2, h / 2.0), u, p);
    let k4 = lorenz_rhs(&add(x, &k3, h), u, p);
    let mut next = *x;
    for i in 0..3 {
        next[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    guard(&next)?;
    Ok(next)
}

/// `chi = x_1 + vm g wgn(-20 dBW)`. Always consumes one sample.
pub fn measure_output(x1: f64, vm: f64, gsm1: f64, ns: &mut NoiseStream) -> f64 {
    let n = ns.wgn(DEFAULT_DBW);
    x1 + vm * gsm1 * n
}
