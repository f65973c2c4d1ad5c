//! Time-optimal synthesis functions for the discrete integrator chain.
//!
//! [`fsun`] is the second-order function written out directly, [`fxiao`] the
//! general m-order one. Both return `-r sat(a, r)`, where `a` is either the
//! one-step deadbeat control (linear region) or the control that moves the
//! state onto the next switching plane while keeping to the step count.

use thiserror::Error;

use crate::combin::binom_f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimeoptError {
    #[error("saturation width delta = {0} must be positive")]
    SatWidth(f64),
    #[error("|y| = {yabs} is within the linear region h^m r = {bound}")]
    LinearRegion { yabs: f64, bound: f64 },
    #[error("step count requires finite r, got {0}")]
    InfiniteBound(f64),
    #[error("order m = {0} must be at least 2")]
    Order(usize),
}

/// -1, 0 or +1.
pub fn signum(x: f64) -> i32 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// `sign(x)` outside `[-delta, delta]`, `x / delta` inside.
pub fn sat(x: f64, delta: f64) -> Result<f64, TimeoptError> {
    if !(delta > 0.0) {
        return Err(TimeoptError::SatWidth(delta));
    }
    Ok(sat_unchecked(x, delta))
}

fn sat_unchecked(x: f64, delta: f64) -> f64 {
    if x.abs() > delta {
        signum(x) as f64
    } else {
        x / delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCount {
    pub k: u64,
    pub kprime: f64,
}

/// Rising factorial product `k'(k'-1)...(k'-m+1)`.
fn falling(m: usize, kp: f64) -> f64 {
    (0..m).map(|i| kp - i as f64).product()
}

/// Solve `prod_{i<m} (k' - i) = m! |y| / (h^m r)` for the root above `m - 1`
/// and round up to the integer step count.
pub fn step_count(m: usize, yabs: f64, h: f64, r: f64) -> Result<StepCount, TimeoptError> {
    if m < 2 {
        return Err(TimeoptError::Order(m));
    }
    if !r.is_finite() {
        return Err(TimeoptError::InfiniteBound(r));
    }
    let bound = h.powi(m as i32) * r;
    if yabs <= bound {
        return Err(TimeoptError::LinearRegion { yabs, bound });
    }
    let fact: f64 = (1..=m).map(|i| i as f64).product();
    let target = fact * yabs / bound;
    let mut lo = (m - 1) as f64;
    let mut hi = (m as f64).max(target.powf(1.0 / m as f64) + m as f64);
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if falling(m, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut kprime = 0.5 * (lo + hi);
    let k = ((kprime - 1e-9).ceil() as u64).max(m as u64);
    // keep k - 1 < k' <= k after the nudge
    if kprime > k as f64 {
        kprime = k as f64;
    }
    Ok(StepCount { k, kprime })
}

/// Second-order synthesis function for `(x1, x2)`.
pub fn fsun(x1: f64, x2: f64, r: f64, h: f64) -> f64 {
    if !r.is_finite() {
        return -(x1 + 2.0 * h * x2) / (h * h);
    }
    let y = x1 + h * x2;
    let a = if y.abs() <= h * h * r {
        (x1 + 2.0 * h * x2) / (h * h)
    } else {
        let s = signum(y) as f64;
        let k = quadratic_step_count(y.abs(), h, r) as f64;
        -(1.0 - k / 2.0) * r * s + (x1 + k * h * x2) / ((k - 1.0) * h * h)
    };
    -r * sat_unchecked(a, r)
}

/// Step count of the second-order case from the closed-form root of
/// `k'(k'-1) = 2|y| / (h^2 r)`.
fn quadratic_step_count(yabs: f64, h: f64, r: f64) -> u64 {
    let kp = 0.5 * (1.0 + (1.0 + 8.0 * yabs / (h * h * r)).sqrt());
    ((kp - 1e-9).ceil() as u64).max(2)
}

/// m-order synthesis function. `levels` holds `x_1..x_m`; `r` may be infinite,
/// in which case this is [`linear_synthesis`].
pub fn fxiao(levels: &[f64], r: f64, h: f64) -> f64 {
    let m = levels.len();
    if !r.is_finite() {
        return linear_synthesis(levels, h);
    }
    let hm = h.powi(m as i32);
    let y = weighted(levels, (m - 1) as i64, h);
    let a = if y.abs() <= hm * r {
        weighted(levels, m as i64, h) / hm
    } else {
        let s = signum(y) as f64;
        let k = step_count(m, y.abs(), h, r)
            .expect("nonlinear branch has |y| > h^m r")
            .k as i64;
        let kf = k as f64;
        let sm = if m.is_multiple_of(2) { -1.0 } else { 1.0 };
        sm * (1.0 - kf / m as f64) * r * s
            + weighted(levels, k, h) / (binom_f64(k - 1, m as i64 - 1) * hm)
    };
    -r * sat_unchecked(a, r)
}

fn weighted(levels: &[f64], k: i64, h: f64) -> f64 {
    let mut hp = 1.0;
    let mut acc = 0.0;
    for (i, x) in levels.iter().enumerate() {
        acc += binom_f64(k, i as i64) * hp * x;
        hp *= h;
    }
    acc
}

/// Unbounded deadbeat law `-sum C(m,i) h^i x_{i+1} / h^m`.
pub fn linear_synthesis(levels: &[f64], h: f64) -> f64 {
    let m = levels.len();
    -weighted(levels, m as i64, h) / h.powi(m as i32)
}

/// Tracking form: drive `x_1` toward `v` with the filter factor `n0` scaling
/// the step seen by the synthesis function. Integration outside still uses `h`.
pub fn fxiao_tracking(levels: &[f64], v: f64, r: f64, h: f64, n0: f64) -> f64 {
    let mut shifted = levels.to_vec();
    shifted[0] -= v;
    fxiao(&shifted, r, n0 * h)
}
