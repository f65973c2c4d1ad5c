//! Reference constructions for the discrete integrator chain
//! `x_i(k+1) = x_i(k) + h x_{i+1}(k)`, `x_m(k+1) = x_m(k) + h u(k)`.
//!
//! These are the ground truth the synthesis functions are tested against:
//! transition matrix powers and their inverses, the extremal points `a_k` / `b_k`
//! that reach the origin in exactly `k` bounded steps, the switching values and
//! the hyperplane families they lie on.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::combin::binom_f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("order m = {0} must be at least 2")]
    Order(usize),
    #[error("step h = {0} must be positive and finite")]
    Step(f64),
    #[error("control bound r = {0} must be positive")]
    Bound(f64),
    #[error("{what}: k = {k} below minimum {min}")]
    StepCount {
        what: &'static str,
        k: i64,
        min: i64,
    },
    #[error("state has {got} coordinates, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("control |u| = {u} exceeds bound r = {r}")]
    ControlBound { u: f64, r: f64 },
    #[error("beta = {0} outside [0, 1]")]
    Beta(f64),
}

/// Order, step and control bound of the chain. `r` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub m: usize,
    pub h: f64,
    pub r: f64,
}

impl SystemParams {
    pub fn new(m: usize, h: f64, r: f64) -> Result<Self, GeometryError> {
        if m < 2 {
            return Err(GeometryError::Order(m));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(GeometryError::Step(h));
        }
        if !(r > 0.0) {
            return Err(GeometryError::Bound(r));
        }
        Ok(Self { m, h, r })
    }

    fn check_len(&self, x: &[f64]) -> Result<(), GeometryError> {
        if x.len() != self.m {
            return Err(GeometryError::Length {
                got: x.len(),
                expected: self.m,
            });
        }
        Ok(())
    }
}

fn sign_pow(e: i64) -> f64 {
    if e.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `A^k` with `A(i,j) = C(k, j-i) h^(j-i)`.
pub fn matrix_power(p: &SystemParams, k: u32) -> DMatrix<f64> {
    DMatrix::from_fn(p.m, p.m, |i, j| {
        let d = j as i64 - i as i64;
        binom_f64(k as i64, d) * p.h.powi(d as i32)
    })
}

/// Closed-form inverse of [`matrix_power`]:
/// `(-1)^(j-i) C(k+j-i-1, j-i) h^(j-i)` on and above the diagonal.
pub fn matrix_power_inverse(p: &SystemParams, k: u32) -> DMatrix<f64> {
    DMatrix::from_fn(p.m, p.m, |i, j| {
        if j < i {
            return 0.0;
        }
        let d = (j - i) as i64;
        sign_pow(d) * binom_f64(k as i64 + d - 1, d) * p.h.powi(d as i32)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    /// reached origin with all controls of one sign
    A,
    /// one opposite control first, then `k - 1` of the same sign
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtremalPointSpec {
    pub kind: PointKind,
    pub branch: Branch,
    pub k: i64,
}

impl ExtremalPointSpec {
    pub fn new(kind: PointKind, branch: Branch, k: i64) -> Self {
        Self { kind, branch, k }
    }

    /// Sign `s` carried by the point. Stored rather than taken from `sign(y)`
    /// since `y` can vanish for small `k`.
    pub fn s(&self, m: usize) -> i32 {
        let even = m.is_multiple_of(2);
        let pos_for_even = matches!(
            (self.kind, self.branch),
            (PointKind::A, Branch::Plus) | (PointKind::B, Branch::Minus)
        );
        if pos_for_even == even {
            1
        } else {
            -1
        }
    }

    fn min_k(&self) -> i64 {
        match self.kind {
            PointKind::A => 1,
            PointKind::B => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalPoint {
    pub x: Vec<f64>,
    pub s: i32,
}

/// Coordinates of `a_{+k}`, `a_{-k}`, `b_{+k}` or `b_{-k}`.
pub fn extremal_point(
    p: &SystemParams,
    spec: ExtremalPointSpec,
) -> Result<ExtremalPoint, GeometryError> {
    if spec.k < spec.min_k() {
        return Err(GeometryError::StepCount {
            what: "extremal point",
            k: spec.k,
            min: spec.min_k(),
        });
    }
    let m = p.m as i64;
    let k = spec.k;
    let x = (1..=m)
        .map(|i| {
            let c = binom_f64(m + k - i, m - i + 1);
            let scale = p.h.powi((m - i + 1) as i32) * p.r;
            match (spec.kind, spec.branch) {
                (PointKind::A, Branch::Minus) => sign_pow(m - i) * c * scale,
                (PointKind::A, Branch::Plus) => -sign_pow(m - i) * c * scale,
                (PointKind::B, Branch::Minus) => sign_pow(m - i + 1) * (c - 2.0) * scale,
                (PointKind::B, Branch::Plus) => sign_pow(m - i) * (c - 2.0) * scale,
            }
        })
        .collect();
    Ok(ExtremalPoint { x, s: spec.s(p.m) })
}

/// `sum_{i=0}^{m-1} C(k, i) h^i x_{i+1}` for a real `k`-row of binomials.
fn weighted(p: &SystemParams, x: &[f64], k: i64) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, xi)| binom_f64(k, i as i64) * p.h.powi(i as i32) * xi)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchValues {
    /// `sum C(m-1, i) h^i x_{i+1}`
    pub y: f64,
    pub s: i32,
    /// `sum C(k, i) h^i x_{i+1}` when a `k` was supplied
    pub z: Option<f64>,
    /// `sum C(m, i) h^i x_{i+1}`
    pub ybar: f64,
}

pub fn switch_values(
    p: &SystemParams,
    x: &[f64],
    k: Option<i64>,
) -> Result<SwitchValues, GeometryError> {
    p.check_len(x)?;
    let m = p.m as i64;
    let y = weighted(p, x, m - 1);
    let z = match k {
        Some(k) if k < m - 1 => {
            return Err(GeometryError::StepCount {
                what: "switch value z",
                k,
                min: m - 1,
            })
        }
        Some(k) => Some(weighted(p, x, k)),
        None => None,
    };
    Ok(SwitchValues {
        y,
        s: crate::timeopt::signum(y),
        z,
        ybar: weighted(p, x, m),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlaneFamily {
    /// `y = C(k,m) h^m r s`
    N,
    /// `z(k) = (-1)^(m-1) C(k,m) h^m r s`
    M,
    /// `z(k) = (-1)^(m-1) [C(k,m) - 2 C(k-1,m-1)] h^m r s`
    MBar,
    /// interpolation between `M` (beta = 1) and `MBar` (beta = 0)
    MBeta(f64),
    /// `ybar = [C(k-1,m) + (-1)^(m-1)] h^m r s`
    NBar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSpec {
    pub family: PlaneFamily,
    pub k: i64,
    pub s: i32,
}

/// Left side minus right side of the plane equation; zero means membership.
pub fn plane_residual(p: &SystemParams, x: &[f64], plane: PlaneSpec) -> Result<f64, GeometryError> {
    p.check_len(x)?;
    let m = p.m as i64;
    let k = plane.k;
    let scale = p.h.powi(m as i32) * p.r * plane.s as f64;
    let sm = sign_pow(m - 1);
    let needs_k = !matches!(plane.family, PlaneFamily::N | PlaneFamily::NBar);
    if needs_k && k < m - 1 {
        return Err(GeometryError::StepCount {
            what: "hyperplane",
            k,
            min: m - 1,
        });
    }
    let ckm = binom_f64(k, m);
    let ck1 = binom_f64(k - 1, m - 1);
    let res = match plane.family {
        PlaneFamily::N => weighted(p, x, m - 1) - ckm * scale,
        PlaneFamily::M => weighted(p, x, k) - sm * ckm * scale,
        PlaneFamily::MBar => weighted(p, x, k) - sm * (ckm - 2.0 * ck1) * scale,
        PlaneFamily::MBeta(beta) => {
            if !(0.0..=1.0).contains(&beta) {
                return Err(GeometryError::Beta(beta));
            }
            weighted(p, x, k) - sm * (ckm - 2.0 * (1.0 - beta) * ck1) * scale
        }
        PlaneFamily::NBar => weighted(p, x, m) - (binom_f64(k - 1, m) + sm) * scale,
    };
    Ok(res)
}

/// Value of the nested linear plane of depth `mu`:
/// `sum_{i=0}^{m-mu-1} C(m-mu-1, i) h^i x_{i+mu+1}`, the plane `M_{m-mu}(m-mu-1)`
/// expressed on the trailing `m - mu` coordinates.
pub fn nested_plane_value(p: &SystemParams, x: &[f64], mu: usize) -> Result<f64, GeometryError> {
    p.check_len(x)?;
    let n = (p.m - mu) as i64;
    Ok(x[mu..]
        .iter()
        .enumerate()
        .map(|(i, xi)| binom_f64(n - 1, i as i64) * p.h.powi(i as i32) * xi)
        .sum())
}

/// One step of the chain. Rejects `|u| > r` when `r` is finite.
pub fn propagate(p: &SystemParams, x: &[f64], u: f64) -> Result<Vec<f64>, GeometryError> {
    p.check_len(x)?;
    if p.r.is_finite() && u.abs() > p.r {
        return Err(GeometryError::ControlBound { u, r: p.r });
    }
    Ok(chain_euler(x, u, p.h))
}

pub(crate) fn chain_euler(x: &[f64], top: f64, h: f64) -> Vec<f64> {
    let m = x.len();
    let mut next = Vec::with_capacity(m);
    for i in 0..m - 1 {
        next.push(x[i] + h * x[i + 1]);
    }
    next.push(x[m - 1] + h * top);
    next
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub controls: Vec<f64>,
    /// initial state followed by the state after each control
    pub states: Vec<Vec<f64>>,
}

/// Drive an extremal point to the origin along its defining control sequence.
pub fn reach_origin_polyline(
    p: &SystemParams,
    spec: ExtremalPointSpec,
) -> Result<Polyline, GeometryError> {
    let start = extremal_point(p, spec)?;
    let r = p.r;
    let lead = match spec.branch {
        Branch::Plus => r,
        Branch::Minus => -r,
    };
    let controls = match spec.kind {
        PointKind::A => vec![lead; spec.k as usize],
        PointKind::B => {
            let mut c = vec![-lead; spec.k as usize];
            c[0] = lead;
            c
        }
    };
    let mut states = vec![start.x];
    for &u in &controls {
        let next = propagate(p, states.last().unwrap(), u)?;
        states.push(next);
    }
    Ok(Polyline { controls, states })
}
