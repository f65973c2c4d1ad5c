//! Tracking differentiators with a filter factor, binomial lead compensation of
//! their lag, and delay/amplitude measurement between two sampled signals.

use thiserror::Error;

use crate::combin::binom_f64;
use crate::geometry::chain_euler;
use crate::timeopt::fxiao_tracking;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error("differentiator order {0} must be at least 2")]
    Order(usize),
    #[error("filter factor n0 = {0} must be >= 1")]
    FilterFactor(f64),
    #[error("step h = {0} must be positive")]
    Step(f64),
    #[error("bound r = {0} must be positive")]
    Bound(f64),
    #[error("compensation order {spec} does not match state order {state}")]
    OrderMismatch { spec: usize, state: usize },
    #[error("lead_extra = {0} must be non-negative")]
    Lead(f64),
    #[error("need at least {needed} samples (4 periods), got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("channels differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("omega = {0} must be positive")]
    Omega(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdParams {
    pub order: usize,
    pub r: f64,
    pub h: f64,
    pub n0: f64,
}

impl TdParams {
    pub fn new(order: usize, r: f64, h: f64, n0: f64) -> Result<Self, ExtractError> {
        if order < 2 {
            return Err(ExtractError::Order(order));
        }
        if !(n0 >= 1.0) {
            return Err(ExtractError::FilterFactor(n0));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(ExtractError::Step(h));
        }
        if !(r > 0.0) {
            return Err(ExtractError::Bound(r));
        }
        Ok(Self { order, r, h, n0 })
    }
}

/// Level stack `x_1..x_order` of a tracking differentiator.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentiatorState {
    pub levels: Vec<f64>,
    pub params: TdParams,
}

impl DifferentiatorState {
    /// Starts at rest at the origin.
    pub fn new(params: TdParams) -> Self {
        Self {
            levels: vec![0.0; params.order],
            params,
        }
    }

    pub fn with_levels(params: TdParams, levels: Vec<f64>) -> Result<Self, ExtractError> {
        if levels.len() != params.order {
            return Err(ExtractError::OrderMismatch {
                spec: params.order,
                state: levels.len(),
            });
        }
        Ok(Self { levels, params })
    }

    /// Advance one step towards `sample`.
    pub fn td_step(&self, sample: f64) -> Self {
        let mut next = self.clone();
        next.step_mut(sample);
        next
    }

    pub fn step_mut(&mut self, sample: f64) {
        let p = self.params;
        let u = fxiao_tracking(&self.levels, sample, p.r, p.h, p.n0);
        self.levels = chain_euler(&self.levels, u, p.h);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensationSpec {
    pub order: usize,
    pub n0: f64,
    pub h: f64,
    /// lead in seconds on top of `order * n0 * h`
    pub lead_extra: f64,
}

impl CompensationSpec {
    pub fn lead(&self) -> f64 {
        self.order as f64 * self.n0 * self.h + self.lead_extra
    }
}

/// Predicted levels `x̂_1..x̂_{order-1}`:
/// `x̂_{i+1} = sum_mu C(M-1-i, mu) (L/(M-1-i))^mu x_{i+1+mu}`, `L` the total lead.
pub fn compensate_levels(
    levels: &[f64],
    spec: &CompensationSpec,
) -> Result<Vec<f64>, ExtractError> {
    if spec.order < 2 {
        return Err(ExtractError::Order(spec.order));
    }
    if levels.len() != spec.order {
        return Err(ExtractError::OrderMismatch {
            spec: spec.order,
            state: levels.len(),
        });
    }
    if !(spec.lead_extra >= 0.0) {
        return Err(ExtractError::Lead(spec.lead_extra));
    }
    Ok(compensate_with_lead(levels, spec.lead(), spec.order - 1))
}

/// First `count` compensated levels for an explicit lead `lead` (seconds).
pub(crate) fn compensate_with_lead(levels: &[f64], lead: f64, count: usize) -> Vec<f64> {
    let order = levels.len();
    (0..count)
        .map(|i| {
            let p = order - 1 - i;
            let step = lead / p as f64;
            let mut w = 1.0;
            let mut acc = 0.0;
            for mu in 0..=p {
                acc += binom_f64(p as i64, mu as i64) * w * levels[i + mu];
                w *= step;
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAmplitude {
    /// positive when `sig` lags `ref`
    pub delay_s: f64,
    /// `rms(sig) / rms(ref)`
    pub ratio: f64,
}

/// Samples to skip before measuring: `max(2 periods, 5 m n0 h)`.
pub fn transient_samples(h: f64, omega: f64, m: usize, n0: f64) -> usize {
    let period = std::f64::consts::TAU / omega;
    let t = (2.0 * period).max(5.0 * m as f64 * n0 * h);
    (t / h).ceil() as usize
}

/// Delay and amplitude ratio of `sig` against `reference` over samples
/// `start..`, both sampled at `h`, dominant angular frequency `omega`.
///
/// The delay is the cross-correlation peak over lags within half a period,
/// refined by a parabola through the three samples around it.
pub fn measure_phase_amplitude(
    reference: &[f64],
    sig: &[f64],
    h: f64,
    omega: f64,
    start: usize,
) -> Result<PhaseAmplitude, ExtractError> {
    if reference.len() != sig.len() {
        return Err(ExtractError::LengthMismatch(reference.len(), sig.len()));
    }
    if !(omega > 0.0) {
        return Err(ExtractError::Omega(omega));
    }
    let n = reference.len();
    let period = (std::f64::consts::TAU / omega / h).round() as usize;
    let half = (period / 2).max(1);
    let needed = 4 * period;
    let start = start.max(half);
    if n < needed || n < start + half + period {
        return Err(ExtractError::InsufficientData {
            needed: needed.max(start + half + period),
            got: n,
        });
    }
    let end = n - half;
    let corr = |tau: isize| -> f64 {
        (start..end)
            .map(|t| reference[t] * sig[(t as isize + tau) as usize])
            .sum()
    };
    let lags: Vec<isize> = (-(half as isize)..=half as isize).collect();
    let c: Vec<f64> = lags.iter().map(|&tau| corr(tau)).collect();
    let mut j = 0;
    for (idx, v) in c.iter().enumerate() {
        if *v > c[j] {
            j = idx;
        }
    }
    let mut delta = 0.0;
    if j > 0 && j + 1 < c.len() {
        let denom = c[j - 1] - 2.0 * c[j] + c[j + 1];
        if denom != 0.0 {
            delta = 0.5 * (c[j - 1] - c[j + 1]) / denom;
        }
    }
    let rms = |x: &[f64]| (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    Ok(PhaseAmplitude {
        delay_s: (lags[j] as f64 + delta) * h,
        ratio: rms(&sig[start..]) / rms(&reference[start..]),
    })
}
