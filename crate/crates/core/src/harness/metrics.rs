use crate::extract::{measure_phase_amplitude, ExtractError};

use super::trace::{Trace, TraceError};

/// Comparison of one channel against a reference over the steady-state window.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMetrics {
    pub reference: String,
    pub signal: String,
    /// only for periodic references
    pub phase_delay_s: Option<f64>,
    pub amplitude_ratio: Option<f64>,
    pub rms_error: f64,
    /// first time after which `|sig - ref|` stays inside 2% of `max |ref|`
    pub settling_time_s: Option<f64>,
    /// `max |sig - ref|` over the window
    pub final_band: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub window_start: usize,
    pub pairs: Vec<PairMetrics>,
}

/// First sample of the final `fraction` of a trace of length `n`.
pub fn window_start(n: usize, fraction: f64) -> usize {
    let keep = ((n as f64) * fraction).round() as usize;
    n - keep.min(n)
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn rms_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
}

/// Metrics per `(reference, signal)` pair. `omega` enables the delay and
/// amplitude measurement; `start` is the first sample of the window.
pub fn summarize(
    tr: &Trace,
    pairs: &[(&str, &str)],
    omega: Option<f64>,
    start: usize,
) -> Result<Metrics, MetricsError> {
    let mut out = Vec::new();
    for (r, s) in pairs {
        let rv = tr.require(r)?;
        let sv = tr.require(s)?;
        let (phase, ratio) = match omega {
            Some(w) => {
                let pa = measure_phase_amplitude(rv, sv, tr.h, w, start)?;
                (Some(pa.delay_s), Some(pa.ratio))
            }
            None => (None, None),
        };
        let band = 0.02 * rv.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut settle = None;
        for i in (0..rv.len()).rev() {
            if (sv[i] - rv[i]).abs() > band {
                break;
            }
            settle = Some(tr.t[i]);
        }
        let err: Vec<f64> = rv[start..]
            .iter()
            .zip(&sv[start..])
            .map(|(a, b)| (b - a).abs())
            .collect();
        out.push(PairMetrics {
            reference: r.to_string(),
            signal: s.to_string(),
            phase_delay_s: phase,
            amplitude_ratio: ratio,
            rms_error: rms(&err),
            settling_time_s: settle,
            final_band: err.iter().fold(0.0f64, |m, v| m.max(*v)),
        });
    }
    Ok(Metrics {
        window_start: start,
        pairs: out,
    })
}
