#![allow(dead_code)]

use adrc_core::extract::{measure_phase_amplitude, transient_samples, PhaseAmplitude};
use adrc_core::geometry::{propagate, SystemParams};
use adrc_core::harness::{run_scenario, scenarios, Trace};
use adrc_core::timeopt::fxiao;

pub const H: f64 = 5e-4;
#[allow(clippy::approx_constant)]
pub const OMEGA: f64 = 6.28;

/// Drive `x0` with `u = fxiao(x)` for up to `max_steps`. Returns the states
/// visited (starting with `x0`) and the controls applied.
pub fn fxiao_closed_loop(
    p: &SystemParams,
    x0: &[f64],
    max_steps: usize,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut states = vec![x0.to_vec()];
    let mut controls = Vec::new();
    for _ in 0..max_steps {
        let x = states.last().unwrap();
        let u = fxiao(x, p.r, p.h);
        let next = propagate(p, x, u).expect("control within bound");
        controls.push(u);
        states.push(next);
    }
    (states, controls)
}

pub fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// A differentiator run on the sinusoid, long enough for the correlation
/// window at every filter factor used in the tests.
pub struct DiffRun {
    pub order: usize,
    pub n0: f64,
    pub trace: Trace,
    pub start: usize,
}

pub fn differentiator_run(order: usize, n0: f64, g_sm: f64) -> DiffRun {
    let mut cfg = scenarios::differentiator(order, n0, g_sm);
    cfg.steps = 20_000;
    let trace = run_scenario(&cfg).expect("differentiator run");
    DiffRun {
        order,
        n0,
        start: transient_samples(H, OMEGA, order, n0),
        trace,
    }
}

impl DiffRun {
    pub fn ch(&self, name: &str) -> &[f64] {
        self.trace
            .channel(name)
            .unwrap_or_else(|| panic!("no channel {name}"))
    }

    pub fn phase(&self, reference: &str, sig: &str) -> PhaseAmplitude {
        measure_phase_amplitude(self.ch(reference), self.ch(sig), H, OMEGA, self.start).unwrap()
    }

    /// RMS of `sig - reference` after the transient.
    pub fn rms_error(&self, reference: &str, sig: &str) -> f64 {
        let r = &self.ch(reference)[self.start..];
        let s = &self.ch(sig)[self.start..];
        adrc_core::harness::metrics::rms_diff(s, r)
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
}

/// Print a criterion verdict line and hand the verdict back.
pub fn verdict(n: usize, name: &str, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {n:>2} {:<4} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}
