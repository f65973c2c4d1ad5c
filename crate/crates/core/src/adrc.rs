//! Active disturbance rejection control built from tracking differentiators.
//!
//! The loop has three independent parts: a transition differentiator shaping
//! the set point into `v_1, v_2, ...`, an observer made of two `(m+2)`-order
//! differentiators (one on the measured output, one on the applied control
//! effort `xi = b u`) whose difference estimates the lumped disturbance, and a
//! tracking-form synthesis feedback on the first `m` observer levels.
//!
//! A linear third-order observer and the linear error feedback it is usually
//! paired with are included for comparison.

use thiserror::Error;

use crate::extract::{compensate_with_lead, DifferentiatorState, ExtractError, TdParams};
use crate::timeopt::fxiao_tracking;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdrcError {
    #[error("control gain b must be non-zero")]
    ZeroGain,
    #[error("plant order m = {0} must be at least 2")]
    Order(usize),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("feedback mode {0:?} needs v_2 but the transition has order {1}")]
    MissingDerivative(FeedbackMode, usize),
    #[error(transparent)]
    Extract(#[from] ExtractError),
}

/// How the disturbance estimate is formed from the two observer channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TdtMode {
    /// previous output-channel level minus current control-channel level
    Lagged,
    /// current output-channel level `y_{m+1}` minus `xi_1`
    #[default]
    Mixed,
    /// both channels extrapolated forward over their lag
    Predictive,
}

/// Which levels and target the feedback synthesis sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeedbackMode {
    /// raw observer levels, target `v_1`
    Plain,
    /// observer levels compensated for the observer lag, target `v_1`
    Compensated,
    /// compensated levels, target led by `m n3 h v_2`
    #[default]
    TargetLead,
    /// levels compensated for observer lag plus `m n3 h`, target `v_1`
    StateLead,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionParams {
    pub m1: usize,
    pub n1: f64,
    pub r1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsoParams {
    pub n2: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtrlParams {
    pub n3: f64,
    pub r3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdrcConfig {
    pub m: usize,
    pub b: f64,
    pub h: f64,
    pub transition: TransitionParams,
    pub eso: EsoParams,
    pub ctrl: CtrlParams,
    pub tdt_mode: TdtMode,
    pub fb_mode: FeedbackMode,
}

impl AdrcConfig {
    pub fn validate(&self) -> Result<(), AdrcError> {
        if self.m < 2 {
            return Err(AdrcError::Order(self.m));
        }
        if self.b == 0.0 {
            return Err(AdrcError::ZeroGain);
        }
        let positive = [
            ("h", self.h),
            ("n1", self.transition.n1),
            ("r1", self.transition.r1),
            ("n2", self.eso.n2),
            ("r2", self.eso.r2),
            ("n3", self.ctrl.n3),
            ("r3", self.ctrl.r3),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(AdrcError::NonPositive(name));
            }
        }
        if self.fb_mode == FeedbackMode::TargetLead && self.transition.m1 < 2 {
            return Err(AdrcError::MissingDerivative(
                self.fb_mode,
                self.transition.m1,
            ));
        }
        self.transition_params()?;
        self.eso_params()?;
        Ok(())
    }

    pub fn transition_params(&self) -> Result<TdParams, AdrcError> {
        let t = self.transition;
        Ok(TdParams::new(t.m1, t.r1, self.h, t.n1)?)
    }

    pub fn eso_params(&self) -> Result<TdParams, AdrcError> {
        Ok(TdParams::new(self.m + 2, self.eso.r2, self.h, self.eso.n2)?)
    }

    /// Observer lag `(m+2) n2 h` in seconds.
    pub fn eso_lead(&self) -> f64 {
        (self.m + 2) as f64 * self.eso.n2 * self.h
    }
}

/// One transition-arrangement step towards the set point `v`.
pub fn transition_step(tstate: &DifferentiatorState, v: f64) -> DifferentiatorState {
    tstate.td_step(v)
}

/// Output channel `y_1..y_{m+2}` and control channel `xi_1..xi_{m+2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EsoState {
    pub ychan: DifferentiatorState,
    pub xichan: DifferentiatorState,
    /// control effort from the previous step, not yet seen by `xichan`
    pub xi_lag: f64,
    /// output-channel levels one step back
    pub ychan_prev: Vec<f64>,
}

impl EsoState {
    pub fn new(params: TdParams) -> Self {
        Self {
            ychan: DifferentiatorState::new(params),
            xichan: DifferentiatorState::new(params),
            xi_lag: 0.0,
            ychan_prev: vec![0.0; params.order],
        }
    }

    pub fn from_config(cfg: &AdrcConfig) -> Result<Self, AdrcError> {
        Ok(Self::new(cfg.eso_params()?))
    }

    /// Advance the output channel on `chi` and the control channel on the
    /// stored effort, then store `xi_now` for the next step.
    pub fn eso_step(&self, chi: f64, xi_now: f64) -> Self {
        let mut next = self.clone();
        next.step_mut(chi, xi_now);
        next
    }

    pub fn step_mut(&mut self, chi: f64, xi_now: f64) {
        self.ychan_prev.clone_from(&self.ychan.levels);
        self.ychan.step_mut(chi);
        self.xichan.step_mut(self.xi_lag);
        self.xi_lag = xi_now;
    }

    pub fn order(&self) -> usize {
        self.ychan.params.order
    }
}

/// Disturbance estimate from the observer channels.
pub fn tdt_estimate(eso: &EsoState, mode: TdtMode) -> f64 {
    let order = eso.order();
    let m = order - 2;
    let y = &eso.ychan.levels;
    let xi = &eso.xichan.levels;
    match mode {
        TdtMode::Lagged => eso.ychan_prev[m] - xi[0],
        TdtMode::Mixed => y[m] - xi[0],
        TdtMode::Predictive => {
            let p = eso.ychan.params;
            let lead = order as f64 * p.n0 * p.h;
            let yp = &eso.ychan_prev;
            let y_hat = yp[m] + (lead + p.h) * yp[m + 1];
            let xi_hat = compensate_with_lead(xi, lead + p.h, 1)[0];
            y_hat - xi_hat
        }
    }
}

/// Normalised control `u0` from the observer and the transition levels.
pub fn feedback_u0(
    eso: &EsoState,
    transition: &DifferentiatorState,
    cfg: &AdrcConfig,
) -> Result<f64, AdrcError> {
    let m = cfg.m;
    let y = &eso.ychan.levels;
    let v = &transition.levels;
    let lead = cfg.eso_lead();
    let ctrl_lead = m as f64 * cfg.ctrl.n3 * cfg.h;
    let (levels, target) = match cfg.fb_mode {
        FeedbackMode::Plain => (y[..m].to_vec(), v[0]),
        FeedbackMode::Compensated => (compensate_with_lead(y, lead, m), v[0]),
        FeedbackMode::TargetLead => {
            if v.len() < 2 {
                return Err(AdrcError::MissingDerivative(cfg.fb_mode, v.len()));
            }
            (compensate_with_lead(y, lead, m), v[0] + ctrl_lead * v[1])
        }
        FeedbackMode::StateLead => (compensate_with_lead(y, lead + ctrl_lead, m), v[0]),
    };
    Ok(fxiao_tracking(
        &levels,
        target,
        cfg.ctrl.r3,
        cfg.h,
        cfg.ctrl.n3,
    ))
}

/// `(u0 - f_est) / b`.
pub fn actual_input(u0: f64, f_est: f64, b: f64) -> Result<f64, AdrcError> {
    if b == 0.0 {
        return Err(AdrcError::ZeroGain);
    }
    Ok((u0 - f_est) / b)
}

/// What one controller step produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub u: f64,
    pub u0: f64,
    pub f_est: f64,
}

/// Transition, observer and feedback wired together.
#[derive(Debug, Clone)]
pub struct AdrcLoop {
    pub cfg: AdrcConfig,
    pub transition: DifferentiatorState,
    pub eso: EsoState,
}

impl AdrcLoop {
    pub fn new(cfg: AdrcConfig) -> Result<Self, AdrcError> {
        cfg.validate()?;
        Ok(Self {
            transition: DifferentiatorState::new(cfg.transition_params()?),
            eso: EsoState::from_config(&cfg)?,
            cfg,
        })
    }

    /// One control period: shape `v`, estimate the disturbance, compute `u`,
    /// then feed `chi` and the effort `b u` to the observer.
    pub fn step(&mut self, v: f64, chi: f64) -> Result<ControlOutput, AdrcError> {
        self.transition.step_mut(v);
        let f_est = tdt_estimate(&self.eso, self.cfg.tdt_mode);
        let u0 = feedback_u0(&self.eso, &self.transition, &self.cfg)?;
        let u = actual_input(u0, f_est, self.cfg.b)?;
        self.eso.step_mut(chi, self.cfg.b * u);
        Ok(ControlOutput { u, u0, f_est })
    }
}

/// Gains placing the linear observer's three poles at `-1/(n2 h)`.
pub fn linear_eso_gains(n2: f64, h: f64) -> (f64, f64, f64) {
    let w = 1.0 / (n2 * h);
    (3.0 * w, 3.0 * w * w, w * w * w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearEsoState {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
    pub gains: (f64, f64, f64),
}

impl LinearEsoState {
    pub fn new(n2: f64, h: f64) -> Self {
        Self {
            y1: 0.0,
            y2: 0.0,
            y3: 0.0,
            gains: linear_eso_gains(n2, h),
        }
    }
}

/// Forward Euler step of the linear observer; `xi` is the control effort `b u`.
pub fn linear_eso_step(st: &LinearEsoState, chi: f64, xi: f64, h: f64) -> LinearEsoState {
    let (b1, b2, b3) = st.gains;
    let e = st.y1 - chi;
    LinearEsoState {
        y1: st.y1 + h * (st.y2 - b1 * e),
        y2: st.y2 + h * (st.y3 - b2 * e + xi),
        y3: st.y3 + h * (-b3 * e),
        gains: st.gains,
    }
}

/// Linear error feedback `(e1 + 2 n3 h e2) / (n3 h)^2`.
pub fn linear_error_feedback(e1: f64, e2: f64, n3: f64, h: f64) -> f64 {
    let t = n3 * h;
    (e1 + 2.0 * t * e2) / (t * t)
}

/// Second-order loop with a linear observer and linear error feedback.
#[derive(Debug, Clone)]
pub struct ClassicLoop {
    pub b: f64,
    pub h: f64,
    pub n3: f64,
    pub transition: DifferentiatorState,
    pub eso: LinearEsoState,
}

impl ClassicLoop {
    pub fn new(
        b: f64,
        h: f64,
        transition: TransitionParams,
        n2: f64,
        n3: f64,
    ) -> Result<Self, AdrcError> {
        if b == 0.0 {
            return Err(AdrcError::ZeroGain);
        }
        for (name, v) in [("h", h), ("n2", n2), ("n3", n3)] {
            if !(v > 0.0) {
                return Err(AdrcError::NonPositive(name));
            }
        }
        let tp = TdParams::new(2, transition.r1, h, transition.n1)?;
        Ok(Self {
            b,
            h,
            n3,
            transition: DifferentiatorState::new(tp),
            eso: LinearEsoState::new(n2, h),
        })
    }

    pub fn step(&mut self, v: f64, chi: f64) -> Result<ControlOutput, AdrcError> {
        self.transition.step_mut(v);
        let (v1, v2) = (self.transition.levels[0], self.transition.levels[1]);
        let u0 = linear_error_feedback(v1 - self.eso.y1, v2 - self.eso.y2, self.n3, self.h);
        let f_est = self.eso.y3;
        let u = actual_input(u0, f_est, self.b)?;
        self.eso = linear_eso_step(&self.eso, chi, self.b * u, self.h);
        Ok(ControlOutput { u, u0, f_est })
    }
}
