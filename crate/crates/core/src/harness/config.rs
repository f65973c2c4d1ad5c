//! Scenario files. TOML, one table per block, unknown keys rejected.
//!
//! ```toml
//! schema_version = 1
//! name = "EX10-1"
//! h = 0.0005
//! steps = 12000
//!
//! [target]
//! kind = "constant"
//! value = 2.0
//!
//! [plant]
//! kind = "chain"
//! m = 3
//!
//! [disturbance]
//! kind = "sines"
//! amplitude = 20.0
//! omega = 6.28
//!
//! [noise]
//! g_sm = 0.01
//! seed = 1
//!
//! [controller]
//! kind = "adrc"
//! m1 = 5
//! n1 = 20.0
//! n2 = 30.0
//! n3 = 500.0
//! ```
//!
//! Bounds `r1`, `r2`, `r3` and `r` default to `inf` (linear synthesis).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adrc::{AdrcConfig, CtrlParams, EsoParams, FeedbackMode, TdtMode, TransitionParams};
use crate::plant::{DisturbanceKind, DisturbanceSpec, LorenzParams, DEFAULT_DBW};

pub const SCHEMA_VERSION: u32 = 1;

/// A config problem located by a dotted field path (empty for whole-file errors).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{message}", if path.is_empty() { String::new() } else { format!("{path}: ") })]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

fn inf() -> f64 {
    f64::INFINITY
}
fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn dbw() -> f64 {
    DEFAULT_DBW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub h: f64,
    pub steps: usize,
    /// fraction of the trace, counted from the end, used for metrics
    #[serde(default = "half")]
    pub window: f64,
    pub target: TargetConfig,
    #[serde(default)]
    pub plant: Option<PlantConfig>,
    #[serde(default)]
    pub disturbance: DisturbanceConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub controller: ControllerConfig,
    /// channels to export; empty means all
    #[serde(default)]
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetConfig {
    Constant { value: f64 },
    Sine { amplitude: f64, omega: f64 },
}

impl TargetConfig {
    pub fn amplitude(&self) -> f64 {
        match *self {
            TargetConfig::Constant { value } => value.abs(),
            TargetConfig::Sine { amplitude, .. } => amplitude,
        }
    }

    pub fn omega(&self) -> Option<f64> {
        match *self {
            TargetConfig::Constant { .. } => None,
            TargetConfig::Sine { omega, .. } => Some(omega),
        }
    }

    /// Value and the first `n` derivatives at time `t`.
    pub fn derivatives(&self, t: f64, n: usize) -> Vec<f64> {
        match *self {
            TargetConfig::Constant { value } => {
                let mut d = vec![0.0; n + 1];
                d[0] = value;
                d
            }
            TargetConfig::Sine { amplitude, omega } => (0..=n)
                .map(|i| {
                    amplitude
                        * omega.powi(i as i32)
                        * (omega * t + i as f64 * std::f64::consts::FRAC_PI_2).sin()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    Euler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantConfig {
    Chain {
        m: usize,
        #[serde(default = "one")]
        b: f64,
    },
    Lorenz {
        #[serde(default = "lorenz_sigma")]
        sigma: f64,
        #[serde(default = "lorenz_rho")]
        rho: f64,
        #[serde(default = "lorenz_b1")]
        b1: f64,
        #[serde(default = "lorenz_x0")]
        x0: [f64; 3],
        /// control gain seen by the controller; defaults to `sigma`
        #[serde(default)]
        b: Option<f64>,
        #[serde(default)]
        integrator: Integrator,
    },
}

fn lorenz_sigma() -> f64 {
    LorenzParams::default().sigma
}
fn lorenz_rho() -> f64 {
    LorenzParams::default().rho
}
fn lorenz_b1() -> f64 {
    LorenzParams::default().b1
}
fn lorenz_x0() -> [f64; 3] {
    LorenzParams::default().x0
}

impl PlantConfig {
    /// Relative order seen by the controller.
    pub fn order(&self) -> usize {
        match *self {
            PlantConfig::Chain { m, .. } => m,
            PlantConfig::Lorenz { .. } => 2,
        }
    }

    pub fn gain(&self) -> f64 {
        match *self {
            PlantConfig::Chain { b, .. } => b,
            PlantConfig::Lorenz { sigma, b, .. } => b.unwrap_or(sigma),
        }
    }

    pub fn state_dim(&self) -> usize {
        match *self {
            PlantConfig::Chain { m, .. } => m,
            PlantConfig::Lorenz { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceShape {
    #[default]
    None,
    Sines,
    Squares,
    Constant,
    Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceConfig {
    #[serde(default)]
    pub kind: DisturbanceShape,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub omega: f64,
    /// switch-on time for `step`
    #[serde(default)]
    pub step_time: f64,
}

impl Default for DisturbanceConfig {
    fn default() -> Self {
        Self {
            kind: DisturbanceShape::None,
            amplitude: 0.0,
            omega: 0.0,
            step_time: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// disturbance noise gain, or reference noise gain for a bare differentiator
    #[serde(default)]
    pub g_sm: f64,
    /// measurement noise gain; defaults to `g_sm`
    #[serde(default)]
    pub g_sm1: Option<f64>,
    /// amplitude scale of measurement and reference noise; defaults to the target amplitude
    #[serde(default)]
    pub vm: Option<f64>,
    #[serde(default = "dbw")]
    pub dbw: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            g_sm: 0.0,
            g_sm1: None,
            vm: None,
            dbw: DEFAULT_DBW,
            seed: None,
        }
    }
}

impl NoiseConfig {
    pub fn g_sm1(&self) -> f64 {
        self.g_sm1.unwrap_or(self.g_sm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TdtName {
    Lagged,
    #[default]
    Mixed,
    Predictive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackName {
    Plain,
    Compensated,
    #[default]
    TargetLead,
    StateLead,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerConfig {
    Adrc {
        m1: usize,
        n1: f64,
        #[serde(default = "inf")]
        r1: f64,
        n2: f64,
        #[serde(default = "inf")]
        r2: f64,
        n3: f64,
        #[serde(default = "inf")]
        r3: f64,
        #[serde(default)]
        tdt: TdtName,
        #[serde(default)]
        feedback: FeedbackName,
    },
    /// second-order loop with linear observer and linear error feedback
    Classic {
        n1: f64,
        #[serde(default = "inf")]
        r1: f64,
        n2: f64,
        n3: f64,
    },
    /// no plant: a tracking differentiator on the noisy target
    Differentiator {
        order: usize,
        n0: f64,
        #[serde(default = "inf")]
        r: f64,
    },
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let de =
            toml::Deserializer::parse(text).map_err(|e| ConfigError::new("", e.to_string()))?;
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { String::new() } else { path };
            ConfigError::new(path, e.into_inner().message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn seed(&self) -> u64 {
        self.noise.seed.unwrap_or(0)
    }

    pub fn noise_vm(&self) -> f64 {
        self.noise.vm.unwrap_or(self.target.amplitude())
    }

    pub fn noisy(&self) -> bool {
        self.noise.g_sm > 0.0 || self.noise.g_sm1() > 0.0
    }

    pub fn disturbance_spec(&self) -> DisturbanceSpec {
        let d = self.disturbance;
        let kind = match d.kind {
            DisturbanceShape::None => DisturbanceKind::None,
            DisturbanceShape::Sines => DisturbanceKind::Sines,
            DisturbanceShape::Squares => DisturbanceKind::Squares,
            DisturbanceShape::Constant => DisturbanceKind::Constant,
            DisturbanceShape::Step => DisturbanceKind::Step { at: d.step_time },
        };
        DisturbanceSpec {
            kind,
            amplitude: d.amplitude,
            omega: d.omega,
            noise_gain: self.noise.g_sm,
            noise_dbw: self.noise.dbw,
        }
    }

    /// Controller parameters for the ADRC loop, if that is the configured mode.
    pub fn adrc_config(&self) -> Option<AdrcConfig> {
        let plant = self.plant?;
        match self.controller {
            ControllerConfig::Adrc {
                m1,
                n1,
                r1,
                n2,
                r2,
                n3,
                r3,
                tdt,
                feedback,
            } => Some(AdrcConfig {
                m: plant.order(),
                b: plant.gain(),
                h: self.h,
                transition: TransitionParams { m1, n1, r1 },
                eso: EsoParams { n2, r2 },
                ctrl: CtrlParams { n3, r3 },
                tdt_mode: match tdt {
                    TdtName::Lagged => TdtMode::Lagged,
                    TdtName::Mixed => TdtMode::Mixed,
                    TdtName::Predictive => TdtMode::Predictive,
                },
                fb_mode: match feedback {
                    FeedbackName::Plain => FeedbackMode::Plain,
                    FeedbackName::Compensated => FeedbackMode::Compensated,
                    FeedbackName::TargetLead => FeedbackMode::TargetLead,
                    FeedbackName::StateLead => FeedbackMode::StateLead,
                },
            }),
            _ => None,
        }
    }

    /// Names of the channels a run of this config produces, in order.
    pub fn channel_names(&self) -> Vec<String> {
        let mut names: Vec<String> = vec!["v".into(), "v1".into(), "v2".into()];
        match (self.controller, self.plant) {
            (ControllerConfig::Differentiator { order, .. }, _) => {
                for i in 3..=order.saturating_sub(1) {
                    names.push(format!("v{i}"));
                }
                names.extend((1..=order).map(|i| format!("x{i}")));
                names.extend((1..order).map(|i| format!("xiu{i}")));
            }
            (ControllerConfig::Adrc { .. }, Some(plant)) => {
                let m = plant.order();
                names.push("chi".into());
                names.extend((1..=plant.state_dim()).map(|i| format!("x{i}")));
                names.extend((1..=m + 2).map(|i| format!("y{i}")));
                names.extend((1..=m + 2).map(|i| format!("xi{i}")));
                names.extend(["f0", "f1", "u0", "u"].map(String::from));
            }
            (ControllerConfig::Classic { .. }, Some(plant)) => {
                names.push("chi".into());
                names.extend((1..=plant.state_dim()).map(|i| format!("x{i}")));
                names.extend(["y1", "y2", "y3", "f0", "f1", "u0", "u"].map(String::from));
            }
            _ => {}
        }
        names
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |p: &str, m: &str| Err(ConfigError::new(p, m));
        if self.schema_version != SCHEMA_VERSION {
            return err(
                "schema_version",
                &format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            );
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return err("h", "must be positive and finite");
        }
        if self.steps < 1 {
            return err("steps", "must be at least 1");
        }
        if !(self.window > 0.0 && self.window <= 1.0) {
            return err("window", "must lie in (0, 1]");
        }
        match self.target {
            TargetConfig::Constant { value } if !value.is_finite() => {
                return err("target.value", "must be finite")
            }
            TargetConfig::Sine { amplitude, omega } => {
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    return err("target.amplitude", "must be non-negative and finite");
                }
                if !(omega > 0.0 && omega.is_finite()) {
                    return err("target.omega", "must be positive and finite");
                }
            }
            _ => {}
        }
        let n = self.noise;
        if !(n.g_sm >= 0.0) {
            return err("noise.g_sm", "must be non-negative");
        }
        if !(n.g_sm1() >= 0.0) {
            return err("noise.g_sm1", "must be non-negative");
        }
        if self.noisy() && n.seed.is_none() {
            return err("noise.seed", "required when a noise gain is positive");
        }
        if !(self.disturbance.amplitude >= 0.0) {
            return err("disturbance.amplitude", "must be non-negative");
        }
        let pos = |path: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::new(path, "must be positive"))
            }
        };
        let at_least_one = |path: &str, v: f64| {
            if v >= 1.0 {
                Ok(())
            } else {
                Err(ConfigError::new(path, "filter factor must be >= 1"))
            }
        };
        match self.controller {
            ControllerConfig::Differentiator { order, n0, r } => {
                if order < 2 {
                    return err("controller.order", "must be at least 2");
                }
                at_least_one("controller.n0", n0)?;
                pos("controller.r", r)?;
                if self.plant.is_some() {
                    return err("plant", "a bare differentiator takes no plant");
                }
            }
            ControllerConfig::Adrc {
                m1,
                n1,
                r1,
                n2,
                r2,
                n3,
                r3,
                ..
            } => {
                if m1 < 2 {
                    return err("controller.m1", "must be at least 2");
                }
                at_least_one("controller.n1", n1)?;
                pos("controller.r1", r1)?;
                at_least_one("controller.n2", n2)?;
                pos("controller.r2", r2)?;
                at_least_one("controller.n3", n3)?;
                pos("controller.r3", r3)?;
                self.validate_plant()?;
            }
            ControllerConfig::Classic { n1, r1, n2, n3 } => {
                at_least_one("controller.n1", n1)?;
                pos("controller.r1", r1)?;
                pos("controller.n2", n2)?;
                pos("controller.n3", n3)?;
                self.validate_plant()?;
                if self.plant.map(|p| p.order()) != Some(2) {
                    return err("plant", "the classic loop needs a second-order plant");
                }
            }
        }
        let names = self.channel_names();
        for (i, o) in self.outputs.iter().enumerate() {
            if o != "t" && !names.contains(o) {
                return err(&format!("outputs[{i}]"), &format!("unknown channel `{o}`"));
            }
        }
        Ok(())
    }

    fn validate_plant(&self) -> Result<(), ConfigError> {
        match self.plant {
            None => Err(ConfigError::new("plant", "required for a closed loop")),
            Some(PlantConfig::Chain { m, b }) => {
                if m < 2 {
                    return Err(ConfigError::new("plant.m", "must be at least 2"));
                }
                if b == 0.0 || !b.is_finite() {
                    return Err(ConfigError::new("plant.b", "must be finite and non-zero"));
                }
                Ok(())
            }
            Some(p @ PlantConfig::Lorenz { .. }) => {
                let b = p.gain();
                if b == 0.0 || !b.is_finite() {
                    return Err(ConfigError::new("plant.b", "must be finite and non-zero"));
                }
                Ok(())
            }
        }
    }
}
