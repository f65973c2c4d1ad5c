//! Built-in scenarios, addressable by name from the CLI.

use super::config::{
    ControllerConfig, DisturbanceConfig, DisturbanceShape, FeedbackName, Integrator, NoiseConfig,
    PlantConfig, ScenarioConfig, TargetConfig, TdtName, SCHEMA_VERSION,
};
use crate::plant::{LorenzParams, DEFAULT_DBW};

pub const NAMES: [&str; 5] = ["EX7-3", "EX7-4", "EX10-1", "EX10-2", "EX10-3"];

const OMEGA: f64 = 6.28;
const VM: f64 = 2.0;

fn noise(g: f64, seed: u64) -> NoiseConfig {
    NoiseConfig {
        g_sm: g,
        g_sm1: Some(g),
        vm: Some(VM),
        dbw: DEFAULT_DBW,
        seed: Some(seed),
    }
}

/// Tracking differentiator of order `m` on a noisy sinusoid.
pub fn differentiator(m: usize, n0: f64, g_sm: f64) -> ScenarioConfig {
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: format!("EX7-{m}"),
        h: 5e-4,
        steps: 12_000,
        window: 0.5,
        target: TargetConfig::Sine {
            amplitude: VM,
            omega: OMEGA,
        },
        plant: None,
        disturbance: DisturbanceConfig::default(),
        noise: NoiseConfig {
            g_sm1: Some(0.0),
            ..noise(g_sm, 1)
        },
        controller: ControllerConfig::Differentiator {
            order: m,
            n0,
            r: f64::INFINITY,
        },
        outputs: Vec::new(),
    }
}

/// Third-order chain under the full loop with lumped disturbance `shape`.
pub fn chain_adrc(shape: DisturbanceShape, g: f64) -> ScenarioConfig {
    let name = match shape {
        DisturbanceShape::Squares => "EX10-2",
        _ => "EX10-1",
    };
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: name.into(),
        h: 5e-4,
        steps: 12_000,
        window: 0.5,
        target: TargetConfig::Constant { value: VM },
        plant: Some(PlantConfig::Chain { m: 3, b: 1.0 }),
        disturbance: DisturbanceConfig {
            kind: shape,
            amplitude: 20.0,
            omega: OMEGA,
            step_time: 0.0,
        },
        noise: noise(g, 1),
        controller: ControllerConfig::Adrc {
            m1: 5,
            n1: 20.0,
            r1: f64::INFINITY,
            n2: 30.0,
            r2: f64::INFINITY,
            n3: 500.0,
            r3: f64::INFINITY,
            tdt: TdtName::Mixed,
            feedback: FeedbackName::TargetLead,
        },
        outputs: Vec::new(),
    }
}

/// Lorenz system taken as a second-order plant with gain `sigma`.
pub fn lorenz(g: f64) -> ScenarioConfig {
    let p = LorenzParams::default();
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: "EX10-3".into(),
        h: 1e-4,
        steps: 50_000,
        window: 0.2,
        target: TargetConfig::Constant { value: VM },
        plant: Some(PlantConfig::Lorenz {
            sigma: p.sigma,
            rho: p.rho,
            b1: p.b1,
            x0: p.x0,
            b: Some(p.sigma),
            integrator: Integrator::Euler,
        }),
        disturbance: DisturbanceConfig::default(),
        noise: noise(g, 1),
        controller: ControllerConfig::Adrc {
            m1: 4,
            n1: 200.0,
            r1: f64::INFINITY,
            n2: 20.0,
            r2: f64::INFINITY,
            n3: 200.0,
            r3: f64::INFINITY,
            tdt: TdtName::Mixed,
            feedback: FeedbackName::TargetLead,
        },
        outputs: Vec::new(),
    }
}

/// Look a built-in up by name, case-insensitively.
pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    match name.to_ascii_uppercase().as_str() {
        "EX7-3" => Some(differentiator(3, 10.0, 0.001)),
        "EX7-4" => Some(differentiator(4, 10.0, 0.001)),
        "EX10-1" => Some(chain_adrc(DisturbanceShape::Sines, 0.01)),
        "EX10-2" => Some(chain_adrc(DisturbanceShape::Squares, 0.01)),
        "EX10-3" => Some(lorenz(0.01)),
        _ => None,
    }
}
