use std::path::{Path, PathBuf};

use super::config::{ControllerConfig, Integrator, PlantConfig, ScenarioConfig};
use super::metrics::{self, Metrics};
use super::trace::Trace;
use super::HarnessError;
use crate::adrc::{AdrcLoop, ClassicLoop, ControlOutput, TransitionParams};
use crate::extract::{compensate_levels, CompensationSpec, DifferentiatorState, TdParams};
use crate::plant::{
    chain_step_with, disturbance, lorenz_step, lorenz_step_rk4, measure_output, streams,
    LorenzParams, NoiseStream, PlantError,
};

/// Simulate `cfg` and return every channel, `steps + 1` samples starting at `t = 0`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Trace, HarnessError> {
    cfg.validate()?;
    match cfg.controller {
        ControllerConfig::Differentiator { order, n0, r } => run_differentiator(cfg, order, n0, r),
        _ => run_loop(cfg),
    }
}

fn run_differentiator(
    cfg: &ScenarioConfig,
    order: usize,
    n0: f64,
    r: f64,
) -> Result<Trace, HarnessError> {
    let h = cfg.h;
    let params = TdParams::new(order, r, h, n0).map_err(|e| HarnessError::Setup(e.to_string()))?;
    let comp = CompensationSpec {
        order,
        n0,
        h,
        lead_extra: 0.0,
    };
    let mut td = DifferentiatorState::new(params);
    let mut ns = NoiseStream::new(cfg.seed(), streams::REFERENCE);
    let (vm, g) = (cfg.noise_vm(), cfg.noise.g_sm);
    let nder = (order - 1).max(2);
    let mut tr = Trace::with_capacity(h, cfg.channel_names(), cfg.steps + 1);
    let mut row = Vec::new();
    for k in 0..=cfg.steps {
        let t = k as f64 * h;
        let d = cfg.target.derivatives(t, nder);
        let v = d[0] + vm * g * ns.wgn(cfg.noise.dbw);
        let xiu =
            compensate_levels(&td.levels, &comp).map_err(|e| HarnessError::Setup(e.to_string()))?;
        row.clear();
        row.push(v);
        row.extend_from_slice(&d[..nder]);
        row.extend_from_slice(&td.levels);
        row.extend_from_slice(&xiu);
        tr.push(&row);
        if let Some(bad) = row.iter().find(|x| !x.is_finite()) {
            return Err(HarnessError::Divergence {
                step: k,
                message: format!("non-finite level {bad}"),
            });
        }
        if k < cfg.steps {
            td.step_mut(v);
        }
    }
    Ok(tr)
}

enum Plant {
    Chain {
        x: Vec<f64>,
        b: f64,
    },
    Lorenz {
        x: [f64; 3],
        p: LorenzParams,
        rk4: bool,
    },
}

impl Plant {
    fn new(cfg: PlantConfig) -> Self {
        match cfg {
            PlantConfig::Chain { m, b } => Plant::Chain { x: vec![0.0; m], b },
            PlantConfig::Lorenz {
                sigma,
                rho,
                b1,
                x0,
                integrator,
                ..
            } => Plant::Lorenz {
                x: x0,
                p: LorenzParams { sigma, rho, b1, x0 },
                rk4: integrator == Integrator::Rk4,
            },
        }
    }

    fn state(&self) -> &[f64] {
        match self {
            Plant::Chain { x, .. } => x,
            Plant::Lorenz { x, .. } => x,
        }
    }

    fn step(&mut self, u: f64, f: f64, h: f64) -> Result<(), PlantError> {
        match self {
            Plant::Chain { x, b } => *x = chain_step_with(x, u, f, *b, h)?,
            Plant::Lorenz { x, p, rk4 } => {
                *x = if *rk4 {
                    lorenz_step_rk4(x, u, p, h)?
                } else {
                    lorenz_step(x, u, p, h)?
                }
            }
        }
        Ok(())
    }
}

enum Controller {
    Adrc(Box<AdrcLoop>),
    Classic(Box<ClassicLoop>),
}

impl Controller {
    fn observer(&self, out: &mut Vec<f64>) {
        match self {
            Controller::Adrc(l) => {
                out.extend_from_slice(&l.eso.ychan.levels);
                out.extend_from_slice(&l.eso.xichan.levels);
            }
            Controller::Classic(l) => out.extend([l.eso.y1, l.eso.y2, l.eso.y3]),
        }
    }

    fn transition(&self) -> (f64, f64) {
        let lv = match self {
            Controller::Adrc(l) => &l.transition.levels,
            Controller::Classic(l) => &l.transition.levels,
        };
        (lv[0], lv[1])
    }

    fn step(&mut self, v: f64, chi: f64) -> Result<ControlOutput, HarnessError> {
        let r = match self {
            Controller::Adrc(l) => l.step(v, chi),
            Controller::Classic(l) => l.step(v, chi),
        };
        r.map_err(|e| HarnessError::Setup(e.to_string()))
    }
}

fn run_loop(cfg: &ScenarioConfig) -> Result<Trace, HarnessError> {
    let h = cfg.h;
    let plant_cfg = cfg.plant.expect("validated");
    let setup = |e: crate::adrc::AdrcError| HarnessError::Setup(e.to_string());
    let mut ctrl = match cfg.controller {
        ControllerConfig::Classic { n1, r1, n2, n3 } => Controller::Classic(Box::new(
            ClassicLoop::new(
                plant_cfg.gain(),
                h,
                TransitionParams { m1: 2, n1, r1 },
                n2,
                n3,
            )
            .map_err(setup)?,
        )),
        _ => Controller::Adrc(Box::new(
            AdrcLoop::new(cfg.adrc_config().expect("validated")).map_err(setup)?,
        )),
    };
    let mut plant = Plant::new(plant_cfg);
    let spec = cfg.disturbance_spec();
    let mut meas = NoiseStream::new(cfg.seed(), streams::MEASUREMENT);
    let mut dist = NoiseStream::new(cfg.seed(), streams::DISTURBANCE);
    let (vm, g1) = (cfg.noise_vm(), cfg.noise.g_sm1());
    let mut tr = Trace::with_capacity(h, cfg.channel_names(), cfg.steps + 1);
    let mut row = Vec::new();
    for k in 0..=cfg.steps {
        let t = k as f64 * h;
        let v = cfg.target.derivatives(t, 0)[0];
        let chi = measure_output(plant.state()[0], vm, g1, &mut meas);
        let f = disturbance(&spec, t, &mut dist);
        row.clear();
        let mut obs = Vec::new();
        ctrl.observer(&mut obs);
        let out = ctrl.step(v, chi)?;
        let (v1, v2) = ctrl.transition();
        row.extend([v, v1, v2, chi]);
        row.extend_from_slice(plant.state());
        row.extend_from_slice(&obs);
        row.extend([out.f_est, spec.clean(t), out.u0, out.u]);
        tr.push(&row);
        if !out.u.is_finite() {
            return Err(HarnessError::Divergence {
                step: k,
                message: format!("control input became {}", out.u),
            });
        }
        if k < cfg.steps {
            plant
                .step(out.u, f, h)
                .map_err(|e| HarnessError::Divergence {
                    step: k + 1,
                    message: e.to_string(),
                })?;
        }
    }
    Ok(tr)
}

/// Signal pairs summarised for each controller kind.
pub fn default_pairs(cfg: &ScenarioConfig) -> Vec<(String, String)> {
    let p = |a: &str, b: &str| (a.to_string(), b.to_string());
    match cfg.controller {
        ControllerConfig::Differentiator { .. } => {
            vec![p("v1", "x1"), p("v1", "xiu1"), p("v2", "x2")]
        }
        _ => vec![p("v", "x1"), p("f1", "f0")],
    }
}

/// Metrics over the trailing window for [`default_pairs`].
pub fn scenario_metrics(cfg: &ScenarioConfig, tr: &Trace) -> Result<Metrics, HarnessError> {
    let pairs = default_pairs(cfg);
    let pairs: Vec<(&str, &str)> = pairs
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let start = metrics::window_start(tr.len(), cfg.window);
    let omega = match cfg.controller {
        ControllerConfig::Differentiator { .. } => cfg.target.omega(),
        _ => None,
    };
    Ok(metrics::summarize(tr, &pairs, omega, start)?)
}

/// Run and write `<out>/<name>.csv` plus its plot script. Returns the CSV path.
pub fn run_to_dir(cfg: &ScenarioConfig, out: &Path) -> Result<(PathBuf, Trace), HarnessError> {
    let tr = run_scenario(cfg)?;
    let exported = if cfg.outputs.is_empty() {
        tr.clone()
    } else {
        tr.select(&cfg.outputs)?
    };
    std::fs::create_dir_all(out).map_err(|source| HarnessError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let csv = out.join(format!("{}.csv", cfg.name));
    exported.export_csv(&csv)?;
    exported.export_plot_script(&csv)?;
    Ok((csv, tr))
}
