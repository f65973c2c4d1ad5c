use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use adrc_core::combin::{check_identity, Identity};
use adrc_core::geometry::{
    extremal_point, plane_residual, Branch, ExtremalPointSpec, PlaneFamily, PlaneSpec, PointKind,
    SystemParams,
};
use adrc_core::harness::{
    run_to_dir, scenario_metrics, scenarios, ConfigError, HarnessError, ScenarioConfig,
};

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "adrc-sim",
    version,
    about = "Scenario runner for time-optimal tracking and ADRC loops"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run scenario files or built-in scenarios (EX7-3, EX7-4, EX10-1, EX10-2, EX10-3)
    Simulate {
        #[arg(required = true)]
        configs: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// scenarios run concurrently
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Tracking differentiator on the noisy sinusoid
    Differentiate {
        #[arg(long)]
        order: usize,
        #[arg(long)]
        n0: f64,
        #[arg(long, default_value = "EX7-3")]
        scenario: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check every binomial identity instance up to the given bounds
    Identities {
        #[arg(long, default_value_t = 8)]
        max_m: i64,
        #[arg(long, default_value_t = 20)]
        max_k: i64,
    },
    /// Extremal points and hyperplane residuals as CSV on stdout
    Geometry {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: i64,
        #[arg(long, default_value_t = 0.5)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Simulate { configs, out, jobs } => simulate(&configs, &out, jobs),
        Cmd::Differentiate {
            order,
            n0,
            scenario,
            out,
        } => differentiate(order, n0, &scenario, &out),
        Cmd::Identities { max_m, max_k } => identities(max_m, max_k),
        Cmd::Geometry { m, k, h, r } => geometry(m, k, h, r),
    }
}

fn exit_code(e: &HarnessError) -> u8 {
    match e {
        HarnessError::Config(_) => EXIT_CONFIG,
        HarnessError::Divergence { .. } => EXIT_DIVERGENCE,
        _ => EXIT_OTHER,
    }
}

fn seed_override() -> Result<Option<u64>, ConfigError> {
    match std::env::var("ADRC_SEED") {
        Ok(s) => {
            s.trim().parse().map(Some).map_err(|_| {
                ConfigError::new("ADRC_SEED", format!("not an unsigned integer: `{s}`"))
            })
        }
        Err(_) => Ok(None),
    }
}

fn load(arg: &str) -> Result<ScenarioConfig, HarnessError> {
    let mut cfg = match scenarios::builtin(arg) {
        Some(c) => c,
        None => {
            let text = std::fs::read_to_string(arg).map_err(|source| HarnessError::Io {
                path: arg.into(),
                source,
            })?;
            ScenarioConfig::from_toml(&text)
                .map_err(|e| ConfigError::new(e.path.clone(), format!("{arg}: {}", e.message)))?
        }
    };
    if let Some(seed) = seed_override()? {
        cfg.noise.seed = Some(seed);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_one(arg: &str, out: &Path) -> Result<String, HarnessError> {
    let cfg = load(arg)?;
    let (csv, tr) = run_to_dir(&cfg, out)?;
    let m = scenario_metrics(&cfg, &tr)?;
    let mut line = format!("{}: {} samples -> {}", cfg.name, tr.len(), csv.display());
    for p in &m.pairs {
        write!(
            line,
            "\n  {} vs {}: rms {:.3e}, max {:.3e}",
            p.signal, p.reference, p.rms_error, p.final_band
        )
        .unwrap();
        if let (Some(d), Some(a)) = (p.phase_delay_s, p.amplitude_ratio) {
            write!(line, ", delay {d:.4e} s, amplitude {a:.4}").unwrap();
        }
    }
    Ok(line)
}

fn simulate(configs: &[String], out: &Path, jobs: usize) -> ExitCode {
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_OTHER);
        }
    };
    let results: Vec<_> =
        pool.install(|| configs.par_iter().map(|c| (c, run_one(c, out))).collect());
    let mut code = 0u8;
    for (arg, r) in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) => {
                eprintln!("error: {arg}: {e}");
                let c = exit_code(&e);
                // config errors dominate divergence, which dominates the rest
                let rank = |c: u8| match c {
                    EXIT_CONFIG => 3,
                    EXIT_DIVERGENCE => 2,
                    0 => 0,
                    _ => 1,
                };
                if rank(c) > rank(code) {
                    code = c;
                }
            }
        }
    }
    ExitCode::from(code)
}

fn differentiate(order: usize, n0: f64, scenario: &str, out: &Path) -> ExitCode {
    let base = match scenarios::builtin(scenario) {
        Some(c) if c.plant.is_none() => c,
        _ => {
            eprintln!("error: --scenario must be EX7-3 or EX7-4");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut cfg = scenarios::differentiator(order, n0, base.noise.g_sm);
    if let Err(e) = seed_override().map(|s| {
        if let Some(s) = s {
            cfg.noise.seed = Some(s)
        }
    }) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    cfg.name = format!("{}-order{order}", base.name);
    let result = cfg
        .validate()
        .map_err(HarnessError::from)
        .and_then(|_| run_to_dir(&cfg, out))
        .and_then(|(csv, tr)| Ok((csv, scenario_metrics(&cfg, &tr)?)));
    match result {
        Ok((csv, m)) => {
            println!("{}", csv.display());
            for p in m.pairs {
                println!(
                    "{} vs {}: delay {:.4e} s, amplitude {:.4}, rms {:.3e}",
                    p.signal,
                    p.reference,
                    p.phase_delay_s.unwrap_or(f64::NAN),
                    p.amplitude_ratio.unwrap_or(f64::NAN),
                    p.rms_error
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn identities(max_m: i64, max_k: i64) -> ExitCode {
    let mut table: BTreeMap<&'static str, (usize, usize)> = BTreeMap::new();
    let mut details = Vec::new();
    for id in Identity::enumerate(max_m, max_k) {
        let entry = table.entry(id.name()).or_default();
        entry.0 += 1;
        match check_identity(id) {
            Ok(c) if c.holds => {}
            Ok(c) => {
                entry.1 += 1;
                details.push(format!("{id:?}: lhs {} rhs {}", c.lhs, c.rhs));
            }
            Err(e) => {
                entry.1 += 1;
                details.push(format!("{id:?}: {e}"));
            }
        }
    }
    println!(
        "{:<24} {:>9} {:>7}  status",
        "identity", "instances", "failed"
    );
    let mut failed = false;
    for (name, (n, bad)) in &table {
        failed |= *bad > 0;
        println!(
            "{name:<24} {n:>9} {bad:>7}  {}",
            if *bad == 0 { "PASS" } else { "FAIL" }
        );
    }
    for d in details {
        eprintln!("{d}");
    }
    if failed {
        ExitCode::from(EXIT_OTHER)
    } else {
        ExitCode::SUCCESS
    }
}

fn geometry(m: usize, k_max: i64, h: f64, r: f64) -> ExitCode {
    let p = match SystemParams::new(m, h, r) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut header = String::from("point,k,s");
    for i in 1..=m {
        write!(header, ",x{i}").unwrap();
    }
    header.push_str(",res_n,res_nbar,res_m,res_mbar");
    println!("{header}");
    let fmt = |v: Result<f64, _>| v.map(|x: f64| format!("{x:e}")).unwrap_or_default();
    for (kind, kname) in [(PointKind::A, "a"), (PointKind::B, "b")] {
        for (branch, bname) in [(Branch::Plus, "+"), (Branch::Minus, "-")] {
            for k in 1..=k_max {
                let spec = ExtremalPointSpec::new(kind, branch, k);
                let Ok(pt) = extremal_point(&p, spec) else {
                    continue;
                };
                let mut line = format!("{kname}{bname},{k},{}", pt.s);
                for x in &pt.x {
                    write!(line, ",{x:e}").unwrap();
                }
                for family in [
                    PlaneFamily::N,
                    PlaneFamily::NBar,
                    PlaneFamily::M,
                    PlaneFamily::MBar,
                ] {
                    let plane = PlaneSpec { family, k, s: pt.s };
                    write!(line, ",{}", fmt(plane_residual(&p, &pt.x, plane))).unwrap();
                }
                println!("{line}");
            }
        }
    }
    ExitCode::SUCCESS
}
