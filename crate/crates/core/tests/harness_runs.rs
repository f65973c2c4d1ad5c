use std::thread;

use adrc_core::harness::{run_scenario, run_to_dir, scenarios, ScenarioConfig, Trace};
use adrc_core::plant::{streams, NoiseStream};

fn short(name: &str) -> ScenarioConfig {
    let mut c = scenarios::builtin(name).unwrap();
    c.steps = 2_000;
    c
}

#[test]
fn same_config_same_csv_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short("EX10-2");
    let (a, _) = run_to_dir(&cfg, &dir.path().join("a")).unwrap();
    let (b, _) = run_to_dir(&cfg, &dir.path().join("b")).unwrap();
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn csv_round_trip_preserves_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short("EX7-3");
    let (csv, tr) = run_to_dir(&cfg, dir.path()).unwrap();
    assert_eq!(Trace::import_csv(&csv, cfg.h).unwrap(), tr);
    assert!(csv.with_extension("plot.py").exists());
}

#[test]
fn parallel_runs_match_sequential() {
    let seq: Vec<Trace> = scenarios::NAMES
        .iter()
        .map(|n| run_scenario(&short(n)).unwrap())
        .collect();
    let par: Vec<Trace> = thread::scope(|s| {
        let hs: Vec<_> = scenarios::NAMES
            .iter()
            .map(|n| s.spawn(move || run_scenario(&short(n)).unwrap()))
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(seq, par);
}

#[test]
fn output_selection_limits_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short("EX10-1");
    cfg.outputs = vec!["x1".into(), "u".into()];
    let (csv, _) = run_to_dir(&cfg, dir.path()).unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,x1,u");
    assert_eq!(text.lines().count(), cfg.steps + 2);
}

#[test]
fn noise_streams_are_uncorrelated() {
    let n = 100_000;
    let ids = [
        streams::REFERENCE,
        streams::MEASUREMENT,
        streams::DISTURBANCE,
    ];
    let draws: Vec<Vec<f64>> = ids
        .iter()
        .map(|id| {
            let mut s = NoiseStream::new(7, *id);
            (0..n).map(|_| s.wgn(0.0)).collect()
        })
        .collect();
    for i in 0..3 {
        for j in i + 1..3 {
            let c: f64 = draws[i]
                .iter()
                .zip(&draws[j])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64;
            assert!(c.abs() < 0.02, "streams {i},{j}: {c}");
        }
    }
}

#[test]
fn builtin_files_parse_back() {
    for n in scenarios::NAMES {
        let c = scenarios::builtin(n).unwrap();
        assert_eq!(ScenarioConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
