use std::process::Command;

use wavelet_eigen::harness::{
    aggregate_point, run_experiment, run_point, synthesize_point, Coordinates, EstimatorSettings, ExperimentConfig,
    ModelSpec, ReplicationRecord, SchedulePoint,
};
use wavelet_eigen::synth::{NoiseSpec, SignalKind};
use wavelet_eigen::{io, multi_scale_spectrum, daubechies_filters, Error};

fn base_config() -> ExperimentConfig {
    ExperimentConfig {
        model: ModelSpec {
            h: vec![0.35, 0.75],
            p_h: None,
            signal: SignalKind::Ofbm,
            noise: NoiseSpec::IidGaussian { scale: 1.0 },
            coordinates: Coordinates::RandomPerReplication,
        },
        schedule: vec![SchedulePoint { n: 1 << 12, p: 8, j1: 2, j2: 7, scale_log2: 0, target_c: None }],
        replications: 6,
        seed: 99,
        filter_order: 2,
        estimator: EstimatorSettings::default(),
        coverage_tol: 0.1,
    }
}

#[test]
fn embedded_signal_matches_univariate_run() {
    let mut cfg = base_config();
    cfg.model.h = vec![0.6];
    cfg.model.noise = NoiseSpec::None;
    cfg.model.coordinates = Coordinates::Canonical;
    cfg.estimator.rank = Some(1);
    cfg.schedule[0].p = 4;
    let embedded = run_point(&cfg, 0, 2).unwrap();
    cfg.schedule[0].p = 1;
    let direct = run_point(&cfg, 0, 2).unwrap();
    let (a, b) = (embedded.h_hat.unwrap()[0], direct.h_hat.unwrap()[0]);
    assert!((a - b).abs() < 1e-10, "{a} vs {b}");
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = base_config();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_experiment(&cfg).unwrap())
    };
    assert_eq!(run(1).records, run(3).records);
}

#[test]
fn disjoint_seeds_agree_within_monte_carlo_error() {
    let mut cfg = base_config();
    cfg.replications = 30;
    let a = run_experiment(&cfg).unwrap();
    cfg.seed = 12345;
    let b = run_experiment(&cfg).unwrap();
    for q in 0..2 {
        let (x, y) = (&a.aggregates[0].h_hat[q], &b.aggregates[0].h_hat[q]);
        let se = (x.se.unwrap().powi(2) + y.se.unwrap().powi(2)).sqrt();
        assert!((x.mean - y.mean).abs() <= 3.0 * se, "q = {q}: {} vs {} (se {se})", x.mean, y.mean);
    }
}

#[test]
fn aggregates_survive_jsonl_round_trip() {
    let cfg = base_config();
    let res = run_experiment(&cfg).unwrap();
    let text: String = res.records.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect();
    let back: Vec<ReplicationRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(aggregate_point(&cfg, 0, &back), res.aggregates[0]);
}

#[test]
fn degenerate_replications_are_recorded_not_fatal() {
    let mut cfg = base_config();
    cfg.model.noise = NoiseSpec::None;
    cfg.model.coordinates = Coordinates::Canonical;
    cfg.estimator.rank = Some(3);
    let res = run_experiment(&cfg).unwrap();
    assert_eq!(res.failures(), cfg.replications);
    assert!(!res.aggregates[0].complete);
    assert!(res.records[0].error.as_ref().unwrap().contains("point 0, replication 0"));
}

#[test]
fn validation_errors() {
    let mut cfg = base_config();
    cfg.schedule[0].p = 1;
    assert!(matches!(cfg.validate(), Err(Error::Dimension(_))));
    let mut cfg = base_config();
    cfg.replications = 0;
    assert!(cfg.validate().is_err());
    let mut cfg = base_config();
    cfg.model.h = vec![0.75, 0.35];
    assert!(cfg.validate().is_err());
    let mut cfg = base_config();
    cfg.estimator.weights = Some(vec![1.0, -1.0]);
    assert!(cfg.validate().is_err());
}

#[test]
fn synthesized_series_round_trips_through_csv() {
    let cfg = base_config();
    let y = synthesize_point(&cfg, 0, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("y.csv");
    io::write_series_csv(&path, &y).unwrap();
    assert_eq!(io::read_series_csv(&path).unwrap(), y);

    let f = daubechies_filters(2).unwrap();
    let spectra = multi_scale_spectrum(&y, 2, 7, &f).unwrap();
    let sp = dir.path().join("s.jsonl");
    io::write_spectra_jsonl(&sp, &spectra).unwrap();
    let back = io::read_spectra_jsonl(&sp).unwrap();
    for (a, b) in spectra.iter().zip(&back) {
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!((a.octave, a.n_j), (b.octave, b.n_j));
    }
}

fn schema() -> serde_json::Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/experiment-config.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn schema_covers_config_fields() {
    let schema = schema();
    let mut cfg = base_config();
    cfg.model.p_h = Some(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    cfg.estimator.weights = Some(vec![0.0; 6]);
    cfg.estimator.rank = Some(2);
    cfg.estimator.trajectory_from = Some(1);
    cfg.schedule[0].target_c = Some(0.5);
    let value = serde_json::to_value(&cfg).unwrap();
    let keys = |v: &serde_json::Value| v.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    let props = |path: &str| keys(&schema.pointer(path).unwrap().clone());
    for k in keys(&value) {
        assert!(props("/properties").contains(&k), "{k}");
    }
    for k in keys(&value["model"]) {
        assert!(props("/$defs/model/properties").contains(&k), "{k}");
    }
    for k in keys(&value["schedule"][0]) {
        assert!(props("/$defs/schedulePoint/properties").contains(&k), "{k}");
    }
    for k in keys(&value["estimator"]) {
        assert!(props("/$defs/estimator/properties").contains(&k), "{k}");
    }
}

#[test]
fn shipped_configs_validate() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            ExperimentConfig::from_json(&std::fs::read_to_string(&path).unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count > 0);
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wavelet-eigen"))
}

fn write_config(dir: &std::path::Path, cfg: &ExperimentConfig) -> std::path::PathBuf {
    let path = dir.join("cfg.json");
    std::fs::write(&path, serde_json::to_string(cfg).unwrap()).unwrap();
    path
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let mut cfg = base_config();
    cfg.replications = 2;
    let good = write_config(dir.path(), &cfg);
    let status = cli().args(["mc", "--threads", "1", "--config"]).arg(&good).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    for f in ["records.jsonl", "aggregate.json", "trajectories.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let status = cli().args(["mc", "--format", "csv", "--seed", "5", "--config"]).arg(&good).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("records.csv").exists());

    cfg.schedule[0].p = 1;
    let invalid = write_config(dir.path(), &cfg);
    let status = cli().args(["mc", "--config"]).arg(&invalid).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(1));

    let mut cfg = base_config();
    cfg.replications = 2;
    cfg.model.noise = NoiseSpec::None;
    cfg.model.coordinates = Coordinates::Canonical;
    cfg.estimator.rank = Some(3);
    let partial = write_config(dir.path(), &cfg);
    let status = cli().args(["mc", "--config"]).arg(&partial).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(3));

    let missing = cli().args(["analyze", "--j2", "3", "--input"]).arg(dir.path().join("nope.csv")).arg("--out").arg(&out).status().unwrap();
    assert_eq!(missing.code(), Some(2));

    assert_eq!(cli().arg("--help").status().unwrap().code(), Some(0));
    assert_eq!(cli().arg("frobnicate").status().unwrap().code(), Some(1));
}

#[test]
fn cli_synth_analyze_estimate_chain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = base_config();
    let cfg_path = write_config(dir.path(), &cfg);
    let d = dir.path();
    let ok = |args: &[&str]| {
        let o = cli().args(args).output().unwrap();
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        o
    };
    let p = |s: &str| d.join(s).to_str().unwrap().to_string();
    ok(&["synth", "--format", "csv", "--config", &cfg_path.to_string_lossy(), "--out", &p("s")]);
    ok(&["transform", "--input", &p("s/series.csv"), "--j2", "4", "--out", &p("t")]);
    assert!(d.join("t/manifest.json").exists() && d.join("t/octave_4.csv").exists());
    ok(&["analyze", "--input", &p("s/series.csv"), "--j1", "2", "--j2", "7", "--out", &p("a")]);
    let o = ok(&["estimate", "--input", &p("a/spectra.jsonl"), "--j1", "2", "--j2", "7", "--rank", "2", "--out", &p("e")]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["h_hat"].as_array().unwrap().len(), 2);
    assert_eq!(report["slopes"].as_array().unwrap().len(), 8);

    let direct = run_point(&cfg, 0, 0).unwrap();
    let from_cli: Vec<f64> = report["h_hat"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(from_cli, direct.h_hat.unwrap());
}
