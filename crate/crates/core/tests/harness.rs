use contact_defects::defect_bvp::{SpaceTimeGrid, TruncatedDefect};
use contact_defects::harness::{
    accept, format_float, read_family, read_solution, run, solution_stem, validate, write_solution, AcceptOptions,
    Experiment, ExperimentConfig, Status, Table,
};
use contact_defects::Error;
use proptest::prelude::*;

fn config_message(r: contact_defects::Result<()>) -> String {
    match r {
        Err(Error::ConfigInvalid(m)) => m,
        other => panic!("expected ConfigInvalid, got {other:?}"),
    }
}

#[test]
fn unknown_parameter_is_named() {
    let cfg = ExperimentConfig::new(Experiment::TravelTime).with_param("eps_mni", 1e-3);
    let msg = config_message(validate(&cfg));
    assert!(msg.contains("eps_mni: unknown parameter"), "{msg}");
}

#[test]
fn every_bad_field_is_reported() {
    let cfg = ExperimentConfig::new(Experiment::TravelTime)
        .with_param("eps_min", -1.0)
        .with_param("method", "euler")
        .with_param("n_eps", "many");
    let msg = config_message(validate(&cfg));
    for key in ["eps_min", "method", "n_eps"] {
        assert!(msg.contains(key), "{key} missing from: {msg}");
    }
}

#[test]
fn defaults_validate_for_every_experiment() {
    for e in Experiment::ALL {
        validate(&ExperimentConfig::new(e)).unwrap_or_else(|err| panic!("{e:?}: {err}"));
    }
}

#[test]
fn schema_version_is_checked() {
    let ok = r#"{"schema_version": 1, "experiment": "TravelTime", "parameters": {"n_eps": 3}}"#;
    let cfg = ExperimentConfig::from_json(ok).unwrap();
    assert_eq!(cfg.experiment, Experiment::TravelTime);
    assert_eq!(cfg.output_dir.to_str(), Some("out"));

    let bad = ok.replace("\"schema_version\": 1", "\"schema_version\": 2");
    let msg = match ExperimentConfig::from_json(&bad) {
        Err(Error::ConfigInvalid(m)) => m,
        other => panic!("{other:?}"),
    };
    assert!(msg.contains("schema_version"), "{msg}");

    let extra = ok.replace("\"parameters\"", "\"colour\": 1, \"parameters\"");
    assert!(matches!(ExperimentConfig::from_json(&extra), Err(Error::ConfigInvalid(_))));
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(Experiment::TravelTime).with_param("n_eps", 3).with_param("deltas", vec![0.5]);
    cfg.output_dir = dir.path().to_path_buf();
    let rec = run(&cfg).unwrap();
    assert!(rec.pass);
    let csv = std::fs::read_to_string(dir.path().join("travel_time_grid.csv")).unwrap();
    let mut lines = csv.split("\r\n");
    assert!(lines.next().unwrap().contains("eps"));
    assert_eq!(lines.filter(|l| !l.is_empty()).count(), 3);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("travel_time_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
}

#[test]
fn same_seed_same_bytes() {
    let go = |seed| {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::new(Experiment::TravelTime).with_param("n_eps", 2).with_param("n_random", 5);
        cfg.output_dir = dir.path().to_path_buf();
        cfg.seed = seed;
        run(&cfg).unwrap();
        std::fs::read(dir.path().join("travel_time_grid.csv")).unwrap()
    };
    assert_eq!(go(7), go(7));
    assert_ne!(go(7), go(8));
}

#[test]
fn forced_failure_gives_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let opts = AcceptOptions { out_dir: dir.path().to_path_buf(), seed: 0, only: vec![1], tolerance_scale: 0.0 };
    let s = accept(&opts, |_| {}).unwrap();
    assert_eq!(s.status(1), Some(Status::Fail));
    assert_eq!(s.exit_code(), 1);
}

#[test]
fn partial_run_skips_rather_than_fails() {
    let dir = tempfile::tempdir().unwrap();
    let opts = AcceptOptions { out_dir: dir.path().to_path_buf(), seed: 0, only: vec![1], tolerance_scale: 1.0 };
    let s = accept(&opts, |_| {}).unwrap();
    assert_eq!(s.status(1), Some(Status::Pass));
    for id in 2..=9 {
        assert_eq!(s.status(id), Some(Status::Skipped), "criterion {id}");
    }
    assert_eq!(s.exit_code(), 0);
    assert!(dir.path().join("acceptance.txt").exists());
}

fn sample_defect(l: f64) -> TruncatedDefect {
    let grid = SpaceTimeGrid::new(l, 65, 8).unwrap();
    let u = (0..65 * 8 * 2).map(|k| (k as f64 * 0.7).sin() / 3.0 + 1e-300 * k as f64).collect();
    TruncatedDefect {
        grid,
        dim: 2,
        u,
        omega: -0.1 - 1.0 / 3.0,
        residual_norm: 1e-12,
        newton_iters: 4,
        residual_history: vec![],
        sigma_min: 0.01,
    }
}

#[test]
fn solution_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let a = sample_defect(12.5);
    write_solution(dir.path(), &a).unwrap();
    let b = read_solution(&dir.path().join(solution_stem(12.5))).unwrap();
    assert_eq!(a.omega.to_bits(), b.omega.to_bits());
    assert!(a.u.iter().zip(&b.u).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(b.grid.n_x, 65);
    assert_eq!(b.grid.n_tau, 8);
}

#[test]
fn family_reads_sorted_and_rejects_truncation() {
    let dir = tempfile::tempdir().unwrap();
    for l in [32.0, 8.0, 16.0] {
        write_solution(dir.path(), &sample_defect(l)).unwrap();
    }
    let ls: Vec<f64> = read_family(dir.path()).unwrap().iter().map(|d| d.grid.l).collect();
    assert_eq!(ls, vec![8.0, 16.0, 32.0]);

    let bin = dir.path().join(format!("{}.bin", solution_stem(8.0)));
    let bytes = std::fs::read(&bin).unwrap();
    std::fs::write(&bin, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(read_family(dir.path()), Err(Error::ShapeMismatch(_))));
}

#[test]
fn table_csv_has_header_and_crlf() {
    let mut t = Table::new("t", &["a", "b"]);
    t.push(vec![1.0, f64::NAN]);
    let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
    assert_eq!(text, "a,b\r\n1.0000000000000000e0,NaN\r\n");
}

proptest! {
    #[test]
    fn csv_floats_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let back: f64 = format_float(v).parse().unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }
}

#[test]
fn shipped_configs_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        validate(&cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 3);
}
