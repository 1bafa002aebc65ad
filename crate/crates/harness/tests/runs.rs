use parabolic_core::kernel::kernel_mass;
use parabolic_core::{CoefficientField, SampledField};
use parabolic_harness::experiments::kernel_audit::kernel_slices;
use parabolic_harness::{run_experiment, ExperimentConfig, HarnessError};
use serde_json::json;
use std::process::Command;

/// A small Cauchy run: one field, few comparison pairs.
fn small_cauchy(extra: &[&str]) -> ExperimentConfig {
    let mut overrides = vec![
        "samples.pairs=40".to_string(),
        "samples.maximal_points=2".to_string(),
        "fields=[{\"kind\":\"identity\",\"dim\":1}]".to_string(),
    ];
    overrides.extend(extra.iter().map(|s| s.to_string()));
    ExperimentConfig::resolve(json!({"experiment": "cauchy"}), &overrides).unwrap()
}

#[test]
fn runs_reproduce_apart_from_wall_clock() {
    let cfg = small_cauchy(&[]);
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert!(a.passed(), "{:?}", a.failures());
    assert_eq!(a.reproducible_view(), b.reproducible_view());
    assert!(a.reproducible_view().get("wall_clock_seconds").is_none());
}

#[test]
fn seed_changes_sampled_pairs() {
    let a = run_experiment(&small_cauchy(&["seed=1"])).unwrap();
    let b = run_experiment(&small_cauchy(&["seed=2"])).unwrap();
    assert_ne!(a.table("f0_comparison").unwrap().rows, b.table("f0_comparison").unwrap().rows);
}

#[test]
fn file_config_merges_over_defaults_then_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"experiment": "weighted-sobolev", "seed": 5, "norms": {"p": 3.0}}"#).unwrap();
    let cfg = ExperimentConfig::load(&path, &["norms.p=4".into(), "family.size=6".into()]).unwrap();
    assert_eq!(cfg.seed, 5);
    assert_eq!(cfg.norm("p").unwrap(), 4.0);
    assert_eq!(cfg.family.size, 6);
    assert_eq!(cfg.family.max_bumps, 2);
    assert_eq!(cfg.sample("levels").unwrap(), 16);
    assert!(cfg.weight("strong").is_ok());
}

#[test]
fn bad_configurations_are_rejected() {
    let unknown = ExperimentConfig::resolve(json!({"experiment": "no-such"}), &[]);
    assert!(matches!(unknown, Err(HarnessError::Config(_))));
    let stray = ExperimentConfig::resolve(json!({"experiment": "cauchy", "colour": 1}), &[]);
    assert!(matches!(stray, Err(HarnessError::Config(_))));
    let radius = ExperimentConfig::resolve(json!({"experiment": "cauchy"}), &["radii=[1,-1]".into()]);
    assert!(matches!(radius, Err(HarnessError::Config(_))));
    let dim = ExperimentConfig::resolve(json!({"experiment": "cauchy", "fields": [{"kind": "identity", "dim": 3}]}), &[]);
    assert!(matches!(dim, Err(HarnessError::Config(_))));
}

#[test]
fn empty_family_fails_the_run() {
    let cfg = ExperimentConfig::resolve(json!({"experiment": "weighted-sobolev"}), &["family.size=0".into()]).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert!(!report.passed());
    assert_eq!(report.error.as_deref(), Some(HarnessError::EmptyFamily.to_string().as_str()));
}

#[test]
fn cli_lists_every_experiment() {
    let out = Command::new(env!("CARGO_BIN_EXE_parabolic")).arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for entry in parabolic_harness::REGISTRY {
        assert!(text.lines().any(|l| l == entry.id), "{}", entry.id);
    }
}

#[test]
fn cli_run_writes_report_and_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment": "cauchy", "fields": [{"kind": "identity", "dim": 1}]}"#).unwrap();
    let out_dir = dir.path().join("out");
    let run = Command::new(env!("CARGO_BIN_EXE_parabolic"))
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .args(["--seed", "3", "--override", "samples.pairs=20", "--override", "samples.maximal_points=1"])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 3);
    assert!(out_dir.join("tables").join("f0_comparison.csv").exists());
    let dumped = SampledField::read_binary(out_dir.join("fields").join("f0_gaussian_solution.bin")).unwrap();
    assert_eq!(dumped.grid.dim(), 1);
    assert!(dumped.values.iter().all(|v| v.is_finite()) && dumped.max_abs() > 0.1);

    // an impossible tolerance fails, a malformed override is an error
    let failing = Command::new(env!("CARGO_BIN_EXE_parabolic"))
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("strict"))
        .args(["--override", "samples.pairs=20", "--override", "samples.maximal_points=1", "--override", "tolerances.gaussian=0"])
        .output()
        .unwrap();
    assert_eq!(failing.status.code(), Some(1));
    let broken = Command::new(env!("CARGO_BIN_EXE_parabolic")).arg("run").arg(&cfg).args(["--override", "novalue"]).output().unwrap();
    assert_eq!(broken.status.code(), Some(2));
}

#[test]
fn kernel_slices_round_trip_through_the_dump_files() {
    let fields = [CoefficientField::sine_1d(), CoefficientField::two_level(2)];
    let mut report = parabolic_harness::ExperimentReport::new("slices", &[], serde_json::Value::Null);
    kernel_slices(&fields, &mut report).unwrap();
    let dir = tempfile::tempdir().unwrap();
    report.write(dir.path()).unwrap();
    for (fi, field) in fields.iter().enumerate() {
        let slice = SampledField::read_binary(dir.path().join("fields").join(format!("f{fi}_kernel_slice.bin"))).unwrap();
        assert_eq!(slice, report.dumps[fi].field);
        let cell = slice.grid.space.cell_volume();
        let mass = kernel_mass(field, 0.0, 0.5, 40).unwrap();
        assert!((slice.values.iter().sum::<f64>() * cell - mass).abs() < 1e-6, "f{fi}: {} vs {mass}", slice.values.iter().sum::<f64>() * cell);
        let csv = std::fs::read_to_string(dir.path().join("fields").join(format!("f{fi}_kernel_slice.csv"))).unwrap();
        assert_eq!(csv.lines().count(), slice.values.len() + 1);
    }
}
