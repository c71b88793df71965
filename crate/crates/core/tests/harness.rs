use std::collections::HashSet;

use traplab::harness::{apply_override, preset, preset_catalog, run_experiment_in, sha256_hex, window_checks, CsvRow, ExperimentConfig, CSV_HEADER};

fn small(name: &str, overrides: &[&str]) -> ExperimentConfig {
  let mut cfg = preset(name).unwrap();
  for o in overrides {
    cfg = apply_override(&cfg, o).unwrap();
  }
  cfg
}

#[test]
fn presets_validate_and_round_trip() {
  let catalog = preset_catalog();
  let names: HashSet<_> = catalog.iter().map(|p| p.name).collect();
  assert_eq!(names.len(), catalog.len());
  for p in &catalog {
    assert_eq!(p.config.name, p.name);
    assert!(!p.anchor.is_empty());
    assert_eq!(p.config.anchor, p.anchor);
    p.config.validate().unwrap();
    window_checks(&p.config).unwrap();
    let back = ExperimentConfig::from_toml(&p.config.to_toml().unwrap()).unwrap();
    assert_eq!(back, p.config);
  }
  assert!(preset("no_such_preset").is_err());
}

#[test]
fn unknown_keys_are_rejected() {
  let ok = "name = \"x\"\nkind = \"aging\"\nalpha = 0.5\nthetas = [1.0]\nfunctions = [\"r\"]\n[scales]\nt_w = [10.0]\n";
  ExperimentConfig::from_toml(ok).unwrap();
  assert!(ExperimentConfig::from_toml(&format!("colour = 1\n{ok}")).is_err());
  assert!(ExperimentConfig::from_toml(&ok.replace("t_w", "tw")).is_err());
  assert!(ExperimentConfig::from_toml(&format!("{ok}[sampling]\nseed = 3\n")).is_err());
}

#[test]
fn overrides_set_nested_fields_and_revalidate() {
  let cfg = preset("zd_aging").unwrap();
  let c = apply_override(&cfg, "sampling.trajectories=17").unwrap();
  assert_eq!(c.sampling.trajectories, 17);
  let c = apply_override(&c, "graph=zd:3").unwrap();
  assert_eq!(c.graph, "zd:3");
  assert!(apply_override(&cfg, "alpha=1.5").is_err());
  assert!(apply_override(&cfg, "sampling.trajectories=0").is_err());
  assert!(apply_override(&cfg, "sampling.speed=3").is_err());
  assert!(apply_override(&cfg, "no equals sign").is_err());
}

#[test]
fn rem_window_is_enforced() {
  let cfg = preset("rem_aging").unwrap();
  let checks = window_checks(&cfg).unwrap();
  assert!(checks[0].inside);
  assert!((checks[0].value - 0.8).abs() < 1e-12);
  let outside = apply_override(&cfg, "law.beta=0.5").unwrap();
  assert!(window_checks(&outside).is_err());
  let allowed = apply_override(&outside, "allow_outside_window=true").unwrap();
  assert!(!window_checks(&allowed).unwrap()[0].inside);
}

#[test]
fn torus_and_complete_windows() {
  let torus = preset("torus_aging").unwrap();
  assert!(window_checks(&apply_override(&torus, "scales.gamma=0.3").unwrap()).is_err());
  let complete = preset("complete_aging").unwrap();
  assert!(window_checks(&apply_override(&complete, "scales.kappa=2.5").unwrap()).is_err());
}

#[test]
fn sha256_known_vector() {
  assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

#[test]
fn csv_rows_leave_missing_references_empty() {
  let row = CsvRow {
    experiment: "x:r".into(),
    graph: "z".into(),
    family_param: 1,
    alpha: 0.5,
    a: 0.0,
    mode: "quenched".into(),
    t_w: 10.0,
    theta: 1.0,
    t: 10.0,
    estimate: 0.25,
    stderr: 0.01,
    replicas: 100,
    landscape_seed: 3,
    reference_asl: f64::NAN,
  };
  let line = row.to_line();
  assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
  assert!(line.ends_with(','));
  assert_eq!(row.function(), "r");
}

#[test]
fn runs_write_consistent_artifacts_independent_of_threads() {
  let dir = tempfile::tempdir().unwrap();
  let cfg = small("complete_aging", &["graph=complete:2000", "sampling.trajectories=300", "sampling.threads=1"]);
  let one = run_experiment_in(&cfg, &dir.path().join("one")).unwrap();
  let csv = std::fs::read(&one.csv_path).unwrap();
  assert_eq!(one.manifest.outputs[0].sha256, sha256_hex(&csv));
  let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(&one.summary_path).unwrap()).unwrap();
  assert_eq!(summary["experiment"], "complete_aging");
  assert_eq!(summary["rows"].as_u64().unwrap() as usize, one.rows.len());
  assert!(String::from_utf8_lossy(&csv).starts_with(CSV_HEADER));

  let cfg3 = apply_override(&cfg, "sampling.threads=3").unwrap();
  let three = run_experiment_in(&cfg3, &dir.path().join("three")).unwrap();
  assert_eq!(csv, std::fs::read(&three.csv_path).unwrap());
}

#[test]
fn zd_subaging_uses_t_over_log_t() {
  let dir = tempfile::tempdir().unwrap();
  let cfg = small("zd_subaging", &["sampling.trajectories=20", "scales.times=[100.0, 1000.0]", "thetas=[0.5, 2.0]"]);
  let art = run_experiment_in(&cfg, dir.path()).unwrap();
  assert_eq!(art.rows.len(), 4);
  for r in &art.rows {
    let want = r.theta * r.t_w / r.t_w.ln();
    assert!((r.t - want).abs() < 1e-9 * want);
    assert!((0.0..=1.0).contains(&r.estimate));
  }
  assert_eq!(art.summary["results"]["window"], "t/log t");
}

#[test]
fn quenched_landscapes_become_separate_rows() {
  let dir = tempfile::tempdir().unwrap();
  let cfg = small("complete_aging", &["graph=complete:500", "sampling.trajectories=50", "sampling.landscapes=2", "functions=[\"r\"]"]);
  let art = run_experiment_in(&cfg, dir.path()).unwrap();
  let seeds: HashSet<u64> = art.rows.iter().filter(|r| r.function() == "r").map(|r| r.landscape_seed).collect();
  assert_eq!(seeds.len(), 2);
}

#[test]
fn summaries_flag_open_conventions() {
  let dir = tempfile::tempdir().unwrap();
  let cfg = small("zd_aging", &["a=0.5", "sampling.trajectories=10", "scales.t_w=[10.0]"]);
  let art = run_experiment_in(&cfg, dir.path()).unwrap();
  assert_eq!(art.summary["nu"], 0.25);
  assert!(art.summary["notes"][0].as_str().unwrap().contains("1/degree"));
}
