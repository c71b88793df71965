//! Executes a config and persists its outputs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{ExperimentConfig, ExperimentKind, OUTPUT_DIR_ENV};
use super::output::{render_csv, sha256_hex, write_atomic, CsvRow, OutputRecord, RunManifest};
use crate::error::{Error, Result};
use crate::exec::{par_map, with_threads};
use crate::graphs::Graph;
use crate::heavy_tails::{seed_schedule, Role};
use crate::landscape::TrapLandscape;
use crate::levy::{asl_cdf, mittag_leffler, undershoot_sample};
use crate::observables::{landscape_seed, run_two_time, subaging_scan, Mode, Sampling, TopBand, TwoTimeFunction, TwoTimePlan};
use crate::scaling::{clock_rescaling_check, fin_two_time, sample_fractional_kinetics, ClockFamily, FinConfig};
use crate::stats::{ks_test, mean_stderr};

/// Outcome of one theorem-window check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowCheck {
  pub name: String,
  pub value: f64,
  pub lower: f64,
  pub upper: f64,
  pub inside: bool,
}

/// Parameter windows of the aging theorems that apply to `cfg`.
///
/// Outside a window the run is refused unless `allow_outside_window` is
/// set, in which case the check is reported as a warning.
pub fn window_checks(cfg: &ExperimentConfig) -> Result<Vec<WindowCheck>> {
  let graph = cfg.parsed_graph()?;
  let mut out = Vec::new();
  if cfg.kind != ExperimentKind::Aging {
    return Ok(out);
  }
  match graph {
    Graph::CompleteLoops { .. } if cfg.scales.t_w.is_empty() => {
      let kappa = cfg.scales.kappa.ok_or_else(|| Error::param("scales.kappa", "the complete graph needs κ or explicit t_w"))?;
      out.push(WindowCheck { name: "kappa".into(), value: kappa, lower: 0.0, upper: 1.0 / cfg.alpha, inside: kappa > 0.0 && kappa < 1.0 / cfg.alpha });
    }
    Graph::Torus2d { .. } if cfg.scales.t_w.is_empty() => {
      let gamma = cfg.scales.gamma.ok_or_else(|| Error::param("scales.gamma", "the torus needs γ or explicit t_w"))?;
      if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::param("scales.gamma", format!("{gamma} is not in (0, 1]")));
      }
      out.push(WindowCheck { name: "gamma".into(), value: gamma, lower: 0.0, upper: 1.0 / 6.0, inside: gamma < 1.0 / 6.0 });
    }
    Graph::Hypercube { .. } if cfg.law.kind == "rem" => {
      let beta = cfg.law.beta.unwrap_or(f64::NAN);
      let r = (cfg.alpha * beta).powi(2) / (2.0 * std::f64::consts::LN_2);
      out.push(WindowCheck { name: "alpha^2 beta^2 / (2 log 2)".into(), value: r, lower: 0.75, upper: 1.0, inside: r > 0.75 && r < 1.0 });
    }
    _ => {}
  }
  for c in &out {
    if !c.inside && !cfg.allow_outside_window {
      return Err(Error::param("window", format!("{} = {} is outside ({}, {}); set allow_outside_window to run anyway", c.name, c.value, c.lower, c.upper)));
    }
  }
  Ok(out)
}

/// Files and in-memory results of a run.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
  pub csv_path: PathBuf,
  pub summary_path: PathBuf,
  pub manifest_path: PathBuf,
  pub rows: Vec<CsvRow>,
  pub summary: Value,
  pub manifest: RunManifest,
}

fn default_dir(cfg: &ExperimentConfig) -> PathBuf {
  cfg.output.dir.clone().or_else(|| std::env::var(OUTPUT_DIR_ENV).ok()).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("traplab-out"))
}

/// Runs `cfg`, writing into its configured output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
  run_experiment_in(cfg, &default_dir(cfg))
}

/// Runs `cfg`, writing into `dir`.
pub fn run_experiment_in(cfg: &ExperimentConfig, dir: &Path) -> Result<RunArtifacts> {
  cfg.validate()?;
  let checks = window_checks(cfg)?;
  let start = Instant::now();
  let (rows, extra) = with_threads(cfg.sampling.threads, || execute(cfg))?;
  let summary = json!({
    "experiment": cfg.name,
    "kind": cfg.kind.name(),
    "anchor": cfg.anchor,
    "graph": cfg.graph,
    "alpha": cfg.alpha,
    "a": cfg.a,
    "window_checks": checks,
    "warnings": checks.iter().filter(|c| !c.inside).map(|c| format!("{} outside its window", c.name)).collect::<Vec<_>>(),
    "rows": rows.len(),
    "nu": match cfg.nu {
      Some(nu) => nu,
      None => crate::landscape::nu_preset(&cfg.parsed_graph()?, cfg.a, &cfg.depth_law()?)?,
    },
    "notes": metadata_notes(cfg)?,
    "results": extra,
  });
  let csv = render_csv(&rows);
  let summary_text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))? + "\n";
  let csv_path = dir.join(format!("{}.csv", cfg.name));
  let summary_path = dir.join(format!("{}.summary.json", cfg.name));
  let manifest_path = dir.join(format!("{}.manifest.json", cfg.name));
  write_atomic(&csv_path, csv.as_bytes())?;
  write_atomic(&summary_path, summary_text.as_bytes())?;
  let manifest = RunManifest {
    experiment: cfg.name.clone(),
    config_sha256: sha256_hex(cfg.to_toml()?.as_bytes()),
    software_version: env!("CARGO_PKG_VERSION").into(),
    master_seed: cfg.sampling.master_seed,
    landscape_seed_base: cfg.landscape_base_seed(),
    seed_schedule: "stream index = replica * 5 + role (landscape 0, trajectory 1, fork-a 2, fork-b 3, environment 4) of ChaCha8 seeded by the master seed; landscape l uses the first draw of the landscape stream l of the base seed".into(),
    threads: cfg.sampling.threads,
    outputs: vec![
      OutputRecord { file: file_name(&csv_path), sha256: sha256_hex(csv.as_bytes()) },
      OutputRecord { file: file_name(&summary_path), sha256: sha256_hex(summary_text.as_bytes()) },
    ],
    wall_clock_seconds: start.elapsed().as_secs_f64(),
  };
  let manifest_text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))? + "\n";
  write_atomic(&manifest_path, manifest_text.as_bytes())?;
  Ok(RunArtifacts { csv_path, summary_path, manifest_path, rows, summary, manifest })
}

/// Conventions the run relies on that the limit theorems leave open.
fn metadata_notes(cfg: &ExperimentConfig) -> Result<Vec<String>> {
  let graph = cfg.parsed_graph()?;
  let mut notes = Vec::new();
  if cfg.a > 0.0 && cfg.nu.is_none() && graph != Graph::LineZ {
    notes.push("nu for a > 0 off Z is the a = 0 preset 1/degree; no convention is fixed for this family".into());
  }
  if cfg.kind == ExperimentKind::Subaging {
    notes.push("the slowly varying factor L in the subaging window is taken constant (exact Pareto tails)".into());
  }
  Ok(notes)
}

fn file_name(p: &Path) -> String {
  p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn execute(cfg: &ExperimentConfig) -> Result<(Vec<CsvRow>, Value)> {
  match cfg.kind {
    ExperimentKind::Aging => run_aging(cfg),
    ExperimentKind::Subaging => run_subaging(cfg),
    ExperimentKind::Fin => run_fin(cfg),
    ExperimentKind::Fk => run_fk(cfg),
    ExperimentKind::Arcsine => run_arcsine(cfg),
    ExperimentKind::Clock => run_clock(cfg),
  }
}

struct RowBase<'a> {
  cfg: &'a ExperimentConfig,
  graph: Graph,
  mode: String,
}

impl RowBase<'_> {
  #[allow(clippy::too_many_arguments)]
  fn row(&self, function: &str, t_w: f64, theta: f64, t: f64, estimate: f64, stderr: f64, replicas: u64, seed: u64, reference: f64) -> CsvRow {
    CsvRow {
      experiment: format!("{}:{}", self.cfg.name, function),
      graph: self.graph.family_name().into(),
      family_param: self.graph.family_param(),
      alpha: self.cfg.alpha,
      a: self.cfg.a,
      mode: self.mode.clone(),
      t_w,
      theta,
      t,
      estimate,
      stderr,
      replicas,
      landscape_seed: seed,
      reference_asl: reference,
    }
  }
}

fn landscape_for(cfg: &ExperimentConfig, graph: &Graph, seed: u64) -> Result<TrapLandscape> {
  let law = cfg.depth_law()?;
  match cfg.nu {
    Some(nu) => TrapLandscape::new(*graph, law, seed, nu),
    None => TrapLandscape::with_preset_nu(*graph, law, seed, cfg.a),
  }
}

/// Waiting times and the depth scale g_n of the deep-trap band.
fn aging_scales(cfg: &ExperimentConfig, graph: &Graph) -> Result<(Vec<f64>, f64)> {
  let alpha = cfg.alpha;
  let (formula, g_n) = match graph {
    Graph::CompleteLoops { n } => {
      let tw = cfg.scales.kappa.map(|k| (*n as f64).powf(k));
      (tw, tw)
    }
    Graph::Torus2d { n } => {
      let nf = *n as f64;
      let g = cfg.scales.gamma;
      (g.map(|g| 2f64.powf(2.0 * nf / alpha) * nf.powf(1.0 - g / alpha)), g.map(|g| 2f64.powf(2.0 * nf / alpha) * nf.powf(-g / alpha)))
    }
    Graph::Hypercube { n } if cfg.law.kind == "rem" => {
      let beta = cfg.law.beta.unwrap_or(f64::NAN);
      let tw = (alpha * beta * beta * *n as f64).exp();
      (Some(tw), Some(tw))
    }
    _ => (None, None),
  };
  let tws = if cfg.scales.t_w.is_empty() {
    vec![formula.ok_or_else(|| Error::param("scales.t_w", "no family formula applies; give t_w explicitly"))?]
  } else {
    cfg.scales.t_w.clone()
  };
  if tws.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
    return Err(Error::param("scales.t_w", "waiting times must be positive and finite"));
  }
  Ok((tws.clone(), g_n.unwrap_or(tws[0])))
}

/// Whether Asl_α(1/(1+θ)) is the limit of R for this family.
fn asl_applies(graph: &Graph) -> bool {
  !matches!(graph, Graph::LineZ)
}

fn run_aging(cfg: &ExperimentConfig) -> Result<(Vec<CsvRow>, Value)> {
  let graph = cfg.parsed_graph()?;
  let mode = cfg.mode()?;
  let functions = cfg.two_time_functions()?;
  let (tws, g_n) = aging_scales(cfg, &graph)?;
  let base_seed = cfg.landscape_base_seed();
  let rb = RowBase { cfg, graph, mode: mode.name().into() };
  let reference: Vec<f64> =
    cfg.thetas.iter().map(|th| if asl_applies(&graph) { asl_cdf(cfg.alpha, 1.0 / (1.0 + th)) } else { Ok(f64::NAN) }).collect::<Result<_>>()?;
  let top_band = match (cfg.scales.eps, cfg.scales.big_m) {
    (Some(eps), Some(m)) => Some(TopBand { eps, m, g_n }),
    _ => None,
  };
  let mut rows = Vec::new();
  let mut per_tw = Vec::new();
  for &t_w in &tws {
    let mut plan = TwoTimePlan::new(cfg.a, t_w, cfg.thetas.iter().map(|th| th * t_w).collect(), functions.clone());
    plan.rule = cfg.rule()?;
    plan.top_band = top_band;
    let r = cfg.sampling.trajectories;
    let mut gaps = Vec::new();
    match mode {
      Mode::Quenched => {
        for l in 0..cfg.sampling.landscapes {
          let seed = landscape_seed(base_seed, l);
          let ls = landscape_for(cfg, &graph, seed)?;
          let sampling = Sampling { landscapes: 1, trajectories: r, master_seed: cfg.sampling.master_seed, replica_offset: l * r, threads: 0 };
          let table = run_two_time(&ls, &plan, &sampling, Mode::Quenched)?;
          for (k, th) in cfg.thetas.iter().enumerate() {
            for e in &table.estimates[k] {
              rows.push(rb.row(e.function.name(), t_w, *th, th * t_w, e.value, e.stderr, e.replicas, seed, reference[k]));
              gaps.push((e.function.name(), *th, seed, (e.value - reference[k]).abs()));
            }
          }
        }
      }
      Mode::Averaged => {
        let template = landscape_for(cfg, &graph, base_seed)?;
        let sampling = Sampling { landscapes: cfg.sampling.landscapes, trajectories: r, master_seed: cfg.sampling.master_seed, replica_offset: 0, threads: 0 };
        let table = run_two_time(&template, &plan, &sampling, Mode::Averaged)?;
        for (k, th) in cfg.thetas.iter().enumerate() {
          for e in &table.estimates[k] {
            rows.push(rb.row(e.function.name(), t_w, *th, th * t_w, e.value, e.stderr, e.replicas, base_seed, reference[k]));
            gaps.push((e.function.name(), *th, base_seed, (e.value - reference[k]).abs()));
          }
        }
      }
    }
    let max_gap = gaps.iter().map(|g| g.3).filter(|g| g.is_finite()).fold(f64::NAN, f64::max);
    per_tw.push(json!({ "t_w": t_w, "max_gap_to_reference": max_gap }));
  }
  let mut extra = json!({ "g_n": g_n, "t_w": tws, "per_t_w": per_tw, "reference": if asl_applies(&graph) { "Asl_alpha(1/(1+theta))" } else { "none in closed form; compare with the fin experiment" } });
  if let (Graph::CompleteLoops { .. }, Some(kappa)) = (&graph, cfg.scales.kappa) {
    let n = graph.vertex_count().unwrap() as f64;
    let lambda = cfg.scales.lambda.unwrap_or(1.0);
    let s = cfg.scales.s.unwrap_or(1.0);
    let clock = clock_rescaling_check(ClockFamily::Complete { kappa }, cfg.alpha, &[n], s, lambda, cfg.sampling.trajectories, cfg.sampling.master_seed)?;
    for c in &clock {
      rows.push(rb.row("clock_laplace", f64::NAN, f64::NAN, s, c.estimate, c.stderr, cfg.sampling.trajectories, base_seed, c.target));
    }
    extra["clock_laplace_gap"] = json!(clock[0].gap);
  }
  if functions.contains(&TwoTimeFunction::Rprime) && top_band.is_none() {
    return Err(Error::param("scales.eps, scales.big_m", "R′ needs a deep-trap band"));
  }
  Ok((rows, extra))
}

/// f(t) of the subaging window.
pub(crate) fn subaging_window(graph: &Graph, alpha: f64, t: f64) -> f64 {
  match graph {
    Graph::LineZ => t.powf(1.0 / (1.0 + alpha)),
    Graph::LatticeZd { d: 2 } => t / t.ln(),
    _ => t,
  }
}

fn run_subaging(cfg: &ExperimentConfig) -> Result<(Vec<CsvRow>, Value)> {
  let graph = cfg.parsed_graph()?;
  if !matches!(graph, Graph::LineZ | Graph::LatticeZd { .. }) {
    return Err(Error::param("graph", "subaging runs live on ℤ^d"));
  }
  let mode = cfg.mode()?;
  let base_seed = cfg.landscape_base_seed();
  let template = landscape_for(cfg, &graph, base_seed)?;
  let landscapes = if mode == Mode::Averaged { cfg.sampling.landscapes } else { 1 };
  let sampling = Sampling { landscapes, trajectories: cfg.sampling.trajectories, master_seed: cfg.sampling.master_seed, replica_offset: 0, threads: 0 };
  let scan = subaging_scan(&template, cfg.a, &cfg.scales.times, &sampling, mode)?;
  let rb = RowBase { cfg, graph, mode: mode.name().into() };
  let mut rows = Vec::new();
  for (k, &t) in scan.ts.iter().enumerate() {
    let f = subaging_window(&graph, cfg.alpha, t);
    for &th in &cfg.thetas {
      let (v, se) = scan.pi_at(k, th * f);
      rows.push(rb.row("pi", t, th, th * f, v, se, scan.rates[k].len() as u64, base_seed, f64::NAN));
    }
  }
  let mut extra = json!({ "window": match graph { Graph::LineZ => "t^(1/(1+alpha))", Graph::LatticeZd { d: 2 } => "t/log t", _ => "t" } });
  if graph == Graph::LineZ {
    let gamma = 1.0 / (1.0 + cfg.alpha);
    let depth = scan.depth_exponent()?;
    let sojourn = scan.sojourn_exponent()?;
    let last = scan.ts.len() - 1;
    let short: Vec<f64> = cfg.thetas.iter().copied().filter(|&t| t <= 0.1).collect();
    let long: Vec<f64> = cfg.thetas.iter().copied().filter(|&t| t >= 10.0).collect();
    extra["depth_exponent"] = json!({ "slope": depth.slope, "stderr": depth.slope_stderr, "reference": gamma });
    extra["sojourn_exponent"] = json!({ "slope": sojourn.slope, "stderr": sojourn.slope_stderr, "reference": gamma * (1.0 - cfg.a) });
    if short.len() >= 2 {
      let fit = scan.short_scale_fit(last, gamma, &short)?;
      extra["short_scale_slope"] = json!({ "slope": fit.slope, "reference": 1.0 - cfg.alpha });
    }
    if long.len() >= 2 {
      let fit = scan.long_scale_fit(last, gamma, &long)?;
      extra["long_scale_slope"] = json!({ "slope": fit.slope, "reference": -cfg.alpha });
    }
  }
  Ok((rows, extra))
}

fn run_fin(cfg: &ExperimentConfig) -> Result<(Vec<CsvRow>, Value)> {
  let mut fc = FinConfig::new(cfg.alpha, cfg.thetas.clone(), cfg.sampling.trajectories, cfg.sampling.master_seed);
  if let Some(v) = cfg.scales.v_min {
    fc.v_min = v;
  }
  if let Some(w) = cfg.scales.window {
    fc.window = w;
  }
  fc.extra_cutoffs = cfg.scales.extra_cutoffs.clone();
  let res = fin_two_time(&fc)?;
  let rb = RowBase { cfg, graph: Graph::LineZ, mode: "environment".into() };
  let mut rows = Vec::new();
  for (k, &th) in cfg.thetas.iter().enumerate() {
    let r = &res.r1[k];
    rows.push(rb.row("r1", 1.0, th, th, r.value, r.stderr, r.trials, cfg.sampling.master_seed, f64::NAN));
    let q = &res.rq[k];
    rows.push(rb.row("rq", 1.0, th, th, q.value, q.stderr, q.trials, cfg.sampling.master_seed, f64::NAN));
    for (c, lvl) in res.r1_extra.iter().enumerate() {
      let r = &lvl[k];
      rows.push(rb.row(&format!("r1_cutoff{}", c + 1), 1.0, th, th, r.value, r.stderr, r.trials, cfg.sampling.master_seed, f64::NAN));
    }
  }
  let mut f = res.f_samples.clone();
  f.sort_by(f64::total_cmp);
  let q = |p: f64| crate::stats::quantile(&f, p);
  let extra = json!({
    "v_min": fc.v_min,
    "extra_cutoffs": fc.extra_cutoffs,
    "cutoff_differences": res.r1_extra_diff,
    "depth_at_one_quantiles": { "0.1": q(0.1), "0.5": q(0.5), "0.9": q(0.9) },
  });
  Ok((rows, extra))
}

fn run_fk(cfg: &ExperimentConfig) -> Result<(Vec<CsvRow>, Value)> {
  let d = cfg.scales.dim.unwrap_or(1);
  let times = if cfg.scales.times.is_empty() { vec![1.0] } else { cfg.scales.times.clone() };
  let rb = RowBase { cfg, graph: Graph::LineZ, mode: "limit".into() };
  let n = cfg.sampling.trajectories;
  let mut rows = Vec::new();
  let mut results = Vec::new();
  for (ti, &t) in times.iter().enumerate() {
    let pts = par_map(n, 0, |i| {
      let mut s = seed_schedule(cfg.sampling.master_seed, ti as u64 * n + i, Role::Trajectory);
      sample_fractional_kinetics(cfg.alpha, d, t, &mut s).expect("validated parameters")
    });
    for &xi2 in &cfg.scales.xi2 {
      // ξ along the first axis; the imaginary part vanishes by symmetry.
      let xi = xi2.sqrt();
      let c: Vec<f64> = pts.iter().map(|p| (xi * p[0]).cos()).collect();
      let (m, se) = mean_stderr(&c);
      let reference = mittag_leffler(cfg.alpha, -xi2 * t.powf(cfg.alpha))?;
      rows.push(rb.row("charfn", f64::NAN, xi2, t, m, se, n, cfg.sampling.master_seed, reference));
      results.push(json!({ "t": t, "xi2": xi2, "estimate": m, "stderr": se, "mittag_leffler": reference, "z_score": (m - reference) / se }));
    }
  }
  Ok((rows, json!({ "dimension": d, "checks": results })))
}

fn run_arcsine(cfg: &ExperimentConfig) -> Result<(Vec<CsvRow>, Value)> {
  let n = cfg.sampling.trajectories;
  let delta = cfg.scales.delta.unwrap_or(1e-4);
  let samples = par_map(n, 0, |i| {
    let mut s = seed_schedule(cfg.sampling.master_seed, i, Role::Trajectory);
    undershoot_sample(cfg.alpha, 1.0, &mut s, delta)
  })
  .into_iter()
  .collect::<Result<Vec<f64>>>()?;
  let rb = RowBase { cfg, graph: Graph::LineZ, mode: "limit".into() };
  let mut rows = Vec::new();
  for &th in &cfg.thetas {
    let u = 1.0 / (1.0 + th);
    let p = samples.iter().filter(|&&x| x <= u).count() as f64 / n as f64;
    rows.push(rb.row("undershoot_cdf", f64::NAN, th, u, p, (p * (1.0 - p) / n as f64).sqrt(), n, cfg.sampling.master_seed, asl_cdf(cfg.alpha, u)?));
  }
  let (d, p) = ks_test(&samples, |u| asl_cdf(cfg.alpha, u.clamp(0.0, 1.0)).unwrap_or(f64::NAN));
  Ok((rows, json!({ "delta": delta, "ks_distance": d, "ks_pvalue": p })))
}

fn run_clock(cfg: &ExperimentConfig) -> Result<(Vec<CsvRow>, Value)> {
  let graph = cfg.parsed_graph()?;
  let family = match graph {
    Graph::CompleteLoops { .. } => {
      ClockFamily::Complete { kappa: cfg.scales.kappa.ok_or_else(|| Error::param("scales.kappa", "needed for the complete graph"))? }
    }
    Graph::LatticeZd { d } => ClockFamily::Lattice { d },
    _ => return Err(Error::param("graph", "clock runs use the complete graph or ℤ^d, d ≥ 2")),
  };
  let lambda = cfg.scales.lambda.unwrap_or(1.0);
  let s = cfg.scales.s.unwrap_or(1.0);
  let res = clock_rescaling_check(family, cfg.alpha, &cfg.scales.times, s, lambda, cfg.sampling.trajectories, cfg.sampling.master_seed)?;
  let rb = RowBase { cfg, graph, mode: "quenched".into() };
  let rows =
    res.iter().map(|c| rb.row("clock_laplace", c.n, lambda, s, c.estimate, c.stderr, cfg.sampling.trajectories, cfg.sampling.master_seed, c.target)).collect();
  Ok((rows, json!({ "rows": res })))
}
