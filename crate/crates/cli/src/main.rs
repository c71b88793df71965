use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use traplab::diagnostics::{
  check_accumulation_and_repetition, check_empirical_levy_measure, check_hitting_exponentiality, check_post_processing, check_score_law, check_shallow_time,
  check_very_deep_avoidance, min_distance_violation_rate, omega_gamma, omega_lhs, HittingSetup, MinDistanceBound, TORUS_K_STATED,
};
use traplab::harness::{apply_override, preset, preset_catalog, run_experiment, ExperimentConfig};
use traplab::heavy_tails::{seed_schedule, Role};
use traplab::levy::{asl_cdf, mittag_leffler, undershoot_sample};
use traplab::scaling::{fin_two_time, sample_fractional_kinetics, FinConfig};
use traplab::stats::mean_stderr;
use traplab::{DepthLaw, Graph, TrapLandscape};

#[derive(Parser)]
#[command(name = "traplab", version, about = "Monte Carlo laboratory for trap-model aging")]
struct Cli {
  #[command(subcommand)]
  command: Command,
}

#[derive(Subcommand)]
enum Command {
  /// Run an experiment described by a TOML config.
  Run {
    config: PathBuf,
    #[command(flatten)]
    common: RunArgs,
  },
  /// Run a named preset, or list presets when no name is given.
  Preset {
    name: Option<String>,
    #[command(flatten)]
    common: RunArgs,
    /// Print the resolved config as TOML instead of running it.
    #[arg(long)]
    print: bool,
  },
  /// Undershoot ratios of the stable subordinator against the arcsine law (CSV).
  Arcsine {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of evaluation points on (0, 1).
    #[arg(long, default_value_t = 19)]
    points: usize,
  },
  /// Two-time functions of the FIN diffusion at t_w = 1 (CSV).
  Fin {
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.25,1,4")]
    thetas: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    replicas: u64,
    #[arg(long, default_value_t = 1e-3)]
    v_min: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
  },
  /// Fractional-kinetics characteristic function against Mittag-Leffler (CSV).
  Fk {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1")]
    xi2: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
  },
  /// Probe one ingredient of the aging proofs; prints a JSON report.
  Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct RunArgs {
  /// Override a config key, e.g. `sampling.trajectories=500`.
  #[arg(long = "override", value_name = "KEY=VALUE")]
  overrides: Vec<String>,
  /// Output directory; takes precedence over the config and the environment.
  #[arg(long)]
  out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
  /// 1 to 6, levy, hitting or omega.
  #[arg(long)]
  condition: String,
  #[arg(long, default_value_t = 0.5)]
  alpha: f64,
  /// Complete-graph size for conditions and levy; hypercube or torus exponent for hitting.
  #[arg(long)]
  n: Option<u64>,
  #[arg(long, default_value_t = 0.5)]
  kappa: f64,
  /// γ for hitting and omega.
  #[arg(long)]
  gamma: Option<f64>,
  #[arg(long, default_value_t = 1.0)]
  rho: f64,
  /// Use the torus instead of the hypercube for hitting.
  #[arg(long)]
  torus: bool,
  #[arg(long, default_value_t = 5000)]
  reps: u64,
  #[arg(long, default_value_t = 1)]
  seed: u64,
}

fn main() -> Result<()> {
  let cli = Cli::parse();
  match cli.command {
    Command::Run { config, common } => {
      let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
      run(ExperimentConfig::from_toml(&text)?, common)
    }
    Command::Preset { name: None, .. } => {
      for p in preset_catalog() {
        println!("{:<14} {}", p.name, p.anchor);
      }
      Ok(())
    }
    Command::Preset { name: Some(name), common, print } => {
      let mut cfg = preset(&name)?;
      for o in &common.overrides {
        cfg = apply_override(&cfg, o)?;
      }
      if print {
        print!("{}", cfg.to_toml()?);
        return Ok(());
      }
      run(cfg, RunArgs { overrides: vec![], out: common.out })
    }
    Command::Arcsine { alpha, samples, delta, seed, points } => arcsine(alpha, samples, delta, seed, points),
    Command::Fin { alpha, thetas, replicas, v_min, seed } => {
      let mut cfg = FinConfig::new(alpha, thetas.clone(), replicas, seed);
      cfg.v_min = v_min;
      let res = fin_two_time(&cfg)?;
      let mut out = String::from("theta,r1,r1_stderr,rq,rq_stderr\n");
      for (k, th) in thetas.iter().enumerate() {
        out += &format!("{th},{},{},{},{}\n", res.r1[k].value, res.r1[k].stderr, res.rq[k].value, res.rq[k].stderr);
      }
      emit(&out)
    }
    Command::Fk { alpha, dim, t, xi2, samples, seed } => {
      let pts: Vec<Vec<f64>> =
        (0..samples).map(|i| sample_fractional_kinetics(alpha, dim, t, &mut seed_schedule(seed, i, Role::Trajectory))).collect::<traplab::Result<_>>()?;
      let mut out = String::from("xi2,t,estimate,stderr,mittag_leffler\n");
      for x in xi2 {
        let c: Vec<f64> = pts.iter().map(|p| (x.sqrt() * p[0]).cos()).collect();
        let (m, se) = mean_stderr(&c);
        out += &format!("{x},{t},{m},{se},{}\n", mittag_leffler(alpha, -x * t.powf(alpha))?);
      }
      emit(&out)
    }
    Command::Diagnose(args) => {
      let report = diagnose(&args)?;
      println!("{}", serde_json::to_string_pretty(&report)?);
      Ok(())
    }
  }
}

fn emit(s: &str) -> Result<()> {
  std::io::stdout().lock().write_all(s.as_bytes())?;
  Ok(())
}

fn run(mut cfg: ExperimentConfig, args: RunArgs) -> Result<()> {
  for o in &args.overrides {
    cfg = apply_override(&cfg, o)?;
  }
  if let Some(out) = args.out {
    cfg.output.dir = Some(out.to_string_lossy().into_owned());
  }
  let art = run_experiment(&cfg)?;
  for w in art.summary["warnings"].as_array().into_iter().flatten() {
    eprintln!("warning: {}", w.as_str().unwrap_or_default());
  }
  println!("{}", art.csv_path.display());
  println!("{}", art.summary_path.display());
  println!("{}", art.manifest_path.display());
  Ok(())
}

fn arcsine(alpha: f64, samples: u64, delta: f64, seed: u64, points: usize) -> Result<()> {
  let mut xs =
    (0..samples).map(|i| undershoot_sample(alpha, 1.0, &mut seed_schedule(seed, i, Role::Trajectory), delta)).collect::<traplab::Result<Vec<f64>>>()?;
  xs.sort_by(f64::total_cmp);
  let mut out = String::from("u,empirical_cdf,asl_cdf\n");
  for k in 1..=points {
    let u = k as f64 / (points + 1) as f64;
    let emp = xs.partition_point(|&x| x <= u) as f64 / samples as f64;
    out += &format!("{u},{emp},{}\n", asl_cdf(alpha, u)?);
  }
  emit(&out)
}

fn diagnose(a: &DiagnoseArgs) -> Result<Value> {
  let complete = || -> Result<(TrapLandscape, f64, u64)> {
    let n = a.n.unwrap_or(100_000);
    let ls = TrapLandscape::with_preset_nu(Graph::complete(n)?, DepthLaw::pareto(a.alpha)?, a.seed, 0.0)?;
    let g = (n as f64).powf(a.kappa);
    // About four deep-trap entries per depth scale.
    let xi = (4.0 * g.powf(a.alpha)).ceil() as u64;
    Ok((ls, g, xi))
  };
  let s = a.seed + 1;
  Ok(match a.condition.as_str() {
    "1" => {
      let (ls, g, xi) = complete()?;
      serde_json::to_value(check_shallow_time(&ls, &[0.1, 0.05, 0.025], g, xi, g, a.reps, s)?)?
    }
    "2" => {
      let (ls, g, xi) = complete()?;
      serde_json::to_value(check_very_deep_avoidance(&ls, &[4.0, 16.0, 64.0], g, xi, a.reps, s)?)?
    }
    "3" => {
      let (ls, g, xi) = complete()?;
      serde_json::to_value(check_score_law(&ls, 0.05, 64.0, g, g, xi, a.reps, s)?)?
    }
    "4" | "6" => {
      let (ls, g, xi) = complete()?;
      serde_json::to_value(check_accumulation_and_repetition(&ls, 0.05, 64.0, g, xi, g, 1.0, a.reps, s)?)?
    }
    "5" => {
      let (ls, g, _) = complete()?;
      serde_json::to_value(check_post_processing(&ls, 0.05, 64.0, g, g, &[0.5 * g, g, 2.0 * g], 0.1, a.reps, s)?)?
    }
    "levy" => {
      let (ls, _, _) = complete()?;
      serde_json::to_value(check_empirical_levy_measure(&ls, a.kappa, 0.1, 10.0, &[0.0, 0.5, 1.0, 2.0, 4.0], a.reps, s)?)?
    }
    "hitting" => {
      let setup = if a.torus {
        HittingSetup::Torus { n: a.n.unwrap_or(8) as u32, gamma: a.gamma.unwrap_or(0.1), rho: a.rho, k_const: TORUS_K_STATED }
      } else {
        HittingSetup::Hypercube { n: a.n.unwrap_or(14) as u32, gamma: a.gamma.unwrap_or(0.8), rho: a.rho }
      };
      serde_json::to_value(check_hitting_exponentiality(setup, a.reps, s)?)?
    }
    "omega" => {
      let gamma = a.gamma.unwrap_or(0.8);
      let w = omega_gamma(gamma)?;
      let n = a.n.unwrap_or(14) as u32;
      let graph = Graph::hypercube(n)?;
      let density = 2f64.powf(-gamma * n as f64);
      let (p, se) = min_distance_violation_rate(&graph, density, MinDistanceBound::Hypercube { gamma, eps: 0.0 }, a.reps.min(1000), s)?;
      json!({
        "gamma": gamma,
        "omega": w,
        "residual": omega_lhs(w) - (2.0 * gamma - 1.0) * std::f64::consts::LN_2,
        "hypercube_n": n,
        "violation_rate": p,
        "violation_stderr": se,
      })
    }
    other => bail!("unknown condition {other:?}; expected 1-6, levy, hitting or omega"),
  })
}
