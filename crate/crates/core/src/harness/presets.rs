//! Named experiments with desk-scale defaults.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, LawConfig, OutputConfig, SamplingConfig, ScalesConfig};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
  pub name: &'static str,
  /// The limit result the preset reproduces.
  pub anchor: &'static str,
  pub config: ExperimentConfig,
}

/// β with α²β²/(2 ln 2) = r.
pub(crate) fn rem_beta(alpha: f64, ratio: f64) -> f64 {
  (2.0 * std::f64::consts::LN_2 * ratio).sqrt() / alpha
}

fn base(name: &str, kind: ExperimentKind, anchor: &str, graph: &str, alpha: f64) -> ExperimentConfig {
  ExperimentConfig {
    name: name.into(),
    kind,
    anchor: anchor.into(),
    graph: graph.into(),
    alpha,
    a: 0.0,
    nu: None,
    thetas: vec![0.25, 1.0, 4.0],
    functions: vec!["r".into()],
    no_jump_rule: "any_epoch".into(),
    allow_outside_window: false,
    law: LawConfig::default(),
    scales: ScalesConfig::default(),
    sampling: SamplingConfig::default(),
    output: OutputConfig::default(),
  }
}

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
  let decades = (hi / lo).log10();
  let n = (decades * per_decade as f64).round() as usize;
  (0..=n).map(|k| lo * 10f64.powf(k as f64 / per_decade as f64)).map(|x| (x * 1e6).round() / 1e6).collect()
}

const COMPLETE: &str = "quenched aging on the complete graph: R and Pi at (n^kappa, (1+theta) n^kappa) tend to Asl_alpha(1/(1+theta)) for 0 < kappa < 1/alpha";
const Z1_AGING: &str =
  "aging of the one-dimensional trap model: averaged R(t_w, (1+theta) t_w) tends to the FIN diffusion value R_1(theta), independently of a";
const Z1_SUBAGING: &str = "subaging on Z: Pi(t_w, t_w + theta t_w^gamma) with gamma = 1/(1+alpha) tends to the FIN-diffusion formula built from g_a and F";
const ZD_AGING: &str = "quenched aging on Z^d, d >= 2: R(t_w, (1+theta) t_w) tends to Asl_alpha(1/(1+theta))";
const ZD_SUBAGING: &str = "quenched subaging on Z^d: Pi(t_w, t_w + theta f(t_w)) with f(t) = t/log t for d = 2 and f(t) = t for d >= 3 has a d-dependent limit";
const TORUS: &str = "aging on the torus of side 2^n: R at t_w = 2^(2n/alpha) n^(1-gamma/alpha), gamma in (0, 1/6), tends to Asl_alpha(1/(1+theta))";
const REM: &str = "REM-like trap model on the hypercube: R at t_w = exp(alpha beta^2 n) tends to Asl_alpha(1/(1+theta)) for 3/4 < alpha^2 beta^2/(2 log 2) < 1";
const FK: &str = "fractional kinetics scaling limit on Z^d (constants C_d from the lattice Green function): E exp(i xi.Psi(t)) = E_alpha(-|xi|^2 t^alpha)";
const ARCSINE: &str = "a stable subordinator jumps over [a, b] with probability Asl_alpha(a/b); its undershoot ratio at a level has law Asl_alpha";

/// Every preset with its default parameters.
pub fn preset_catalog() -> Vec<Preset> {
  let mut out = Vec::new();

  let mut c = base("complete_aging", ExperimentKind::Aging, COMPLETE, "complete:100000", 0.5);
  c.functions = vec!["pi".into(), "r".into()];
  c.scales.kappa = Some(0.5);
  c.scales.lambda = Some(1.0);
  c.scales.s = Some(1.0);
  c.sampling.landscapes = 3;
  c.sampling.trajectories = 20_000;
  out.push(Preset { name: "complete_aging", anchor: COMPLETE, config: c });

  let mut c = base("z1_aging", ExperimentKind::Aging, Z1_AGING, "z", 0.5);
  c.thetas = vec![1.0];
  c.scales.t_w = vec![1e6];
  c.sampling.mode = "averaged".into();
  c.sampling.landscapes = 10_000;
  c.sampling.trajectories = 1;
  out.push(Preset { name: "z1_aging", anchor: Z1_AGING, config: c });

  let mut c = base("z1_subaging", ExperimentKind::Subaging, Z1_SUBAGING, "z", 0.5);
  c.functions = vec!["pi".into()];
  c.thetas = log_grid(0.01, 100.0, 2);
  c.scales.times = log_grid(1e3, 1e6, 3);
  c.sampling.mode = "averaged".into();
  c.sampling.landscapes = 4000;
  c.sampling.trajectories = 1;
  out.push(Preset { name: "z1_subaging", anchor: Z1_SUBAGING, config: c });

  let mut c = base("zd_aging", ExperimentKind::Aging, ZD_AGING, "zd:2", 0.5);
  c.scales.t_w = vec![1e3, 1e4, 1e5];
  c.sampling.trajectories = 2000;
  out.push(Preset { name: "zd_aging", anchor: ZD_AGING, config: c });

  let mut c = base("zd_subaging", ExperimentKind::Subaging, ZD_SUBAGING, "zd:2", 0.5);
  c.functions = vec!["pi".into()];
  c.scales.times = vec![1e3, 1e4, 1e5];
  c.sampling.trajectories = 2000;
  out.push(Preset { name: "zd_subaging", anchor: ZD_SUBAGING, config: c });

  let mut c = base("torus_aging", ExperimentKind::Aging, TORUS, "torus2:7", 0.5);
  c.scales.gamma = Some(0.1);
  c.sampling.trajectories = 2000;
  out.push(Preset { name: "torus_aging", anchor: TORUS, config: c });

  let mut c = base("rem_aging", ExperimentKind::Aging, REM, "hypercube:16", 0.9);
  c.thetas = vec![1.0];
  c.law = LawConfig { kind: "rem".into(), beta: Some(rem_beta(0.9, 0.8)), value: None };
  c.sampling.trajectories = 2000;
  out.push(Preset { name: "rem_aging", anchor: REM, config: c });

  let mut c = base("fk_limit", ExperimentKind::Fk, FK, "z", 0.5);
  c.functions = vec![];
  c.thetas = vec![];
  c.scales.times = vec![1.0];
  c.scales.xi2 = vec![0.5, 1.0];
  c.scales.dim = Some(2);
  c.sampling.trajectories = 100_000;
  out.push(Preset { name: "fk_limit", anchor: FK, config: c });

  let mut c = base("arcsine", ExperimentKind::Arcsine, ARCSINE, "z", 0.5);
  c.functions = vec![];
  c.thetas = vec![0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 9.0];
  c.scales.delta = Some(1e-4);
  c.sampling.trajectories = 100_000;
  out.push(Preset { name: "arcsine", anchor: ARCSINE, config: c });

  out
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
  preset_catalog().into_iter().find(|p| p.name == name).map(|p| p.config).ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))
}
