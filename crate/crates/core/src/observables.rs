//! Monte Carlo estimators of the two-time functions Π, R, Rq and R′.
//!
//! One replica runs a single trajectory to t_w and then through every
//! window length of the plan in increasing order, so the outcomes of all
//! windows are coupled on the same event stream. Rq forks two independent
//! continuations at t_w.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::par_map;
use crate::graphs::{Graph, Vertex};
use crate::heavy_tails::{seed_schedule, Role};
use crate::landscape::{TopSet, TrapLandscape};
use crate::levy::asl_cdf;
use crate::stats::{bernoulli_stderr, linear_fit, mean_stderr, median, LinearFit};
use crate::walker::{default_start, WalkerState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoTimeFunction {
  /// No jump epoch inside [t_w, t_w + t].
  Pi,
  /// X(t_w) = X(t_w + t).
  R,
  /// Two independent continuations from X(t_w) meet at t_w + t.
  Rq,
  /// At most one new top vertex is entered during the window.
  Rprime,
}

impl TwoTimeFunction {
  pub const ALL: [TwoTimeFunction; 4] = [Self::Pi, Self::R, Self::Rq, Self::Rprime];

  pub fn name(&self) -> &'static str {
    match self {
      Self::Pi => "pi",
      Self::R => "r",
      Self::Rq => "rq",
      Self::Rprime => "rprime",
    }
  }

  pub fn parse(s: &str) -> Result<Self> {
    Self::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| Error::Config(format!("unknown two-time function `{s}`")))
  }

  fn slot(&self) -> usize {
    *self as usize
  }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
  /// One landscape, many trajectories.
  Quenched,
  /// A fresh landscape per landscape index, averaged.
  Averaged,
}

impl Mode {
  pub fn name(&self) -> &'static str {
    match self {
      Self::Quenched => "quenched",
      Self::Averaged => "averaged",
    }
  }
}

/// What breaks a no-jump window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoJumpRule {
  /// Any clock epoch, loops included.
  #[default]
  AnyEpoch,
  /// Only jumps that change the position; differs from `AnyEpoch` only on
  /// graphs with loops, by O(1/n) on `CompleteLoops`.
  PositionChange,
}

/// The deep-trap band [ε g_n, M g_n) used by R′.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopBand {
  pub eps: f64,
  pub m: f64,
  pub g_n: f64,
}

/// Replica layout and seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
  /// Landscape count; 1 in quenched mode.
  pub landscapes: u64,
  /// Trajectories per landscape.
  pub trajectories: u64,
  pub master_seed: u64,
  /// Added to every trajectory index; lets a quenched run reproduce one
  /// landscape's share of an averaged run.
  pub replica_offset: u64,
  /// Worker threads, 0 for the global pool.
  pub threads: usize,
}

impl Sampling {
  pub fn quenched(trajectories: u64, master_seed: u64) -> Self {
    Self { landscapes: 1, trajectories, master_seed, replica_offset: 0, threads: 0 }
  }

  pub fn averaged(landscapes: u64, trajectories: u64, master_seed: u64) -> Self {
    Self { landscapes, trajectories, master_seed, replica_offset: 0, threads: 0 }
  }

  pub fn replicas(&self) -> u64 {
    self.landscapes * self.trajectories
  }
}

/// The landscape seed used for landscape index `l` of an averaged run.
pub fn landscape_seed(base_seed: u64, l: u64) -> u64 {
  use rand::RngCore;
  seed_schedule(base_seed, l, Role::Landscape).next_u64()
}

/// Builds the landscapes of a run: the template itself when quenched.
pub fn ensemble(template: &TrapLandscape, mode: Mode, landscapes: u64) -> Result<Vec<TrapLandscape>> {
  match mode {
    Mode::Quenched => Ok(vec![template.clone()]),
    Mode::Averaged => (0..landscapes).map(|l| template.reseeded(landscape_seed(template.seed(), l))).collect(),
  }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTimeEstimate {
  pub function: TwoTimeFunction,
  pub t_w: f64,
  pub t: f64,
  pub mode: Mode,
  pub value: f64,
  pub stderr: f64,
  pub successes: u64,
  pub replicas: u64,
  pub landscape_seed: u64,
  pub trajectory_seed: u64,
}

impl TwoTimeEstimate {
  fn from_counts(function: TwoTimeFunction, t_w: f64, t: f64, mode: Mode, successes: u64, replicas: u64, seeds: (u64, u64)) -> Self {
    let value = successes as f64 / replicas as f64;
    Self { function, t_w, t, mode, value, stderr: bernoulli_stderr(value, replicas), successes, replicas, landscape_seed: seeds.0, trajectory_seed: seeds.1 }
  }

  /// Normal-approximation interval at `z` standard errors.
  pub fn interval(&self, z: f64) -> (f64, f64) {
    (self.value - z * self.stderr, self.value + z * self.stderr)
  }
}

/// A set of coupled windows after a common waiting time.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoTimePlan {
  pub a: f64,
  pub t_w: f64,
  /// Window lengths, nondecreasing and ≥ 0.
  pub ts: Vec<f64>,
  pub functions: Vec<TwoTimeFunction>,
  pub rule: NoJumpRule,
  pub top_band: Option<TopBand>,
  /// Start vertex. When `None`: uniform on the complete graph (drawn from
  /// the trajectory stream), the origin elsewhere.
  pub start: Option<Vertex>,
}

impl TwoTimePlan {
  pub fn new(a: f64, t_w: f64, ts: Vec<f64>, functions: Vec<TwoTimeFunction>) -> Self {
    Self { a, t_w, ts, functions, rule: NoJumpRule::default(), top_band: None, start: None }
  }

  fn validate(&self) -> Result<()> {
    if !(0.0..=1.0).contains(&self.a) {
      return Err(Error::param("a", format!("{} is not in [0, 1]", self.a)));
    }
    if !(self.t_w > 0.0) {
      return Err(Error::param("t_w", "must be positive"));
    }
    if self.ts.is_empty() || self.ts.iter().any(|t| !(*t >= 0.0)) || self.ts.windows(2).any(|w| w[1] < w[0]) {
      return Err(Error::param("t", "window lengths must be a nonempty nondecreasing list of values ≥ 0"));
    }
    if self.functions.is_empty() {
      return Err(Error::param("functions", "nothing to estimate"));
    }
    if self.functions.contains(&TwoTimeFunction::Rprime) && self.top_band.is_none() {
      return Err(Error::param("top", "R′ needs a deep-trap band"));
    }
    Ok(())
  }

  fn wants(&self, f: TwoTimeFunction) -> bool {
    self.functions.contains(&f)
  }
}

/// Outcomes of one replica: `[Π, R, Rq, R′]` per window.
pub type ReplicaOutcome = Vec<[bool; 4]>;

/// Runs one replica with trajectory index `idx`.
pub fn simulate_replica(ls: &TrapLandscape, top: Option<&TopSet>, plan: &TwoTimePlan, master_seed: u64, idx: u64) -> ReplicaOutcome {
  let a = plan.a;
  let t_w = plan.t_w;
  let mut stream = seed_schedule(master_seed, idx, Role::Trajectory);
  let start = plan.start.unwrap_or_else(|| default_start(ls.graph(), &mut stream));
  let mut w = WalkerState::start(ls, a, start, stream);
  let track_top = plan.wants(TwoTimeFunction::Rprime);
  let mut previous_top = start;
  if track_top {
    let top = top.expect("validated plan");
    w.advance_to_with(ls, a, t_w, |j| {
      if j.to != previous_top && top.contains(ls, j.to) {
        previous_top = j.to;
      }
    });
  } else {
    w.advance_to(ls, a, t_w);
  }
  let x_w = w.position;
  let mut forks = plan
    .wants(TwoTimeFunction::Rq)
    .then(|| (w.fork_at(ls, a, t_w, seed_schedule(master_seed, idx, Role::ForkA)), w.fork_at(ls, a, t_w, seed_schedule(master_seed, idx, Role::ForkB))));
  let mut any_jump = false;
  let mut moved = false;
  let mut entered = false;
  let mut out = Vec::with_capacity(plan.ts.len());
  for &t in &plan.ts {
    let end = t_w + t;
    w.advance_to_with(ls, a, end, |j| {
      any_jump = true;
      if j.to != j.from {
        moved = true;
      }
      if track_top && !entered && j.to != previous_top && top.is_some_and(|s| s.contains(ls, j.to)) {
        entered = true;
      }
    });
    let pi = match plan.rule {
      NoJumpRule::AnyEpoch => !any_jump,
      NoJumpRule::PositionChange => !moved,
    };
    let rq = match forks.as_mut() {
      Some((fa, fb)) => {
        fa.advance_to(ls, a, end);
        fb.advance_to(ls, a, end);
        fa.position == fb.position
      }
      None => false,
    };
    out.push([pi, w.position == x_w, rq, !entered]);
  }
  out
}

/// Estimates for every (function, window) of a plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTimeTable {
  /// Indexed `[window][function]` in the plan's function order.
  pub estimates: Vec<Vec<TwoTimeEstimate>>,
  /// Per-landscape frequencies, `[window][function][landscape]`.
  pub per_landscape: Vec<Vec<Vec<f64>>>,
}

impl TwoTimeTable {
  pub fn get(&self, window: usize, function: TwoTimeFunction) -> Option<&TwoTimeEstimate> {
    self.estimates.get(window)?.iter().find(|e| e.function == function)
  }

  /// Standard deviation of the per-landscape frequencies.
  pub fn landscape_dispersion(&self, window: usize, fi: usize) -> f64 {
    let xs = &self.per_landscape[window][fi];
    let (_, se) = mean_stderr(xs);
    se * (xs.len() as f64).sqrt()
  }
}

/// Runs a plan over an ensemble of landscapes.
pub fn run_two_time(template: &TrapLandscape, plan: &TwoTimePlan, sampling: &Sampling, mode: Mode) -> Result<TwoTimeTable> {
  plan.validate()?;
  if sampling.trajectories == 0 || sampling.landscapes == 0 {
    return Err(Error::param("replicas", "need at least one landscape and one trajectory"));
  }
  let n_land = match mode {
    Mode::Quenched => 1,
    Mode::Averaged => sampling.landscapes,
  };
  let per = sampling.trajectories;
  // Landscapes are built inside the map so that finite graphs never hold
  // more than a few depth tables at once.
  let outcomes = par_map(n_land, sampling.threads, |l| -> Result<Vec<ReplicaOutcome>> {
    let owned;
    let ls = match mode {
      Mode::Quenched => template,
      Mode::Averaged => {
        owned = template.reseeded(landscape_seed(template.seed(), l))?;
        &owned
      }
    };
    let top = match plan.top_band {
      Some(b) if plan.wants(TwoTimeFunction::Rprime) => {
        let top = ls.top_set(b.eps, b.m, b.g_n)?;
        if top.is_empty() {
          return Err(Error::InsufficientData("R′ is ill-posed on an empty top set".into()));
        }
        Some(top)
      }
      _ => None,
    };
    Ok(par_map(per, 0, |r| simulate_replica(ls, top.as_ref(), plan, sampling.master_seed, sampling.replica_offset + l * per + r)))
  })
  .into_iter()
  .collect::<Result<Vec<_>>>()?
  .concat();

  let nw = plan.ts.len();
  let mut estimates = Vec::with_capacity(nw);
  let mut per_landscape = Vec::with_capacity(nw);
  for k in 0..nw {
    let mut row = Vec::new();
    let mut disp = Vec::new();
    for f in &plan.functions {
      let mut counts = vec![0u64; n_land as usize];
      for (i, o) in outcomes.iter().enumerate() {
        if o[k][f.slot()] {
          counts[i / per as usize] += 1;
        }
      }
      let total: u64 = counts.iter().sum();
      row.push(TwoTimeEstimate::from_counts(*f, plan.t_w, plan.ts[k], mode, total, n_land * per, (template.seed(), sampling.master_seed)));
      disp.push(counts.iter().map(|c| *c as f64 / per as f64).collect());
    }
    estimates.push(row);
    per_landscape.push(disp);
  }
  Ok(TwoTimeTable { estimates, per_landscape })
}

#[allow(clippy::too_many_arguments)]
fn single(
  template: &TrapLandscape,
  function: TwoTimeFunction,
  a: f64,
  t_w: f64,
  t: f64,
  sampling: &Sampling,
  mode: Mode,
  rule: NoJumpRule,
  top_band: Option<TopBand>,
) -> Result<TwoTimeEstimate> {
  let mut plan = TwoTimePlan::new(a, t_w, vec![t], vec![function]);
  plan.rule = rule;
  plan.top_band = top_band;
  let table = run_two_time(template, &plan, sampling, mode)?;
  Ok(table.estimates[0][0].clone())
}

/// Π(t_w, t_w + t).
pub fn estimate_pi(ls: &TrapLandscape, a: f64, t_w: f64, t: f64, sampling: &Sampling, mode: Mode, rule: NoJumpRule) -> Result<TwoTimeEstimate> {
  single(ls, TwoTimeFunction::Pi, a, t_w, t, sampling, mode, rule, None)
}

/// R(t_w, t_w + t).
pub fn estimate_r(ls: &TrapLandscape, a: f64, t_w: f64, t: f64, sampling: &Sampling, mode: Mode) -> Result<TwoTimeEstimate> {
  single(ls, TwoTimeFunction::R, a, t_w, t, sampling, mode, NoJumpRule::default(), None)
}

/// Rq(t_w, t_w + t) by the two-fork collision estimator.
pub fn estimate_rq(ls: &TrapLandscape, a: f64, t_w: f64, t: f64, sampling: &Sampling, mode: Mode) -> Result<TwoTimeEstimate> {
  single(ls, TwoTimeFunction::Rq, a, t_w, t, sampling, mode, NoJumpRule::default(), None)
}

/// R′(t_w, t_w + t) for the deep-trap band `top`.
pub fn estimate_rprime(ls: &TrapLandscape, a: f64, top: TopBand, t_w: f64, t: f64, sampling: &Sampling) -> Result<TwoTimeEstimate> {
  single(ls, TwoTimeFunction::Rprime, a, t_w, t, sampling, Mode::Quenched, NoJumpRule::default(), Some(top))
}

/// Settings of an aging curve C(t_w, (1+θ) t_w).
#[derive(Clone, Debug, PartialEq)]
pub struct AgingConfig {
  pub a: f64,
  pub t_w: f64,
  pub thetas: Vec<f64>,
  pub function: TwoTimeFunction,
  pub rule: NoJumpRule,
  pub top_band: Option<TopBand>,
  /// Index of the reference law Asl_α.
  pub alpha: f64,
  pub mode: Mode,
  pub sampling: Sampling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgingCurve {
  pub t_w: f64,
  pub thetas: Vec<f64>,
  pub estimates: Vec<TwoTimeEstimate>,
  /// Asl_α(1/(1+θ)), evaluated analytically.
  pub reference: Vec<f64>,
}

pub fn aging_curve(template: &TrapLandscape, cfg: &AgingConfig) -> Result<AgingCurve> {
  if cfg.thetas.is_empty() {
    return Err(Error::param("theta", "grid is empty"));
  }
  let mut order: Vec<usize> = (0..cfg.thetas.len()).collect();
  order.sort_by(|&i, &j| cfg.thetas[i].total_cmp(&cfg.thetas[j]));
  let ts: Vec<f64> = order.iter().map(|&i| cfg.thetas[i] * cfg.t_w).collect();
  let mut plan = TwoTimePlan::new(cfg.a, cfg.t_w, ts, vec![cfg.function]);
  plan.rule = cfg.rule;
  plan.top_band = cfg.top_band;
  let table = run_two_time(template, &plan, &cfg.sampling, cfg.mode)?;
  let mut estimates = vec![None; cfg.thetas.len()];
  for (k, &i) in order.iter().enumerate() {
    estimates[i] = Some(table.estimates[k][0].clone());
  }
  let reference = cfg.thetas.iter().map(|th| asl_cdf(cfg.alpha, 1.0 / (1.0 + th))).collect::<Result<_>>()?;
  Ok(AgingCurve { t_w: cfg.t_w, thetas: cfg.thetas.clone(), estimates: estimates.into_iter().map(Option::unwrap).collect(), reference })
}

/// Depth and total jump rate at X(t) over a grid of times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubagingScan {
  pub a: f64,
  pub ts: Vec<f64>,
  /// τ_{X(t)} samples, `[time][replica]`.
  pub depths: Vec<Vec<f64>>,
  /// Total rate at X(t), `[time][replica]`.
  pub rates: Vec<Vec<f64>>,
}

/// Records depth and rate at X(t) for every t of an increasing grid.
pub fn subaging_scan(template: &TrapLandscape, a: f64, ts: &[f64], sampling: &Sampling, mode: Mode) -> Result<SubagingScan> {
  if ts.len() < 2 || ts.iter().any(|t| !(*t > 0.0)) || ts.windows(2).any(|w| w[1] <= w[0]) {
    return Err(Error::param("t grid", "need at least two increasing positive times"));
  }
  let landscapes = ensemble(template, mode, sampling.landscapes)?;
  let per = sampling.trajectories;
  let n = landscapes.len() as u64 * per;
  let rows = par_map(n, sampling.threads, |i| {
    let ls = &landscapes[(i / per) as usize];
    let stream = seed_schedule(sampling.master_seed, sampling.replica_offset + i, Role::Trajectory);
    let mut w = WalkerState::start(ls, a, ls.graph().origin(), stream);
    ts.iter()
      .map(|&t| {
        w.advance_to(ls, a, t);
        (ls.depth(w.position), ls.total_rate(a, w.position))
      })
      .collect::<Vec<_>>()
  });
  let mut depths = vec![Vec::with_capacity(n as usize); ts.len()];
  let mut rates = vec![Vec::with_capacity(n as usize); ts.len()];
  for row in rows {
    for (k, (d, r)) in row.into_iter().enumerate() {
      depths[k].push(d);
      rates[k].push(r);
    }
  }
  Ok(SubagingScan { a, ts: ts.to_vec(), depths, rates })
}

impl SubagingScan {
  /// Indices of times past the first decade of the grid.
  fn fit_range(&self) -> Vec<usize> {
    let t0 = self.ts[0];
    (0..self.ts.len()).filter(|&k| self.ts[k] >= 10.0 * t0 * (1.0 - 1e-12)).collect()
  }

  fn fit_log_median(&self, values: impl Fn(usize) -> Vec<f64>) -> Result<LinearFit> {
    let idx = self.fit_range();
    let x: Vec<f64> = idx.iter().map(|&k| self.ts[k].ln()).collect();
    let y: Vec<f64> = idx.iter().map(|&k| median(&values(k)).ln()).collect();
    linear_fit(&x, &y)
  }

  /// Slope of log median τ_{X(t)} against log t.
  pub fn depth_exponent(&self) -> Result<LinearFit> {
    self.fit_log_median(|k| self.depths[k].clone())
  }

  /// Slope of log median mean-sojourn 1/rate at X(t) against log t.
  pub fn sojourn_exponent(&self) -> Result<LinearFit> {
    self.fit_log_median(|k| self.rates[k].iter().map(|r| 1.0 / r).collect())
  }

  /// Π(t_k, t_k + s) as E[e^(−s·rate(X(t_k)))]: the residual sojourn at t_k is
  /// exponential by memorylessness, so this conditional expectation is an
  /// unbiased, lower-variance version of the no-jump frequency.
  pub fn pi_at(&self, k: usize, s: f64) -> (f64, f64) {
    let xs: Vec<f64> = self.rates[k].iter().map(|r| (-s * r).exp()).collect();
    mean_stderr(&xs)
  }

  /// Π(t, t + θ t^h) along the grid.
  pub fn pi_curve(&self, theta: f64, h: f64) -> Vec<(f64, f64, f64)> {
    (0..self.ts.len())
      .map(|k| {
        let (v, se) = self.pi_at(k, theta * self.ts[k].powf(h));
        (self.ts[k], v, se)
      })
      .collect()
  }

  /// Slope of log(1 − Π(t, t + θ t^γ)) against log θ at grid time `k`.
  pub fn short_scale_fit(&self, k: usize, gamma: f64, thetas: &[f64]) -> Result<LinearFit> {
    let scale = self.ts[k].powf(gamma);
    let x: Vec<f64> = thetas.iter().map(|th| th.ln()).collect();
    let y: Vec<f64> = thetas.iter().map(|th| (1.0 - self.pi_at(k, th * scale).0).ln()).collect();
    linear_fit(&x, &y)
  }

  /// Slope of log Π(t, t + θ t^γ) against log θ at grid time `k`.
  pub fn long_scale_fit(&self, k: usize, gamma: f64, thetas: &[f64]) -> Result<LinearFit> {
    let scale = self.ts[k].powf(gamma);
    let x: Vec<f64> = thetas.iter().map(|th| th.ln()).collect();
    let y: Vec<f64> = thetas.iter().map(|th| self.pi_at(k, th * scale).0.ln()).collect();
    linear_fit(&x, &y)
  }
}

pub use crate::stats::wilson_interval;

/// Whether the graph has loops, i.e. whether the no-jump rules differ.
pub fn has_loops(graph: &Graph) -> bool {
  matches!(graph, Graph::CompleteLoops { .. })
}
