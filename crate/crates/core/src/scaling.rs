//! Scaling-limit objects: the FIN diffusion through Stone's discrete rates,
//! fractional kinetics, scale functions, limit formulas and clock rescaling.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::exec::par_map;
use crate::graphs::{Graph, Vertex};
use crate::heavy_tails::{seed_schedule, DepthLaw, Role, SeededStream};
use crate::landscape::TrapLandscape;
use crate::levy::inverse_subordinator_sample;
use crate::special::{gamma, GaussRule};
use crate::stats::{bernoulli_stderr, mean_stderr};
use crate::walker::WalkerState;

/// Poisson atoms (x_i, v_i) of the FIN speed measure on [−X, X] with v ≥ v_min.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomEnvironment {
  pub alpha: f64,
  pub window: f64,
  pub v_min: f64,
  /// Sorted by position.
  pub atoms: Vec<(f64, f64)>,
}

fn poisson_count(mean: f64, stream: &mut SeededStream) -> usize {
  if mean <= 0.0 {
    return 0;
  }
  Poisson::new(mean).map(|p| p.sample(stream) as usize).unwrap_or(0)
}

/// Poisson atoms with intensity dx · α v^(−1−α) dv on [−X, X] × [v_min, ∞).
pub fn sample_fin_environment(alpha: f64, window: f64, v_min: f64, stream: &mut SeededStream) -> Result<AtomEnvironment> {
  check_alpha(alpha)?;
  if !(window > 0.0 && v_min > 0.0) {
    return Err(Error::param("window, v_min", "must be positive"));
  }
  let count = poisson_count(2.0 * window * v_min.powf(-alpha), stream);
  let mut atoms: Vec<(f64, f64)> = (0..count)
    .map(|_| {
      let x = window * (2.0 * stream.uniform() - 1.0);
      (x, v_min * stream.uniform().powf(-1.0 / alpha))
    })
    .collect();
  atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
  Ok(AtomEnvironment { alpha, window, v_min, atoms })
}

impl AtomEnvironment {
  pub fn len(&self) -> usize {
    self.atoms.len()
  }

  pub fn is_empty(&self) -> bool {
    self.atoms.is_empty()
  }

  /// Doubles the window, revealing fresh atoms on the two new strips.
  /// Returns how many atoms were inserted left of every old atom.
  ///
  /// Exact: the Poisson process on the new strips is independent of the
  /// atoms revealed so far.
  pub fn extend(&mut self, stream: &mut SeededStream) -> usize {
    let old = self.window;
    let new = 2.0 * old;
    let rate = self.v_min.powf(-self.alpha);
    let mut left = Vec::new();
    let mut right = Vec::new();
    for side in [&mut left, &mut right] {
      let count = poisson_count((new - old) * rate, stream);
      for _ in 0..count {
        let x = old + (new - old) * stream.uniform();
        side.push((x, self.v_min * stream.uniform().powf(-1.0 / self.alpha)));
      }
    }
    let shift = left.len();
    let mut atoms: Vec<(f64, f64)> = left.into_iter().map(|(x, v)| (-x, v)).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    atoms.extend_from_slice(&self.atoms);
    right.sort_by(|a, b| a.0.total_cmp(&b.0));
    atoms.extend(right);
    self.atoms = atoms;
    self.window = new;
    shift
  }
}

/// Tabulated scale function S on the integers lo..=hi with S(0) = 0 and
/// S(x+1) − S(x) = r_x = ½ ν_a^(−1) τ_x^(−a) τ_(x+1)^(−a).
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleFunction {
  pub lo: i64,
  pub values: Vec<f64>,
}

impl ScaleFunction {
  pub fn from_landscape(ls: &TrapLandscape, a: f64, lo: i64, hi: i64) -> Result<Self> {
    if ls.graph() != &Graph::LineZ {
      return Err(Error::param("landscape", "scale functions live on ℤ"));
    }
    if !(lo <= 0 && hi >= 0 && lo < hi) {
      return Err(Error::param("range", "need lo ≤ 0 ≤ hi with lo < hi"));
    }
    let nu = ls.nu();
    let r = |x: i64| {
      let (p, q) = (ls.depth(Graph::line_vertex(x)), ls.depth(Graph::line_vertex(x + 1)));
      0.5 / nu * p.powf(-a) * q.powf(-a)
    };
    let mut values = vec![0.0; (hi - lo + 1) as usize];
    let zero = (-lo) as usize;
    for i in zero + 1..values.len() {
      values[i] = values[i - 1] + r(lo + i as i64 - 1);
    }
    for i in (0..zero).rev() {
      values[i] = values[i + 1] - r(lo + i as i64);
    }
    Ok(Self { lo, values })
  }

  /// S(x), linear between integers.
  pub fn eval(&self, x: f64) -> f64 {
    let p = (x - self.lo as f64).clamp(0.0, (self.values.len() - 1) as f64);
    let i = (p.floor() as usize).min(self.values.len() - 2);
    let f = p - i as f64;
    self.values[i] + f * (self.values[i + 1] - self.values[i])
  }
}

/// One Stone step from interior atom `i`.
///
/// The sojourn is w_i times the Brownian local time at y_i before hitting
/// a neighbour, exponential with mean 2 g₋ g₊ / (g₋ + g₊) in scale
/// coordinates. The exit goes to y_(i−1) with probability g₊ / (g₋ + g₊),
/// so the nearer neighbour is the likelier one (gambler's ruin).
pub fn quasi_diffusion_step(env: &AtomEnvironment, scale: Option<&ScaleFunction>, i: usize, stream: &mut SeededStream) -> Result<(usize, f64)> {
  if i == 0 || i + 1 >= env.atoms.len() {
    return Err(Error::WindowExhausted(i));
  }
  let s = |x: f64| scale.map_or(x, |sf| sf.eval(x));
  let (left, mid, right) = (s(env.atoms[i - 1].0), s(env.atoms[i].0), s(env.atoms[i + 1].0));
  let (gl, gr) = (mid - left, right - mid);
  let sojourn = env.atoms[i].1 * 2.0 * gl * gr / (gl + gr) * stream.exponential();
  let next = if stream.uniform() * (gl + gr) < gr { i - 1 } else { i + 1 };
  Ok((next, sojourn))
}

/// Walker on a lazily extended FIN environment.
struct FinWalker<'a> {
  env: &'a mut AtomEnvironment,
  env_stream: &'a mut SeededStream,
}

impl FinWalker<'_> {
  /// Extends until `i` is interior; returns the shifted index.
  fn interior(&mut self, mut i: usize) -> usize {
    while i == 0 || i + 1 >= self.env.atoms.len() {
      i += self.env.extend(self.env_stream);
    }
    i
  }

  /// First atom hit by Brownian motion started at 0.
  fn entry_atom(&mut self, stream: &mut SeededStream) -> usize {
    loop {
      let j = self.env.atoms.partition_point(|a| a.0 <= 0.0);
      if j > 0 && j < self.env.atoms.len() {
        let (l, r) = (self.env.atoms[j - 1].0, self.env.atoms[j].0);
        return if stream.uniform() * (r - l) < -l { j } else { j - 1 };
      }
      self.env.extend(self.env_stream);
    }
  }

  fn local_time(&self, i: usize, stream: &mut SeededStream) -> f64 {
    let (l, m, r) = (self.env.atoms[i - 1].0, self.env.atoms[i].0, self.env.atoms[i + 1].0);
    let (gl, gr) = (m - l, r - m);
    2.0 * gl * gr / (gl + gr) * stream.exponential()
  }

  fn direction(&self, i: usize, stream: &mut SeededStream) -> usize {
    let (l, m, r) = (self.env.atoms[i - 1].0, self.env.atoms[i].0, self.env.atoms[i + 1].0);
    let (gl, gr) = (m - l, r - m);
    if stream.uniform() * (gl + gr) < gr {
      i - 1
    } else {
      i + 1
    }
  }
}

/// Settings of a FIN two-time experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinConfig {
  pub alpha: f64,
  /// θ grid; Z is compared at times 1 and 1 + θ.
  pub thetas: Vec<f64>,
  pub replicas: u64,
  /// Initial window half-width; doubled on demand.
  pub window: f64,
  pub v_min: f64,
  /// Extra depth cutoffs (≥ v_min) simulated on the same Brownian path.
  pub extra_cutoffs: Vec<f64>,
  pub forks: bool,
  pub master_seed: u64,
  pub threads: usize,
}

impl FinConfig {
  pub fn new(alpha: f64, thetas: Vec<f64>, replicas: u64, master_seed: u64) -> Self {
    Self { alpha, thetas, replicas, window: 4.0, v_min: 1e-3, extra_cutoffs: Vec::new(), forks: true, master_seed, threads: 0 }
  }
}

/// Bernoulli estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
  pub value: f64,
  pub stderr: f64,
  pub successes: u64,
  pub trials: u64,
}

impl Frequency {
  pub fn from_counts(successes: u64, trials: u64) -> Self {
    let value = successes as f64 / trials as f64;
    Self { value, stderr: bernoulli_stderr(value, trials), successes, trials }
  }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinTwoTime {
  pub thetas: Vec<f64>,
  /// R₁(θ) per θ at cutoff v_min.
  pub r1: Vec<Frequency>,
  /// Rq(θ) per θ at cutoff v_min (empty without forks).
  pub rq: Vec<Frequency>,
  /// ρ({Z(1)}) samples at cutoff v_min.
  pub f_samples: Vec<f64>,
  /// R₁(θ) per extra cutoff, `[cutoff][θ]`, on the same Brownian paths.
  pub r1_extra: Vec<Vec<Frequency>>,
  /// Z(1 + θ) positions at cutoff v_min, `[θ][replica]`.
  pub positions: Vec<Vec<f64>>,
  /// Paired differences of collision indicators, extra cutoff minus base.
  pub r1_extra_diff: Vec<Vec<(f64, f64)>>,
}

struct FinReplica {
  same: Vec<Vec<bool>>,
  collide: Vec<bool>,
  depth_at_one: f64,
  positions: Vec<f64>,
}

fn fin_replica(cfg: &FinConfig, idx: u64, times: &[f64], cutoffs: &[f64]) -> FinReplica {
  let mut env_stream = seed_schedule(cfg.master_seed, idx, Role::Environment);
  let mut walk = seed_schedule(cfg.master_seed, idx, Role::Trajectory);
  let mut env = sample_fin_environment(cfg.alpha, cfg.window, cfg.v_min, &mut env_stream).expect("validated config");
  let mut fw = FinWalker { env: &mut env, env_stream: &mut env_stream };
  let mut i = fw.entry_atom(&mut walk);
  let nl = cutoffs.len();
  let nt = times.len();
  // Per cutoff: clock and the atom position seen at each target time.
  let mut clocks = vec![0.0f64; nl];
  let mut hit: Vec<Vec<Option<f64>>> = vec![vec![None; nt]; nl];
  let mut next_time = vec![0usize; nl];
  let mut depth_at_one = f64::NAN;
  let mut fork_start: Option<(usize, f64)> = None;
  while next_time.iter().any(|&k| k < nt) {
    i = fw.interior(i);
    let (x, v) = fw.env.atoms[i];
    let ell = fw.local_time(i, &mut walk);
    for l in 0..nl {
      if v < cutoffs[l] {
        continue;
      }
      let end = clocks[l] + v * ell;
      while next_time[l] < nt && times[next_time[l]] < end {
        let k = next_time[l];
        hit[l][k] = Some(x);
        if l == 0 && k == 0 {
          depth_at_one = v;
          fork_start = Some((i, x));
        }
        next_time[l] += 1;
      }
      clocks[l] = end;
    }
    i = fw.direction(i, &mut walk);
  }
  let same = (0..nl).map(|l| (1..nt).map(|k| hit[l][k] == hit[l][0]).collect()).collect();
  let positions = (1..nt).map(|k| hit[0][k].unwrap()).collect();

  let mut collide = Vec::new();
  if cfg.forks {
    let (i0, _) = fork_start.expect("time 1 is always reached");
    let mut ends = Vec::new();
    for role in [Role::ForkA, Role::ForkB] {
      let mut s = seed_schedule(cfg.master_seed, idx, role);
      let mut j = i0;
      // Residual local time at the current atom is again exponential.
      let mut clock = times[0];
      let mut out = vec![None; nt - 1];
      let mut k = 1;
      loop {
        j = fw.interior(j);
        let (x, v) = fw.env.atoms[j];
        let end = clock + v * fw.local_time(j, &mut s);
        while k < nt && times[k] < end {
          out[k - 1] = Some(x);
          k += 1;
        }
        if k >= nt {
          break;
        }
        clock = end;
        j = fw.direction(j, &mut s);
      }
      ends.push(out);
    }
    collide = (0..nt - 1).map(|k| ends[0][k] == ends[1][k]).collect();
  }
  FinReplica { same, collide, depth_at_one, positions }
}

/// R₁(θ) = E P[Z(1+θ) = Z(1) | ρ], Rq(θ) by forked continuations, and
/// samples of ρ({Z(1)}), one fresh environment per replica.
pub fn fin_two_time(cfg: &FinConfig) -> Result<FinTwoTime> {
  check_alpha(cfg.alpha)?;
  if cfg.replicas == 0 || cfg.thetas.is_empty() || cfg.thetas.iter().any(|t| !(*t >= 0.0)) {
    return Err(Error::param("fin", "need replicas ≥ 1 and a nonempty θ grid of values ≥ 0"));
  }
  if cfg.extra_cutoffs.iter().any(|c| !(*c >= cfg.v_min)) {
    return Err(Error::param("extra_cutoffs", "must be ≥ v_min"));
  }
  let mut order: Vec<usize> = (0..cfg.thetas.len()).collect();
  order.sort_by(|&a, &b| cfg.thetas[a].total_cmp(&cfg.thetas[b]));
  let mut times = vec![1.0];
  times.extend(order.iter().map(|&k| 1.0 + cfg.thetas[k]));
  let mut cutoffs = vec![cfg.v_min];
  cutoffs.extend_from_slice(&cfg.extra_cutoffs);
  let reps = par_map(cfg.replicas, cfg.threads, |i| fin_replica(cfg, i, &times, &cutoffs));

  let nth = cfg.thetas.len();
  let n = cfg.replicas;
  let unsort = |sorted: Vec<Frequency>| {
    let mut out = vec![sorted[0]; nth];
    for (k, &i) in order.iter().enumerate() {
      out[i] = sorted[k];
    }
    out
  };
  let level = |l: usize| unsort((0..nth).map(|k| Frequency::from_counts(reps.iter().filter(|r| r.same[l][k]).count() as u64, n)).collect());
  let r1 = level(0);
  let r1_extra = (1..cutoffs.len()).map(level).collect();
  let r1_extra_diff = (1..cutoffs.len())
    .map(|l| {
      let sorted: Vec<(f64, f64)> = (0..nth)
        .map(|k| {
          let d: Vec<f64> = reps.iter().map(|r| r.same[l][k] as u8 as f64 - r.same[0][k] as u8 as f64).collect();
          mean_stderr(&d)
        })
        .collect();
      let mut out = vec![(0.0, 0.0); nth];
      for (k, &i) in order.iter().enumerate() {
        out[i] = sorted[k];
      }
      out
    })
    .collect();
  let rq =
    if cfg.forks { unsort((0..nth).map(|k| Frequency::from_counts(reps.iter().filter(|r| r.collide[k]).count() as u64, n)).collect()) } else { Vec::new() };
  let mut positions = vec![Vec::new(); nth];
  for (k, &i) in order.iter().enumerate() {
    positions[i] = reps.iter().map(|r| r.positions[k]).collect();
  }
  Ok(FinTwoTime { thetas: cfg.thetas.clone(), r1, rq, f_samples: reps.iter().map(|r| r.depth_at_one).collect(), r1_extra, positions, r1_extra_diff })
}

/// Z(t) samples, one environment per replica.
pub fn fin_position_samples(alpha: f64, t: f64, replicas: u64, v_min: f64, master_seed: u64, threads: usize) -> Result<Vec<f64>> {
  check_alpha(alpha)?;
  if !(t > 0.0) {
    return Err(Error::param("t", "must be positive"));
  }
  let mut cfg = FinConfig::new(alpha, vec![0.0], replicas, master_seed);
  cfg.v_min = v_min;
  cfg.forks = false;
  cfg.threads = threads;
  cfg.window = 4.0 * t.powf(alpha / (1.0 + alpha));
  let times = [t, t];
  let reps = par_map(replicas, threads, |i| fin_replica(&cfg, i, &times, &[v_min]));
  Ok(reps.iter().map(|r| r.positions[0]).collect())
}

/// g_a(λ) = E exp(−λ ν_a τ^a).
pub fn laplace_g(a: f64, lambda: f64, nu_a: f64, law: &DepthLaw) -> f64 {
  if lambda == 0.0 {
    return 1.0;
  }
  // τ = τ(p) at tail probability p = e^(−y).
  let f = |y: f64| (-lambda * nu_a * law.depth_at_tail((-y).exp()).powf(a) - y).exp();
  GaussRule::new(20).integrate(f, 0.0, 45.0, 90)
}

/// Π_{1,a}(θ) = ∫ g_a²(θ u^(a−1)) dF(u) with F the empirical law of `f_samples`.
pub fn subaging_limit_pi(a: f64, theta: f64, f_samples: &[f64], nu_a: f64, law: &DepthLaw) -> Result<f64> {
  if f_samples.is_empty() {
    return Err(Error::InsufficientData("no F samples".into()));
  }
  if theta == 0.0 {
    return Ok(1.0);
  }
  let sum: f64 = if a == 0.0 {
    f_samples.iter().map(|u| (-2.0 * nu_a * theta / u).exp()).sum()
  } else {
    f_samples.iter().map(|u| laplace_g(a, theta * u.powf(a - 1.0), nu_a, law).powi(2)).sum()
  };
  Ok(sum / f_samples.len() as f64)
}

/// Ψ_d(t) = B_d(T(t)) with E e^(iξ·B_d(u)) = e^(−|ξ|²u), i.e. √(2T) times a
/// standard normal vector, so that E e^(iξ·Ψ_d(t)) = E_α(−|ξ|² t^α).
pub fn sample_fractional_kinetics(alpha: f64, d: usize, t: f64, stream: &mut SeededStream) -> Result<Vec<f64>> {
  if d < 1 {
    return Err(Error::param("d", "must be at least 1"));
  }
  let tt = inverse_subordinator_sample(alpha, t, stream)?;
  let scale = (2.0 * tt).sqrt();
  Ok((0..d).map(|_| scale * stream.normal()).collect())
}

/// G_3(0) = (1/π³) ∫_[0,π]³ dk / (1 − (cos k₁ + cos k₂ + cos k₃)/3).
///
/// The k₃ integral is done in closed form; the remaining 1/|k| singularity
/// is removed by a Duffy split of the square into two symmetric triangles.
pub fn lattice_green_3(order: usize) -> f64 {
  let rule = GaussRule::new(order);
  let panels = 4;
  let inner = |u: f64| {
    rule.integrate(
      |v| {
        let (k1, k2) = (u, u * v);
        let b = 2.0 * ((k1 / 2.0).sin().powi(2) + (k2 / 2.0).sin().powi(2)) / 3.0;
        u / (b * (b + 2.0 / 3.0)).sqrt()
      },
      0.0,
      1.0,
      panels,
    )
  };
  2.0 / (PI * PI) * rule.integrate(inner, 0.0, PI, panels)
}

/// G_d(0) for d ≥ 3 as ∫_0^∞ (e^(−t/d) I_0(t/d))^d dt.
pub fn lattice_green(d: u32) -> Result<f64> {
  static G3: OnceLock<f64> = OnceLock::new();
  match d {
    0..=2 => Err(Error::param("d", "the lattice walk is recurrent for d ≤ 2")),
    3 => Ok(*G3.get_or_init(|| lattice_green_3(32))),
    _ => Ok(green_bessel(d)),
  }
}

/// e^(−x) I_0(x).
pub(crate) fn scaled_bessel_i0(x: f64) -> f64 {
  if x < 20.0 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
      term *= q / (k * k) as f64;
      sum += term;
      if term < 1e-17 * sum {
        break;
      }
    }
    sum * (-x).exp()
  } else {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..30 {
      let kf = k as f64;
      let next = term * (2.0 * kf - 1.0).powi(2) / (8.0 * kf * x);
      if next > term {
        break;
      }
      term = next;
      sum += term;
    }
    sum / (2.0 * PI * x).sqrt()
  }
}

fn green_bessel(d: u32) -> f64 {
  let df = d as f64;
  let f = |t: f64| scaled_bessel_i0(t / df).powi(d as i32);
  let cut = 4000.0;
  let rule = GaussRule::new(20);
  let mut body = 0.0;
  let mut a = 0.0f64;
  let mut h = 0.5;
  while a < cut {
    let b = (a + h).min(cut);
    body += rule.integrate(f, a, b, 1);
    a = b;
    h *= 1.3;
  }
  // Tail from the two-term asymptotic (d/(2πt))^(d/2) (1 + d²/(8t)).
  let c = (df / (2.0 * PI)).powf(df / 2.0);
  let p = df / 2.0;
  let tail = c * (cut.powf(1.0 - p) / (p - 1.0) + df * df / 8.0 * cut.powf(-p) / p);
  body + tail
}

/// C_2 = √(2π^(1−α)Γ(1−α)Γ(1+α)); C_d = √(d G_d(0)^α Γ(1−α)Γ(1+α)) for d ≥ 3.
pub fn scaling_constant_c(alpha: f64, d: u32) -> Result<f64> {
  check_alpha(alpha)?;
  let gg = gamma(1.0 - alpha) * gamma(1.0 + alpha);
  match d {
    0 | 1 => Err(Error::param("d", "scaling constants are defined for d ≥ 2")),
    2 => Ok((2.0 * PI.powf(1.0 - alpha) * gg).sqrt()),
    _ => Ok((d as f64 * lattice_green(d)?.powf(alpha) * gg).sqrt()),
  }
}

/// Which clock to rescale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClockFamily {
  /// S_n(⌊s n^(κα)/c_α⌋)/n^κ with c_α = Γ(1+α)Γ(1−α), Pareto depths.
  Complete { kappa: f64 },
  /// S(⌊C_d^(−2) f(n)² s⌋)/n on ℤ^d.
  Lattice { d: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockCheckRow {
  pub n: f64,
  pub steps: u64,
  /// Monte Carlo E exp(−λ · rescaled clock).
  pub estimate: f64,
  pub stderr: f64,
  pub target: f64,
  pub gap: f64,
}

/// f(n) on ℤ^d: n^(α/2)(log n)^((1−α)/2) for d = 2, n^(α/2) for d ≥ 3.
pub fn lattice_f(alpha: f64, d: u32, n: f64) -> f64 {
  if d == 2 {
    n.powf(alpha / 2.0) * n.ln().powf((1.0 - alpha) / 2.0)
  } else {
    n.powf(alpha / 2.0)
  }
}

/// One-marginal Laplace transform of the rescaled clock at (s, λ) against
/// e^(−sλ^α), for each n of the grid.
pub fn clock_rescaling_check(family: ClockFamily, alpha: f64, n_grid: &[f64], s: f64, lambda: f64, replicas: u64, seed: u64) -> Result<Vec<ClockCheckRow>> {
  check_alpha(alpha)?;
  let law = DepthLaw::pareto(alpha)?;
  let target = (-s * lambda.powf(alpha)).exp();
  let mut rows = Vec::new();
  for (gi, &n) in n_grid.iter().enumerate() {
    let (ls, steps, norm) = match family {
      ClockFamily::Complete { kappa } => {
        let g = Graph::complete(n as u64)?;
        let ls = TrapLandscape::with_preset_nu(g, law, seed.wrapping_add(gi as u64), 0.0)?;
        let c = gamma(1.0 + alpha) * gamma(1.0 - alpha);
        (ls, (s * n.powf(kappa * alpha) / c).floor() as u64, n.powf(kappa))
      }
      ClockFamily::Lattice { d } => {
        let g = Graph::lattice(d)?;
        let ls = TrapLandscape::with_preset_nu(g, law, seed.wrapping_add(gi as u64), 0.0)?;
        let c = scaling_constant_c(alpha, d)?;
        (ls, (lattice_f(alpha, d, n).powi(2) * s / (c * c)).floor() as u64, n)
      }
    };
    let uniform_start = matches!(family, ClockFamily::Complete { .. });
    let vals = par_map(replicas, 0, |i| {
      let mut stream = seed_schedule(seed, i, Role::Trajectory);
      let start = if uniform_start { Vertex(stream.below(n as u64)) } else { ls.graph().origin() };
      let mut w = WalkerState::start(&ls, 0.0, start, stream);
      for _ in 0..steps {
        w.step(&ls, 0.0);
      }
      (-lambda * w.clock / norm).exp()
    });
    let (estimate, stderr) = mean_stderr(&vals);
    rows.push(ClockCheckRow { n, steps, estimate, stderr, target, gap: (estimate - target).abs() });
  }
  Ok(rows)
}
