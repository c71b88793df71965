//! Subordinators: stable increments, compound-Poisson paths, the generalised
//! arcsine law, the Mittag-Leffler function and inverse subordinators.
//!
//! Stable laws use the Laplace convention E e^(−λV(t)) = e^(−t c λ^α), whose
//! Lévy measure is c α/Γ(1−α) x^(−1−α) dx.

use std::f64::consts::PI;

use crate::error::{check_alpha, Error, Result};
use crate::heavy_tails::SeededStream;
use crate::landscape::TrapLandscape;
use crate::special::{gamma, ln_gamma, GaussRule};

/// One-sided α-stable V(t) with E e^(−λV(t)) = e^(−tλ^α), by Kanter's representation.
pub fn sample_stable_increment(alpha: f64, t: f64, stream: &mut SeededStream) -> Result<f64> {
  check_alpha(alpha)?;
  if !(t > 0.0) {
    return Err(Error::param("t", "must be positive"));
  }
  Ok(t.powf(1.0 / alpha) * stable_unit(alpha, stream))
}

#[inline]
pub(crate) fn stable_unit(alpha: f64, stream: &mut SeededStream) -> f64 {
  let u = PI * stream.uniform();
  let w = stream.exponential();
  let a = ((alpha * u).sin() / u.sin()).powf(1.0 / (1.0 - alpha)) * ((1.0 - alpha) * u).sin() / (alpha * u).sin();
  (a / w).powf((1.0 - alpha) / alpha)
}

/// A Lévy measure on (0, ∞) without drift.
#[derive(Clone, Debug, PartialEq)]
pub enum LevyMeasureSpec {
  /// c α/Γ(1−α) x^(−1−α) dx; infinite mass.
  Stable { alpha: f64, c: f64 },
  /// The stable density restricted to [lower, upper).
  TruncatedStable { alpha: f64, c: f64, lower: f64, upper: f64 },
  /// weight · Σ_z z^(−1) e^(−u/z) du, a mixture of exponential jump laws.
  ExponentialMixture { scales: Vec<f64>, weight: f64 },
}

impl LevyMeasureSpec {
  /// The complete-graph limit normalization αΓ(1+α) x^(−1−α), i.e. c = Γ(1+α)Γ(1−α).
  pub fn complete_graph_stable(alpha: f64, lower: f64, upper: f64) -> Result<Self> {
    check_alpha(alpha)?;
    let spec = Self::TruncatedStable { alpha, c: gamma(1.0 + alpha) * gamma(1.0 - alpha), lower, upper };
    spec.validate()?;
    Ok(spec)
  }

  /// Lévy measure of the rescaled clock S_n(· n^(κα))/n^κ restricted to the
  /// deep traps of a complete-graph landscape: jumps τ_x e / n^κ at rate
  /// n^(κα) with x uniform over the n vertices.
  pub fn complete_graph_empirical(ls: &TrapLandscape, kappa: f64, eps: f64, m: f64) -> Result<Self> {
    let (alpha, n) = match (ls.law(), ls.graph().vertex_count()) {
      (crate::heavy_tails::DepthLaw::Pareto { alpha }, Some(n)) => (*alpha, n as f64),
      _ => return Err(Error::param("landscape", "needs a finite graph with Pareto depths")),
    };
    let g = n.powf(kappa);
    let top = ls.top_set(eps, m, g)?;
    let scales = top.members.iter().map(|v| ls.depth(*v) / g).collect();
    Ok(Self::ExponentialMixture { scales, weight: n.powf(alpha * kappa - 1.0) })
  }

  fn validate(&self) -> Result<()> {
    match *self {
      Self::Stable { alpha, c } | Self::TruncatedStable { alpha, c, .. } => {
        check_alpha(alpha)?;
        if !(c > 0.0) {
          return Err(Error::param("c", "must be positive"));
        }
        if let Self::TruncatedStable { lower, upper, .. } = *self {
          if !(lower > 0.0 && upper > lower) {
            return Err(Error::param("lower, upper", "need 0 < lower < upper"));
          }
        }
        Ok(())
      }
      Self::ExponentialMixture { ref scales, weight } => {
        if !(weight >= 0.0) || scales.iter().any(|z| !(*z > 0.0)) {
          return Err(Error::param("scales", "weights and scales must be positive"));
        }
        Ok(())
      }
    }
  }

  fn stable_k(alpha: f64, c: f64) -> f64 {
    c * alpha / gamma(1.0 - alpha)
  }

  pub fn total_mass(&self) -> f64 {
    match *self {
      Self::Stable { .. } => f64::INFINITY,
      Self::TruncatedStable { alpha, c, lower, upper } => Self::stable_k(alpha, c) * (lower.powf(-alpha) - upper.powf(-alpha)) / alpha,
      Self::ExponentialMixture { ref scales, weight } => weight * scales.len() as f64,
    }
  }

  /// μ([u, ∞)) for u > 0.
  pub fn tail(&self, u: f64) -> f64 {
    match *self {
      Self::Stable { alpha, c } => Self::stable_k(alpha, c) * u.powf(-alpha) / alpha,
      Self::TruncatedStable { alpha, c, lower, upper } => {
        let u = u.max(lower);
        if u >= upper {
          0.0
        } else {
          Self::stable_k(alpha, c) * (u.powf(-alpha) - upper.powf(-alpha)) / alpha
        }
      }
      Self::ExponentialMixture { ref scales, weight } => weight * scales.iter().map(|z| (-u / z).exp()).sum::<f64>(),
    }
  }

  /// ∫ x μ(dx).
  pub fn first_moment(&self) -> f64 {
    match *self {
      Self::Stable { .. } => f64::INFINITY,
      Self::TruncatedStable { alpha, c, lower, upper } => Self::stable_k(alpha, c) * (upper.powf(1.0 - alpha) - lower.powf(1.0 - alpha)) / (1.0 - alpha),
      Self::ExponentialMixture { ref scales, weight } => weight * scales.iter().sum::<f64>(),
    }
  }

  /// Laplace exponent Φ(λ) = ∫ (1 − e^(−λx)) μ(dx).
  pub fn laplace_exponent(&self, lambda: f64) -> f64 {
    match *self {
      Self::Stable { alpha, c } => c * lambda.powf(alpha),
      Self::TruncatedStable { alpha, c, lower, upper } => {
        let k = Self::stable_k(alpha, c);
        let (a, b) = (lower.ln(), upper.ln());
        let panels = ((b - a) / 0.25).ceil().max(1.0) as usize;
        GaussRule::new(16).integrate(
          |w| {
            let x = w.exp();
            -(-lambda * x).exp_m1() * k * x.powf(-alpha)
          },
          a,
          b,
          panels,
        )
      }
      Self::ExponentialMixture { ref scales, weight } => weight * scales.iter().map(|z| lambda * z / (1.0 + lambda * z)).sum::<f64>(),
    }
  }

  /// One jump from the normalized measure μ / total_mass.
  pub fn sample_jump(&self, stream: &mut SeededStream) -> f64 {
    match *self {
      Self::Stable { .. } => f64::INFINITY,
      Self::TruncatedStable { alpha, lower, upper, .. } => {
        let (lo, hi) = (lower.powf(-alpha), upper.powf(-alpha));
        (hi + stream.uniform() * (lo - hi)).powf(-1.0 / alpha)
      }
      Self::ExponentialMixture { ref scales, .. } => scales[stream.below(scales.len() as u64) as usize] * stream.exponential(),
    }
  }
}

/// V(t) = Σ_{x_i ≤ t} s_i on [0, horizon].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubordinatorPath {
  pub times: Vec<f64>,
  pub sizes: Vec<f64>,
  pub horizon: f64,
}

impl SubordinatorPath {
  pub fn value_at(&self, t: f64) -> f64 {
    let k = self.times.partition_point(|&x| x <= t);
    self.sizes[..k].iter().sum()
  }

  pub fn terminal_value(&self) -> f64 {
    self.sizes.iter().sum()
  }

  /// T(s) = inf{t : V(t) > s}, if reached before the horizon.
  pub fn first_passage(&self, level: f64) -> Option<f64> {
    let mut v = 0.0;
    for (t, s) in self.times.iter().zip(&self.sizes) {
      v += s;
      if v > level {
        return Some(*t);
      }
    }
    None
  }
}

/// Compound-Poisson path with Poisson(Z_μ) jump times per unit time and
/// i.i.d. sizes from μ / Z_μ.
pub fn sample_compound_poisson_path(spec: &LevyMeasureSpec, horizon: f64, stream: &mut SeededStream) -> Result<SubordinatorPath> {
  spec.validate()?;
  let mass = spec.total_mass();
  if !mass.is_finite() {
    return Err(Error::param("spec", "compound-Poisson paths need a finite-mass measure"));
  }
  let mut path = SubordinatorPath { horizon, ..Default::default() };
  if mass == 0.0 {
    return Ok(path);
  }
  let mut t = 0.0;
  loop {
    t += stream.exponential() / mass;
    if t > horizon {
      return Ok(path);
    }
    path.times.push(t);
    path.sizes.push(spec.sample_jump(stream));
  }
}

/// V(T(x)−)/x for the stable subordinator with Φ(λ) = λ^α.
///
/// Jumps above δ are simulated exactly; jumps below δ are replaced by their
/// mean drift. When the drift alone reaches x, the true crossing is a jump
/// smaller than δ; the remaining gap x − V(T(x)−) then has density
/// ∝ r^(−α) on (0, δ), the small-gap behaviour of the undershoot law.
pub fn undershoot_sample(alpha: f64, x: f64, stream: &mut SeededStream, delta: f64) -> Result<f64> {
  check_alpha(alpha)?;
  if !(x > 0.0) {
    return Err(Error::param("x", "must be positive"));
  }
  if !(delta > 0.0 && delta < x) {
    return Err(Error::param("delta", format!("cutoff {delta} must lie in (0, x)")));
  }
  let g = gamma(1.0 - alpha);
  let big_rate = delta.powf(-alpha) / g;
  let drift = alpha * delta.powf(1.0 - alpha) / (g * (1.0 - alpha));
  let mut level = 0.0;
  loop {
    let after_drift = level + drift * stream.exponential() / big_rate;
    if after_drift >= x {
      return Ok(1.0 - delta * stream.uniform().powf(1.0 / (1.0 - alpha)) / x);
    }
    level = after_drift;
    let jump = delta * stream.uniform().powf(-1.0 / alpha);
    if level + jump > x {
      return Ok(level / x);
    }
    level += jump;
  }
}

/// Asl_α(u) = (sin απ/π) ∫_0^u s^(α−1)(1−s)^(−α) ds = I_u(α, 1−α).
pub fn asl_cdf(alpha: f64, u: f64) -> Result<f64> {
  check_alpha(alpha)?;
  if !(0.0..=1.0).contains(&u) {
    return Err(Error::param("u", format!("{u} is not in [0, 1]")));
  }
  crate::special::beta_inc_reg(alpha, 1.0 - alpha, u)
}

/// Probability that the stable subordinator jumps over [a, b]: Asl_α(a/b).
pub fn jump_over_probability(alpha: f64, a: f64, b: f64) -> Result<f64> {
  if !(a > 0.0 && a < b) {
    return Err(Error::param("a, b", format!("need 0 < a < b, got ({a}, {b})")));
  }
  asl_cdf(alpha, a / b)
}

/// |z| below which the power series is used for negative arguments.
pub const ML_SERIES_RADIUS: f64 = 1.0;

/// Mittag-Leffler E_α(z) = Σ z^m / Γ(1 + mα) for real z and α ∈ (0, 1].
///
/// Nonnegative z and |z| ≤ 1 use the series. For z < −1 the series cancels
/// catastrophically, so E_α(−x) = ∫_0^∞ e^(−r x^(1/α)) K_α(r) dr is evaluated
/// by the trapezoid rule in log variables, which converges geometrically for
/// this analytic integrand.
pub fn mittag_leffler(alpha: f64, z: f64) -> Result<f64> {
  if !(alpha > 0.0 && alpha <= 1.0) {
    return Err(Error::param("alpha", format!("{alpha} is not in (0, 1]")));
  }
  if !z.is_finite() {
    return Err(Error::param("z", "must be finite"));
  }
  if alpha == 1.0 {
    return Ok(z.exp());
  }
  if z >= 0.0 || z >= -ML_SERIES_RADIUS {
    return Ok(ml_series(alpha, z));
  }
  Ok(ml_negative_integral(alpha, -z))
}

fn ml_series(alpha: f64, z: f64) -> f64 {
  let mut sum = 0.0;
  let ln_abs = z.abs().ln();
  for m in 0..10_000 {
    let mf = m as f64;
    let ln_term = if m == 0 { 0.0 } else { mf * ln_abs } - ln_gamma(1.0 + mf * alpha);
    let mag = ln_term.exp();
    let term = if z < 0.0 && m % 2 == 1 { -mag } else { mag };
    sum += term;
    if m > 2 && mag < 1e-17 * sum.abs().max(1e-300) && mf * alpha > z.abs() {
      break;
    }
  }
  sum
}

/// E_α(−x) for x > 0 via v = α log r:
/// (sin απ / πα) ∫ exp(−t e^(v/α)) / (2 cosh v + 2 cos απ) dv with t = x^(1/α).
fn ml_negative_integral(alpha: f64, x: f64) -> f64 {
  let t = x.powf(1.0 / alpha);
  // Half-width of the analyticity strip, bounded by the poles at
  // ±i π(1−α) and by the sign change of Re e^(v/α) at ±i απ/2.
  let strip = 0.9 * (PI * (1.0 - alpha)).min(0.5 * PI * alpha);
  let h = 2.0 * PI * strip / 40.0;
  let v_hi = alpha * (745.0f64 / t).ln();
  let v_lo = -40.0;
  let (sin_ap, cos_ap) = ((alpha * PI).sin(), (alpha * PI).cos());
  let f = |v: f64| (-t * (v / alpha).exp()).exp() / (2.0 * v.cosh() + 2.0 * cos_ap);
  let n = ((v_hi - v_lo) / h).ceil() as usize;
  let mut sum = 0.0;
  for i in 0..=n {
    sum += f(v_lo + i as f64 * h);
  }
  sin_ap / (PI * alpha) * sum * h
}

/// T(s) = inf{t : V(t) > s} for Φ(λ) = λ^α, sampled as (s / V(1))^α since
/// P[T(s) ≤ t] = P[V(t) ≥ s] = P[t^(1/α) V(1) ≥ s].
pub fn inverse_subordinator_sample(alpha: f64, s: f64, stream: &mut SeededStream) -> Result<f64> {
  check_alpha(alpha)?;
  if !(s > 0.0) {
    return Err(Error::param("s", "must be positive"));
  }
  Ok((s / stable_unit(alpha, stream)).powf(alpha))
}

/// μ_ε^M([u, ∞)) = ∫_ε^M α z^(−α−1) e^(−u/z) dz; `m` may be infinite.
pub fn levy_tail_mu_eps_m(alpha: f64, u: f64, eps: f64, m: f64) -> Result<f64> {
  check_alpha(alpha)?;
  if !(eps >= 0.0 && m > eps && u >= 0.0) {
    return Err(Error::param("eps, M, u", format!("need 0 ≤ ε < M and u ≥ 0, got ({eps}, {m}, {u})")));
  }
  if u == 0.0 {
    if eps == 0.0 {
      return Ok(f64::INFINITY);
    }
    return Ok(eps.powf(-alpha) - if m.is_finite() { m.powf(-alpha) } else { 0.0 });
  }
  // In w = ln z the integrand is α e^(−αw) exp(−u e^(−w)): negligible below
  // ln u − ln 800, and with a closed-form tail beyond a large cutoff.
  let lo = if eps > 0.0 { eps.ln().max(u.ln() - 800f64.ln()) } else { u.ln() - 800f64.ln() };
  let (hi, tail) = if m.is_finite() {
    (m.ln(), 0.0)
  } else {
    let w = u.ln() + 40.0;
    let tail = (-alpha * w).exp() - u * alpha / (1.0 + alpha) * (-(1.0 + alpha) * w).exp();
    (w.max(lo), tail)
  };
  if hi <= lo {
    return Ok(tail);
  }
  let panels = ((hi - lo) / 0.5).ceil().max(1.0) as usize;
  let body = GaussRule::new(20).integrate(|w| alpha * (-alpha * w).exp() * (-u * (-w).exp()).exp(), lo, hi, panels);
  Ok(body + tail)
}
