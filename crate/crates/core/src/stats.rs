//! Small statistics toolkit: intervals, Kolmogorov–Smirnov tests, least squares.

use crate::error::{Error, Result};

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
  let n = xs.len() as f64;
  if xs.is_empty() {
    return (f64::NAN, f64::NAN);
  }
  let mean = xs.iter().sum::<f64>() / n;
  if xs.len() < 2 {
    return (mean, f64::NAN);
  }
  let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
  (mean, (var / n).sqrt())
}

/// Standard error √(v(1−v)/n) of a Bernoulli frequency.
pub fn bernoulli_stderr(v: f64, n: u64) -> f64 {
  (v * (1.0 - v) / n as f64).sqrt()
}

/// Inverse standard normal CDF (Acklam's rational approximation, one Newton step).
pub fn normal_quantile(p: f64) -> f64 {
  const A: [f64; 6] = [-3.969683028665376e1, 2.209460984245205e2, -2.759285104469687e2, 1.383_577_518_672_69e2, -3.066479806614716e1, 2.506628277459239];
  const B: [f64; 5] = [-5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2, 6.680131188771972e1, -1.328068155288572e1];
  const C: [f64; 6] = [-7.784894002430293e-3, -3.223964580411365e-1, -2.400758277161838, -2.549732539343734, 4.374664141464968, 2.938163982698783];
  const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
  let plow = 0.02425;

  if p < plow {
    let q = (-2.0 * p.ln()).sqrt();
    (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
  } else if p <= 1.0 - plow {
    let q = p - 0.5;
    let r = q * q;
    (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
  } else {
    let q = (-2.0 * (1.0 - p).ln()).sqrt();
    -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
  }
}

/// Wilson score interval for `successes` out of `trials` at two-sided `level`.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
  if trials == 0 {
    return Err(Error::param("trials", "must be at least 1"));
  }
  if successes > trials {
    return Err(Error::param("successes", "cannot exceed trials"));
  }
  if !(level > 0.0 && level < 1.0) {
    return Err(Error::param("level", format!("{level} is not in (0, 1)")));
  }
  let z = normal_quantile(0.5 + level / 2.0);
  let n = trials as f64;
  let p = successes as f64 / n;
  let z2 = z * z;
  let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
  Ok(((centre - half).max(0.0), (centre + half).min(1.0)))
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
  let mut xs = samples.to_vec();
  xs.sort_by(f64::total_cmp);
  let n = xs.len() as f64;
  let mut d: f64 = 0.0;
  for (i, x) in xs.iter().enumerate() {
    let f = cdf(*x);
    d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
  }
  d
}

/// Asymptotic Kolmogorov survival function Q(λ) = 2 Σ (−1)^(k−1) e^(−2k²λ²).
pub fn kolmogorov_survival(lambda: f64) -> f64 {
  if lambda < 0.2 {
    return 1.0;
  }
  let mut sum = 0.0;
  for k in 1..=100 {
    let k = k as f64;
    let term = (-2.0 * k * k * lambda * lambda).exp();
    sum += if k as i64 % 2 == 1 { term } else { -term };
    if term < 1e-17 {
      break;
    }
  }
  (2.0 * sum).clamp(0.0, 1.0)
}

/// p-value of a KS distance `d` at effective size `n_eff`.
pub fn ks_pvalue(d: f64, n_eff: f64) -> f64 {
  let s = n_eff.sqrt();
  kolmogorov_survival((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test: (distance, p-value).
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> (f64, f64) {
  let d = ks_statistic(samples, cdf);
  (d, ks_pvalue(d, samples.len() as f64))
}

/// Two-sample KS test: (distance, p-value).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
  let mut x = a.to_vec();
  let mut y = b.to_vec();
  x.sort_by(f64::total_cmp);
  y.sort_by(f64::total_cmp);
  let (n, m) = (x.len(), y.len());
  let (mut i, mut j) = (0, 0);
  let mut d: f64 = 0.0;
  while i < n && j < m {
    let v = x[i].min(y[j]);
    while i < n && x[i] <= v {
      i += 1;
    }
    while j < m && y[j] <= v {
      j += 1;
    }
    d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
  }
  let n_eff = (n * m) as f64 / (n + m) as f64;
  (d, ks_pvalue(d, n_eff))
}

/// Ordinary least squares y = intercept + slope·x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
  pub slope: f64,
  pub intercept: f64,
  pub slope_stderr: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
  if x.len() != y.len() || x.len() < 2 {
    return Err(Error::InsufficientData("a fit needs at least two paired points".into()));
  }
  let n = x.len() as f64;
  let mx = x.iter().sum::<f64>() / n;
  let my = y.iter().sum::<f64>() / n;
  let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
  if sxx == 0.0 {
    return Err(Error::InsufficientData("degenerate abscissae".into()));
  }
  let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
  let slope = sxy / sxx;
  let intercept = my - slope * mx;
  let resid: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
  let slope_stderr = if x.len() > 2 { (resid / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
  Ok(LinearFit { slope, intercept, slope_stderr })
}

/// Empirical quantile by linear interpolation of order statistics.
pub fn quantile(samples: &[f64], q: f64) -> f64 {
  let mut xs = samples.to_vec();
  xs.sort_by(f64::total_cmp);
  let pos = q.clamp(0.0, 1.0) * (xs.len() - 1) as f64;
  let lo = pos.floor() as usize;
  let hi = pos.ceil() as usize;
  xs[lo] + (pos - lo as f64) * (xs[hi] - xs[lo])
}

pub fn median(samples: &[f64]) -> f64 {
  quantile(samples, 0.5)
}

/// Pearson correlation of paired samples.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
  let n = x.len() as f64;
  let mx = x.iter().sum::<f64>() / n;
  let my = y.iter().sum::<f64>() / n;
  let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
  let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
  let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
  sxy / (sxx * syy).sqrt()
}
