//! Special functions and fixed-rule quadrature used by the analytic references.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
  0.999_999_999_999_809_9,
  676.520_368_121_885_1,
  -1_259.139_216_722_402_8,
  771.323_428_777_653_1,
  -176.615_029_162_140_6,
  12.507_343_278_686_905,
  -0.138_571_095_265_720_12,
  9.984_369_578_019_572e-6,
  1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of |Γ(x)| (Lanczos, g = 7), relative error near 1e-15.
pub fn ln_gamma(x: f64) -> f64 {
  if x < 0.5 {
    // Reflection keeps the Lanczos sum on its accurate half-line.
    return (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x);
  }
  let x = x - 1.0;
  let mut acc = LANCZOS[0];
  for (i, c) in LANCZOS.iter().enumerate().skip(1) {
    acc += c / (x + i as f64);
  }
  let t = x + LANCZOS_G + 0.5;
  0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(x) for real x away from the poles.
pub fn gamma(x: f64) -> f64 {
  if x < 0.5 {
    return PI / ((PI * x).sin() * gamma(1.0 - x));
  }
  ln_gamma(x).exp()
}

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
pub fn beta_inc_reg(a: f64, b: f64, x: f64) -> Result<f64> {
  if !(a > 0.0 && b > 0.0) {
    return Err(Error::param("a, b", format!("shape parameters ({a}, {b}) must be positive")));
  }
  if !(0.0..=1.0).contains(&x) {
    return Err(Error::param("x", format!("{x} is not in [0, 1]")));
  }
  if x == 0.0 || x == 1.0 {
    return Ok(x);
  }
  let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
  // The fraction converges fast only below the mean; swap otherwise.
  if x < (a + 1.0) / (a + b + 2.0) {
    Ok(ln_front.exp() * beta_cf(a, b, x) / a)
  } else {
    Ok(1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b)
  }
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
  ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
  const TINY: f64 = 1e-300;
  let qab = a + b;
  let qap = a + 1.0;
  let qam = a - 1.0;
  let mut c = 1.0;
  let mut d = 1.0 - qab * x / qap;
  if d.abs() < TINY {
    d = TINY;
  }
  d = 1.0 / d;
  let mut h = d;
  for m in 1..=10_000 {
    let m = m as f64;
    let m2 = 2.0 * m;
    let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if d.abs() < TINY {
      d = TINY;
    }
    c = 1.0 + aa / c;
    if c.abs() < TINY {
      c = TINY;
    }
    d = 1.0 / d;
    h *= d * c;
    let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if d.abs() < TINY {
      d = TINY;
    }
    c = 1.0 + aa / c;
    if c.abs() < TINY {
      c = TINY;
    }
    d = 1.0 / d;
    let del = d * c;
    h *= del;
    if (del - 1.0).abs() < 1e-16 {
      break;
    }
  }
  h
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
  assert!(order >= 1, "quadrature order must be positive");
  let mut nodes = vec![0.0; order];
  let mut weights = vec![0.0; order];
  let n = order as f64;
  for i in 0..order.div_ceil(2) {
    let mut z = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
    let mut dp = 0.0;
    for _ in 0..100 {
      let (mut p1, mut p2) = (1.0, 0.0);
      for j in 0..order {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      let dz = p1 / dp;
      z -= dz;
      if dz.abs() < 1e-16 {
        break;
      }
    }
    nodes[i] = -z;
    nodes[order - 1 - i] = z;
    let w = 2.0 / ((1.0 - z * z) * dp * dp);
    weights[i] = w;
    weights[order - 1 - i] = w;
  }
  (nodes, weights)
}

/// Composite Gauss–Legendre rule with `panels` equal panels on [a, b].
pub struct GaussRule {
  nodes: Vec<f64>,
  weights: Vec<f64>,
}

impl GaussRule {
  pub fn new(order: usize) -> Self {
    let (nodes, weights) = gauss_legendre(order);
    Self { nodes, weights }
  }

  pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
      let mid = a + (p as f64 + 0.5) * h;
      let mut s = 0.0;
      for (x, w) in self.nodes.iter().zip(&self.weights) {
        s += w * f(mid + 0.5 * h * x);
      }
      total += 0.5 * h * s;
    }
    total
  }
}
