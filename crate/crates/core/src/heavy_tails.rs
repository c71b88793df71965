//! Seeded random streams and the marginal laws of depths and waits.
//!
//! Generator: ChaCha8 keyed by `master_seed`, with `stream_index` selecting
//! the ChaCha stream. Landscape depths use a separate counter-based hash so
//! that a depth is a pure function of `(seed, vertex)` and never consumes
//! trajectory randomness.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_alpha, Error, Result};

/// A reproducible random stream identified by `(master_seed, stream_index)`.
#[derive(Clone, Debug)]
pub struct SeededStream {
  master_seed: u64,
  stream_index: u64,
  rng: ChaCha8Rng,
}

impl SeededStream {
  pub fn new(master_seed: u64, stream_index: u64) -> Self {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_index);
    Self { master_seed, stream_index, rng }
  }

  pub fn master_seed(&self) -> u64 {
    self.master_seed
  }

  pub fn stream_index(&self) -> u64 {
    self.stream_index
  }

  /// Uniform draw on the open interval (0, 1).
  #[inline]
  pub fn uniform(&mut self) -> f64 {
    open_unit(self.rng.next_u64())
  }

  /// Standard exponential draw, −ln U.
  #[inline]
  pub fn exponential(&mut self) -> f64 {
    -self.uniform().ln()
  }

  #[inline]
  pub fn normal(&mut self) -> f64 {
    self.rng.sample(StandardNormal)
  }

  /// Uniform integer in `0..n`.
  #[inline]
  pub fn below(&mut self, n: u64) -> u64 {
    self.rng.random_range(0..n)
  }
}

impl RngCore for SeededStream {
  fn next_u32(&mut self) -> u32 {
    self.rng.next_u32()
  }

  fn next_u64(&mut self) -> u64 {
    self.rng.next_u64()
  }

  fn fill_bytes(&mut self, dst: &mut [u8]) {
    self.rng.fill_bytes(dst)
  }
}

/// The purpose a stream serves within one replica.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
  Landscape = 0,
  Trajectory = 1,
  ForkA = 2,
  ForkB = 3,
  Environment = 4,
}

impl Role {
  pub const COUNT: u64 = 5;
}

/// The stream of `role` for `replica`: index `replica · 5 + role`, so
/// distinct (replica, role) pairs never share a stream.
pub fn seed_schedule(master_seed: u64, replica: u64, role: Role) -> SeededStream {
  SeededStream::new(master_seed, replica * Role::COUNT + role as u64)
}

/// Maps 64 random bits to (0, 1), never returning either endpoint.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
  // The top cell midpoint 1 − 2^−54 rounds to 1.0, so clamp it to the largest double below 1.
  (((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)).min(1.0 - f64::EPSILON / 2.0)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
  z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
  z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
  z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
  z ^ (z >> 31)
}

/// Counter-based uniform on (0, 1) keyed by `(seed, key)`.
///
/// Two SplitMix64 rounds; stable across releases because landscapes on
/// infinite graphs are defined by it.
#[inline]
pub fn counter_uniform(seed: u64, key: u64) -> f64 {
  open_unit(splitmix64(splitmix64(seed) ^ key.wrapping_mul(0xD6E8_FEB8_6659_FD93)))
}

/// Marginal law of a trap depth τ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DepthLaw {
  /// P[τ ≥ u] = u^(−α) for u ≥ 1.
  Pareto { alpha: f64 },
  /// τ = exp(β√(2nW)) with W standard exponential.
  Rem { beta: f64, n: u32 },
  /// Degenerate depth, used for homogeneous reference landscapes.
  Constant(f64),
}

impl DepthLaw {
  pub fn pareto(alpha: f64) -> Result<Self> {
    check_alpha(alpha)?;
    Ok(Self::Pareto { alpha })
  }

  pub fn rem(beta: f64, n: u32) -> Result<Self> {
    if !(beta > 0.0) {
      return Err(Error::param("beta", format!("{beta} must be positive")));
    }
    if n < 1 {
      return Err(Error::param("n", "spin count must be at least 1"));
    }
    Ok(Self::Rem { beta, n })
  }

  pub fn constant(c: f64) -> Result<Self> {
    if !(c > 0.0 && c.is_finite()) {
      return Err(Error::param("depth", format!("{c} must be positive and finite")));
    }
    Ok(Self::Constant(c))
  }

  pub fn validate(&self) -> Result<()> {
    match *self {
      Self::Pareto { alpha } => Self::pareto(alpha).map(|_| ()),
      Self::Rem { beta, n } => Self::rem(beta, n).map(|_| ()),
      Self::Constant(c) => Self::constant(c).map(|_| ()),
    }
  }

  /// Depth whose tail probability is `p`, so `tail(depth_at_tail(p)) = p`.
  #[inline]
  pub fn depth_at_tail(&self, p: f64) -> f64 {
    match *self {
      Self::Pareto { alpha } => p.powf(-1.0 / alpha),
      Self::Rem { beta, n } => (beta * (-2.0 * n as f64 * p.ln()).sqrt()).exp(),
      Self::Constant(c) => c,
    }
  }

  /// P[τ ≥ u].
  pub fn tail(&self, u: f64) -> f64 {
    match *self {
      Self::Pareto { alpha } => {
        if u <= 1.0 {
          1.0
        } else {
          u.powf(-alpha)
        }
      }
      Self::Rem { beta, n } => {
        if u <= 1.0 {
          1.0
        } else {
          let w = (u.ln() / beta).powi(2) / (2.0 * n as f64);
          (-w).exp()
        }
      }
      Self::Constant(c) => {
        if u <= c {
          1.0
        } else {
          0.0
        }
      }
    }
  }

  /// E[τ^(−a)] for a ≥ 0.
  pub fn negative_moment(&self, a: f64) -> f64 {
    match *self {
      Self::Pareto { alpha } => alpha / (alpha + a),
      Self::Constant(c) => c.powf(-a),
      Self::Rem { beta, n } => {
        // E exp(−aβ√(2nW)) with w = s²: ∫ 2s e^{−s² − aβ√(2n) s} ds.
        let k = a * beta * (2.0 * n as f64).sqrt();
        let rule = crate::special::GaussRule::new(20);
        rule.integrate(|s| 2.0 * s * (-s * s - k * s).exp(), 0.0, 12.0, 48)
      }
    }
  }
}

/// One depth drawn by the inverse-CDF method.
pub fn sample_depth(law: &DepthLaw, stream: &mut SeededStream) -> Result<f64> {
  law.validate()?;
  Ok(law.depth_at_tail(stream.uniform()))
}

/// Exponential duration with the given mean.
pub fn sample_exponential(mean: f64, stream: &mut SeededStream) -> Result<f64> {
  if !(mean > 0.0) {
    return Err(Error::param("mean", format!("{mean} must be positive")));
  }
  Ok(mean * stream.exponential())
}

/// Closed-form P[τ ≥ u].
pub fn tail_function(law: &DepthLaw, u: f64) -> f64 {
  law.tail(u)
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn pareto_inverse_cdf_identity() {
    let law = DepthLaw::pareto(0.5).unwrap();
    assert_eq!(law.depth_at_tail(0.25), 16.0);
    for p in [1e-9, 0.01, 0.3, 0.77, 0.999_999] {
      let tau = law.depth_at_tail(p);
      assert!(tau >= 1.0);
      assert!((law.tail(tau) - p).abs() <= 4.0 * f64::EPSILON * p);
    }
  }

  #[test]
  fn exponential_from_known_uniform() {
    let u = (-1.0f64).exp();
    assert!((-u.ln() - 1.0).abs() < 1e-15);
  }

  #[test]
  fn rejects_bad_parameters() {
    assert!(DepthLaw::pareto(1.0).is_err());
    assert!(DepthLaw::pareto(0.0).is_err());
    assert!(DepthLaw::rem(0.0, 4).is_err());
    assert!(DepthLaw::rem(1.0, 0).is_err());
    let mut s = SeededStream::new(1, 0);
    assert!(sample_exponential(0.0, &mut s).is_err());
    assert!(sample_depth(&DepthLaw::Pareto { alpha: 1.5 }, &mut s).is_err());
  }

  #[test]
  fn rem_negative_moment_matches_zero_power() {
    let law = DepthLaw::rem(1.0, 8).unwrap();
    assert!((law.negative_moment(0.0) - 1.0).abs() < 1e-12);
  }

  #[test]
  fn open_unit_excludes_endpoints() {
    assert!(open_unit(0) > 0.0);
    assert!(open_unit(u64::MAX) < 1.0);
  }
}
