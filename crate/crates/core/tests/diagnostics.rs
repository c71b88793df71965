use proptest::prelude::*;

use traplab::diagnostics::{
  check_hitting_exponentiality, check_shallow_time, check_very_deep_avoidance, exp_sigma_cdf, min_distance_violation_rate, minimal_distance_scan, omega_gamma,
  omega_lhs, sigma_cdf, HittingSetup, MinDistanceBound,
};
use traplab::{DepthLaw, Graph, TrapLandscape, Vertex};

// Roots of the binary entropy equation H(ω) = 2(1−γ) ln 2, found at 30 digits.
const OMEGA: [(f64, f64); 3] = [(0.6, 0.243_003_853_808_953_9), (0.75, 0.110_027_864_438_359_55), (0.9, 0.031_124_460_304_789_375)];

#[test]
fn omega_matches_frozen_roots() {
  for (g, w) in OMEGA {
    assert!((omega_gamma(g).unwrap() - w).abs() < 1e-13, "gamma {g}");
  }
  assert!(omega_gamma(0.5).is_err());
  assert!(omega_gamma(1.0).is_err());
}

#[test]
fn sigma_cdf_is_the_truncated_pareto_law() {
  let (alpha, eps, m) = (0.5, 0.1, 10.0);
  assert_eq!(sigma_cdf(alpha, eps, m, 0.05), 0.0);
  assert_eq!(sigma_cdf(alpha, eps, m, 20.0), 1.0);
  let want = (f64::sqrt(10.0) - 1.0) / (f64::sqrt(10.0) - f64::sqrt(0.1));
  assert!((sigma_cdf(alpha, eps, m, 1.0) - want).abs() < 1e-14);
}

#[test]
fn exp_sigma_cdf_matches_midpoint_quadrature() {
  let (alpha, eps, m) = (0.6, 0.05, 20.0);
  let p = f64::powf(eps, -alpha) - f64::powf(m, -alpha);
  for x in [0.01, 0.3, 2.0, 15.0] {
    // P[ê σ ≤ x] = E[1 − e^(−x/σ)] with σ drawn by inverting its CDF.
    let n = 200_000;
    let want: f64 = (0..n)
      .map(|k| {
        let v = (k as f64 + 0.5) / n as f64;
        let sigma = (f64::powf(eps, -alpha) - v * p).powf(-1.0 / alpha);
        1.0 - (-x / sigma).exp()
      })
      .sum::<f64>()
      / n as f64;
    assert!((exp_sigma_cdf(alpha, eps, m, x) - want).abs() < 1e-6, "x {x}");
  }
}

#[test]
fn minimal_distance_by_hand() {
  let cube = Graph::hypercube(4).unwrap();
  let cloud = [Vertex(0b0000), Vertex(0b0011), Vertex(0b1111)];
  let bound = MinDistanceBound::Hypercube { gamma: 0.75, eps: 0.0 };
  let r = minimal_distance_scan(&cloud, &cube, bound).unwrap();
  assert_eq!(r.min_distance, Some(2));
  assert!((r.threshold - 4.0 * OMEGA[1].1).abs() < 1e-12);
  assert!(r.pass);
  let single = minimal_distance_scan(&cloud[..1], &cube, bound).unwrap();
  assert_eq!((single.min_distance, single.pass), (None, true));
  assert!(minimal_distance_scan(&cloud, &Graph::torus(3).unwrap(), bound).is_err());
}

#[test]
fn violation_rate_respects_the_birthday_bound() {
  // Threshold 1.1 on the 10-cube: a violation is a pair of adjacent cloud
  // points, whose expected count is (edges) × density².
  let cube = Graph::hypercube(10).unwrap();
  let density = 8.0 / 1024.0;
  let bound = MinDistanceBound::Hypercube { gamma: 0.75, eps: 0.0 };
  let (p, se) = min_distance_violation_rate(&cube, density, bound, 4000, 3).unwrap();
  let pairs = 1024.0 * 10.0 / 2.0 * density * density;
  assert!(p <= pairs + 4.0 * se, "{p} ± {se} above {pairs}");
  // Poisson heuristic for the lower side.
  assert!(p >= 1.0 - (-pairs).exp() - 0.05, "{p}");
}

#[test]
fn hypercube_hitting_mean_is_close_to_prediction() {
  let r = check_hitting_exponentiality(HittingSetup::Hypercube { n: 10, gamma: 0.6, rho: 1.0 }, 2000, 5).unwrap();
  assert_eq!(r.samples, 2000);
  assert!(r.cloud_size > 0);
  assert!((r.mean / r.predicted_mean - 1.0).abs() < 0.25, "{} vs {}", r.mean, r.predicted_mean);
  assert!(r.ks_distance < 0.1);
}

#[test]
fn condition_probes_are_reproducible_and_reject_bad_input() {
  let ls = TrapLandscape::with_preset_nu(Graph::complete(2000).unwrap(), DepthLaw::pareto(0.5).unwrap(), 1, 0.0).unwrap();
  let a = check_shallow_time(&ls, &[0.2, 0.05], 40.0, 200, 40.0, 50, 9).unwrap();
  let b = check_shallow_time(&ls, &[0.2, 0.05], 40.0, 200, 40.0, 50, 9).unwrap();
  // Rows may carry NaN, so compare the debug rendering.
  assert_eq!(format!("{a:?}"), format!("{b:?}"));
  assert_eq!(a.condition, 1);
  assert!(a.statistic.is_finite() && a.statistic > 1.0);
  assert!(check_shallow_time(&ls, &[0.2], 40.0, 200, 40.0, 50, 9).is_err());
  let line = TrapLandscape::with_preset_nu(Graph::LineZ, DepthLaw::pareto(0.5).unwrap(), 1, 0.0).unwrap();
  assert!(check_very_deep_avoidance(&line, &[4.0, 16.0], 40.0, 100, 10, 1).is_err());
  let rem = TrapLandscape::with_preset_nu(Graph::complete(100).unwrap(), DepthLaw::rem(1.0, 7).unwrap(), 1, 0.0).unwrap();
  assert!(check_very_deep_avoidance(&rem, &[4.0, 16.0], 4.0, 100, 10, 1).is_err());
}

proptest! {
  #[test]
  fn omega_solves_its_equation_and_decreases(g in 0.501f64..0.999, dg in 0.0001f64..0.01) {
    let w = omega_gamma(g).unwrap();
    prop_assert!(w > 0.0 && w < 0.5);
    prop_assert!((omega_lhs(w) - (2.0 * g - 1.0) * std::f64::consts::LN_2).abs() < 1e-12);
    let g2 = (g + dg).min(0.9999);
    prop_assert!(omega_gamma(g2).unwrap() <= w);
  }

  #[test]
  fn exp_sigma_cdf_is_monotone(x in 0.0f64..50.0, dx in 0.0f64..5.0) {
    let (lo, hi) = (exp_sigma_cdf(0.5, 0.1, 10.0, x), exp_sigma_cdf(0.5, 0.1, 10.0, x + dx));
    prop_assert!((0.0..=1.0 + 1e-12).contains(&lo));
    prop_assert!(lo <= hi + 1e-12);
  }
}
