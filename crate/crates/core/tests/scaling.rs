use proptest::prelude::*;

use traplab::heavy_tails::{seed_schedule, Role};
use traplab::levy::mittag_leffler;
use traplab::scaling::{
  fin_two_time, laplace_g, lattice_f, lattice_green, lattice_green_3, quasi_diffusion_step, sample_fin_environment, sample_fractional_kinetics,
  scaling_constant_c, subaging_limit_pi, AtomEnvironment, FinConfig, ScaleFunction,
};
use traplab::special::gamma;
use traplab::stats::mean_stderr;
use traplab::{DepthLaw, Graph, TrapLandscape};

fn stream(seed: u64, i: u64) -> traplab::SeededStream {
  seed_schedule(seed, i, Role::Trajectory)
}

// Watson's closed form √6/(32π³) Γ(1/24)Γ(5/24)Γ(7/24)Γ(11/24), and the
// Bessel integrals for d = 4, 5 at 30 digits.
const G3: f64 = 1.516_386_059_151_978;
const G4: f64 = 1.239_467_121_848_481_7;
const G5: f64 = 1.156_308_124_840_231;

#[test]
fn lattice_green_matches_frozen_values() {
  assert!((lattice_green(3).unwrap() - G3).abs() < 1e-10);
  assert!((lattice_green_3(16) - G3).abs() < 1e-8);
  assert!((lattice_green(4).unwrap() - G4).abs() < 1e-8);
  assert!((lattice_green(5).unwrap() - G5).abs() < 1e-8);
  assert!(lattice_green(2).is_err());
}

#[test]
fn scaling_constant_closed_forms() {
  let alpha = 0.4;
  let gg = gamma(0.6) * gamma(1.4);
  let c2 = (2.0 * std::f64::consts::PI.powf(0.6) * gg).sqrt();
  assert!((scaling_constant_c(alpha, 2).unwrap() - c2).abs() < 1e-12);
  let c3 = (3.0 * G3.powf(alpha) * gg).sqrt();
  assert!((scaling_constant_c(alpha, 3).unwrap() - c3).abs() < 1e-9);
  assert!(scaling_constant_c(alpha, 1).is_err());
}

#[test]
fn lattice_f_has_a_log_correction_only_in_two_dimensions() {
  let n: f64 = 1e4;
  assert!((lattice_f(0.5, 3, n) - 10.0).abs() < 1e-12);
  assert!((lattice_f(0.5, 2, n) - 10.0 * n.ln().powf(0.25)).abs() < 1e-12);
}

#[test]
fn quasi_diffusion_step_is_gamblers_ruin() {
  let env = AtomEnvironment { alpha: 0.5, window: 4.0, v_min: 1e-3, atoms: vec![(-1.0, 1.0), (0.0, 3.0), (2.0, 1.0)] };
  let n = 200_000;
  let mut left = 0u64;
  let mut soj = Vec::with_capacity(n);
  for i in 0..n as u64 {
    let (next, s) = quasi_diffusion_step(&env, None, 1, &mut stream(1, i)).unwrap();
    left += (next == 0) as u64;
    soj.push(s);
  }
  // Exit left with probability 2/3; local time mean 2·1·2/3, times w = 3.
  let p = left as f64 / n as f64;
  assert!((p - 2.0 / 3.0).abs() < 4.0 * (2.0f64 / 9.0 / n as f64).sqrt());
  let (m, se) = mean_stderr(&soj);
  assert!((m - 4.0).abs() < 4.0 * se, "{m} ± {se}");
  assert!(quasi_diffusion_step(&env, None, 0, &mut stream(1, 0)).is_err());
  assert!(quasi_diffusion_step(&env, None, 2, &mut stream(1, 0)).is_err());
}

#[test]
fn scale_function_increments_follow_depths() {
  let a = 0.5;
  let ls = TrapLandscape::with_preset_nu(Graph::LineZ, DepthLaw::pareto(0.5).unwrap(), 9, a).unwrap();
  let sf = ScaleFunction::from_landscape(&ls, a, -20, 20).unwrap();
  assert_eq!(sf.eval(0.0), 0.0);
  for x in -20..20i64 {
    let t0 = ls.depth(Graph::line_vertex(x));
    let t1 = ls.depth(Graph::line_vertex(x + 1));
    let want = 0.5 / ls.nu() * (t0 * t1).powf(-a);
    let got = sf.eval(x as f64 + 1.0) - sf.eval(x as f64);
    assert!((got - want).abs() < 1e-12 * want.max(1.0));
  }
  let mid = sf.eval(3.25);
  assert!((mid - (0.75 * sf.eval(3.0) + 0.25 * sf.eval(4.0))).abs() < 1e-12);
  let cube = TrapLandscape::new(Graph::hypercube(3).unwrap(), DepthLaw::pareto(0.5).unwrap(), 1, 1.0).unwrap();
  assert!(ScaleFunction::from_landscape(&cube, a, -1, 1).is_err());
}

#[test]
fn fin_environment_has_poisson_intensity() {
  let (alpha, x, vmin) = (0.5, 3.0, 0.01);
  let counts: Vec<f64> = (0..2000).map(|i| sample_fin_environment(alpha, x, vmin, &mut stream(2, i)).unwrap().len() as f64).collect();
  let (m, se) = mean_stderr(&counts);
  let want = 2.0 * x * f64::powf(vmin, -alpha);
  assert!((m - want).abs() < 4.0 * se, "{m} ± {se} vs {want}");
}

#[test]
fn fin_environment_extension_keeps_old_atoms() {
  let mut s = stream(3, 0);
  let mut env = sample_fin_environment(0.5, 1.0, 0.05, &mut s).unwrap();
  let old = env.atoms.clone();
  let shift = env.extend(&mut s);
  assert_eq!(env.window, 2.0);
  assert_eq!(&env.atoms[shift..shift + old.len()], &old[..]);
  assert!(env.atoms.windows(2).all(|w| w[0].0 <= w[1].0));
  assert!(env.atoms[..shift].iter().all(|a| a.0 <= -1.0));
  assert!(env.atoms.iter().all(|a| a.0.abs() <= 2.0 && a.1 >= 0.05));
}

#[test]
fn fin_two_time_at_theta_zero_is_one_and_threads_do_not_matter() {
  let mut cfg = FinConfig::new(0.5, vec![0.0, 1.0], 300, 11);
  cfg.threads = 1;
  let one = fin_two_time(&cfg).unwrap();
  assert_eq!(one.r1[0].value, 1.0);
  assert!(one.r1[1].value > 0.0 && one.r1[1].value < 1.0);
  assert!(one.rq[1].value <= 1.0);
  cfg.threads = 3;
  let three = fin_two_time(&cfg).unwrap();
  assert_eq!(one, three);
}

#[test]
fn fin_two_time_rejects_bad_config() {
  let mut cfg = FinConfig::new(0.5, vec![1.0], 10, 1);
  cfg.extra_cutoffs = vec![1e-5];
  assert!(fin_two_time(&cfg).is_err());
  assert!(fin_two_time(&FinConfig::new(0.5, vec![], 10, 1)).is_err());
}

#[test]
fn laplace_g_matches_direct_quadrature() {
  let (alpha, a, nu) = (0.5, 0.3, 0.8);
  let law = DepthLaw::pareto(alpha).unwrap();
  for lambda in [0.1, 1.0, 5.0] {
    // E f(τ) = ∫_0^1 f(s^(−1/α)) ds by the midpoint rule.
    let n = 400_000;
    let want: f64 = (0..n)
      .map(|k| {
        let s = (k as f64 + 0.5) / n as f64;
        (-lambda * nu * s.powf(-a / alpha)).exp()
      })
      .sum::<f64>()
      / n as f64;
    let got = laplace_g(a, lambda, nu, &law);
    assert!((got - want).abs() < 1e-5, "lambda {lambda}: {got} vs {want}");
  }
  assert_eq!(laplace_g(a, 0.0, nu, &law), 1.0);
  let at_zero = laplace_g(0.0, 2.0, nu, &law);
  assert!((at_zero - (-2.0 * nu).exp()).abs() < 1e-10);
}

#[test]
fn subaging_limit_at_a_zero_is_an_exponential_average() {
  let law = DepthLaw::pareto(0.5).unwrap();
  let f = [0.5, 1.0, 4.0];
  let got = subaging_limit_pi(0.0, 0.3, &f, 0.5, &law).unwrap();
  let want = f.iter().map(|u| (-0.3 / u).exp()).sum::<f64>() / 3.0;
  assert!((got - want).abs() < 1e-14);
  assert_eq!(subaging_limit_pi(0.2, 0.0, &f, 0.5, &law).unwrap(), 1.0);
  assert!(subaging_limit_pi(0.0, 1.0, &[], 0.5, &law).is_err());
}

#[test]
fn fractional_kinetics_characteristic_function() {
  let (alpha, t) = (0.5, 1.3);
  let pts: Vec<Vec<f64>> = (0..60_000).map(|i| sample_fractional_kinetics(alpha, 2, t, &mut stream(4, i)).unwrap()).collect();
  let xi = [0.6, -0.5];
  let xi2 = xi[0] * xi[0] + xi[1] * xi[1];
  let c: Vec<f64> = pts.iter().map(|p| (xi[0] * p[0] + xi[1] * p[1]).cos()).collect();
  let (m, se) = mean_stderr(&c);
  let want = mittag_leffler(alpha, -xi2 * t.powf(alpha)).unwrap();
  assert!((m - want).abs() < 4.0 * se, "{m} ± {se} vs {want}");
}

proptest! {
  #[test]
  fn scale_function_is_increasing(seed in 0u64..500, a in 0.0f64..1.0) {
    let ls = TrapLandscape::with_preset_nu(Graph::LineZ, DepthLaw::pareto(0.6).unwrap(), seed, a).unwrap();
    let sf = ScaleFunction::from_landscape(&ls, a, -8, 8).unwrap();
    prop_assert!(sf.values.windows(2).all(|w| w[1] > w[0]));
  }

  #[test]
  fn quasi_diffusion_moves_to_a_neighbour(seed in 0u64..10_000, x0 in -3.0f64..-0.1, x2 in 0.1f64..3.0, w in 0.01f64..100.0) {
    let env = AtomEnvironment { alpha: 0.5, window: 4.0, v_min: 1e-3, atoms: vec![(x0, 1.0), (0.0, w), (x2, 1.0)] };
    let (next, s) = quasi_diffusion_step(&env, None, 1, &mut stream(seed, 0)).unwrap();
    prop_assert!(next == 0 || next == 2);
    prop_assert!(s >= 0.0 && s.is_finite());
  }
}
