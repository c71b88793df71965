//! Trap landscapes, the jump rates w_xy = ν τ_x^(−(1−a)) τ_y^a, and deep-trap sets.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::distr::Distribution;
use rand_distr::weighted::WeightedAliasIndex;

use crate::error::{Error, Result};
use crate::graphs::{Graph, Vertex};
use crate::heavy_tails::{counter_uniform, DepthLaw, SeededStream};

#[derive(Clone, Debug)]
enum Storage {
  Table(Vec<f64>),
  Hashed,
}

/// Weighted next-vertex sampler on `CompleteLoops` for a > 0, where the
/// jump law ∝ τ_y^a does not depend on the current vertex.
#[derive(Debug)]
struct CompleteChoice {
  a: f64,
  weight_sum: f64,
  alias: WeightedAliasIndex<f64>,
}

/// A depth field τ over a graph together with the time unit ν.
#[derive(Debug)]
pub struct TrapLandscape {
  graph: Graph,
  law: DepthLaw,
  seed: u64,
  nu: f64,
  storage: Storage,
  overrides: HashMap<u64, f64>,
  complete_choice: OnceLock<CompleteChoice>,
  explicit: bool,
}

impl Clone for TrapLandscape {
  fn clone(&self) -> Self {
    Self {
      graph: self.graph,
      law: self.law,
      seed: self.seed,
      nu: self.nu,
      storage: self.storage.clone(),
      overrides: self.overrides.clone(),
      complete_choice: OnceLock::new(),
      explicit: self.explicit,
    }
  }
}

impl TrapLandscape {
  /// Materializes depths on finite graphs; infinite graphs hash on demand.
  pub fn new(graph: Graph, law: DepthLaw, seed: u64, nu: f64) -> Result<Self> {
    law.validate()?;
    check_nu(nu)?;
    let storage = match graph.vertex_count() {
      Some(count) => Storage::Table((0..count).map(|i| law.depth_at_tail(counter_uniform(seed, i))).collect()),
      None => Storage::Hashed,
    };
    Ok(Self { graph, law, seed, nu, storage, overrides: HashMap::new(), complete_choice: OnceLock::new(), explicit: false })
  }

  /// Same as [`TrapLandscape::new`] with ν taken from [`nu_preset`].
  pub fn with_preset_nu(graph: Graph, law: DepthLaw, seed: u64, a: f64) -> Result<Self> {
    let nu = nu_preset(&graph, a, &law)?;
    Self::new(graph, law, seed, nu)
  }

  /// An explicit depth table on a finite graph.
  pub fn from_depths(graph: Graph, depths: Vec<f64>, nu: f64) -> Result<Self> {
    check_nu(nu)?;
    let count = graph.vertex_count().ok_or(Error::InfiniteGraph)?;
    if depths.len() as u64 != count {
      return Err(Error::param("depths", format!("expected {count} depths, got {}", depths.len())));
    }
    if depths.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
      return Err(Error::param("depths", "all depths must be positive and finite"));
    }
    Ok(Self {
      graph,
      law: DepthLaw::Constant(1.0),
      seed: 0,
      nu,
      storage: Storage::Table(depths),
      overrides: HashMap::new(),
      complete_choice: OnceLock::new(),
      explicit: true,
    })
  }

  /// Pins the depths of selected vertices, leaving the rest of the field intact.
  pub fn with_overrides(mut self, pins: &[(Vertex, f64)]) -> Result<Self> {
    for &(v, t) in pins {
      self.graph.check_vertex(v)?;
      if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param("depth", format!("{t} must be positive and finite")));
      }
      match &mut self.storage {
        Storage::Table(tab) => tab[v.0 as usize] = t,
        Storage::Hashed => {
          self.overrides.insert(v.0, t);
        }
      }
    }
    self.complete_choice = OnceLock::new();
    self.explicit = true;
    Ok(self)
  }

  /// A fresh landscape with the same graph, law and ν but another seed.
  /// Explicit depth tables cannot be reseeded.
  pub fn reseeded(&self, seed: u64) -> Result<Self> {
    if self.explicit {
      return Err(Error::param("landscape", "explicit depth tables have no seed to vary"));
    }
    Self::new(self.graph, self.law, seed, self.nu)
  }

  pub fn graph(&self) -> &Graph {
    &self.graph
  }

  pub fn law(&self) -> &DepthLaw {
    &self.law
  }

  pub fn seed(&self) -> u64 {
    self.seed
  }

  pub fn nu(&self) -> f64 {
    self.nu
  }

  /// The materialized depth table of a finite graph.
  pub fn depths(&self) -> Option<&[f64]> {
    match &self.storage {
      Storage::Table(t) => Some(t),
      Storage::Hashed => None,
    }
  }

  #[inline]
  pub fn depth(&self, x: Vertex) -> f64 {
    match &self.storage {
      Storage::Table(t) => t[x.0 as usize],
      Storage::Hashed => {
        if !self.overrides.is_empty() {
          if let Some(t) = self.overrides.get(&x.0) {
            return *t;
          }
        }
        self.law.depth_at_tail(counter_uniform(self.seed, x.0))
      }
    }
  }

  /// Symmetric edge weight c_xy = ν τ_x^a τ_y^a, so that w_xy = c_xy / τ_x.
  #[inline]
  pub fn conductance(&self, a: f64, x: Vertex, y: Vertex) -> f64 {
    if a == 0.0 {
      return self.nu;
    }
    let (tx, ty) = (self.depth(x), self.depth(y));
    // Multiply in a canonical order so c_xy and c_yx are bitwise equal.
    let (p, q) = if x <= y { (tx, ty) } else { (ty, tx) };
    self.nu * (p.powf(a) * q.powf(a))
  }

  /// w_xy, zero off the edge set.
  pub fn jump_rate(&self, a: f64, x: Vertex, y: Vertex) -> f64 {
    if !self.graph.adjacent(x, y) {
      return 0.0;
    }
    self.conductance(a, x, y) / self.depth(x)
  }

  /// Σ_y w_xy.
  #[inline]
  pub fn total_rate(&self, a: f64, x: Vertex) -> f64 {
    let deg = self.graph.regular_degree();
    if a == 0.0 {
      return self.nu * deg as f64 / self.depth(x);
    }
    if let Graph::CompleteLoops { .. } = self.graph {
      let tx = self.depth(x);
      return self.nu * tx.powf(a) * self.complete_weight_sum(a) / tx;
    }
    let mut sum = 0.0;
    for k in 0..deg {
      sum += self.conductance(a, x, self.graph.neighbor(x, k));
    }
    sum / self.depth(x)
  }

  /// Next vertex of the embedded chain: uniform at a = 0, ∝ w_xy otherwise.
  #[inline]
  pub fn choose_next(&self, a: f64, x: Vertex, stream: &mut SeededStream) -> Vertex {
    if a == 0.0 {
      return self.graph.uniform_neighbor(x, stream);
    }
    if let Graph::CompleteLoops { .. } = self.graph {
      return self.complete_next(a, stream);
    }
    let deg = self.graph.regular_degree() as usize;
    let mut weights = [0.0f64; 64];
    let mut sum = 0.0;
    for (k, w) in weights.iter_mut().enumerate().take(deg) {
      *w = self.conductance(a, x, self.graph.neighbor(x, k as u64));
      sum += *w;
    }
    let mut target = stream.uniform() * sum;
    for (k, w) in weights.iter().enumerate().take(deg) {
      if target < *w {
        return self.graph.neighbor(x, k as u64);
      }
      target -= w;
    }
    self.graph.neighbor(x, deg as u64 - 1)
  }

  fn complete_choice(&self, a: f64) -> Option<&CompleteChoice> {
    let choice = self.complete_choice.get_or_init(|| {
      let depths = self.depths().expect("complete graphs are materialized");
      let weights: Vec<f64> = depths.iter().map(|t| t.powf(a)).collect();
      CompleteChoice { a, weight_sum: weights.iter().sum(), alias: WeightedAliasIndex::new(weights).expect("positive weights") }
    });
    (choice.a == a).then_some(choice)
  }

  fn complete_weight_sum(&self, a: f64) -> f64 {
    match self.complete_choice(a) {
      Some(c) => c.weight_sum,
      None => self.depths().unwrap().iter().map(|t| t.powf(a)).sum(),
    }
  }

  fn complete_next(&self, a: f64, stream: &mut SeededStream) -> Vertex {
    match self.complete_choice(a) {
      Some(c) => Vertex(c.alias.sample(stream) as u64),
      None => {
        let depths = self.depths().unwrap();
        let sum: f64 = depths.iter().map(|t| t.powf(a)).sum();
        let mut target = stream.uniform() * sum;
        for (i, t) in depths.iter().enumerate() {
          let w = t.powf(a);
          if target < w {
            return Vertex(i as u64);
          }
          target -= w;
        }
        Vertex(depths.len() as u64 - 1)
      }
    }
  }

  /// T_ε^M = {x : τ_x / g_n ∈ [ε, M)} by a full scan of a finite graph.
  pub fn top_set(&self, eps: f64, m: f64, g_n: f64) -> Result<TopSet> {
    check_top(eps, m, g_n)?;
    let count = self.graph.vertex_count().ok_or(Error::InfiniteGraph)?;
    let members = (0..count).map(Vertex).filter(|&v| TopSet::in_band(self.depth(v), eps, m, g_n)).collect();
    Ok(TopSet { eps, m, g_n, members, bounds: None })
  }

  /// T_ε^M restricted to the coordinate box `lo ≤ x ≤ hi` of a lattice.
  pub fn top_set_in_box(&self, eps: f64, m: f64, g_n: f64, lo: &[i64], hi: &[i64]) -> Result<TopSet> {
    check_top(eps, m, g_n)?;
    let dim = match self.graph {
      Graph::LineZ => 1,
      Graph::LatticeZd { d } => d as usize,
      _ => return self.top_set(eps, m, g_n),
    };
    if lo.len() != dim || hi.len() != dim || lo.iter().zip(hi).any(|(l, h)| l > h) {
      return Err(Error::param("box", "bounds must match the dimension with lo ≤ hi"));
    }
    let mut members = Vec::new();
    let mut cur = lo.to_vec();
    'outer: loop {
      let v = self.graph.lattice_vertex(&cur)?;
      if TopSet::in_band(self.depth(v), eps, m, g_n) {
        members.push(v);
      }
      for i in 0..dim {
        if cur[i] < hi[i] {
          cur[i] += 1;
          continue 'outer;
        }
        cur[i] = lo[i];
      }
      break;
    }
    Ok(TopSet { eps, m, g_n, members, bounds: Some((lo.to_vec(), hi.to_vec())) })
  }
}

fn check_nu(nu: f64) -> Result<()> {
  if nu > 0.0 && nu.is_finite() {
    Ok(())
  } else {
    Err(Error::param("nu", format!("{nu} must be positive and finite")))
  }
}

fn check_top(eps: f64, m: f64, g_n: f64) -> Result<()> {
  if !(eps >= 0.0 && m > eps && g_n > 0.0) {
    return Err(Error::param("eps, M, g_n", format!("need 0 ≤ eps < M and g_n > 0, got ({eps}, {m}, {g_n})")));
  }
  Ok(())
}

/// Depth class of a vertex relative to the band [ε g_n, M g_n).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrapClass {
  Shallow,
  Deep,
  VeryDeep,
}

/// The deep traps T_ε^M.
#[derive(Clone, Debug)]
pub struct TopSet {
  pub eps: f64,
  pub m: f64,
  pub g_n: f64,
  pub members: Vec<Vertex>,
  bounds: Option<(Vec<i64>, Vec<i64>)>,
}

impl TopSet {
  #[inline]
  fn in_band(depth: f64, eps: f64, m: f64, g_n: f64) -> bool {
    let z = depth / g_n;
    z >= eps && z < m
  }

  pub fn classify(&self, depth: f64) -> TrapClass {
    let z = depth / self.g_n;
    if z < self.eps {
      TrapClass::Shallow
    } else if z < self.m {
      TrapClass::Deep
    } else {
      TrapClass::VeryDeep
    }
  }

  /// Membership, decided from the depth and the optional box.
  #[inline]
  pub fn contains(&self, ls: &TrapLandscape, x: Vertex) -> bool {
    if !Self::in_band(ls.depth(x), self.eps, self.m, self.g_n) {
      return false;
    }
    match &self.bounds {
      None => true,
      Some((lo, hi)) => {
        let c = ls.graph().lattice_coords(x);
        c.iter().zip(lo).zip(hi).all(|((c, l), h)| c >= l && c <= h)
      }
    }
  }

  pub fn len(&self) -> usize {
    self.members.len()
  }

  pub fn is_empty(&self) -> bool {
    self.members.is_empty()
  }
}

/// The ν of each family: E[τ^(−a)]²/2 on ℤ; otherwise 1/degree, which makes
/// the a = 0 mean wait equal to τ_x.
pub fn nu_preset(graph: &Graph, a: f64, law: &DepthLaw) -> Result<f64> {
  if !(0.0..=1.0).contains(&a) {
    return Err(Error::param("a", format!("{a} is not in [0, 1]")));
  }
  Ok(match graph {
    Graph::LineZ => law.negative_moment(a).powi(2) / 2.0,
    _ => 1.0 / graph.regular_degree() as f64,
  })
}
