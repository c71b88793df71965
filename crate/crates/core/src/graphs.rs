//! The five graph families with implicit, constant-time adjacency.
//!
//! Vertex codes:
//! - `LineZ`: the integer as two's-complement `i64`.
//! - `LatticeZd(d)`: `d ≤ 4` coordinates packed into `64/d`-bit offset fields.
//! - `Torus2d(n)`: `x + side·y` with side `2^n`.
//! - `CompleteLoops(n)`: `0..n`.
//! - `Hypercube(n)`: bit `i` set ⇔ spin `i` equals −1, so `0` is the all-plus vertex.

use std::fmt;

use crate::error::{Error, Result};
use crate::heavy_tails::SeededStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub u64);

impl fmt::Display for Vertex {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{}", self.0)
  }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Graph {
  LineZ,
  LatticeZd {
    d: u32,
  },
  /// Nearest-neighbour torus of side `2^n`.
  Torus2d {
    n: u32,
  },
  /// Complete graph on `n` vertices with every loop ⟨x,x⟩.
  CompleteLoops {
    n: u64,
  },
  Hypercube {
    n: u32,
  },
}

impl Graph {
  pub fn lattice(d: u32) -> Result<Self> {
    if d == 1 {
      return Ok(Self::LineZ);
    }
    if !(2..=4).contains(&d) {
      return Err(Error::param("d", format!("lattice dimension {d} not in 1..=4")));
    }
    Ok(Self::LatticeZd { d })
  }

  pub fn torus(n: u32) -> Result<Self> {
    if !(1..=15).contains(&n) {
      return Err(Error::param("n", format!("torus exponent {n} not in 1..=15")));
    }
    Ok(Self::Torus2d { n })
  }

  pub fn complete(n: u64) -> Result<Self> {
    if n < 1 {
      return Err(Error::param("n", "complete graph needs at least one vertex"));
    }
    Ok(Self::CompleteLoops { n })
  }

  pub fn hypercube(n: u32) -> Result<Self> {
    if !(1..=40).contains(&n) {
      return Err(Error::param("n", format!("hypercube dimension {n} not in 1..=40")));
    }
    Ok(Self::Hypercube { n })
  }

  /// Parses `z | zd:d | torus2:n | complete:n | hypercube:n`.
  pub fn parse(spec: &str) -> Result<Self> {
    let spec = spec.trim();
    if spec == "z" {
      return Ok(Self::LineZ);
    }
    let (kind, arg) = spec.split_once(':').ok_or_else(|| Error::Config(format!("unknown graph `{spec}`")))?;
    let num = |s: &str| -> Result<u64> { s.trim().parse::<u64>().map_err(|_| Error::Config(format!("bad graph parameter in `{spec}`"))) };
    match kind {
      "zd" => Self::lattice(num(arg)? as u32),
      "torus2" => Self::torus(num(arg)? as u32),
      "complete" => Self::complete(num(arg)?),
      "hypercube" => Self::hypercube(num(arg)? as u32),
      _ => Err(Error::Config(format!("unknown graph `{spec}`"))),
    }
  }

  /// The config spelling accepted by [`Graph::parse`].
  pub fn spec(&self) -> String {
    match *self {
      Self::LineZ => "z".into(),
      Self::LatticeZd { d } => format!("zd:{d}"),
      Self::Torus2d { n } => format!("torus2:{n}"),
      Self::CompleteLoops { n } => format!("complete:{n}"),
      Self::Hypercube { n } => format!("hypercube:{n}"),
    }
  }

  pub fn family_name(&self) -> &'static str {
    match self {
      Self::LineZ => "z",
      Self::LatticeZd { .. } => "zd",
      Self::Torus2d { .. } => "torus2",
      Self::CompleteLoops { .. } => "complete",
      Self::Hypercube { .. } => "hypercube",
    }
  }

  /// The family's size parameter (d, n or 1 for ℤ).
  pub fn family_param(&self) -> u64 {
    match *self {
      Self::LineZ => 1,
      Self::LatticeZd { d } => d as u64,
      Self::Torus2d { n } => n as u64,
      Self::CompleteLoops { n } => n,
      Self::Hypercube { n } => n as u64,
    }
  }

  pub fn is_finite(&self) -> bool {
    matches!(self, Self::Torus2d { .. } | Self::CompleteLoops { .. } | Self::Hypercube { .. })
  }

  /// Number of vertices of a finite family.
  pub fn vertex_count(&self) -> Option<u64> {
    match *self {
      Self::Torus2d { n } => Some(1u64 << (2 * n)),
      Self::CompleteLoops { n } => Some(n),
      Self::Hypercube { n } => Some(1u64 << n),
      _ => None,
    }
  }

  /// The common degree; every family is regular.
  #[inline]
  pub fn regular_degree(&self) -> u64 {
    match *self {
      Self::LineZ => 2,
      Self::LatticeZd { d } => 2 * d as u64,
      Self::Torus2d { .. } => 4,
      Self::CompleteLoops { n } => n,
      Self::Hypercube { n } => n as u64,
    }
  }

  pub fn torus_side(&self) -> Option<u64> {
    match *self {
      Self::Torus2d { n } => Some(1u64 << n),
      _ => None,
    }
  }

  pub fn contains(&self, x: Vertex) -> bool {
    match *self {
      Self::LineZ => true,
      Self::LatticeZd { d } => {
        let used = (64 / d) * d;
        used >= 64 || x.0 >> used == 0
      }
      _ => x.0 < self.vertex_count().unwrap_or(u64::MAX),
    }
  }

  pub fn check_vertex(&self, x: Vertex) -> Result<()> {
    if self.contains(x) {
      Ok(())
    } else {
      Err(Error::InvalidVertex(x.0))
    }
  }

  pub fn degree(&self, x: Vertex) -> Result<u64> {
    self.check_vertex(x)?;
    Ok(self.regular_degree())
  }

  /// The origin of infinite lattices, the all-plus hypercube vertex, vertex 0 otherwise.
  pub fn origin(&self) -> Vertex {
    match *self {
      Self::LatticeZd { d } => Self::pack(d, &[0; 4][..d as usize]),
      _ => Vertex(0),
    }
  }

  /// The `k`-th neighbour in a fixed enumeration, `k < degree`.
  #[inline]
  pub fn neighbor(&self, x: Vertex, k: u64) -> Vertex {
    match *self {
      Self::LineZ => {
        let v = x.0 as i64;
        Vertex(if k == 0 { v - 1 } else { v + 1 } as u64)
      }
      Self::LatticeZd { d } => {
        let bits = 64 / d;
        let axis = (k / 2) as u32;
        let unit = 1u64 << (bits * axis);
        Vertex(if k.is_multiple_of(2) { x.0.wrapping_sub(unit) } else { x.0.wrapping_add(unit) })
      }
      Self::Torus2d { n } => {
        let side = 1u64 << n;
        let mask = side - 1;
        let (cx, cy) = (x.0 & mask, x.0 >> n);
        let (cx, cy) = match k {
          0 => ((cx + mask) & mask, cy),
          1 => ((cx + 1) & mask, cy),
          2 => (cx, (cy + mask) & mask),
          _ => (cx, (cy + 1) & mask),
        };
        Vertex(cx | (cy << n))
      }
      Self::CompleteLoops { .. } => Vertex(k),
      Self::Hypercube { .. } => Vertex(x.0 ^ (1u64 << k)),
    }
  }

  /// Uniform choice among the degree(x) incident edges.
  #[inline]
  pub fn uniform_neighbor(&self, x: Vertex, stream: &mut SeededStream) -> Vertex {
    let k = stream.below(self.regular_degree());
    self.neighbor(x, k)
  }

  pub fn adjacent(&self, x: Vertex, y: Vertex) -> bool {
    match *self {
      Self::CompleteLoops { n } => x.0 < n && y.0 < n,
      Self::Hypercube { .. } => (x.0 ^ y.0).count_ones() == 1,
      _ => self.graph_distance(x, y) == 1,
    }
  }

  /// Shortest-path distance. On `CompleteLoops` distinct vertices are at distance 1.
  pub fn graph_distance(&self, x: Vertex, y: Vertex) -> u64 {
    match *self {
      Self::LineZ => (x.0 as i64).abs_diff(y.0 as i64),
      Self::LatticeZd { d } => {
        let (a, b) = (Self::unpack(d, x), Self::unpack(d, y));
        (0..d as usize).map(|i| a[i].abs_diff(b[i])).sum()
      }
      Self::Torus2d { n } => {
        let side = 1u64 << n;
        let mask = side - 1;
        let wrap = |p: u64, q: u64| {
          let d = p.abs_diff(q);
          d.min(side - d)
        };
        wrap(x.0 & mask, y.0 & mask) + wrap(x.0 >> n, y.0 >> n)
      }
      Self::CompleteLoops { .. } => u64::from(x != y),
      Self::Hypercube { .. } => (x.0 ^ y.0).count_ones() as u64,
    }
  }

  /// All vertices of a finite family, each exactly once.
  pub fn enumerate_vertices(&self) -> Result<impl Iterator<Item = Vertex>> {
    let count = self.vertex_count().ok_or(Error::InfiniteGraph)?;
    Ok((0..count).map(Vertex))
  }

  pub fn line_vertex(x: i64) -> Vertex {
    Vertex(x as u64)
  }

  pub fn line_coord(v: Vertex) -> i64 {
    v.0 as i64
  }

  pub fn torus_vertex(&self, x: u64, y: u64) -> Vertex {
    let side = self.torus_side().expect("torus_vertex on a non-torus graph");
    Vertex((x % side) | ((y % side) << self.family_param()))
  }

  pub fn torus_coords(&self, v: Vertex) -> (u64, u64) {
    let n = self.family_param();
    (v.0 & ((1 << n) - 1), v.0 >> n)
  }

  /// Hypercube vertex from a ±1 spin vector.
  pub fn hypercube_vertex(spins: &[i8]) -> Vertex {
    Vertex(spins.iter().enumerate().fold(0u64, |acc, (i, &s)| if s < 0 { acc | (1 << i) } else { acc }))
  }

  /// Lattice vertex from integer coordinates; `LineZ` takes one coordinate.
  pub fn lattice_vertex(&self, coords: &[i64]) -> Result<Vertex> {
    match *self {
      Self::LineZ if coords.len() == 1 => Ok(Vertex(coords[0] as u64)),
      Self::LatticeZd { d } if coords.len() == d as usize => {
        let half = 1i64 << (64 / d - 1);
        if coords.iter().any(|c| *c < -half || *c >= half) {
          return Err(Error::param("coords", "coordinate outside the packed range"));
        }
        Ok(Self::pack(d, coords))
      }
      _ => Err(Error::param("coords", "dimension does not match the graph")),
    }
  }

  pub fn lattice_coords(&self, v: Vertex) -> Vec<i64> {
    match *self {
      Self::LineZ => vec![v.0 as i64],
      Self::LatticeZd { d } => Self::unpack(d, v)[..d as usize].to_vec(),
      _ => panic!("lattice_coords on a non-lattice graph"),
    }
  }

  fn pack(d: u32, coords: &[i64]) -> Vertex {
    let bits = 64 / d;
    let half = 1u64 << (bits - 1);
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let mut code = 0u64;
    for (i, c) in coords.iter().enumerate() {
      code |= ((*c as u64).wrapping_add(half) & mask) << (bits * i as u32);
    }
    Vertex(code)
  }

  fn unpack(d: u32, v: Vertex) -> [i64; 4] {
    let bits = 64 / d;
    let half = 1i64 << (bits - 1);
    let mask = (1u64 << bits) - 1;
    let mut out = [0i64; 4];
    for (i, o) in out.iter_mut().enumerate().take(d as usize) {
      *o = ((v.0 >> (bits * i as u32)) & mask) as i64 - half;
    }
    out
  }
}
