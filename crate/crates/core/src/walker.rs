//! The continuous-time trap chain X, its embedded walk Y and clock S.
//!
//! A [`WalkerState`] sits at `position`, which it entered at epoch `clock`
//! = S(k), and leaves at `departure` = S(k+1). The departure is drawn on
//! arrival, so X(t) is known for every t < `departure` without lookahead.

use crate::error::{Error, Result};
use crate::graphs::{Graph, Vertex};
use crate::heavy_tails::SeededStream;
use crate::landscape::{TopSet, TrapLandscape};

/// One jump of the embedded chain at epoch `epoch`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump {
  pub from: Vertex,
  pub to: Vertex,
  pub epoch: f64,
  /// The sojourn just completed at `from`.
  pub wait: f64,
}

#[derive(Clone, Debug)]
pub struct WalkerState {
  pub position: Vertex,
  /// S(k): the epoch at which `position` was entered.
  pub clock: f64,
  /// S(k+1): the epoch at which `position` will be left.
  pub departure: f64,
  pub step_count: u64,
  pub stream: SeededStream,
}

/// Stopping rule for [`run`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stop {
  MaxSteps(u64),
  /// Stop at the last epoch ≤ the given time.
  MaxClock(f64),
}

impl WalkerState {
  /// Starts at `x0` at time 0 and draws the first sojourn.
  pub fn start(ls: &TrapLandscape, a: f64, x0: Vertex, stream: SeededStream) -> Self {
    let mut s = Self { position: x0, clock: 0.0, departure: 0.0, step_count: 0, stream };
    s.departure = s.draw_wait(ls, a);
    s
  }

  #[inline]
  fn draw_wait(&mut self, ls: &TrapLandscape, a: f64) -> f64 {
    self.stream.exponential() / ls.total_rate(a, self.position)
  }

  /// Performs the pending jump and draws the sojourn at the new vertex.
  #[inline]
  pub fn step(&mut self, ls: &TrapLandscape, a: f64) -> Jump {
    let from = self.position;
    let wait = self.departure - self.clock;
    let to = ls.choose_next(a, from, &mut self.stream);
    self.position = to;
    self.clock = self.departure;
    self.step_count += 1;
    self.departure = self.clock + self.draw_wait(ls, a);
    Jump { from, to, epoch: self.clock, wait }
  }

  /// Performs every jump with epoch ≤ t, calling `on_jump` for each.
  /// Afterwards `clock ≤ t < departure`, so `position` is X(t).
  #[inline]
  pub fn advance_to_with<F: FnMut(&Jump)>(&mut self, ls: &TrapLandscape, a: f64, t: f64, mut on_jump: F) {
    while self.departure <= t {
      let j = self.step(ls, a);
      on_jump(&j);
    }
  }

  #[inline]
  pub fn advance_to(&mut self, ls: &TrapLandscape, a: f64, t: f64) {
    while self.departure <= t {
      self.step(ls, a);
    }
  }

  /// An independent continuation from time `t` (with `clock ≤ t < departure`).
  ///
  /// The residual sojourn is redrawn from `stream`; by memorylessness the
  /// continuation has the law of X after t given X(t).
  pub fn fork_at(&self, ls: &TrapLandscape, a: f64, t: f64, stream: SeededStream) -> Self {
    let mut s = Self { position: self.position, clock: self.clock, departure: t, step_count: self.step_count, stream };
    s.departure = t + s.draw_wait(ls, a);
    s
  }
}

/// Family default start: uniform on the complete graph (one draw from
/// `stream`), the origin elsewhere.
pub fn default_start(graph: &Graph, stream: &mut SeededStream) -> Vertex {
  match graph {
    Graph::CompleteLoops { n } => Vertex(stream.below(*n)),
    g => g.origin(),
  }
}

/// Performs one jump; see [`WalkerState::step`].
pub fn step(state: &mut WalkerState, ls: &TrapLandscape, a: f64) -> Jump {
  state.step(ls, a)
}

/// Visited vertices Y(k) with their entry epochs S(k).
#[derive(Clone, Debug, PartialEq)]
pub struct ClockPath {
  pub jump_epochs: Vec<f64>,
  pub visited: Vec<Vertex>,
  /// Departure epoch of the last recorded vertex.
  pub horizon: f64,
}

impl ClockPath {
  pub fn len(&self) -> usize {
    self.visited.len()
  }

  pub fn is_empty(&self) -> bool {
    self.visited.is_empty()
  }

  /// The sojourn length at step k.
  pub fn wait(&self, k: usize) -> f64 {
    let end = self.jump_epochs.get(k + 1).copied().unwrap_or(self.horizon);
    end - self.jump_epochs[k]
  }
}

/// Runs the chain from its current state, recording the visited path.
pub fn run(state: &mut WalkerState, ls: &TrapLandscape, a: f64, stop: Stop) -> ClockPath {
  let mut epochs = vec![state.clock];
  let mut visited = vec![state.position];
  match stop {
    Stop::MaxSteps(k) => {
      for _ in 0..k {
        let j = state.step(ls, a);
        epochs.push(j.epoch);
        visited.push(j.to);
      }
    }
    Stop::MaxClock(t) => {
      state.advance_to_with(ls, a, t, |j| {
        epochs.push(j.epoch);
        visited.push(j.to);
      });
    }
  }
  ClockPath { jump_epochs: epochs, visited, horizon: state.departure }
}

/// X(t) = Y(k) for S(k) ≤ t < S(k+1).
pub fn position_at(path: &ClockPath, t: f64) -> Result<Vertex> {
  if t >= path.horizon || path.is_empty() || t < path.jump_epochs[0] {
    return Err(Error::BeyondHorizon { t, horizon: path.horizon });
  }
  let k = path.jump_epochs.partition_point(|&s| s <= t) - 1;
  Ok(path.visited[k])
}

/// One entry of the walk into a top vertex different from the previous one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopEntry {
  /// r(j), a step index.
  pub step: usize,
  /// U(j).
  pub vertex: Vertex,
  /// s(j): total wait at U(j) between steps r(j) and r(j+1).
  pub score: f64,
  /// Whether r(j+1) lies inside the recorded path, so the score is final.
  pub complete: bool,
}

/// Entries r(1) < r(2) < … with r(0) = 0 and U(0) = Y(0) left implicit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TopVisitLedger {
  pub entries: Vec<TopEntry>,
}

impl TopVisitLedger {
  /// ζ: the number of entries with r(j) ≤ ξ.
  pub fn zeta(&self) -> usize {
    self.entries.len()
  }
}

/// Streaming form of the ledger; feed it every jump in order.
#[derive(Clone, Debug)]
pub struct TopTracker {
  previous: Vertex,
  pub ledger: TopVisitLedger,
}

impl TopTracker {
  pub fn new(start: Vertex) -> Self {
    Self { previous: start, ledger: TopVisitLedger::default() }
  }

  /// Records the sojourn `wait` spent at `jump.from` and a possible new entry.
  /// Returns whether `jump.to` opens a new entry.
  pub fn observe(&mut self, ls: &TrapLandscape, top: &TopSet, step: usize, jump: &Jump) -> bool {
    if let Some(last) = self.ledger.entries.last_mut() {
      if jump.from == last.vertex && !last.complete {
        last.score += jump.wait;
      }
    }
    if jump.to != self.previous && top.contains(ls, jump.to) {
      if let Some(last) = self.ledger.entries.last_mut() {
        last.complete = true;
      }
      self.previous = jump.to;
      self.ledger.entries.push(TopEntry { step, vertex: jump.to, score: 0.0, complete: false });
      return true;
    }
    false
  }
}

/// Builds the top-visit ledger of `path` up to the step horizon `xi`.
///
/// Scores accumulate until the next entry even when it falls after ξ.
pub fn record_top_visits(path: &ClockPath, ls: &TrapLandscape, top: &TopSet, xi: usize) -> TopVisitLedger {
  let mut tracker = TopTracker::new(path.visited[0]);
  for k in 1..path.len() {
    let jump = Jump { from: path.visited[k - 1], to: path.visited[k], epoch: path.jump_epochs[k], wait: path.wait(k - 1) };
    let last_open = tracker.ledger.entries.last().is_some_and(|e| !e.complete);
    if k > xi && !last_open {
      break;
    }
    if k > xi {
      // Past ξ only the open score may grow; new entries are not recorded.
      if let Some(last) = tracker.ledger.entries.last_mut() {
        if jump.from == last.vertex {
          last.score += jump.wait;
        }
        if jump.to != last.vertex && top.contains(ls, jump.to) {
          last.complete = true;
          break;
        }
      }
      continue;
    }
    tracker.observe(ls, top, k, &jump);
  }
  if let Some(last) = tracker.ledger.entries.last_mut() {
    if !last.complete && path.visited.last() == Some(&last.vertex) {
      last.score += path.wait(path.len() - 1);
    }
  }
  tracker.ledger
}
