//! TOML experiment configuration. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::heavy_tails::DepthLaw;
use crate::observables::{Mode, NoJumpRule, TwoTimeFunction};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "TRAPLAB_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
  /// Two-time functions at (t_w, (1+θ) t_w).
  Aging,
  /// Π(t, t + θ f(t)) over a time grid, with exponent fits on ℤ.
  Subaging,
  /// FIN diffusion R₁, Rq and the law of ρ({Z(1)}).
  Fin,
  /// Fractional-kinetics characteristic function against Mittag-Leffler.
  Fk,
  /// Stable undershoot ratios against the generalised arcsine law.
  Arcsine,
  /// One-marginal Laplace transform of the rescaled clock.
  Clock,
}

impl ExperimentKind {
  pub fn name(&self) -> &'static str {
    match self {
      Self::Aging => "aging",
      Self::Subaging => "subaging",
      Self::Fin => "fin",
      Self::Fk => "fk",
      Self::Arcsine => "arcsine",
      Self::Clock => "clock",
    }
  }
}

/// `[law]`: the depth law; Pareto uses the top-level `alpha`, REM takes
/// its dimension from the hypercube graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
  /// "pareto", "rem" or "constant".
  #[serde(default = "default_law_kind")]
  pub kind: String,
  pub beta: Option<f64>,
  pub value: Option<f64>,
}

fn default_law_kind() -> String {
  "pareto".into()
}

impl Default for LawConfig {
  fn default() -> Self {
    Self { kind: default_law_kind(), beta: None, value: None }
  }
}

/// `[scales]`: time and depth scales. Unset fields fall back to the
/// family formulas where one exists.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalesConfig {
  /// Explicit waiting times; overrides the family formula.
  #[serde(default)]
  pub t_w: Vec<f64>,
  /// Complete graph: t_w = n^κ.
  pub kappa: Option<f64>,
  /// Torus: t_w = 2^(2n/α) n^(1−γ/α).
  pub gamma: Option<f64>,
  /// Deep-trap band [ε, M) in units of g_n, for R′.
  pub eps: Option<f64>,
  pub big_m: Option<f64>,
  /// Subaging, FK and clock grids (times, or system sizes for `clock`).
  #[serde(default)]
  pub times: Vec<f64>,
  /// FK: values of |ξ|².
  #[serde(default)]
  pub xi2: Vec<f64>,
  /// FK: dimension of the process.
  pub dim: Option<usize>,
  /// FIN: depth cutoff, initial window and extra cutoffs.
  pub v_min: Option<f64>,
  pub window: Option<f64>,
  #[serde(default)]
  pub extra_cutoffs: Vec<f64>,
  /// Clock: Laplace argument and rescaled time.
  pub lambda: Option<f64>,
  pub s: Option<f64>,
  /// Arcsine: small-jump truncation.
  pub delta: Option<f64>,
}

/// `[sampling]`: replica layout and seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
  #[serde(default = "one")]
  pub landscapes: u64,
  #[serde(default = "default_trajectories")]
  pub trajectories: u64,
  #[serde(default = "one")]
  pub master_seed: u64,
  /// Base of the landscape seeds; defaults to `master_seed`.
  pub landscape_seed: Option<u64>,
  /// "quenched" or "averaged".
  #[serde(default = "default_mode")]
  pub mode: String,
  /// Worker threads; 0 uses every core. Never changes the outputs.
  #[serde(default)]
  pub threads: usize,
}

fn one() -> u64 {
  1
}
fn default_trajectories() -> u64 {
  1000
}
fn default_mode() -> String {
  "quenched".into()
}

impl Default for SamplingConfig {
  fn default() -> Self {
    Self { landscapes: 1, trajectories: default_trajectories(), master_seed: 1, landscape_seed: None, mode: default_mode(), threads: 0 }
  }
}

/// `[output]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
  /// Output directory; falls back to `$TRAPLAB_OUT`, then `traplab-out`.
  pub dir: Option<String>,
}

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
  pub name: String,
  pub kind: ExperimentKind,
  /// Result the experiment reproduces; copied into every output.
  #[serde(default)]
  pub anchor: String,
  /// Graph spec: `z`, `zd:D`, `torus2:N`, `complete:N`, `hypercube:N`.
  #[serde(default = "default_graph")]
  pub graph: String,
  pub alpha: f64,
  #[serde(default)]
  pub a: f64,
  /// ν; the family preset when absent.
  pub nu: Option<f64>,
  #[serde(default)]
  pub thetas: Vec<f64>,
  /// Two-time functions: "pi", "r", "rq", "rprime".
  #[serde(default)]
  pub functions: Vec<String>,
  /// "any_epoch" or "position_change".
  #[serde(default = "default_rule")]
  pub no_jump_rule: String,
  /// Run outside a theorem's parameter window with a warning instead of an error.
  #[serde(default)]
  pub allow_outside_window: bool,
  #[serde(default)]
  pub law: LawConfig,
  #[serde(default)]
  pub scales: ScalesConfig,
  #[serde(default)]
  pub sampling: SamplingConfig,
  #[serde(default)]
  pub output: OutputConfig,
}

fn default_graph() -> String {
  "z".into()
}
fn default_rule() -> String {
  "any_epoch".into()
}

impl ExperimentConfig {
  pub fn from_toml(text: &str) -> Result<Self> {
    let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
  }

  pub fn to_toml(&self) -> Result<String> {
    toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
  }

  pub fn parsed_graph(&self) -> Result<Graph> {
    Graph::parse(&self.graph)
  }

  pub fn depth_law(&self) -> Result<DepthLaw> {
    match self.law.kind.as_str() {
      "pareto" => DepthLaw::pareto(self.alpha),
      "rem" => {
        let beta = self.law.beta.ok_or_else(|| Error::param("law.beta", "REM needs β"))?;
        match self.parsed_graph()? {
          Graph::Hypercube { n } => DepthLaw::rem(beta, n),
          _ => Err(Error::param("law.kind", "REM depths live on the hypercube")),
        }
      }
      "constant" => DepthLaw::constant(self.law.value.ok_or_else(|| Error::param("law.value", "constant law needs a value"))?),
      other => Err(Error::param("law.kind", format!("unknown law {other:?}"))),
    }
  }

  pub fn mode(&self) -> Result<Mode> {
    match self.sampling.mode.as_str() {
      "quenched" => Ok(Mode::Quenched),
      "averaged" => Ok(Mode::Averaged),
      other => Err(Error::param("sampling.mode", format!("unknown mode {other:?}"))),
    }
  }

  pub fn rule(&self) -> Result<NoJumpRule> {
    match self.no_jump_rule.as_str() {
      "any_epoch" => Ok(NoJumpRule::AnyEpoch),
      "position_change" => Ok(NoJumpRule::PositionChange),
      other => Err(Error::param("no_jump_rule", format!("unknown rule {other:?}"))),
    }
  }

  pub fn two_time_functions(&self) -> Result<Vec<TwoTimeFunction>> {
    self.functions.iter().map(|f| TwoTimeFunction::parse(f)).collect()
  }

  pub fn landscape_base_seed(&self) -> u64 {
    self.sampling.landscape_seed.unwrap_or(self.sampling.master_seed)
  }

  /// Field-level checks that need no simulation.
  pub fn validate(&self) -> Result<()> {
    if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
      return Err(Error::param("name", "use ASCII letters, digits, '_' or '-'"));
    }
    if !(self.alpha > 0.0 && self.alpha < 1.0) {
      return Err(Error::param("alpha", format!("{} is not in (0, 1)", self.alpha)));
    }
    if !(0.0..=1.0).contains(&self.a) {
      return Err(Error::param("a", format!("{} is not in [0, 1]", self.a)));
    }
    self.parsed_graph()?;
    self.depth_law()?;
    self.mode()?;
    self.rule()?;
    self.two_time_functions()?;
    if self.thetas.iter().any(|t| !(*t >= 0.0)) || self.thetas.windows(2).any(|w| w[1] < w[0]) {
      return Err(Error::param("thetas", "must be nondecreasing values ≥ 0"));
    }
    if self.sampling.trajectories == 0 || self.sampling.landscapes == 0 {
      return Err(Error::param("sampling", "need at least one landscape and one trajectory"));
    }
    if let Some(nu) = self.nu {
      if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::param("nu", "must be positive and finite"));
      }
    }
    match self.kind {
      ExperimentKind::Aging => {
        if self.thetas.is_empty() || self.functions.is_empty() {
          return Err(Error::param("thetas, functions", "aging runs need both"));
        }
      }
      ExperimentKind::Subaging => {
        if self.scales.times.len() < 2 || self.thetas.is_empty() {
          return Err(Error::param("scales.times, thetas", "subaging runs need a time grid and θ values"));
        }
      }
      ExperimentKind::Fin => {
        if self.thetas.is_empty() {
          return Err(Error::param("thetas", "FIN runs need θ values"));
        }
      }
      ExperimentKind::Fk => {
        if self.scales.xi2.is_empty() {
          return Err(Error::param("scales.xi2", "FK runs need |ξ|² values"));
        }
      }
      ExperimentKind::Arcsine => {
        if self.thetas.is_empty() {
          return Err(Error::param("thetas", "arcsine runs evaluate the CDF at 1/(1+θ)"));
        }
      }
      ExperimentKind::Clock => {
        if self.scales.times.is_empty() {
          return Err(Error::param("scales.times", "clock runs need a size grid"));
        }
      }
    }
    Ok(())
  }
}

/// Applies `key=value` to a config, where `key` is a dotted path such as
/// `sampling.trajectories` and `value` is a TOML value (bare words are
/// taken as strings). The result is revalidated.
pub fn apply_override(cfg: &ExperimentConfig, assignment: &str) -> Result<ExperimentConfig> {
  let (key, raw) = assignment.split_once('=').ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
  let key = key.trim();
  let raw = raw.trim();
  let value: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
    Ok(mut t) => t.remove("v").expect("parsed table has the key"),
    Err(_) => toml::Value::String(raw.to_string()),
  };
  let mut root = toml::Value::try_from(cfg).map_err(|e| Error::Config(e.to_string()))?;
  let parts: Vec<&str> = key.split('.').collect();
  let mut node = &mut root;
  for (i, part) in parts.iter().enumerate() {
    let table = node.as_table_mut().ok_or_else(|| Error::Config(format!("{key:?} does not name a table field")))?;
    if i + 1 == parts.len() {
      table.insert(part.to_string(), value);
      break;
    }
    node = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
  }
  let out: ExperimentConfig = root.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
  out.validate()?;
  Ok(out)
}
