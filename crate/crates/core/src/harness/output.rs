//! CSV rows, manifests and atomic writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const CSV_HEADER: &str = "experiment,graph,family_param,alpha,a,mode,t_w,theta,t,estimate,stderr,replicas,landscape_seed,reference_asl";

/// One CSV row. `experiment` is `<name>:<function>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
  pub experiment: String,
  pub graph: String,
  pub family_param: u64,
  pub alpha: f64,
  pub a: f64,
  pub mode: String,
  pub t_w: f64,
  pub theta: f64,
  pub t: f64,
  pub estimate: f64,
  pub stderr: f64,
  pub replicas: u64,
  pub landscape_seed: u64,
  /// Analytic reference; NaN (an empty cell) when none applies.
  pub reference_asl: f64,
}

fn cell(x: f64) -> String {
  if x.is_nan() {
    String::new()
  } else {
    format!("{x}")
  }
}

impl CsvRow {
  pub fn to_line(&self) -> String {
    format!(
      "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
      self.experiment,
      self.graph,
      self.family_param,
      cell(self.alpha),
      cell(self.a),
      self.mode,
      cell(self.t_w),
      cell(self.theta),
      cell(self.t),
      cell(self.estimate),
      cell(self.stderr),
      self.replicas,
      self.landscape_seed,
      cell(self.reference_asl)
    )
  }

  /// The function part of `experiment`.
  pub fn function(&self) -> &str {
    self.experiment.rsplit_once(':').map_or("", |(_, f)| f)
  }
}

pub fn render_csv(rows: &[CsvRow]) -> String {
  let mut s = String::with_capacity(64 * (rows.len() + 1));
  s.push_str(CSV_HEADER);
  s.push('\n');
  for r in rows {
    let _ = writeln!(s, "{}", r.to_line());
  }
  s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
  let digest = Sha256::digest(bytes);
  let mut s = String::with_capacity(64);
  for b in digest.iter() {
    let _ = write!(s, "{b:02x}");
  }
  s
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
  let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
  std::fs::create_dir_all(dir)?;
  let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
  tmp.write_all(bytes)?;
  tmp.as_file().sync_all()?;
  tmp.persist(path).map_err(|e| e.error)?;
  Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
  pub file: String,
  pub sha256: String,
}

/// Provenance of a run. Everything except `wall_clock_seconds` is a
/// function of the config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
  pub experiment: String,
  pub config_sha256: String,
  pub software_version: String,
  pub master_seed: u64,
  pub landscape_seed_base: u64,
  pub seed_schedule: String,
  pub threads: usize,
  pub outputs: Vec<OutputRecord>,
  pub wall_clock_seconds: f64,
}
