use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
  #[error("invalid parameter `{name}`: {reason}")]
  InvalidParameter { name: &'static str, reason: String },
  #[error("vertex {0} is not a vertex of this graph")]
  InvalidVertex(u64),
  #[error("operation needs a finite graph or an explicit bounding box")]
  InfiniteGraph,
  #[error("time {t} lies beyond the recorded horizon {horizon}")]
  BeyondHorizon { t: f64, horizon: f64 },
  #[error("atom window exhausted at index {0}")]
  WindowExhausted(usize),
  #[error("insufficient data: {0}")]
  InsufficientData(String),
  #[error("configuration error: {0}")]
  Config(String),
  #[error("i/o error: {0}")]
  Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
  pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
    Error::InvalidParameter { name, reason: reason.into() }
  }
}

impl From<std::io::Error> for Error {
  fn from(e: std::io::Error) -> Self {
    Error::Io(e.to_string())
  }
}

/// Checks `alpha` lies in the open unit interval.
pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
  if alpha > 0.0 && alpha < 1.0 {
    Ok(())
  } else {
    Err(Error::param("alpha", format!("{alpha} is not in (0, 1)")))
  }
}
