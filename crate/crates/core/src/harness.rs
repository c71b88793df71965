//! Experiment orchestration: configuration, presets, execution and
//! persistence.
//!
//! A run turns one [`ExperimentConfig`] into three files in the output
//! directory: `<name>.csv` (one row per estimate), `<name>.summary.json`
//! (derived fits and window checks) and `<name>.manifest.json` (config hash,
//! seed schedule, output checksums, wall clock). The CSV and summary depend
//! only on the config, never on the thread count.

mod config;
mod output;
mod presets;
mod run;

pub use crate::heavy_tails::{seed_schedule, Role};
pub use config::{apply_override, ExperimentConfig, ExperimentKind, LawConfig, OutputConfig, SamplingConfig, ScalesConfig, OUTPUT_DIR_ENV};
pub use output::{sha256_hex, write_atomic, CsvRow, OutputRecord, RunManifest, CSV_HEADER};
pub use presets::{preset, preset_catalog, Preset};
pub use run::{run_experiment, run_experiment_in, window_checks, RunArtifacts, WindowCheck};
