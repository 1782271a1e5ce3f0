//! Reproducible experiments on top of [`gnsq`]: configuration, commands and
//! file outputs behind the `gnsq` binary.
//!
//! Every command takes an [`ExperimentConfig`] and writes into its `output`
//! directory:
//!
//! ```text
//! <out>/manifest.json   config echo, version, timing
//! <out>/results.csv     one row per (graph, algorithm, r or M, seed)
//! <out>/summary.csv     mean / std across seeds
//! <out>/signals/*.csv   per-run vectors (quantize, halftone)
//! ```

pub mod commands;
pub mod config;
mod output;
pub mod points;

pub use commands::{cmd_halftone, cmd_quantize, cmd_sweep, graph_info, CommandReport, GraphInfo, MethodComparison};
pub use config::{load_config, parse_config, ConfigError, ExperimentConfig};
