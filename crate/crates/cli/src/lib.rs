//! Bundle loading, statistics emission and the command-line entry point.

pub mod app;
pub mod bundle;
pub mod stats;

pub use app::run_cli;
pub use bundle::{load_bundle, BundleError, DefectBundle};
pub use stats::{emit_patches, emit_stats, StatsReport, STATS_HEADER};
