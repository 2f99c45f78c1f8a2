//! Command-line front end for the weighted Fock-space numerics: configure a
//! run, execute one subcommand, and emit a `<name>.report.json` (plus a
//! `<name>.curve.csv` for curve-valued results) into the output directory.
//!
//! Exit codes: `0` success, `1` numeric failure (diagnostic JSON on stderr),
//! `2` classifier evidence inconsistent with the degree test, `64` usage.

pub mod commands;
pub mod config;
pub mod reports;

pub use commands::run;
pub use config::{parse_complex, parse_symbol, Cli, Command};

/// Classifier thresholds checked into the repository (see
/// `config/thresholds.toml` for calibration provenance).
pub fn thresholds() -> focklab_core::classify::Thresholds {
    let raw = include_str!("../config/thresholds.toml");
    toml::from_str(raw).expect("bundled thresholds.toml parses")
}
