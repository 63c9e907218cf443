//! Experiment driver around `tagged-ra-core`.
//!
//! The library half of the CLI: a TOML-backed experiment description
//! ([`config`]), sweep runners that pair closed-form curves with Monte Carlo
//! estimates ([`experiment`]), CSV emission with a frozen column layout
//! ([`report`]), and the end-to-end verification suite ([`acceptance`]).

pub mod acceptance;
pub mod config;
pub mod experiment;
pub mod report;
