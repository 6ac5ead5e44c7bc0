//! Command-line layer over `goldenrate-core`: TOML configs, built-in presets,
//! CSV/JSON output and a parallel jump-process ensemble.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod output;
pub mod presets;
