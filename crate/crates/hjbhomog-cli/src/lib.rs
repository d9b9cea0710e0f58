//! Configuration-driven front end for the homogenization laboratory: plain
//! text configs in, deterministic CSV artifacts out, plus the `verify`
//! command reproducing the full acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod csv_out;

pub use acceptance::{run_all, Check, Status};
pub use config::{parse_config, RunConfig, VariantSel};
