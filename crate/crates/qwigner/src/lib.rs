//! Command-line front end, file formats and the FFT fast path for
//! `qwigner-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod fast;
pub mod format;

pub use error::{CliError, Result};
