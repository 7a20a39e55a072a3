//! Library side of the `toc` command: config parsing and the commands, kept
//! separate from argument handling so tests can drive them directly.

pub mod commands;
pub mod config;
