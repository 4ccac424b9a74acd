//! Library side of the `tidal` command; `main.rs` only parses arguments.

pub mod commands;
pub mod config;
