//! Library side of the `grouptest` command-line tool.

pub mod args;
pub mod commands;
pub mod config;
pub mod experiment;
pub mod verify;
