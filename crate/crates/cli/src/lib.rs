//! Library backing the `ecndt` command-line tool.
//!
//! The subcommand implementations live here (rather than in `main.rs`) so
//! integration tests can call them directly and the binary stays a thin
//! argument-parsing shell. See [`commands`] for the operations,
//! [`config`] for the `key = value` experiment-configuration format and
//! [`svg`] for the minimal plot renderings.

pub mod commands;
pub mod config;
pub mod svg;
