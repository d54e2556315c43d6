//! Command-line layer for qkforge: edge-list I/O, single-instance commands and
//! the campaign runner.

pub mod campaign;
pub mod commands;
pub mod io;
