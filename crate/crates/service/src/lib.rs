//! Command-line tool and DIG-style XML service for the `alnmatch` engine.

pub mod cli;
pub mod dig;
pub mod ops;
pub mod server;
