//! File formats, configuration, benchmarking and the command line around
//! [`etrack_core`].

pub mod bench;
pub mod cli;
pub mod config;
pub mod io;

pub use etrack_core as core;
