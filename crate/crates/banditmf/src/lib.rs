//! File formats, configuration, synthetic benchmark data, and reporting
//! around the [`banditmf_core`] algorithms. The `banditmf` binary in this
//! package wires everything into a command-line tool.

pub mod commands;
pub mod config;
pub mod io;
pub mod model_io;
pub mod report;
pub mod synth;

pub use banditmf_core as core;
pub use banditmf_core::*;

/// Marker for failures callers can fix by changing their invocation
/// (missing input file, malformed flag value). The binary maps these to
/// exit code 2; everything else exits 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);
