//! File formats, experiment sweeps and the `lattice-sched` command line
//! around [`lattice_sched_core`].

pub mod cli;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod gatefile;
pub mod settings;

pub use error::{CliError, Result};
