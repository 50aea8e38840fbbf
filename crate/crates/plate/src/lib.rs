//! Configuration, drivers and file output for the `hho-plate` binary.

pub mod config;
pub mod run;

pub use config::{ConfigError, DomainKind, Ell, Mode, RunConfig};
pub use run::{run, RunError, RunOutput};
