//! Pseudoperturbative shifted-`l` expansion for radial bound states.

pub mod cli;
pub mod config;
pub mod error;
pub mod expansion;
pub mod oracle;
pub mod pade;
pub mod potential;
pub mod report;
pub mod series;
pub mod table;
pub mod wavefunction;

pub use error::{PsletError, Result};
