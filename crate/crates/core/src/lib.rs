//! Ensembles of legislative districting plans drawn from a score-weighted
//! distribution by annealed Metropolis-Hastings, and the partisan outlier
//! statistics used to situate a given plan within such an ensemble.
//!
//! Module map:
//!
//! - [`geography`]: ward graph, plans, contiguity and per-district aggregates.
//! - [`scores`]: the component penalties and their weighted total `J`.
//! - [`sampler`]: the annealed chain, hard filters and ensemble assembly.
//! - [`elections`]: vote data, seat counting, uniform shifts and the
//!   interpolation of unopposed races.
//! - [`analysis`]: histograms, box statistics and outlier indices.
//! - [`oracle`]: synthetic instances, exhaustive enumeration and exact
//!   Boltzmann probabilities for small graphs.
//! - [`config`] and [`cli`]: run configuration and the command-line surface.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod elections;
pub mod error;
pub mod geography;
pub mod oracle;
pub mod sampler;
pub mod scores;

pub use error::{Error, Result};
