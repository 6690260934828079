//! Rauzy graphs of symbolic dynamical systems.
//!
//! The crate builds factor languages from infinite words (substitution fixed
//! points, Sturmian words, the Cassaigne–Kaboré construction, periodic words,
//! raw byte streams) and from forbidden-word specifications, turns consecutive
//! language slices into labelled Rauzy digraphs, and measures how close the
//! resulting graph sequence is to the line: complexity ratios, prolongation
//! counts, exhaustive rooted-ball censuses, walk-count spectral moments,
//! dense spectra against the arcsine law, and cylinder-frequency estimates of
//! invariant measures.
//!
//! Everything is deterministic; there is no sampling anywhere in the pipeline.

pub mod cli;
pub mod error;
pub mod language;
pub mod localstat;
pub mod measures;
pub mod rauzy;
pub mod report;
pub mod spectra;
pub mod wordgen;

pub use error::{Error, Result};
pub use language::{LanguageSlice, ProlongationCensus};
pub use localstat::{BallCensus, CycleCensus};
pub use rauzy::{Multigraph, RauzyDigraph};
pub use report::ConvergenceReport;
pub use spectra::SpectralSummary;
pub use wordgen::{Alphabet, WordSource};

/// Renders a word over byte symbols for messages and exports.
pub fn show_word(word: &[u8]) -> String {
    String::from_utf8_lossy(word).into_owned()
}
