//! Band selection for hyperspectral image cubes.
//!
//! A cube of spectral bands rarely needs all of them for classification:
//! some bands carry almost no information about the scene's classes and
//! others repeat each other. This crate scores each band by its mutual
//! information with a ground-truth class map, keeps the bands above a
//! relevance threshold, and then greedily drops redundant ones using
//! pairwise Symmetric Uncertainty. A lightweight classifier, a threshold
//! sweep harness, and class-map reconstruction close the loop for
//! evaluating a selection.
//!
//! The `hsiband` binary exposes the same pipeline as subcommands; see the
//! crate README for file formats and CLI usage.

pub mod cli;
pub mod error;
pub mod eval;
pub mod infotheory;
pub mod io;
pub mod model;
pub mod selection;
pub mod synthgen;

pub use error::{Error, Result};
