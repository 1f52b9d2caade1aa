//! Toolkit relating verbatim memorization in language models to the
//! intrinsic dimension of each sequence's token embeddings.
//!
//! Pipeline: read token sequences and per-token embedding clouds
//! ([`ingest`]), clean the clouds and estimate their intrinsic dimension
//! ([`estimators`]), sample sequences stratified by duplication count, audit
//! each sample by prompting a model with its prefix ([`memorization`]), then
//! quantile-bin by ID and aggregate ([`analysis`], [`report`]).

pub mod analysis;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod ingest;
pub mod jsonl;
pub mod memorization;
pub mod model;
pub mod report;

pub use error::{Error, Result};
