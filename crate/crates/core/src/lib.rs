//! Time-aware item embeddings learned from timestamped interaction logs.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`] ingests raw logs, cleans them and produces a leakage-free
//!   temporal split.
//! * [`temporal`] derives per-user pacing statistics (valid inter-arrival
//!   intervals, IQR session thresholds, clipped moments, normalized timelines).
//! * [`weighting`] turns those statistics into a weight for every
//!   (target, context) pair: uniform, session based, or continuous decay.
//! * [`trainer`] learns item vectors with weighted skip-gram negative sampling.
//! * [`recsys`] ranks unseen items for a user and computes NDCG, hit rate and
//!   RMSE on a held-out split.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod recsys;
pub mod temporal;
pub mod trainer;
pub mod weighting;

pub use error::{Error, Result};
