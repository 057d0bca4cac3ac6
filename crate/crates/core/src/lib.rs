//! Longitudinal audit toolkit for timestamped recommender interaction logs.
//!
//! The crate profiles an interaction log month by month, trains four
//! implicit-feedback recommenders on rolling train/test windows, and measures
//! effectiveness, genre diversity, exposure concentration and author-gender
//! representation over time.
pub mod error;
pub mod ingestion;
pub mod metrics;
pub mod pipeline;
pub mod recommenders;
pub mod syndata;
pub mod windowing;

pub use error::{Error, Result};
