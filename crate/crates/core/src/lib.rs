//! Batch analytics for bus fleet GPS archives: map-matches noisy fixes onto
//! a road network, decomposes each trajectory's elapsed time into stop,
//! transit and point-delay components, clusters fixes along cumulative route
//! distance, and tests each cluster's theoretical-vs-real traversal times
//! for statistically significant point delays.

pub mod cluster;
pub mod error;
pub mod geo;
pub mod ingest;
pub mod matching;
pub mod metrics;
pub mod network;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod testkit;

pub use error::{Error, Result};
