//! Graph-based time series clustering.
//!
//! The pipeline embeds every subsequence length of a dataset into a directed
//! graph of recurring patterns, clusters the series once per graph, merges the
//! per-length partitions through a consensus matrix and spectral clustering,
//! and finally picks the graph that best explains the final clusters.
//!
//! ```no_run
//! use kgraph_core::pipeline::{run, RunConfig};
//!
//! let config = RunConfig::new("data/Trace_TRAIN.tsv", 4, "out/");
//! let output = run(&config).expect("pipeline failed");
//! println!("selected length {}", output.artifact.selected_length);
//! ```

pub mod clustering;
pub mod consensus;
pub mod embedding;
mod error;
pub mod interpret;
pub mod metrics;
pub mod pipeline;
pub mod seed;
pub mod series;

pub use error::{Error, Result};
