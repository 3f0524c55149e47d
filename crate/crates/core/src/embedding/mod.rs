//! Graph embedding: one directed graph of recurring subsequence patterns per
//! subsequence length.
//!
//! Every stride-1 window is z-normalized and projected onto the top two
//! principal directions of the pooled windows. Nodes sit at radial density
//! peaks of the projected cloud, and edges count transitions between the
//! nodes visited by consecutive windows of a series.

mod graph;
mod pca;
mod radial;

pub use graph::{
    assign_subsequences, build_graph, collapse_path, project_dataset, Edge, EmbeddedGraph,
    EmbeddingParams, ProjectedWindows,
};
pub use pca::{fit_projection, Projection2D, PCA_SAMPLE_LIMIT};
pub use radial::{gaussian_kde, radial_nodes, scott_bandwidth, Node, RadialParams};
