//! Interpretability of a clustering through its pattern graph.
//!
//! A node (or edge) is *representative* of cluster `C` when many series of
//! `C` cross it, and *exclusive* to `C` when most series crossing it belong
//! to `C`. Graphoids are the per-cluster subgraphs that pass a threshold on
//! either measure.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::clustering::Partition;
use crate::embedding::EmbeddedGraph;
use crate::metrics::ari;
use crate::{Error, Result};

/// Crossing statistics of one graph element (node or edge).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementStats {
    /// Series of each cluster whose path crosses the element.
    pub crossings: Vec<usize>,
    /// `crossings[c] / |C_c|`, 0 for empty clusters.
    pub representativity: Vec<f64>,
    /// `crossings[c] / sum(crossings)`, all 0 when nobody crosses.
    pub exclusivity: Vec<f64>,
}

impl ElementStats {
    fn from_crossings(crossings: Vec<usize>, sizes: &[usize]) -> Self {
        let total: usize = crossings.iter().sum();
        let representativity = crossings
            .iter()
            .zip(sizes)
            .map(|(&c, &s)| if s == 0 { 0.0 } else { c as f64 / s as f64 })
            .collect();
        let exclusivity = crossings
            .iter()
            .map(|&c| {
                if total == 0 {
                    0.0
                } else {
                    c as f64 / total as f64
                }
            })
            .collect();
        Self {
            crossings,
            representativity,
            exclusivity,
        }
    }

    pub fn total_crossings(&self) -> usize {
        self.crossings.iter().sum()
    }

    /// Cluster with the highest exclusivity (smallest id on ties).
    pub fn dominant_cluster(&self) -> usize {
        let mut best = 0;
        for (c, &e) in self.exclusivity.iter().enumerate() {
            if e > self.exclusivity[best] {
                best = c;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeClusterStats {
    pub node_id: usize,
    #[serde(flatten)]
    pub stats: ElementStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeClusterStats {
    pub src: usize,
    pub dst: usize,
    #[serde(flatten)]
    pub stats: ElementStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub k: usize,
    pub cluster_sizes: Vec<usize>,
    pub nodes: Vec<NodeClusterStats>,
    pub edges: Vec<EdgeClusterStats>,
}

fn check_cover(graph: &EmbeddedGraph, labels: &Partition) -> Result<()> {
    if graph.series_count() != labels.len() {
        return Err(Error::LabelLengthMismatch {
            left: graph.series_count(),
            right: labels.len(),
        });
    }
    Ok(())
}

/// Representativity and exclusivity of every node and edge of `graph`
/// under `labels`.
pub fn node_stats(graph: &EmbeddedGraph, labels: &Partition) -> Result<GraphStats> {
    check_cover(graph, labels)?;
    let k = labels.k;
    let sizes = labels.cluster_sizes();
    let mut node_cross = vec![vec![0usize; k]; graph.node_count()];
    let mut edge_cross = vec![vec![0usize; k]; graph.edge_count()];
    for (path, &c) in graph.paths.iter().zip(&labels.labels) {
        let nodes: BTreeSet<usize> = path.iter().copied().collect();
        for n in nodes {
            node_cross[n][c] += 1;
        }
        let edges: BTreeSet<usize> = path
            .windows(2)
            .filter_map(|w| graph.edge_position(w[0], w[1]))
            .collect();
        for e in edges {
            edge_cross[e][c] += 1;
        }
    }
    Ok(GraphStats {
        k,
        nodes: node_cross
            .into_iter()
            .enumerate()
            .map(|(node_id, c)| NodeClusterStats {
                node_id,
                stats: ElementStats::from_crossings(c, &sizes),
            })
            .collect(),
        edges: edge_cross
            .into_iter()
            .zip(&graph.edges)
            .map(|(c, e)| EdgeClusterStats {
                src: e.src,
                dst: e.dst,
                stats: ElementStats::from_crossings(c, &sizes),
            })
            .collect(),
        cluster_sizes: sizes,
    })
}

/// Agreement (ARI) between the final labels and one per-length partition.
pub fn consistency(final_labels: &Partition, per_length: &Partition) -> Result<f64> {
    ari(&final_labels.labels, &per_length.labels)
}

/// Mean over clusters of the highest node exclusivity; empty clusters
/// contribute 0.
pub fn interpretability_factor(graph: &EmbeddedGraph, labels: &Partition) -> Result<f64> {
    let stats = node_stats(graph, labels)?;
    Ok(interpretability_from_stats(&stats))
}

pub fn interpretability_from_stats(stats: &GraphStats) -> f64 {
    if stats.k == 0 {
        return 0.0;
    }
    let total: f64 = (0..stats.k)
        .map(|c| {
            if stats.cluster_sizes[c] == 0 {
                return 0.0;
            }
            stats
                .nodes
                .iter()
                .map(|n| n.stats.exclusivity[c])
                .fold(0.0, f64::max)
        })
        .sum();
    total / stats.k as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthScore {
    #[serde(rename = "l")]
    pub length: usize,
    pub wc: f64,
    pub we: f64,
    pub product: f64,
}

impl LengthScore {
    pub fn new(length: usize, wc: f64, we: f64) -> Self {
        Self {
            length,
            wc,
            we,
            product: wc * we,
        }
    }
}

/// Length maximizing `wc * we`; ties go to the smallest length.
pub fn select_length(scores: &[LengthScore]) -> Result<usize> {
    let mut best: Option<&LengthScore> = None;
    for s in scores {
        best = match best {
            None => Some(s),
            Some(b) if s.product > b.product || (s.product == b.product && s.length < b.length) => {
                Some(s)
            }
            keep => keep,
        };
    }
    best.map(|s| s.length)
        .ok_or_else(|| Error::InvalidParameter("no length scores to select from".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphoidKind {
    /// Representativity >= lambda.
    Lambda,
    /// Exclusivity >= gamma.
    Gamma,
    /// Both.
    Combined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graphoid {
    pub cluster: usize,
    pub kind: GraphoidKind,
    pub lambda: f64,
    pub gamma: f64,
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl Graphoid {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }
}

fn check_threshold(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 1], got {v}"
        )));
    }
    Ok(())
}

/// Inclusive threshold test used by graphoids and graph coloring.
pub fn passes(
    stats: &ElementStats,
    cluster: usize,
    kind: GraphoidKind,
    lambda: f64,
    gamma: f64,
) -> bool {
    let rep = stats.representativity[cluster] >= lambda;
    let excl = stats.exclusivity[cluster] >= gamma;
    match kind {
        GraphoidKind::Lambda => rep,
        GraphoidKind::Gamma => excl,
        GraphoidKind::Combined => rep && excl,
    }
}

/// Subgraph of `cluster` whose elements meet the thresholds for `kind`.
/// Only the threshold relevant to `kind` is applied.
pub fn graphoid(
    stats: &GraphStats,
    cluster: usize,
    kind: GraphoidKind,
    lambda: f64,
    gamma: f64,
) -> Result<Graphoid> {
    check_threshold("lambda", lambda)?;
    check_threshold("gamma", gamma)?;
    if cluster >= stats.k {
        return Err(Error::UnknownCluster {
            cluster,
            k: stats.k,
        });
    }
    Ok(Graphoid {
        cluster,
        kind,
        lambda,
        gamma,
        nodes: stats
            .nodes
            .iter()
            .filter(|n| passes(&n.stats, cluster, kind, lambda, gamma))
            .map(|n| n.node_id)
            .collect(),
        edges: stats
            .edges
            .iter()
            .filter(|e| passes(&e.stats, cluster, kind, lambda, gamma))
            .map(|e| (e.src, e.dst))
            .collect(),
    })
}
