//! Per-graph clustering: node/edge crossing features and k-means.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddedGraph;
use crate::series::remap_first_occurrence;
use crate::{seed, Error, Result};

/// Column of a [`FeatureMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Column {
    Node { id: usize },
    Edge { src: usize, dst: usize },
}

/// Series x (nodes, edges) crossing frequencies. Each row's node block and
/// edge block are L1-normalized independently (an all-zero block stays zero).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Vec<Vec<f64>>,
    pub columns: Vec<Column>,
    pub node_columns: usize,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn edge_columns(&self) -> usize {
        self.columns.len() - self.node_columns
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["series".to_string()];
        header.extend(self.columns.iter().map(|c| match c {
            Column::Node { id } => format!("node:{id}"),
            Column::Edge { src, dst } => format!("edge:{src}->{dst}"),
        }));
        w.write_record(&header)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn l1_normalize(block: &mut [f64]) {
    let total: f64 = block.iter().sum();
    if total > 0.0 {
        for v in block {
            *v /= total;
        }
    }
}

pub fn features(graph: &EmbeddedGraph) -> FeatureMatrix {
    let node_counts = graph.node_counts();
    let edge_counts = graph.edge_counts();
    let mut columns: Vec<Column> = graph
        .nodes
        .iter()
        .map(|n| Column::Node { id: n.id })
        .collect();
    columns.extend(graph.edges.iter().map(|e| Column::Edge {
        src: e.src,
        dst: e.dst,
    }));
    let node_columns = graph.nodes.len();
    let rows = node_counts
        .iter()
        .zip(&edge_counts)
        .map(|(nc, ec)| {
            let mut row: Vec<f64> = nc.iter().chain(ec).map(|&c| c as f64).collect();
            let (nodes, edges) = row.split_at_mut(node_columns);
            l1_normalize(nodes);
            l1_normalize(edges);
            row
        })
        .collect();
    FeatureMatrix {
        rows,
        columns,
        node_columns,
    }
}

/// Cluster assignment of every series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub k: usize,
    /// Subsequence length the partition came from, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub length: Option<usize>,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Self {
        Self {
            labels,
            k,
            length: None,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            max_iter: 300,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub partition: Partition,
    /// Centroids in the order of the relabelled clusters.
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances after each assignment step.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

impl KMeansFit {
    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(0.0)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

fn plus_plus_init<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut dist: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p, &points[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, d) in dist.iter().enumerate() {
                acc += d;
                if acc > target && *d > 0.0 {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave acc <= target; fall back to the last positive weight
            pick.unwrap_or_else(|| dist.iter().rposition(|&d| d > 0.0).unwrap_or(0))
        } else {
            // every point coincides with a chosen centre
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

/// Seeded k-means++ followed by Lloyd iterations. Empty clusters take over
/// the point farthest from its centroid; labels are renumbered by first
/// occurrence.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    config: &KMeansConfig,
) -> Result<KMeansFit> {
    let n = points.len();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let dim = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: bad.len(),
        });
    }

    let mut rng = seed::rng(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let mut labels = vec![0usize; n];
    let mut trace = Vec::new();
    let mut iterations = 0;

    loop {
        iterations += 1;
        let assigned: Vec<(usize, f64)> =
            points.par_iter().map(|p| nearest(p, &centroids)).collect();
        let mut dists = Vec::with_capacity(n);
        for (i, (c, d)) in assigned.into_iter().enumerate() {
            labels[i] = c;
            dists.push(d);
        }
        repair_empty(&mut labels, &mut dists, &mut centroids, points);
        trace.push(dists.iter().sum());

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            let updated: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(sq_dist(&updated, &centroids[c]).sqrt());
            centroids[c] = updated;
        }
        if shift < config.tol || iterations >= config.max_iter {
            break;
        }
    }

    let relabelled = remap_first_occurrence(&labels);
    let mut ordered = vec![Vec::new(); k];
    for (&old, &new) in labels.iter().zip(&relabelled) {
        if ordered[new].is_empty() {
            ordered[new] = centroids[old].clone();
        }
    }
    Ok(KMeansFit {
        partition: Partition::new(relabelled, k),
        centroids: ordered,
        objective_trace: trace,
        iterations,
    })
}

/// Moves the farthest point of a non-singleton cluster into each empty one.
fn repair_empty(
    labels: &mut [usize],
    dists: &mut [f64],
    centroids: &mut [Vec<f64>],
    points: &[Vec<f64>],
) {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let mut far = None;
        for i in 0..labels.len() {
            if counts[labels[i]] < 2 {
                continue;
            }
            if far.is_none_or(|f: usize| dists[i] > dists[f]) {
                far = Some(i);
            }
        }
        let Some(i) = far else { break };
        counts[labels[i]] -= 1;
        counts[c] = 1;
        labels[i] = c;
        dists[i] = 0.0;
        centroids[c] = points[i].clone();
    }
}

/// Features + k-means for every graph; graph `i` uses seed `seed + i`.
pub fn partition_all(
    graphs: &[EmbeddedGraph],
    k: usize,
    seed: u64,
    config: &KMeansConfig,
) -> Result<Vec<Partition>> {
    if graphs.is_empty() {
        return Err(Error::InvalidParameter("no graphs to partition".into()));
    }
    graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let fm = features(g);
            let mut p = kmeans(&fm.rows, k, seed.wrapping_add(i as u64), config)?.partition;
            p.length = Some(g.length);
            Ok(p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{Edge, Node};

    fn tiny_graph() -> EmbeddedGraph {
        let node = |id| Node {
            id,
            x: id as f64,
            y: 0.0,
            angle_bin: 0,
            radius: id as f64,
            density: 1.0,
        };
        EmbeddedGraph {
            length: 3,
            nodes: (0..4).map(node).collect(),
            edges: vec![
                Edge {
                    src: 0,
                    dst: 1,
                    weight: 1,
                },
                Edge {
                    src: 1,
                    dst: 0,
                    weight: 1,
                },
            ],
            // series 0 only visits node 3; series 1 path [0,1,0]
            paths: vec![vec![3], vec![0, 1, 0]],
            members: vec![
                vec![[1, 0], [1, 3]],
                vec![[1, 1], [1, 2]],
                vec![],
                vec![[0, 0], [0, 1], [0, 2]],
            ],
        }
    }

    #[test]
    fn single_node_series_is_one_hot() {
        let fm = features(&tiny_graph());
        assert_eq!(fm.node_columns, 4);
        assert_eq!(fm.edge_columns(), 2);
        assert_eq!(fm.rows[0], vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(fm.rows[1], vec![0.5, 0.5, 0.0, 0.0, 0.5, 0.5]);
    }

    #[test]
    fn csv_export_has_header() {
        let mut buf = Vec::new();
        features(&tiny_graph()).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("series,node:0,node:1,node:2,node:3,edge:0->1,edge:1->0\n"));
    }

    #[test]
    fn k_one_is_all_zero() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let fit = kmeans(&pts, 1, 0, &KMeansConfig::default()).unwrap();
        assert_eq!(fit.partition.labels, vec![0; 10]);
    }

    #[test]
    fn too_many_clusters() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            kmeans(&pts, 3, 0, &KMeansConfig::default()),
            Err(Error::TooManyClusters { k: 3, n: 2 })
        ));
    }

    #[test]
    fn duplicates_share_cluster_and_empty_is_repaired() {
        let mut pts = vec![vec![0.0, 0.0]; 5];
        pts.push(vec![10.0, 10.0]);
        pts.push(vec![10.0, 10.0]);
        let fit = kmeans(&pts, 3, 7, &KMeansConfig::default()).unwrap();
        let sizes = fit.partition.cluster_sizes();
        assert!(sizes.iter().all(|&s| s > 0), "{sizes:?}");
        assert_eq!(fit.partition.labels[5], fit.partition.labels[6]);
    }

    #[test]
    fn identical_points_still_fill_k_clusters() {
        let pts = vec![vec![1.0]; 4];
        let fit = kmeans(&pts, 4, 1, &KMeansConfig::default()).unwrap();
        assert_eq!(fit.partition.labels, vec![0, 1, 2, 3]);
    }

    #[test]
    fn labels_start_at_zero() {
        let pts: Vec<Vec<f64>> = [0.0, 0.1, 50.0, 50.1, 0.2]
            .iter()
            .map(|&v| vec![v])
            .collect();
        let fit = kmeans(&pts, 2, 123, &KMeansConfig::default()).unwrap();
        assert_eq!(fit.partition.labels, vec![0, 0, 1, 1, 0]);
        assert!((fit.centroids[1][0] - 50.05).abs() < 1e-12);
    }
}
