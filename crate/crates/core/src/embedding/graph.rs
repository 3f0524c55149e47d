use std::collections::BTreeMap;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pca::{fit_projection, Projection2D, PCA_SAMPLE_LIMIT};
use super::radial::{gaussian_kde, radial_nodes, Node, RadialParams};
use crate::series::{znormalize_into, Dataset};
use crate::{seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub radial: RadialParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: u64,
}

/// Directed pattern graph for one subsequence length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedGraph {
    pub length: usize,
    pub nodes: Vec<Node>,
    /// Sorted by `(src, dst)`.
    pub edges: Vec<Edge>,
    /// Collapsed node path of every series.
    pub paths: Vec<Vec<usize>>,
    /// `(series_id, start)` of every window assigned to each node, indexed by node id.
    pub members: Vec<Vec<[usize; 2]>>,
}

impl EmbeddedGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn series_count(&self) -> usize {
        self.paths.len()
    }

    pub fn edge_position(&self, src: usize, dst: usize) -> Option<usize> {
        self.edges
            .binary_search_by(|e| (e.src, e.dst).cmp(&(src, dst)))
            .ok()
    }

    /// Number of windows of each series assigned to each node: `[series][node]`.
    pub fn node_counts(&self) -> Vec<Vec<u64>> {
        let mut counts = vec![vec![0u64; self.nodes.len()]; self.paths.len()];
        for (node, refs) in self.members.iter().enumerate() {
            for &[series, _] in refs {
                counts[series][node] += 1;
            }
        }
        counts
    }

    /// Number of traversals of each edge by each series: `[series][edge]`.
    pub fn edge_counts(&self) -> Vec<Vec<u64>> {
        self.paths
            .iter()
            .map(|path| {
                let mut row = vec![0u64; self.edges.len()];
                for w in path.windows(2) {
                    if let Some(e) = self.edge_position(w[0], w[1]) {
                        row[e] += 1;
                    }
                }
                row
            })
            .collect()
    }
}

/// Every z-normalized window of a dataset projected to the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedWindows {
    pub projection: Projection2D,
    /// Flat, series-major, start-ascending.
    pub points: Vec<(f64, f64)>,
    /// Offset of each series' first window in `points`.
    pub offsets: Vec<usize>,
}

fn window_counts(dataset: &Dataset, length: usize) -> Result<Vec<usize>> {
    dataset
        .series
        .iter()
        .map(|s| {
            if length > s.len() {
                Err(Error::LengthTooLong {
                    length,
                    series_len: s.len(),
                })
            } else {
                Ok(s.len() - length + 1)
            }
        })
        .collect()
}

/// Fits the projection on (a seeded sample of) all windows and projects every
/// window.
pub fn project_dataset(dataset: &Dataset, length: usize, seed: u64) -> Result<ProjectedWindows> {
    if length < 2 {
        return Err(Error::InvalidParameter(format!(
            "subsequence length must be >= 2, got {length}"
        )));
    }
    let counts = window_counts(dataset, length)?;
    let mut offsets = Vec::with_capacity(counts.len());
    let mut total = 0;
    for c in &counts {
        offsets.push(total);
        total += c;
    }

    let locate = |flat: usize| -> (usize, usize) {
        let s = offsets.partition_point(|&o| o <= flat) - 1;
        (s, flat - offsets[s])
    };
    let picked: Vec<usize> = if total > PCA_SAMPLE_LIMIT {
        let mut rng = seed::rng(seed);
        let mut idx = index::sample(&mut rng, total, PCA_SAMPLE_LIMIT).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..total).collect()
    };
    let sample: Vec<Vec<f64>> = picked
        .iter()
        .map(|&flat| {
            let (s, start) = locate(flat);
            let mut buf = vec![0.0; length];
            znormalize_into(&dataset.series[s].values[start..start + length], &mut buf);
            buf
        })
        .collect();
    let projection = fit_projection(&sample, length, seed)?;

    let points: Vec<(f64, f64)> = dataset
        .series
        .par_iter()
        .flat_map_iter(|s| {
            let mut buf = vec![0.0; length];
            let projection = &projection;
            s.values
                .windows(length)
                .map(move |w| {
                    znormalize_into(w, &mut buf);
                    projection.project_unchecked(&buf)
                })
                .collect::<Vec<_>>()
        })
        .collect();

    Ok(ProjectedWindows {
        projection,
        points,
        offsets,
    })
}

/// Nearest node (Euclidean) for every point; ties go to the smallest id.
pub fn assign_subsequences(points: &[(f64, f64)], nodes: &[Node]) -> Vec<usize> {
    assert!(!nodes.is_empty(), "assignment needs at least one node");
    points
        .par_iter()
        .map(|&(x, y)| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, n) in nodes.iter().enumerate() {
                let d = (x - n.x) * (x - n.x) + (y - n.y) * (y - n.y);
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            nodes[best].id
        })
        .collect()
}

/// Merges consecutive repeats.
pub fn collapse_path(assignments: &[usize]) -> Vec<usize> {
    let mut path: Vec<usize> = Vec::with_capacity(assignments.len());
    for &a in assignments {
        if path.last() != Some(&a) {
            path.push(a);
        }
    }
    path
}

fn origin_node(count: usize, params: &RadialParams) -> Node {
    let zeros = vec![0.0; count];
    let h = params.bandwidth_floor;
    let density = gaussian_kde(&zeros, h, &[0.0])[0];
    Node {
        id: 0,
        x: 0.0,
        y: 0.0,
        angle_bin: 0,
        radius: 0.0,
        density,
    }
}

/// Builds the pattern graph of `dataset` for subsequence length `length`.
pub fn build_graph(
    dataset: &Dataset,
    length: usize,
    params: &EmbeddingParams,
    seed: u64,
) -> Result<EmbeddedGraph> {
    params.radial.validate()?;
    let projected = project_dataset(dataset, length, seed)?;
    let nodes = match radial_nodes(&projected.points, &params.radial) {
        Ok(nodes) => nodes,
        // every window is flat: a single pattern at the origin
        Err(Error::DegenerateProjection) => {
            vec![origin_node(projected.points.len(), &params.radial)]
        }
        Err(e) => return Err(e),
    };
    let assignment = assign_subsequences(&projected.points, &nodes);
    let counts: Vec<usize> = dataset
        .series
        .iter()
        .map(|s| s.len() - length + 1)
        .collect();
    Ok(assemble(length, nodes, &assignment, &counts))
}

/// Builds members, collapsed paths and edge weights from flat series-major
/// window assignments; `counts[s]` is the number of windows of series `s`.
pub(crate) fn assemble(
    length: usize,
    nodes: Vec<Node>,
    assignment: &[usize],
    counts: &[usize],
) -> EmbeddedGraph {
    let mut members: Vec<Vec<[usize; 2]>> = vec![Vec::new(); nodes.len()];
    let mut paths = Vec::with_capacity(counts.len());
    let mut weights: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut offset = 0;
    for (s, &count) in counts.iter().enumerate() {
        let raw = &assignment[offset..offset + count];
        offset += count;
        for (start, &node) in raw.iter().enumerate() {
            members[node].push([s, start]);
        }
        let path = collapse_path(raw);
        for w in path.windows(2) {
            *weights.entry((w[0], w[1])).or_default() += 1;
        }
        paths.push(path);
    }
    let edges = weights
        .into_iter()
        .map(|((src, dst), weight)| Edge { src, dst, weight })
        .collect();

    EmbeddedGraph {
        length,
        nodes,
        edges,
        paths,
        members,
    }
}
