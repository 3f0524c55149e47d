//! Response payloads and the handlers that build them.
//!
//! Every payload is a plain serde struct so clients (and tests) can
//! deserialize responses into the same types.

use std::sync::Arc;

use axum::extract::rejection::{PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use kgraph_core::embedding::EmbeddedGraph;
use kgraph_core::interpret::{passes, ElementStats, GraphoidKind, LengthScore};
use kgraph_core::metrics::Scores;
use kgraph_core::pipeline::{FeatureShape, RunArtifact};
use serde::{Deserialize, Serialize};

use crate::store::ArtifactStore;

/// Largest number of points per series in display payloads.
pub const DISPLAY_POINTS: usize = 1024;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self {
            Self::NotFound(_) => StatusCode::NOT_FOUND,
            Self::BadRequest(_) => StatusCode::BAD_REQUEST,
        };
        let body = ErrorBody {
            error: self.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        Self::BadRequest(r.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(r: PathRejection) -> Self {
        Self::BadRequest(r.body_text())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
pub(crate) type Store = State<Arc<ArtifactStore>>;

fn find<'a>(store: &'a ArtifactStore, id: &str) -> Result<&'a Arc<RunArtifact>, ApiError> {
    store
        .get(id)
        .ok_or_else(|| ApiError::NotFound(format!("unknown run {id:?}")))
}

fn selected(run: &RunArtifact) -> &EmbeddedGraph {
    run.selected_graph()
        .expect("validated artifacts contain the selected graph")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub id: String,
    pub dataset: String,
    pub k: usize,
    pub series: usize,
    pub selected_length: usize,
    pub kgraph_ari: Option<f64>,
    pub baseline_ari: Option<f64>,
}

pub async fn list_runs(State(store): Store) -> Json<Vec<RunSummary>> {
    Json(
        store
            .iter()
            .map(|(id, run)| RunSummary {
                id: id.to_owned(),
                dataset: run.dataset.name.clone(),
                k: run.k,
                series: run.dataset.series.len(),
                selected_length: run.selected_length,
                kgraph_ari: run.metrics.kgraph.map(|s| s.ari),
                baseline_ari: run.metrics.baseline.map(|s| s.ari),
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
pub struct Thresholds {
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    /// Number of subsequences assigned to the node.
    pub members: usize,
    /// Cluster with the highest exclusivity.
    pub cluster: usize,
    pub colored: bool,
    #[serde(flatten)]
    pub stats: ElementStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub src: usize,
    pub dst: usize,
    pub weight: u64,
    pub cluster: usize,
    pub colored: bool,
    #[serde(flatten)]
    pub stats: ElementStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphView {
    pub run: String,
    pub length: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub k: usize,
    pub cluster_sizes: Vec<usize>,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    pub colored_nodes: usize,
    pub colored_edges: usize,
}

fn threshold(name: &str, value: Option<f64>, default: f64) -> Result<f64, ApiError> {
    let v = value.unwrap_or(default);
    if !(0.0..=1.0).contains(&v) {
        return Err(ApiError::BadRequest(format!(
            "{name} must lie in [0, 1], got {v}"
        )));
    }
    Ok(v)
}

/// Colors an element when it passes both thresholds for its dominant cluster.
fn colored(stats: &ElementStats, lambda: f64, gamma: f64) -> (usize, bool) {
    let c = stats.dominant_cluster();
    (c, passes(stats, c, GraphoidKind::Combined, lambda, gamma))
}

pub async fn graph(
    State(store): Store,
    Path(id): Path<String>,
    query: Result<Query<Thresholds>, QueryRejection>,
) -> ApiResult<GraphView> {
    let Query(t) = query?;
    let run = find(&store, &id)?;
    let lambda = threshold("lambda", t.lambda, run.config.lambda)?;
    let gamma = threshold("gamma", t.gamma, run.config.gamma)?;
    let g = selected(run);

    let nodes: Vec<GraphNode> = run
        .node_stats
        .iter()
        .map(|s| {
            let node = &g.nodes[s.node_id];
            let (cluster, colored) = colored(&s.stats, lambda, gamma);
            GraphNode {
                id: s.node_id,
                x: node.x,
                y: node.y,
                members: g.members[s.node_id].len(),
                cluster,
                colored,
                stats: s.stats.clone(),
            }
        })
        .collect();
    let edges: Vec<GraphEdge> = run
        .edge_stats
        .iter()
        .map(|s| {
            let weight = g
                .edge_position(s.src, s.dst)
                .map_or(0, |i| g.edges[i].weight);
            let (cluster, colored) = colored(&s.stats, lambda, gamma);
            GraphEdge {
                src: s.src,
                dst: s.dst,
                weight,
                cluster,
                colored,
                stats: s.stats.clone(),
            }
        })
        .collect();
    Ok(Json(GraphView {
        run: id,
        length: g.length,
        lambda,
        gamma,
        k: run.k,
        cluster_sizes: run.cluster_sizes.clone(),
        colored_nodes: nodes.iter().filter(|n| n.colored).count(),
        colored_edges: edges.iter().filter(|e| e.colored).count(),
        nodes,
        edges,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberRef {
    pub series_id: usize,
    pub start: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDetail {
    pub run: String,
    pub node_id: usize,
    pub x: f64,
    pub y: f64,
    pub cluster: usize,
    pub members: Vec<MemberRef>,
    pub stats: ElementStats,
}

pub async fn node(
    State(store): Store,
    path: Result<Path<(String, usize)>, PathRejection>,
) -> ApiResult<NodeDetail> {
    let Path((id, node_id)) = path?;
    let run = find(&store, &id)?;
    let g = selected(run);
    let not_found = || ApiError::NotFound(format!("run {id:?} has no node {node_id}"));
    let node = g.nodes.get(node_id).ok_or_else(not_found)?;
    let stats = run
        .node_stats
        .iter()
        .find(|s| s.node_id == node_id)
        .ok_or_else(not_found)?;
    let members = g.members[node_id]
        .iter()
        .map(|&[series_id, start]| MemberRef {
            series_id,
            start,
            length: g.length,
        })
        .collect();
    Ok(Json(NodeDetail {
        cluster: stats.stats.dominant_cluster(),
        run: id,
        node_id,
        x: node.x,
        y: node.y,
        members,
        stats: stats.stats.clone(),
    }))
}

/// Uniform-stride downsampling that keeps the first and last point.
/// Returns the kept indices and values. `max_points` is raised to 2.
pub fn downsample(values: &[f64], max_points: usize) -> (Vec<usize>, Vec<f64>) {
    let n = values.len();
    let max_points = max_points.max(2);
    let idx: Vec<usize> = if n <= max_points {
        (0..n).collect()
    } else {
        (0..max_points)
            .map(|i| i * (n - 1) / (max_points - 1))
            .collect()
    };
    let vals = idx.iter().map(|&i| values[i]).collect();
    (idx, vals)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplaySeries {
    pub id: usize,
    pub len: usize,
    /// Original time index of every displayed point.
    pub t: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub label: usize,
    pub series_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grouping {
    pub labels: Vec<usize>,
    pub groups: Vec<Group>,
    /// Against the true labels, when known.
    pub ari: Option<f64>,
}

impl Grouping {
    fn new(labels: &[usize], ari: Option<f64>) -> Self {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut groups: Vec<Group> = (0..k)
            .map(|label| Group {
                label,
                series_ids: Vec::new(),
            })
            .collect();
        for (i, &l) in labels.iter().enumerate() {
            groups[l].series_ids.push(i);
        }
        Self {
            labels: labels.to_vec(),
            groups,
            ari,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub kgraph: Option<Scores>,
    pub baseline: Option<Scores>,
    pub kgraph_vs_baseline: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClustersView {
    pub run: String,
    pub max_points: usize,
    pub kgraph: Grouping,
    pub baseline: Grouping,
    pub truth: Option<Grouping>,
    pub series: Vec<DisplaySeries>,
    pub metrics: MetricTable,
}

pub async fn clusters(State(store): Store, Path(id): Path<String>) -> ApiResult<ClustersView> {
    let run = find(&store, &id)?;
    let m = &run.metrics;
    let series = run
        .dataset
        .series
        .iter()
        .enumerate()
        .map(|(i, values)| {
            let (t, values_ds) = downsample(values, DISPLAY_POINTS);
            DisplaySeries {
                id: i,
                len: values.len(),
                t,
                values: values_ds,
            }
        })
        .collect();
    Ok(Json(ClustersView {
        run: id,
        max_points: DISPLAY_POINTS,
        kgraph: Grouping::new(&run.final_labels, m.kgraph.map(|s| s.ari)),
        baseline: Grouping::new(&run.baseline_labels, m.baseline.map(|s| s.ari)),
        truth: run
            .dataset
            .true_labels
            .as_deref()
            .map(|t| Grouping::new(t, Some(1.0))),
        series,
        metrics: MetricTable {
            kgraph: m.kgraph,
            baseline: m.baseline,
            kgraph_vs_baseline: m.kgraph_vs_baseline,
        },
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnderHood {
    pub run: String,
    /// Aligned with the candidate lengths.
    pub lengths: Vec<LengthScore>,
    pub selected_length: usize,
    /// Row-major, one row per series.
    pub consensus: Vec<Vec<f64>>,
    /// Final labels, for ordering heatmap rows.
    pub final_labels: Vec<usize>,
    pub feature_shapes: Vec<FeatureShape>,
}

pub async fn underhood(State(store): Store, Path(id): Path<String>) -> ApiResult<UnderHood> {
    let run = find(&store, &id)?;
    let c = &run.consensus;
    Ok(Json(UnderHood {
        run: id,
        lengths: run.lengths.clone(),
        selected_length: run.selected_length,
        consensus: (0..c.size).map(|i| c.row(i).to_vec()).collect(),
        final_labels: run.final_labels.clone(),
        feature_shapes: run.feature_shapes.clone(),
    }))
}
