//! Python bindings: `import kgraph`.
//!
//! Series cross the boundary as lists of float lists, labels as int lists.
//! Library errors become `ValueError`, file errors `OSError`.

use std::collections::BTreeMap;

use kgraph_core::clustering::{features, kmeans as core_kmeans, KMeansConfig, Partition};
use kgraph_core::embedding::{
    build_graph as core_build_graph, EmbeddedGraph, EmbeddingParams, RadialParams,
};
use kgraph_core::interpret::{graphoid as core_graphoid, node_stats, GraphStats, GraphoidKind};
use kgraph_core::metrics;
use kgraph_core::pipeline::{run_on, RunArtifact, RunConfig};
use kgraph_core::series::{self, Dataset, DatasetFormat};
use kgraph_core::Error;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

type Series = Vec<Vec<f64>>;
type Subgraph = (Vec<usize>, Vec<(usize, usize)>);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn dataset(series: Vec<Vec<f64>>, labels: Option<Vec<usize>>) -> PyResult<Dataset> {
    Dataset::new("python", series, labels).map_err(to_py)
}

fn kind_of(name: &str) -> PyResult<GraphoidKind> {
    match name {
        "lambda" => Ok(GraphoidKind::Lambda),
        "gamma" => Ok(GraphoidKind::Gamma),
        "combined" => Ok(GraphoidKind::Combined),
        other => Err(PyValueError::new_err(format!(
            "kind must be 'lambda', 'gamma' or 'combined', got {other:?}"
        ))),
    }
}

/// Adjusted Rand Index of two labelings.
#[pyfunction]
fn ari(a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    metrics::ari(&a, &b).map_err(to_py)
}

#[pyfunction]
fn rand_index(a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    metrics::rand_index(&a, &b).map_err(to_py)
}

#[pyfunction]
fn nmi(a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    metrics::nmi(&a, &b).map_err(to_py)
}

#[pyfunction]
fn purity(clusters: Vec<usize>, classes: Vec<usize>) -> PyResult<f64> {
    metrics::purity(&clusters, &classes).map_err(to_py)
}

/// Candidate subsequence lengths for a shortest-series length.
#[pyfunction]
#[pyo3(signature = (min_len, m = 10))]
fn candidate_lengths(min_len: usize, m: usize) -> PyResult<Vec<usize>> {
    series::lengths_for(min_len, m).map_err(to_py)
}

#[pyfunction]
fn znormalize(values: Vec<f64>) -> Vec<f64> {
    series::znormalize_values(&values)
}

/// Reads a dataset file; returns `(series, labels)`.
#[pyfunction]
#[pyo3(signature = (path, format = "ucr-tsv"))]
fn load_dataset(path: &str, format: &str) -> PyResult<(Series, Option<Vec<usize>>)> {
    let format: DatasetFormat = format.parse().map_err(to_py)?;
    let ds = series::load_dataset(path, format).map_err(to_py)?;
    Ok((
        ds.series.into_iter().map(|s| s.values).collect(),
        ds.true_labels,
    ))
}

/// Seeded k-means; returns labels numbered by first occurrence.
#[pyfunction]
#[pyo3(signature = (points, k, seed = 0))]
fn kmeans(points: Vec<Vec<f64>>, k: usize, seed: u64) -> PyResult<Vec<usize>> {
    core_kmeans(&points, k, seed, &KMeansConfig::default())
        .map(|f| f.partition.labels)
        .map_err(to_py)
}

/// Pattern graph of one subsequence length.
#[pyclass(frozen, module = "kgraph")]
struct Graph {
    inner: EmbeddedGraph,
}

#[pymethods]
impl Graph {
    #[getter]
    fn length(&self) -> usize {
        self.inner.length
    }

    /// `(x, y)` position of every node.
    #[getter]
    fn nodes(&self) -> Vec<(f64, f64)> {
        self.inner.nodes.iter().map(|n| (n.x, n.y)).collect()
    }

    /// `(src, dst, weight)` for every edge.
    #[getter]
    fn edges(&self) -> Vec<(usize, usize, u64)> {
        self.inner
            .edges
            .iter()
            .map(|e| (e.src, e.dst, e.weight))
            .collect()
    }

    /// Collapsed node path of every series.
    #[getter]
    fn paths(&self) -> Vec<Vec<usize>> {
        self.inner.paths.clone()
    }

    /// `(series_id, start)` of the windows assigned to `node`.
    fn members(&self, node: usize) -> PyResult<Vec<(usize, usize)>> {
        self.inner
            .members
            .get(node)
            .map(|m| m.iter().map(|&[s, t]| (s, t)).collect())
            .ok_or_else(|| PyValueError::new_err(format!("no node {node}")))
    }

    /// Row-normalized node and edge features, one row per series.
    fn features(&self) -> Vec<Vec<f64>> {
        features(&self.inner).rows
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(length={}, nodes={}, edges={})",
            self.inner.length,
            self.inner.node_count(),
            self.inner.edge_count()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (series, length, seed = 0, sectors = 64, min_density_frac = 0.1))]
fn build_graph(
    series: Vec<Vec<f64>>,
    length: usize,
    seed: u64,
    sectors: usize,
    min_density_frac: f64,
) -> PyResult<Graph> {
    let ds = dataset(series, None)?;
    let params = EmbeddingParams {
        radial: RadialParams {
            sectors,
            min_density_frac,
            ..RadialParams::default()
        },
    };
    let inner = core_build_graph(&ds, length, &params, seed).map_err(to_py)?;
    Ok(Graph { inner })
}

/// Outcome of a full pipeline run.
#[pyclass(frozen, module = "kgraph")]
struct RunResult {
    artifact: RunArtifact,
    stats: GraphStats,
}

#[pymethods]
impl RunResult {
    #[getter]
    fn k(&self) -> usize {
        self.artifact.k
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.artifact.final_labels.clone()
    }

    #[getter]
    fn baseline_labels(&self) -> Vec<usize> {
        self.artifact.baseline_labels.clone()
    }

    #[getter]
    fn selected_length(&self) -> usize {
        self.artifact.selected_length
    }

    #[getter]
    fn candidate_lengths(&self) -> Vec<usize> {
        self.artifact.candidate_lengths.clone()
    }

    /// `(length, W_c, W_e, product)` per candidate length.
    #[getter]
    fn length_scores(&self) -> Vec<(usize, f64, f64, f64)> {
        self.artifact
            .lengths
            .iter()
            .map(|s| (s.length, s.wc, s.we, s.product))
            .collect()
    }

    /// Scores against the true labels, when they were given.
    #[getter]
    fn scores(&self) -> Option<BTreeMap<&'static str, f64>> {
        self.artifact.metrics.kgraph.map(|s| {
            BTreeMap::from([
                ("ari", s.ari),
                ("ri", s.ri),
                ("nmi", s.nmi),
                ("purity", s.purity),
            ])
        })
    }

    #[getter]
    fn consensus(&self) -> Vec<Vec<f64>> {
        let c = &self.artifact.consensus;
        (0..c.size).map(|i| c.row(i).to_vec()).collect()
    }

    /// Graph of the selected length.
    fn graph(&self) -> Graph {
        Graph {
            inner: self
                .artifact
                .selected_graph()
                .expect("run output contains the selected graph")
                .clone(),
        }
    }

    /// Node ids and edges of a cluster's graphoid on the selected graph.
    #[pyo3(signature = (cluster, kind = "combined", lambda_ = 0.8, gamma = 0.8))]
    fn graphoid(&self, cluster: usize, kind: &str, lambda_: f64, gamma: f64) -> PyResult<Subgraph> {
        let g =
            core_graphoid(&self.stats, cluster, kind_of(kind)?, lambda_, gamma).map_err(to_py)?;
        Ok((g.nodes, g.edges))
    }

    /// The artifact as compact JSON, as written by the command line runner.
    fn to_json(&self) -> PyResult<String> {
        let bytes = self.artifact.to_json().map_err(to_py)?;
        String::from_utf8(bytes).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(k={}, selected_length={}, series={})",
            self.artifact.k,
            self.artifact.selected_length,
            self.artifact.final_labels.len()
        )
    }
}

/// Runs the whole pipeline in memory. The GIL is released while it runs.
#[pyfunction]
#[pyo3(signature = (series, k, labels = None, m = 10, seed = 42, sectors = 64, min_density_frac = 0.1, lambda_ = 0.8, gamma = 0.8))]
#[allow(clippy::too_many_arguments)]
fn run_pipeline(
    py: Python<'_>,
    series: Vec<Vec<f64>>,
    k: usize,
    labels: Option<Vec<usize>>,
    m: usize,
    seed: u64,
    sectors: usize,
    min_density_frac: f64,
    lambda_: f64,
    gamma: f64,
) -> PyResult<RunResult> {
    let ds = dataset(series, labels)?;
    let config = RunConfig {
        num_lengths: m,
        seed,
        sectors,
        min_density_frac,
        lambda: lambda_,
        gamma,
        ..RunConfig::new("<python>", k, "<memory>")
    };
    let artifact = py
        .detach(|| run_on(&ds, &config))
        .map_err(|e| PyValueError::new_err(e.to_string()))?
        .artifact;
    let graph = artifact
        .selected_graph()
        .expect("run output contains the selected graph");
    let stats = node_stats(
        graph,
        &Partition::new(artifact.final_labels.clone(), artifact.k),
    )
    .map_err(to_py)?;
    Ok(RunResult { artifact, stats })
}

#[pymodule]
fn kgraph(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(ari, m)?)?;
    m.add_function(wrap_pyfunction!(rand_index, m)?)?;
    m.add_function(wrap_pyfunction!(nmi, m)?)?;
    m.add_function(wrap_pyfunction!(purity, m)?)?;
    m.add_function(wrap_pyfunction!(candidate_lengths, m)?)?;
    m.add_function(wrap_pyfunction!(znormalize, m)?)?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(build_graph, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_class::<Graph>()?;
    m.add_class::<RunResult>()?;
    Ok(())
}
