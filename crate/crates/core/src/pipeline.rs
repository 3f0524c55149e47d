//! End-to-end runs and the persisted run artifact.
//!
//! A run goes: candidate lengths -> one graph per length -> features and
//! k-means per graph -> consensus matrix -> spectral clustering -> length
//! scores -> selected graph statistics and graphoids -> baseline and metrics.
//! Everything written to `artifact.json` depends only on the config (and the
//! dataset contents), never on timing or thread count; wall-clock timings go
//! to a separate `timings.json`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{features, partition_all, KMeansConfig, Partition};
use crate::consensus::{consensus_matrix, spectral_cluster, ConsensusMatrix};
use crate::embedding::RadialParams;
use crate::embedding::{build_graph, EmbeddedGraph, EmbeddingParams};
use crate::interpret::{
    consistency, graphoid, interpretability_from_stats, node_stats, select_length,
    EdgeClusterStats, Graphoid, GraphoidKind, LengthScore, NodeClusterStats,
};
use crate::metrics::{baseline_kmeans, score, Scores};
use crate::seed::derive_seed;
use crate::series::{candidate_lengths, load_dataset, Dataset, DatasetFormat};
use crate::Error;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_FILE: &str = "artifact.json";
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub format: DatasetFormat,
    pub k: usize,
    /// Number of candidate subsequence lengths.
    #[serde(rename = "m")]
    pub num_lengths: usize,
    pub seed: u64,
    /// Angular sectors of the radial scan.
    pub sectors: usize,
    pub min_density_frac: f64,
    /// Default representativity threshold.
    pub lambda: f64,
    /// Default exclusivity threshold.
    pub gamma: f64,
    pub out: PathBuf,
    /// Also write one feature-matrix CSV per length.
    #[serde(default)]
    pub export_features: bool,
}

impl RunConfig {
    pub fn new(dataset: impl Into<PathBuf>, k: usize, out: impl Into<PathBuf>) -> Self {
        Self {
            dataset: dataset.into(),
            format: DatasetFormat::UcrTsv,
            k,
            num_lengths: 10,
            seed: 42,
            sectors: 64,
            min_density_frac: 0.1,
            lambda: 0.8,
            gamma: 0.8,
            out: out.into(),
            export_features: false,
        }
    }

    /// Checks every field that can be checked without the data.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::Config(m));
        if self.k == 0 {
            return fail("k must be at least 1".into());
        }
        if self.num_lengths == 0 {
            return fail("m (number of lengths) must be at least 1".into());
        }
        if self.sectors < 4 {
            return fail(format!("sectors must be >= 4, got {}", self.sectors));
        }
        for (name, v) in [
            ("min_density_frac", self.min_density_frac),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }

    fn embedding_params(&self) -> EmbeddingParams {
        EmbeddingParams {
            radial: RadialParams {
                sectors: self.sectors,
                min_density_frac: self.min_density_frac,
                ..RadialParams::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Lengths,
    Embedding(usize),
    Clustering,
    Consensus,
    Interpretability,
    Baseline,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Load => f.write_str("load"),
            Self::Lengths => f.write_str("lengths"),
            Self::Embedding(l) => write!(f, "embedding l={l}"),
            Self::Clustering => f.write_str("clustering"),
            Self::Consensus => f.write_str("consensus"),
            Self::Interpretability => f.write_str("interpretability"),
            Self::Baseline => f.write_str("baseline"),
            Self::Write => f.write_str("write"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("[{stage}] {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Error,
    },
}

impl PipelineError {
    pub fn is_config(&self) -> bool {
        matches!(self, Self::Config(_))
    }
}

trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T> StageExt<T> for Result<T, Error> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError::Stage { stage, source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub name: String,
    pub series: Vec<Vec<f64>>,
    pub true_labels: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureShape {
    pub length: usize,
    pub rows: usize,
    pub node_columns: usize,
    pub edge_columns: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// k-Graph labels against the ground truth.
    pub kgraph: Option<Scores>,
    /// Baseline labels against the ground truth.
    pub baseline: Option<Scores>,
    pub kgraph_vs_baseline: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub schema_version: u32,
    pub config: RunConfig,
    pub dataset: DatasetRecord,
    pub k: usize,
    pub candidate_lengths: Vec<usize>,
    pub graphs: Vec<EmbeddedGraph>,
    pub feature_shapes: Vec<FeatureShape>,
    pub partitions: Vec<Partition>,
    pub consensus: ConsensusMatrix,
    pub final_labels: Vec<usize>,
    /// One entry per candidate length, aligned with `candidate_lengths`.
    pub lengths: Vec<LengthScore>,
    pub selected_length: usize,
    pub cluster_sizes: Vec<usize>,
    pub node_stats: Vec<NodeClusterStats>,
    pub edge_stats: Vec<EdgeClusterStats>,
    /// Lambda, gamma and combined graphoid of every cluster at the config thresholds.
    pub graphoids: Vec<Graphoid>,
    pub baseline_labels: Vec<usize>,
    pub metrics: MetricsRecord,
}

impl RunArtifact {
    pub fn selected_graph(&self) -> Option<&EmbeddedGraph> {
        self.graphs
            .iter()
            .find(|g| g.length == self.selected_length)
    }

    /// Cross-field consistency checks; returns every violation found.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let n = self.dataset.series.len();
        if self.schema_version != SCHEMA_VERSION {
            errs.push(format!(
                "unsupported schema_version {}",
                self.schema_version
            ));
        }
        if self.final_labels.len() != n {
            errs.push("final_labels length differs from series count".into());
        }
        if self.baseline_labels.len() != n {
            errs.push("baseline_labels length differs from series count".into());
        }
        if self.final_labels.iter().any(|&l| l >= self.k) {
            errs.push("final label out of range".into());
        }
        if let Some(t) = &self.dataset.true_labels {
            if t.len() != n {
                errs.push("true_labels length differs from series count".into());
            }
        }
        if !self.candidate_lengths.contains(&self.selected_length) {
            errs.push("selected_length not among candidate lengths".into());
        }
        if self.graphs.len() != self.candidate_lengths.len()
            || self.partitions.len() != self.candidate_lengths.len()
            || self.lengths.len() != self.candidate_lengths.len()
        {
            errs.push("per-length arrays are not aligned".into());
        }
        if self.partitions.iter().any(|p| p.len() != n) {
            errs.push("partition length differs from series count".into());
        }
        if self.consensus.size != n || self.consensus.values.len() != n * n {
            errs.push("consensus matrix shape differs from series count".into());
        }
        match self.selected_graph() {
            None => errs.push("selected graph missing".into()),
            Some(g) => {
                if self.node_stats.len() != g.nodes.len()
                    || self.node_stats.iter().any(|s| s.node_id >= g.nodes.len())
                {
                    errs.push("node_stats reference nodes outside the selected graph".into());
                }
                if self.edge_stats.len() != g.edges.len()
                    || self
                        .edge_stats
                        .iter()
                        .any(|e| g.edge_position(e.src, e.dst).is_none())
                {
                    errs.push("edge_stats reference edges outside the selected graph".into());
                }
                let ids = |v: &[usize]| v.iter().all(|&id| id < g.nodes.len());
                if self.graphoids.iter().any(|gr| !ids(&gr.nodes)) {
                    errs.push("graphoid references unknown node".into());
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>, Error> {
        let mut bytes = serde_json::to_vec(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, Error> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub load_ms: f64,
    pub embedding_ms: f64,
    pub clustering_ms: f64,
    pub consensus_ms: f64,
    pub interpretability_ms: f64,
    pub baseline_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub artifact: RunArtifact,
    pub timings: Timings,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Loads the configured dataset, runs the pipeline and writes
/// `artifact.json` and `timings.json` into `config.out`.
pub fn run(config: &RunConfig) -> Result<RunOutput, PipelineError> {
    config.validate()?;
    let start = Instant::now();
    let dataset = load_dataset(&config.dataset, config.format).stage(Stage::Load)?;
    let load_ms = ms(start);
    let mut output = run_on(&dataset, config)?;
    output.timings.load_ms = load_ms;
    output.timings.total_ms += load_ms;
    write_outputs(&output, config).stage(Stage::Write)?;
    Ok(output)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_outputs(output: &RunOutput, config: &RunConfig) -> Result<(), Error> {
    fs::create_dir_all(&config.out).map_err(io_err(&config.out))?;
    let artifact_path = config.out.join(ARTIFACT_FILE);
    fs::write(&artifact_path, output.artifact.to_json()?).map_err(io_err(&artifact_path))?;
    let timings_path = config.out.join(TIMINGS_FILE);
    let timings = serde_json::to_vec_pretty(&output.timings)?;
    fs::write(&timings_path, timings).map_err(io_err(&timings_path))?;
    if config.export_features {
        for g in &output.artifact.graphs {
            let path = config.out.join(format!("features_l{}.csv", g.length));
            let file = fs::File::create(&path).map_err(io_err(&path))?;
            features(g).write_csv(std::io::BufWriter::new(file))?;
        }
    }
    Ok(())
}

/// Runs the pipeline on an in-memory dataset without touching the disk.
pub fn run_on(dataset: &Dataset, config: &RunConfig) -> Result<RunOutput, PipelineError> {
    config.validate()?;
    let k = config.k;
    if k > dataset.len() {
        return Err(PipelineError::Config(format!(
            "k = {k} exceeds the number of series ({})",
            dataset.len()
        )));
    }
    let total = Instant::now();
    let mut timings = Timings::default();

    let lengths = candidate_lengths(dataset, config.num_lengths).stage(Stage::Lengths)?;

    let t = Instant::now();
    let params = config.embedding_params();
    let graphs: Vec<EmbeddedGraph> = lengths
        .par_iter()
        .map(|&l| {
            build_graph(
                dataset,
                l,
                &params,
                derive_seed(config.seed, "embedding", l),
            )
            .stage(Stage::Embedding(l))
        })
        .collect::<Result<_, _>>()?;
    timings.embedding_ms = ms(t);

    let t = Instant::now();
    let partitions = partition_all(
        &graphs,
        k,
        derive_seed(config.seed, "kmeans", 0),
        &KMeansConfig::default(),
    )
    .stage(Stage::Clustering)?;
    let feature_shapes = graphs
        .iter()
        .map(|g| FeatureShape {
            length: g.length,
            rows: g.series_count(),
            node_columns: g.node_count(),
            edge_columns: g.edge_count(),
        })
        .collect();
    timings.clustering_ms = ms(t);

    let t = Instant::now();
    let consensus = consensus_matrix(&partitions).stage(Stage::Consensus)?;
    let mut final_partition =
        spectral_cluster(&consensus, k, derive_seed(config.seed, "spectral", 0))
            .stage(Stage::Consensus)?;
    final_partition.length = None;
    timings.consensus_ms = ms(t);

    let t = Instant::now();
    let per_length: Vec<(LengthScore, _)> = graphs
        .par_iter()
        .zip(&partitions)
        .map(|(g, p)| {
            let wc = consistency(&final_partition, p)?;
            let stats = node_stats(g, &final_partition)?;
            let we = interpretability_from_stats(&stats);
            Ok((LengthScore::new(g.length, wc, we), stats))
        })
        .collect::<Result<_, Error>>()
        .stage(Stage::Interpretability)?;
    let scores: Vec<LengthScore> = per_length.iter().map(|(s, _)| *s).collect();
    let selected_length = select_length(&scores).stage(Stage::Interpretability)?;
    let selected_idx = lengths
        .iter()
        .position(|&l| l == selected_length)
        .expect("selected length comes from the candidates");
    let stats = per_length
        .into_iter()
        .nth(selected_idx)
        .map(|(_, s)| s)
        .expect("one stats entry per length");
    let mut graphoids = Vec::with_capacity(3 * k);
    for c in 0..k {
        for kind in [
            GraphoidKind::Lambda,
            GraphoidKind::Gamma,
            GraphoidKind::Combined,
        ] {
            graphoids.push(
                graphoid(&stats, c, kind, config.lambda, config.gamma)
                    .stage(Stage::Interpretability)?,
            );
        }
    }
    timings.interpretability_ms = ms(t);

    let t = Instant::now();
    let baseline = baseline_kmeans(dataset, k, derive_seed(config.seed, "baseline", 0))
        .stage(Stage::Baseline)?;
    let truth = dataset.true_labels.as_deref();
    let metrics = MetricsRecord {
        kgraph: truth
            .map(|t| score(&final_partition.labels, t))
            .transpose()
            .stage(Stage::Baseline)?,
        baseline: truth
            .map(|t| score(&baseline.labels, t))
            .transpose()
            .stage(Stage::Baseline)?,
        kgraph_vs_baseline: score(&final_partition.labels, &baseline.labels)
            .stage(Stage::Baseline)?,
    };
    timings.baseline_ms = ms(t);
    timings.total_ms = ms(total);

    let artifact = RunArtifact {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        dataset: DatasetRecord {
            name: dataset.name.clone(),
            series: dataset.series.iter().map(|s| s.values.clone()).collect(),
            true_labels: dataset.true_labels.clone(),
        },
        k,
        candidate_lengths: lengths,
        graphs,
        feature_shapes,
        partitions,
        consensus,
        final_labels: final_partition.labels,
        lengths: scores,
        selected_length,
        cluster_sizes: stats.cluster_sizes,
        node_stats: stats.nodes,
        edge_stats: stats.edges,
        graphoids,
        baseline_labels: baseline.labels,
        metrics,
    };
    Ok(RunOutput { artifact, timings })
}
