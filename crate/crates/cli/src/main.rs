//! `kgraph` command line: run the pipeline, serve artifacts, compare labels.

use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use kgraph_core::metrics::score;
use kgraph_core::pipeline::{run, RunConfig, ARTIFACT_FILE};
use kgraph_core::series::DatasetFormat;
use kgraph_explorer::ArtifactStore;
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(name = "kgraph", version, about = "Graph-based time-series clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a dataset and write the run artifact.
    Run(RunArgs),
    /// Serve the artifacts in a directory over HTTP.
    Serve(ServeArgs),
    /// Compare two label files (ARI, RI, NMI, purity).
    Metrics {
        /// Predicted labels.
        a: PathBuf,
        /// Reference labels.
        b: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = DatasetFormat::UcrTsv)]
    format: DatasetFormat,
    /// Number of clusters.
    #[arg(long)]
    k: usize,
    /// Number of candidate subsequence lengths.
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Angular sectors of the radial scan.
    #[arg(long, default_value_t = 64)]
    sectors: usize,
    #[arg(long, default_value_t = 0.1)]
    min_density_frac: f64,
    #[arg(long, default_value_t = 0.8)]
    lambda: f64,
    #[arg(long, default_value_t = 0.8)]
    gamma: f64,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = all cores). Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Also write one feature-matrix CSV per length.
    #[arg(long)]
    export_features: bool,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    artifacts: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Serve(args) => cmd_serve(args),
        Command::Metrics { a, b } => cmd_metrics(&a, &b),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let config = RunConfig {
        dataset: args.dataset,
        format: args.format,
        k: args.k,
        num_lengths: args.m,
        seed: args.seed,
        sectors: args.sectors,
        min_density_frac: args.min_density_frac,
        lambda: args.lambda,
        gamma: args.gamma,
        out: args.out,
        export_features: args.export_features,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .context("building worker pool")?;
    let output = pool.install(|| run(&config)).map_err(|e| {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.into())
        }
    })?;
    let art = &output.artifact;
    println!("wrote {}", config.out.join(ARTIFACT_FILE).display());
    println!("selected length {}", art.selected_length);
    println!("cluster sizes {:?}", art.cluster_sizes);
    if let Some(s) = art.metrics.kgraph {
        println!("k-Graph ARI {:.4}", s.ari);
    }
    if let Some(s) = art.metrics.baseline {
        println!("baseline ARI {:.4}", s.ari);
    }
    println!("total {:.1} ms", output.timings.total_ms);
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> Result<(), Failure> {
    let store = ArtifactStore::load(&args.artifacts)
        .with_context(|| format!("reading artifacts directory {}", args.artifacts.display()))?;
    eprintln!(
        "serving {} run(s) from {}",
        store.len(),
        args.artifacts.display()
    );
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime
        .block_on(kgraph_explorer::serve(store, addr))
        .with_context(|| format!("serving on {addr}"))?;
    Ok(())
}

/// Reads labels from a JSON array, an object with a `labels` field, or a
/// run artifact (its final labels).
fn read_labels(path: &Path) -> anyhow::Result<Vec<usize>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let labels = match &value {
        serde_json::Value::Array(_) => &value,
        serde_json::Value::Object(map) => {
            match map.get("labels").or_else(|| map.get("final_labels")) {
                Some(v) => v,
                None => bail!(
                    "{}: no \"labels\" or \"final_labels\" field",
                    path.display()
                ),
            }
        }
        _ => bail!("{}: expected a label array", path.display()),
    };
    serde_json::from_value(labels.clone())
        .with_context(|| format!("{}: labels must be non-negative integers", path.display()))
}

fn cmd_metrics(a: &Path, b: &Path) -> Result<(), Failure> {
    let la = read_labels(a)?;
    let lb = read_labels(b)?;
    let s = score(&la, &lb).map_err(|e| Failure::Config(e.to_string()))?;
    println!("ARI\t{:.6}", s.ari);
    println!("RI\t{:.6}", s.ri);
    println!("NMI\t{:.6}", s.nmi);
    println!("purity\t{:.6}", s.purity);
    Ok(())
}
