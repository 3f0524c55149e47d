//! In-memory cache of run artifacts loaded once at startup.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use kgraph_core::pipeline::{RunArtifact, ARTIFACT_FILE, TIMINGS_FILE};
use tracing::{info, warn};

/// Immutable map from run id to artifact.
///
/// A run is either `<dir>/<id>/artifact.json` or a loose `<dir>/<id>.json`.
/// Files that fail to parse or validate are skipped with a warning.
#[derive(Debug, Default, Clone)]
pub struct ArtifactStore {
    runs: BTreeMap<String, Arc<RunArtifact>>,
}

impl ArtifactStore {
    pub fn load(dir: impl AsRef<Path>) -> std::io::Result<Self> {
        let dir = dir.as_ref();
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        entries.sort();

        let mut store = Self::default();
        for path in entries {
            let Some((id, file)) = candidate(&path) else {
                continue;
            };
            if store.runs.contains_key(&id) {
                warn!(path = %file.display(), "duplicate run id {id}, skipped");
                continue;
            }
            match read_artifact(&file) {
                Ok(artifact) => {
                    info!(path = %file.display(), "loaded run {id}");
                    store.runs.insert(id, Arc::new(artifact));
                }
                Err(reason) => warn!(path = %file.display(), "skipping artifact: {reason}"),
            }
        }
        Ok(store)
    }

    pub fn insert(&mut self, id: impl Into<String>, artifact: RunArtifact) {
        self.runs.insert(id.into(), Arc::new(artifact));
    }

    pub fn get(&self, id: &str) -> Option<&Arc<RunArtifact>> {
        self.runs.get(id)
    }

    /// Runs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Arc<RunArtifact>)> {
        self.runs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }
}

fn candidate(path: &Path) -> Option<(String, PathBuf)> {
    let name = path.file_name()?.to_str()?;
    if path.is_dir() {
        let file = path.join(ARTIFACT_FILE);
        return file.is_file().then(|| (name.to_owned(), file));
    }
    if name == TIMINGS_FILE {
        return None;
    }
    let id = name.strip_suffix(".json")?;
    Some((id.to_owned(), path.to_path_buf()))
}

fn read_artifact(path: &Path) -> Result<RunArtifact, String> {
    let bytes = fs::read(path).map_err(|e| e.to_string())?;
    let artifact = RunArtifact::from_json(&bytes).map_err(|e| e.to_string())?;
    artifact.validate().map_err(|errs| errs.join("; "))?;
    Ok(artifact)
}
