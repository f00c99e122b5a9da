//! Corpus manifests: described image/sentence pairs plus undescribed bags of
//! graph files, with paths resolved relative to the manifest's directory.
//!
//! A bag holds one raw image graph, its augmented variants, and one generated
//! sentence graph per image, so image and sentence counts must match and be
//! at least one. Resolution loads and validates every referenced graph; the
//! first invalid graph aborts with the offending example id and path.

use crate::graph::{load_graph_file, GraphError, SceneGraph};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// A labeled image/sentence graph pair from the described split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescribedPair {
    pub image: PathBuf,
    pub sentence: PathBuf,
}

/// One undescribed example: the raw image graph first, augmented variants
/// after it, and the sentence graph generated from each image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BagEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub images: Vec<PathBuf>,
    pub sentences: Vec<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    #[serde(default)]
    pub described_pairs: Vec<DescribedPair>,
    #[serde(default)]
    pub undescribed_bags: Vec<BagEntry>,
}

impl CorpusManifest {
    pub fn from_json_str(text: &str) -> Result<Self, ManifestError> {
        serde_json::from_str(text).map_err(|e| ManifestError::Parse(e.to_string()))
    }

    /// Reads a manifest file; graphs are not touched yet.
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|e| ManifestError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json_str(&text)
    }

    /// Loads and validates every referenced graph. Relative paths resolve
    /// against `base` (normally the manifest's directory).
    pub fn resolve(&self, base: &Path) -> Result<LoadedCorpus, ManifestError> {
        let mut described = Vec::with_capacity(self.described_pairs.len());
        for (i, pair) in self.described_pairs.iter().enumerate() {
            let example = format!("pair-{i}");
            described.push(LoadedPair {
                image: load_one(base, &pair.image, &example)?,
                sentence: load_one(base, &pair.sentence, &example)?,
            });
        }
        let mut bags = Vec::with_capacity(self.undescribed_bags.len());
        for (i, entry) in self.undescribed_bags.iter().enumerate() {
            let id = entry
                .id
                .clone()
                .unwrap_or_else(|| format!("bag-{i}"));
            if entry.images.is_empty() || entry.sentences.is_empty() {
                return Err(ManifestError::EmptyBag { id });
            }
            if entry.images.len() != entry.sentences.len() {
                return Err(ManifestError::BagSizeMismatch {
                    id,
                    images: entry.images.len(),
                    sentences: entry.sentences.len(),
                });
            }
            let mut images = Vec::with_capacity(entry.images.len());
            for path in &entry.images {
                images.push(load_one(base, path, &id)?);
            }
            let mut sentences = Vec::with_capacity(entry.sentences.len());
            for path in &entry.sentences {
                sentences.push(load_one(base, path, &id)?);
            }
            bags.push(LoadedBag {
                id,
                images,
                sentences,
            });
        }
        Ok(LoadedCorpus { described, bags })
    }
}

fn load_one(base: &Path, path: &Path, example: &str) -> Result<SceneGraph, ManifestError> {
    let resolved = if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    };
    load_graph_file(&resolved).map_err(|source| ManifestError::Graph {
        example: example.to_string(),
        path: resolved.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPair {
    pub image: SceneGraph,
    pub sentence: SceneGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedBag {
    pub id: String,
    pub images: Vec<SceneGraph>,
    pub sentences: Vec<SceneGraph>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedCorpus {
    pub described: Vec<LoadedPair>,
    pub bags: Vec<LoadedBag>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest parse error: {0}")]
    Parse(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bag {id}: {images} image graphs vs {sentences} sentence graphs; counts must match")]
    BagSizeMismatch {
        id: String,
        images: usize,
        sentences: usize,
    },
    #[error("bag {id}: needs at least one image/sentence pair")]
    EmptyBag { id: String },
    #[error("example {example}, graph {path}: {source}")]
    Graph {
        example: String,
        path: String,
        #[source]
        source: GraphError,
    },
}
