//! Content-preserving graph perturbation: attribute dropout plus embedding
//! jitter, the graph-space stand-in for weak image augmentation.
//!
//! Each variant independently drops attribute nodes (and their edges) with a
//! fixed probability and adds seeded Gaussian noise to every surviving
//! embedding row. Objects, relations, and the edges among them are never
//! touched, so the scene's content is preserved.
//!
//! Two RNG disciplines keep variants comparable across settings: dropping and
//! noise use separate streams, and noise is drawn for every node (discarded
//! for dropped ones) at every scale (scaled by sigma, even zero). A surviving
//! node's jitter therefore depends only on (seed, variant, node position),
//! never on the drop pattern or on sigma, so sigma = 0 yields exact copies
//! and runs that differ only in sigma share their underlying draws.

use crate::embedding::{EmbeddingError, EmbeddingMatrix};
use crate::graph::{NodeKind, SceneGraph};
use crate::seeding::stream_rng;
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("variant count must be at least 1")]
    ZeroVariants,
    #[error("attribute drop probability must lie in [0, 1], got {0}")]
    DropProbability(f64),
    #[error("noise scale must be finite and nonnegative, got {0}")]
    NoiseScale(f64),
    #[error("embedding has {rows} rows but graph has {nodes} nodes")]
    RowMismatch { rows: usize, nodes: usize },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// Perturbation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbConfig {
    /// Number of variants to generate.
    pub variants: usize,
    /// Standard deviation of the additive Gaussian jitter.
    pub noise_sigma: f64,
    /// Probability of dropping each attribute node.
    pub attribute_drop: f64,
    pub seed: u64,
}

impl PerturbConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.variants == 0 {
            return Err(AugmentError::ZeroVariants);
        }
        if !self.attribute_drop.is_finite() || !(0.0..=1.0).contains(&self.attribute_drop) {
            return Err(AugmentError::DropProbability(self.attribute_drop));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(AugmentError::NoiseScale(self.noise_sigma));
        }
        Ok(())
    }
}

/// Generates `config.variants` perturbed copies of an embedded graph.
///
/// Every variant graph stores its jittered rows as explicit node embeddings,
/// so writing it to disk and featurizing it again reproduces the variant
/// exactly. The returned matrices keep the layer index of the input.
pub fn perturb(
    graph: &SceneGraph,
    embedding: &EmbeddingMatrix,
    config: &PerturbConfig,
) -> Result<Vec<(SceneGraph, EmbeddingMatrix)>, AugmentError> {
    config.validate()?;
    if embedding.node_count() != graph.node_count() {
        return Err(AugmentError::RowMismatch {
            rows: embedding.node_count(),
            nodes: graph.node_count(),
        });
    }
    (0..config.variants)
        .map(|v| variant(graph, embedding, config, v as u64))
        .collect()
}

fn variant(
    graph: &SceneGraph,
    embedding: &EmbeddingMatrix,
    config: &PerturbConfig,
    index: u64,
) -> Result<(SceneGraph, EmbeddingMatrix), AugmentError> {
    let seed = config.seed.to_le_bytes();
    let variant_index = index.to_le_bytes();
    let mut drop_rng = stream_rng(&[b"perturb-drop", &seed, &variant_index]);
    let mut noise_rng = stream_rng(&[b"perturb-noise", &seed, &variant_index]);

    let dim = embedding.dim();
    let mut nodes = Vec::with_capacity(graph.node_count());
    let mut flat = Vec::with_capacity(graph.node_count() * dim);
    for (i, node) in graph.nodes().iter().enumerate() {
        let kept = node.kind != NodeKind::Attribute
            || drop_rng.random::<f64>() >= config.attribute_drop;
        // Noise positions are a function of the node index alone, so kept
        // nodes jitter identically under any drop pattern.
        let mut row = Vec::with_capacity(dim);
        for d in 0..dim {
            let z: f64 = noise_rng.sample(StandardNormal);
            row.push(embedding.rows()[[i, d]] + config.noise_sigma * z);
        }
        if kept {
            flat.extend_from_slice(&row);
            let mut node = node.clone();
            node.embedding = Some(row);
            nodes.push(node);
        }
    }
    let rows = Array2::from_shape_vec((nodes.len(), dim), flat)
        .expect("kept rows match kept nodes");

    let kept_ids: HashSet<&str> = nodes.iter().map(|n| n.id.as_str()).collect();
    let edges: Vec<(String, String)> = graph
        .edges()
        .iter()
        .filter(|(src, dst)| kept_ids.contains(src.as_str()) && kept_ids.contains(dst.as_str()))
        .cloned()
        .collect();

    let variant_graph = SceneGraph::new(nodes, edges);
    let variant_embedding = EmbeddingMatrix::new(rows, embedding.layer())?;
    Ok((variant_graph, variant_embedding))
}
