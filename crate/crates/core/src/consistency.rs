//! Inter-modal, intra-modal, and total consistency losses over embedded
//! graph pairs and augmentation bags.
//!
//! The inter-modal loss sums graph Wasserstein distances between image and
//! sentence embeddings of the same example. The intra-modal loss sums
//! distances between the sentence graphs generated for one image and its
//! augmented variants; each unordered pair is counted once, so a weight
//! calibrated against a both-orders sum must be doubled. The extended intra
//! variant adds the corresponding image-side pairs. The total is
//!
//! `supervised + inter_weight * inter + intra_weight * intra`
//!
//! where the supervised term is produced by an external captioning model and
//! passes through untouched.

use crate::embedding::EmbeddingMatrix;
use crate::transport::{gwd, SinkhornConfig, TransportError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConsistencyError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },
    #[error("{what} must be nonnegative, got {value}")]
    Negative { what: &'static str, value: f64 },
    #[error("bag {id}: {images} image embeddings vs {sentences} sentence embeddings; counts must match")]
    BagMismatch {
        id: String,
        images: usize,
        sentences: usize,
    },
    #[error("bag {id}: needs at least one image/sentence pair")]
    EmptyBag { id: String },
    #[error("aligned bag lists differ in length: {left} vs {right}")]
    BagListMismatch { left: usize, right: usize },
}

/// Scale factors for the inter- and intra-modal terms; nonnegative and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub inter: f64,
    pub intra: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            inter: 1.0,
            intra: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<(), ConsistencyError> {
        for (what, value) in [("inter weight", self.inter), ("intra weight", self.intra)] {
            if !value.is_finite() {
                return Err(ConsistencyError::NonFinite { what, value });
            }
            if value < 0.0 {
                return Err(ConsistencyError::Negative { what, value });
            }
        }
        Ok(())
    }
}

/// Loss contribution of a single undescribed example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleLoss {
    pub id: String,
    pub inter: f64,
    pub intra: f64,
}

/// Assembled losses for a corpus evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    /// Externally supplied supervised term.
    pub supervised: f64,
    /// Unweighted inter-modal sum.
    pub inter: f64,
    /// Unweighted intra-modal sum.
    pub intra: f64,
    /// `supervised + weights.inter * inter + weights.intra * intra`.
    pub total: f64,
    pub per_example: Vec<ExampleLoss>,
}

/// Sum of distances between the two sides of each pair.
pub fn inter_loss(
    pairs: &[(EmbeddingMatrix, EmbeddingMatrix)],
    config: &SinkhornConfig,
) -> Result<f64, ConsistencyError> {
    let mut total = 0.0;
    for (image, sentence) in pairs {
        total += gwd(image, sentence, config)?.0;
    }
    Ok(total)
}

/// Sum over bags of all unordered within-bag pair distances, each counted
/// once.
pub fn intra_loss(
    bags: &[Vec<EmbeddingMatrix>],
    config: &SinkhornConfig,
) -> Result<f64, ConsistencyError> {
    let mut total = 0.0;
    for bag in bags {
        total += pairwise_sum(bag, config)?;
    }
    Ok(total)
}

/// [`intra_loss`] over sentence bags plus the aligned image bags, the
/// extended form that also ties augmented image embeddings together.
pub fn intra_loss_plus(
    image_bags: &[Vec<EmbeddingMatrix>],
    sentence_bags: &[Vec<EmbeddingMatrix>],
    config: &SinkhornConfig,
) -> Result<f64, ConsistencyError> {
    if image_bags.len() != sentence_bags.len() {
        return Err(ConsistencyError::BagListMismatch {
            left: image_bags.len(),
            right: sentence_bags.len(),
        });
    }
    Ok(intra_loss(sentence_bags, config)? + intra_loss(image_bags, config)?)
}

fn pairwise_sum(
    bag: &[EmbeddingMatrix],
    config: &SinkhornConfig,
) -> Result<f64, ConsistencyError> {
    let mut total = 0.0;
    for i in 0..bag.len() {
        for j in (i + 1)..bag.len() {
            total += gwd(&bag[i], &bag[j], config)?.0;
        }
    }
    Ok(total)
}

/// Assembles the weighted total from already-computed components.
pub fn total_loss(
    supervised: f64,
    inter: f64,
    intra: f64,
    weights: &LossWeights,
) -> Result<LossReport, ConsistencyError> {
    weights.validate()?;
    if !supervised.is_finite() {
        return Err(ConsistencyError::NonFinite {
            what: "supervised loss",
            value: supervised,
        });
    }
    for (what, value) in [("inter loss", inter), ("intra loss", intra)] {
        if !value.is_finite() {
            return Err(ConsistencyError::NonFinite { what, value });
        }
        if value < 0.0 {
            return Err(ConsistencyError::Negative { what, value });
        }
    }
    let total = supervised + weights.inter * inter + weights.intra * intra;
    Ok(LossReport {
        supervised,
        inter,
        intra,
        total,
        per_example: Vec::new(),
    })
}

/// One undescribed example with everything embedded: the raw image first and
/// its augmented variants after it, plus the sentence generated per image.
#[derive(Debug, Clone)]
pub struct EmbeddedBag {
    pub id: String,
    pub images: Vec<EmbeddingMatrix>,
    pub sentences: Vec<EmbeddingMatrix>,
}

/// Which image/sentence pairs feed the inter-modal term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum InterScope {
    /// Only the raw pair at index 0.
    #[default]
    RawOnly,
    /// Every aligned (image_k, sentence_k) pair.
    AllPairs,
}

/// Which pairwise sums feed the intra-modal term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum IntraVariant {
    /// Sentence pairs only.
    #[default]
    SentencesOnly,
    /// Sentence pairs plus image pairs.
    WithImages,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusOptions {
    pub weights: LossWeights,
    /// Externally computed supervised loss; defaults to 0 (unsupervised run).
    pub supervised: f64,
    pub inter_scope: InterScope,
    pub intra_variant: IntraVariant,
}

/// Evaluates the full loss over embedded bags, reporting per-example terms in
/// bag order.
pub fn corpus_loss(
    bags: &[EmbeddedBag],
    config: &SinkhornConfig,
    options: &CorpusOptions,
) -> Result<LossReport, ConsistencyError> {
    options.weights.validate()?;
    let mut inter_total = 0.0;
    let mut intra_total = 0.0;
    let mut per_example = Vec::with_capacity(bags.len());
    for bag in bags {
        if bag.images.is_empty() || bag.sentences.is_empty() {
            return Err(ConsistencyError::EmptyBag { id: bag.id.clone() });
        }
        if bag.images.len() != bag.sentences.len() {
            return Err(ConsistencyError::BagMismatch {
                id: bag.id.clone(),
                images: bag.images.len(),
                sentences: bag.sentences.len(),
            });
        }
        let inter = match options.inter_scope {
            InterScope::RawOnly => gwd(&bag.images[0], &bag.sentences[0], config)?.0,
            InterScope::AllPairs => {
                let mut sum = 0.0;
                for (image, sentence) in bag.images.iter().zip(&bag.sentences) {
                    sum += gwd(image, sentence, config)?.0;
                }
                sum
            }
        };
        let mut intra = pairwise_sum(&bag.sentences, config)?;
        if options.intra_variant == IntraVariant::WithImages {
            intra += pairwise_sum(&bag.images, config)?;
        }
        inter_total += inter;
        intra_total += intra;
        per_example.push(ExampleLoss {
            id: bag.id.clone(),
            inter,
            intra,
        });
    }
    let mut report = total_loss(options.supervised, inter_total, intra_total, &options.weights)?;
    report.per_example = per_example;
    Ok(report)
}
