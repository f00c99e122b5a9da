//! Wasserstein graph matching over heterogeneous scene graphs.
//!
//! The pipeline, end to end:
//!
//! 1. [`graph`]: load and validate scene graphs (objects, attributes,
//!    relations with typed edges).
//! 2. [`embedding`]: deterministic node features, refined by parametric or
//!    non-parametric propagation over typed neighborhoods.
//! 3. [`transport`]: entropic optimal transport between the two node sets of
//!    a pair; the plan's linear cost is the graph Wasserstein distance. An
//!    exact oracle and frozen-plan gradients back it up.
//! 4. [`consistency`]: inter-modal and intra-modal losses over corpora of
//!    pairs and augmentation bags, assembled into a weighted total.
//! 5. [`augment`]: seeded content-preserving perturbation (attribute dropout
//!    plus embedding jitter) that produces the bags.
//!
//! [`corpus`] holds the manifest format that wires files into bags. The `wgm`
//! binary in the companion crate exposes all of this on the command line.

pub mod assignment;
pub mod augment;
pub mod consistency;
pub mod corpus;
pub mod embedding;
pub mod graph;
mod seeding;
pub mod transport;

pub use augment::{perturb, PerturbConfig};
pub use consistency::{
    corpus_loss, inter_loss, intra_loss, intra_loss_plus, total_loss, CorpusOptions, EmbeddedBag,
    InterScope, IntraVariant, LossReport, LossWeights,
};
pub use corpus::CorpusManifest;
pub use embedding::{
    featurize, propagate_nonparametric, propagate_nonparametric_weighted, propagate_parametric,
    sample_layer_weights, EmbeddingMatrix, NeighborWeighting,
};
pub use graph::{load_graph, load_graph_file, validate_graph, NodeKind, SceneGraph};
pub use transport::{
    cost_matrix, exact_ot, gwd, gwd_gradient, sinkhorn, CostMatrix, SinkhornConfig, TransportPlan,
};
