//! Node embeddings: deterministic featurization plus two propagation schemes
//! over typed neighborhoods.
//!
//! Initial features come verbatim from per-node vectors in the graph file
//! when present, otherwise from a seeded hash of (label, kind) expanded to a
//! row in [-1, 1]. Node ids never influence features, so renaming ids leaves
//! embeddings bit-identical.
//!
//! Propagation aggregates each node's typed neighbors (the kind filter
//! defaults per node kind, see [`NodeKind::default_neighbor_kinds`]):
//!
//! - Non-parametric: the neighbor sum is weighted by normalized squared
//!   Euclidean distance from the center row, so more distant neighbors weigh
//!   more and the layer needs no trained parameters. When every neighbor sits
//!   exactly on the center the weights fall back to uniform, which is the
//!   limit value of the aggregate anyway.
//! - Parametric: per-kind d x d weight matrices and a ReLU over
//!   (sum of W_kind h_k) + h_m.
//!
//! Both schemes are local: one layer of node m reads only row m and the rows
//! of its filtered neighbors.

use crate::graph::{NodeKind, SceneGraph};
use crate::seeding::stream_rng;
use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding dimension must be at least 1")]
    ZeroDimension,
    #[error("node {id:?}: explicit embedding has dimension {got}, expected {expected}")]
    ExplicitDimension {
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("embedding matrix has {rows} rows but graph has {nodes} nodes")]
    RowCountMismatch { rows: usize, nodes: usize },
    #[error("non-finite embedding entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("layer {layer}: weight matrix for {kind} neighbors is {got_rows}x{got_cols}, expected {dim}x{dim}")]
    WeightShape {
        layer: usize,
        kind: NodeKind,
        dim: usize,
        got_rows: usize,
        got_cols: usize,
    },
}

/// Per-node embedding rows in graph node order, tagged with the number of
/// propagation layers already applied. Entries are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: Array2<f64>,
    layer: usize,
}

impl EmbeddingMatrix {
    pub fn new(rows: Array2<f64>, layer: usize) -> Result<Self, EmbeddingError> {
        for ((row, col), value) in rows.indexed_iter() {
            if !value.is_finite() {
                return Err(EmbeddingError::NonFinite { row, col });
            }
        }
        Ok(EmbeddingMatrix { rows, layer })
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn node_count(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }
}

fn kind_tag(kind: NodeKind) -> u8 {
    match kind {
        NodeKind::Object => 0,
        NodeKind::Attribute => 1,
        NodeKind::Relation => 2,
    }
}

/// Deterministic initial features at layer 0.
///
/// Nodes with an explicit embedding in the graph use it verbatim (its length
/// must equal `dim`); all others get a seeded hash of (label, kind) expanded
/// to `dim` entries in [-1, 1]. Equal (label, kind) pairs therefore share a
/// row no matter where they appear.
pub fn featurize(
    graph: &SceneGraph,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    if dim == 0 {
        return Err(EmbeddingError::ZeroDimension);
    }
    let mut rows = Array2::zeros((graph.node_count(), dim));
    for (i, node) in graph.nodes().iter().enumerate() {
        match &node.embedding {
            Some(values) => {
                if values.len() != dim {
                    return Err(EmbeddingError::ExplicitDimension {
                        id: node.id.clone(),
                        expected: dim,
                        got: values.len(),
                    });
                }
                for (j, &value) in values.iter().enumerate() {
                    if !value.is_finite() {
                        return Err(EmbeddingError::NonFinite { row: i, col: j });
                    }
                    rows[[i, j]] = value;
                }
            }
            None => {
                let mut rng = stream_rng(&[
                    b"node-feature",
                    &seed.to_le_bytes(),
                    &[kind_tag(node.kind)],
                    node.label.as_bytes(),
                ]);
                for j in 0..dim {
                    rows[[i, j]] = 2.0 * rng.random::<f64>() - 1.0;
                }
            }
        }
    }
    Ok(EmbeddingMatrix { rows, layer: 0 })
}

/// Scalar weighting scheme for the non-parametric aggregation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum NeighborWeighting {
    /// Weight proportional to squared distance from the center row.
    #[default]
    DistanceProportional,
    /// Comparison mode: weight proportional to inverse squared distance, so
    /// nearby neighbors dominate instead.
    InverseDistance,
}

/// Non-parametric propagation with the default distance-proportional weights.
pub fn propagate_nonparametric(
    graph: &SceneGraph,
    start: &EmbeddingMatrix,
    layers: usize,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    propagate_nonparametric_weighted(graph, start, layers, NeighborWeighting::default())
}

/// Non-parametric propagation with an explicit weighting scheme.
pub fn propagate_nonparametric_weighted(
    graph: &SceneGraph,
    start: &EmbeddingMatrix,
    layers: usize,
    weighting: NeighborWeighting,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    check_row_count(graph, start)?;
    let mut current = start.rows().clone();
    for _ in 0..layers {
        let mut next = current.clone();
        for m in 0..graph.node_count() {
            let kinds = graph.node(m).kind.default_neighbor_kinds();
            let neighbors = graph.neighbor_indices(m, kinds);
            if neighbors.is_empty() {
                continue;
            }
            let center = current.row(m);
            let dists: Vec<f64> = neighbors
                .iter()
                .map(|&k| squared_distance(current.row(k), center))
                .collect();
            let weights = neighbor_weights(&dists, weighting);
            let mut agg = center.to_owned();
            for (&k, &w) in neighbors.iter().zip(&weights) {
                agg.scaled_add(w, &current.row(k));
            }
            next.row_mut(m).assign(&agg);
        }
        current = next;
    }
    Ok(EmbeddingMatrix {
        rows: current,
        layer: start.layer() + layers,
    })
}

fn neighbor_weights(dists: &[f64], weighting: NeighborWeighting) -> Vec<f64> {
    let uniform = || vec![1.0 / dists.len() as f64; dists.len()];
    match weighting {
        NeighborWeighting::DistanceProportional => {
            let total: f64 = dists.iter().sum();
            // All-zero distances: every neighbor equals the center, and any
            // convex combination of equal rows is that row, so uniform is the
            // continuous completion.
            if total == 0.0 {
                uniform()
            } else {
                dists.iter().map(|d| d / total).collect()
            }
        }
        NeighborWeighting::InverseDistance => {
            let zeros = dists.iter().filter(|&&d| d == 0.0).count();
            if zeros > 0 {
                // Inverse weights diverge at zero distance; in the limit all
                // mass concentrates on the coincident neighbors.
                let w = 1.0 / zeros as f64;
                dists
                    .iter()
                    .map(|&d| if d == 0.0 { w } else { 0.0 })
                    .collect()
            } else {
                let inv: Vec<f64> = dists.iter().map(|d| 1.0 / d).collect();
                let total: f64 = inv.iter().sum();
                inv.iter().map(|w| w / total).collect()
            }
        }
    }
}

/// Per-layer weight matrices for the parametric scheme, one per neighbor kind.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    pub object: Array2<f64>,
    pub attribute: Array2<f64>,
    pub relation: Array2<f64>,
}

impl LayerWeights {
    pub fn for_kind(&self, kind: NodeKind) -> &Array2<f64> {
        match kind {
            NodeKind::Object => &self.object,
            NodeKind::Attribute => &self.attribute,
            NodeKind::Relation => &self.relation,
        }
    }
}

/// Parametric propagation: one layer maps row m to
/// `relu((sum over typed neighbors k of W[kind(k)] h_k) + h_m)`.
/// The number of layers applied is `weights.len()`.
pub fn propagate_parametric(
    graph: &SceneGraph,
    start: &EmbeddingMatrix,
    weights: &[LayerWeights],
) -> Result<EmbeddingMatrix, EmbeddingError> {
    check_row_count(graph, start)?;
    let dim = start.dim();
    for (layer, lw) in weights.iter().enumerate() {
        for kind in [NodeKind::Object, NodeKind::Attribute, NodeKind::Relation] {
            let w = lw.for_kind(kind);
            if w.nrows() != dim || w.ncols() != dim {
                return Err(EmbeddingError::WeightShape {
                    layer,
                    kind,
                    dim,
                    got_rows: w.nrows(),
                    got_cols: w.ncols(),
                });
            }
            for ((row, col), value) in w.indexed_iter() {
                if !value.is_finite() {
                    return Err(EmbeddingError::NonFinite { row, col });
                }
            }
        }
    }
    let mut current = start.rows().clone();
    for lw in weights {
        let mut next = Array2::zeros(current.raw_dim());
        for m in 0..graph.node_count() {
            let kinds = graph.node(m).kind.default_neighbor_kinds();
            let mut acc: Array1<f64> = current.row(m).to_owned();
            for k in graph.neighbor_indices(m, kinds) {
                let kind = graph.node(k).kind;
                acc += &lw.for_kind(kind).dot(&current.row(k));
            }
            next.row_mut(m).assign(&acc.mapv(|v| v.max(0.0)));
        }
        current = next;
    }
    Ok(EmbeddingMatrix {
        rows: current,
        layer: start.layer() + weights.len(),
    })
}

/// Seeded uniform [-0.1, 0.1] weight matrices for `layers` layers.
pub fn sample_layer_weights(layers: usize, dim: usize, seed: u64) -> Vec<LayerWeights> {
    (0..layers)
        .map(|layer| LayerWeights {
            object: sample_matrix(dim, seed, layer, NodeKind::Object),
            attribute: sample_matrix(dim, seed, layer, NodeKind::Attribute),
            relation: sample_matrix(dim, seed, layer, NodeKind::Relation),
        })
        .collect()
}

fn sample_matrix(dim: usize, seed: u64, layer: usize, kind: NodeKind) -> Array2<f64> {
    let mut rng = stream_rng(&[
        b"layer-weight",
        &seed.to_le_bytes(),
        &(layer as u64).to_le_bytes(),
        &[kind_tag(kind)],
    ]);
    Array2::from_shape_fn((dim, dim), |_| 0.1 * (2.0 * rng.random::<f64>() - 1.0))
}

fn check_row_count(graph: &SceneGraph, m: &EmbeddingMatrix) -> Result<(), EmbeddingError> {
    if m.node_count() != graph.node_count() {
        return Err(EmbeddingError::RowCountMismatch {
            rows: m.node_count(),
            nodes: graph.node_count(),
        });
    }
    Ok(())
}

pub(crate) fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let diff = x - y;
            diff * diff
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Node;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn object_with_attributes(rows: &[Vec<f64>]) -> SceneGraph {
        // Node 0 is the object; every later node is an attribute linked to it.
        let mut nodes = vec![Node::new("c", NodeKind::Object, "c").with_embedding(rows[0].clone())];
        let mut edges = Vec::new();
        for (i, row) in rows.iter().enumerate().skip(1) {
            let id = format!("a{i}");
            nodes.push(Node::new(&id, NodeKind::Attribute, &id).with_embedding(row.clone()));
            edges.push((id, "c".to_string()));
        }
        SceneGraph::new(nodes, edges)
    }

    fn embedded(graph: &SceneGraph, dim: usize) -> EmbeddingMatrix {
        featurize(graph, dim, 0).unwrap()
    }

    #[test]
    fn featurize_is_deterministic() {
        let graph = SceneGraph::new(
            vec![
                Node::new("x", NodeKind::Object, "man"),
                Node::new("y", NodeKind::Relation, "riding"),
            ],
            vec![("x".into(), "y".into())],
        );
        let a = featurize(&graph, 8, 42).unwrap();
        let b = featurize(&graph, 8, 42).unwrap();
        assert_eq!(a, b);
        let c = featurize(&graph, 8, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn featurize_depends_on_label_and_kind_not_id() {
        let g1 = SceneGraph::new(vec![Node::new("n1", NodeKind::Object, "man")], vec![]);
        let g2 = SceneGraph::new(vec![Node::new("other", NodeKind::Object, "man")], vec![]);
        assert_eq!(featurize(&g1, 6, 7).unwrap(), featurize(&g2, 6, 7).unwrap());

        let g3 = SceneGraph::new(vec![Node::new("n1", NodeKind::Attribute, "man")], vec![]);
        assert_ne!(featurize(&g1, 6, 7).unwrap(), featurize(&g3, 6, 7).unwrap());

        let g4 = SceneGraph::new(vec![Node::new("n1", NodeKind::Object, "dog")], vec![]);
        assert_ne!(featurize(&g1, 6, 7).unwrap(), featurize(&g4, 6, 7).unwrap());
    }

    #[test]
    fn featurize_rows_lie_in_unit_interval() {
        let graph = SceneGraph::new(
            (0..20)
                .map(|i| Node::new(format!("n{i}"), NodeKind::Object, format!("label{i}")))
                .collect(),
            vec![],
        );
        let m = featurize(&graph, 16, 3).unwrap();
        for &v in m.rows().iter() {
            assert!((-1.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn featurize_uses_explicit_rows_verbatim() {
        let graph = object_with_attributes(&[vec![0.25, -0.75], vec![1.0, 2.0]]);
        let m = featurize(&graph, 2, 99).unwrap();
        assert_eq!(m.rows(), &array![[0.25, -0.75], [1.0, 2.0]]);
        assert_eq!(m.layer(), 0);
    }

    #[test]
    fn explicit_dimension_mismatch_names_node() {
        let graph = object_with_attributes(&[vec![0.25, -0.75, 0.5]]);
        let err = featurize(&graph, 2, 0).unwrap_err();
        assert!(matches!(
            err,
            EmbeddingError::ExplicitDimension { id, expected: 2, got: 3 } if id == "c"
        ));
    }

    #[test]
    fn zero_dim_is_rejected() {
        let graph = object_with_attributes(&[vec![]]);
        assert!(matches!(
            featurize(&graph, 0, 0),
            Err(EmbeddingError::ZeroDimension)
        ));
    }

    #[test]
    fn zero_layers_returns_start() {
        let graph = object_with_attributes(&[vec![0.0, 0.0], vec![1.0, 0.0]]);
        let x0 = embedded(&graph, 2);
        let out = propagate_nonparametric(&graph, &x0, 0).unwrap();
        assert_eq!(out, x0);
    }

    /// Two nodes at [0,0] and [1,0], linked: one layer maps both to exactly
    /// [1,0]. The single neighbor always gets weight 1, so each row becomes
    /// own-row + other-row.
    #[test]
    fn single_layer_hand_trace_is_exact() {
        let graph = object_with_attributes(&[vec![0.0, 0.0], vec![1.0, 0.0]]);
        let x0 = embedded(&graph, 2);
        let out = propagate_nonparametric(&graph, &x0, 1).unwrap();
        assert_eq!(out.rows(), &array![[1.0, 0.0], [1.0, 0.0]]);
        assert_eq!(out.layer(), 1);
    }

    #[test]
    fn isolated_nodes_are_unchanged() {
        let graph = SceneGraph::new(
            vec![
                Node::new("a", NodeKind::Object, "a").with_embedding(vec![0.5, -0.5]),
                Node::new("b", NodeKind::Object, "b").with_embedding(vec![0.125, 8.0]),
            ],
            vec![],
        );
        let x0 = embedded(&graph, 2);
        let out = propagate_nonparametric(&graph, &x0, 3).unwrap();
        assert_eq!(out.rows(), x0.rows());
        assert_eq!(out.layer(), 3);
    }

    /// All neighbors coincide with the center: weights are uniform and the
    /// aggregate equals center + neighbor-row exactly.
    #[test]
    fn coincident_neighbors_fall_back_to_uniform() {
        let graph = object_with_attributes(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]]);
        let x0 = embedded(&graph, 2);
        let out = propagate_nonparametric(&graph, &x0, 1).unwrap();
        assert_eq!(out.rows().row(0), array![2.0, 0.0].view());
    }

    #[test]
    fn distant_neighbors_weigh_more() {
        // Distances 1 and 9 give weights 0.1 and 0.9.
        let graph = object_with_attributes(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![3.0, 0.0]]);
        let x0 = embedded(&graph, 2);
        let out = propagate_nonparametric(&graph, &x0, 1).unwrap();
        assert_relative_eq!(out.rows()[[0, 0]], 2.8, max_relative = 1e-15);
        assert_eq!(out.rows()[[0, 1]], 0.0);
    }

    #[test]
    fn inverse_distance_mode_prefers_near_neighbors() {
        let graph = object_with_attributes(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![3.0, 0.0]]);
        let x0 = embedded(&graph, 2);
        let out = propagate_nonparametric_weighted(
            &graph,
            &x0,
            1,
            NeighborWeighting::InverseDistance,
        )
        .unwrap();
        // Weights 0.9 and 0.1: 0.9*1 + 0.1*3 = 1.2.
        assert_relative_eq!(out.rows()[[0, 0]], 1.2, max_relative = 1e-15);
    }

    #[test]
    fn inverse_distance_mode_concentrates_on_coincident_neighbors() {
        let graph = object_with_attributes(&[vec![0.0, 0.0], vec![0.0, 0.0], vec![3.0, 0.0]]);
        let x0 = embedded(&graph, 2);
        let out = propagate_nonparametric_weighted(
            &graph,
            &x0,
            1,
            NeighborWeighting::InverseDistance,
        )
        .unwrap();
        assert_eq!(out.rows().row(0), array![0.0, 0.0].view());
    }

    #[test]
    fn nonparametric_matches_scalar_reference() {
        // Independent reimplementation with plain nested loops.
        fn reference_step(graph: &SceneGraph, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
            let mut out = rows.to_vec();
            for m in 0..graph.node_count() {
                let kinds = graph.node(m).kind.default_neighbor_kinds();
                let neighbors = graph.neighbor_indices(m, kinds);
                if neighbors.is_empty() {
                    continue;
                }
                let dists: Vec<f64> = neighbors
                    .iter()
                    .map(|&k| {
                        rows[k]
                            .iter()
                            .zip(&rows[m])
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum()
                    })
                    .collect();
                let total: f64 = dists.iter().sum();
                let weights: Vec<f64> = if total == 0.0 {
                    vec![1.0 / neighbors.len() as f64; neighbors.len()]
                } else {
                    dists.iter().map(|d| d / total).collect()
                };
                for dim in 0..rows[m].len() {
                    let mut acc = rows[m][dim];
                    for (t, &k) in neighbors.iter().enumerate() {
                        acc += weights[t] * rows[k][dim];
                    }
                    out[m][dim] = acc;
                }
            }
            out
        }

        let graph = SceneGraph::new(
            vec![
                Node::new("man", NodeKind::Object, "man"),
                Node::new("bike", NodeKind::Object, "bike"),
                Node::new("riding", NodeKind::Relation, "riding"),
                Node::new("red", NodeKind::Attribute, "red"),
                Node::new("fast", NodeKind::Attribute, "fast"),
            ],
            vec![
                ("man".into(), "riding".into()),
                ("riding".into(), "bike".into()),
                ("red".into(), "bike".into()),
                ("fast".into(), "man".into()),
            ],
        );
        let x0 = featurize(&graph, 5, 11).unwrap();
        let mut reference: Vec<Vec<f64>> = x0
            .rows()
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect();
        for _ in 0..3 {
            reference = reference_step(&graph, &reference);
        }
        let out = propagate_nonparametric(&graph, &x0, 3).unwrap();
        for (i, row) in reference.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_relative_eq!(out.rows()[[i, j]], v, max_relative = 1e-12, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn locality_one_layer() {
        // Changing a non-neighbor row must not affect node 0 after one layer.
        let graph = SceneGraph::new(
            vec![
                Node::new("man", NodeKind::Object, "man"),
                Node::new("fast", NodeKind::Attribute, "fast"),
                Node::new("bike", NodeKind::Object, "bike"),
                Node::new("red", NodeKind::Attribute, "red"),
            ],
            vec![
                ("fast".into(), "man".into()),
                ("red".into(), "bike".into()),
            ],
        );
        let base = featurize(&graph, 3, 5).unwrap();
        let mut bumped = base.rows().clone();
        bumped[[3, 0]] += 10.0;
        let bumped = EmbeddingMatrix::new(bumped, 0).unwrap();
        let a = propagate_nonparametric(&graph, &base, 1).unwrap();
        let b = propagate_nonparametric(&graph, &bumped, 1).unwrap();
        assert_eq!(a.rows().row(0), b.rows().row(0));
        assert_eq!(a.rows().row(1), b.rows().row(1));
        assert_ne!(a.rows().row(3), b.rows().row(3));
    }

    #[test]
    fn parametric_zero_weights_relu_only() {
        let graph = object_with_attributes(&[vec![0.5, 0.0], vec![1.0, 2.0]]);
        let x0 = embedded(&graph, 2);
        let zeros = LayerWeights {
            object: Array2::zeros((2, 2)),
            attribute: Array2::zeros((2, 2)),
            relation: Array2::zeros((2, 2)),
        };
        // Nonnegative start: two zero-weight layers leave rows unchanged.
        let out = propagate_parametric(&graph, &x0, &[zeros.clone(), zeros.clone()]).unwrap();
        assert_eq!(out.rows(), x0.rows());
        assert_eq!(out.layer(), 2);

        // Negative entries are clipped by the ReLU.
        let graph2 = object_with_attributes(&[vec![-0.5, 0.25], vec![1.0, -2.0]]);
        let x2 = embedded(&graph2, 2);
        let out2 = propagate_parametric(&graph2, &x2, &[zeros]).unwrap();
        assert_eq!(out2.rows(), &array![[0.0, 0.25], [1.0, 0.0]]);
    }

    #[test]
    fn parametric_identity_weights_sum_neighbors() {
        let graph = object_with_attributes(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let x0 = embedded(&graph, 2);
        let identity = LayerWeights {
            object: Array2::eye(2),
            attribute: Array2::eye(2),
            relation: Array2::eye(2),
        };
        let out = propagate_parametric(&graph, &x0, &[identity]).unwrap();
        // Each node: relu(own + neighbor) with identity weights.
        assert_eq!(out.rows(), &array![[1.0, 2.0], [1.0, 2.0]]);
    }

    #[test]
    fn parametric_output_is_nonnegative() {
        let graph = object_with_attributes(&[vec![-1.0, -1.0], vec![-2.0, 0.5]]);
        let x0 = embedded(&graph, 2);
        let weights = sample_layer_weights(3, 2, 17);
        let out = propagate_parametric(&graph, &x0, &weights).unwrap();
        for &v in out.rows().iter() {
            assert!(v >= 0.0);
        }
        assert_eq!(out.layer(), 3);
    }

    #[test]
    fn parametric_weight_shape_is_checked() {
        let graph = object_with_attributes(&[vec![0.0, 0.0]]);
        let x0 = embedded(&graph, 2);
        let bad = LayerWeights {
            object: Array2::zeros((3, 2)),
            attribute: Array2::zeros((2, 2)),
            relation: Array2::zeros((2, 2)),
        };
        assert!(matches!(
            propagate_parametric(&graph, &x0, &[bad]),
            Err(EmbeddingError::WeightShape { layer: 0, .. })
        ));
    }

    #[test]
    fn row_count_mismatch_is_checked() {
        let graph = object_with_attributes(&[vec![0.0], vec![1.0]]);
        let wrong = EmbeddingMatrix::new(Array2::zeros((3, 1)), 0).unwrap();
        assert!(matches!(
            propagate_nonparametric(&graph, &wrong, 1),
            Err(EmbeddingError::RowCountMismatch { rows: 3, nodes: 2 })
        ));
    }

    #[test]
    fn sampled_weights_are_deterministic_and_bounded() {
        let a = sample_layer_weights(2, 4, 9);
        let b = sample_layer_weights(2, 4, 9);
        assert_eq!(a, b);
        assert_ne!(a, sample_layer_weights(2, 4, 10));
        assert_ne!(a[0], a[1]);
        assert_ne!(a[0].object, a[0].attribute);
        for lw in &a {
            for m in [&lw.object, &lw.attribute, &lw.relation] {
                for &v in m.iter() {
                    assert!(v.abs() <= 0.1);
                }
            }
        }
    }

    #[test]
    fn renaming_ids_keeps_embeddings_identical() {
        let g1 = SceneGraph::new(
            vec![
                Node::new("n0", NodeKind::Object, "man"),
                Node::new("n1", NodeKind::Relation, "riding"),
                Node::new("n2", NodeKind::Object, "bike"),
            ],
            vec![("n0".into(), "n1".into()), ("n1".into(), "n2".into())],
        );
        let g2 = SceneGraph::new(
            vec![
                Node::new("a", NodeKind::Object, "man"),
                Node::new("b", NodeKind::Relation, "riding"),
                Node::new("c", NodeKind::Object, "bike"),
            ],
            vec![("a".into(), "b".into()), ("b".into(), "c".into())],
        );
        let x1 = featurize(&g1, 6, 21).unwrap();
        let x2 = featurize(&g2, 6, 21).unwrap();
        assert_eq!(x1, x2);
        assert_eq!(
            propagate_nonparametric(&g1, &x1, 2).unwrap(),
            propagate_nonparametric(&g2, &x2, 2).unwrap()
        );
        let weights = sample_layer_weights(2, 6, 21);
        assert_eq!(
            propagate_parametric(&g1, &x1, &weights).unwrap(),
            propagate_parametric(&g2, &x2, &weights).unwrap()
        );
    }
}
