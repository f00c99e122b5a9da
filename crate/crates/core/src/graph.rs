//! Heterogeneous scene-graph model, validation, and JSON serialization.
//!
//! A scene graph couples three node kinds. Objects are the things in a scene,
//! attributes qualify a single object, and relations connect object pairs.
//! Directed edges are restricted to three patterns:
//!
//! - attribute -> object (the attribute qualifies that object)
//! - object -> relation (the object is the relation's subject)
//! - relation -> object (the object is the relation's target)
//!
//! Construction never fails: [`SceneGraph::new`] accepts any node/edge lists
//! and [`SceneGraph::validate`] reports rule violations as data, one entry per
//! offense. [`load_graph`] is the strict path: parse, build, and reject the
//! graph if it has any violations.
//!
//! The on-disk form is JSON:
//!
//! ```json
//! {
//!   "nodes": [
//!     {"id": "man", "kind": "object", "label": "man"},
//!     {"id": "red", "kind": "attribute", "label": "red", "embedding": [0.1, 0.2]}
//!   ],
//!   "edges": [["red", "man"]]
//! }
//! ```

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use thiserror::Error;

/// Kind of a scene-graph node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Object,
    Attribute,
    Relation,
}

impl NodeKind {
    /// Neighbor kinds aggregated by default during propagation: relations and
    /// attributes look at objects, objects look at relations and attributes.
    pub fn default_neighbor_kinds(self) -> &'static [NodeKind] {
        match self {
            NodeKind::Object => &[NodeKind::Relation, NodeKind::Attribute],
            NodeKind::Attribute | NodeKind::Relation => &[NodeKind::Object],
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            NodeKind::Object => "object",
            NodeKind::Attribute => "attribute",
            NodeKind::Relation => "relation",
        };
        f.write_str(name)
    }
}

/// A single node: stable id, kind, free-form label, optional explicit
/// embedding row used verbatim by featurization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
}

impl Node {
    pub fn new(id: impl Into<String>, kind: NodeKind, label: impl Into<String>) -> Self {
        Node {
            id: id.into(),
            kind,
            label: label.into(),
            embedding: None,
        }
    }

    pub fn with_embedding(mut self, embedding: Vec<f64>) -> Self {
        self.embedding = Some(embedding);
        self
    }
}

/// On-disk shape; the public type carries derived lookup structures on top.
#[derive(Serialize, Deserialize)]
struct GraphDoc {
    nodes: Vec<Node>,
    #[serde(default)]
    edges: Vec<(String, String)>,
}

/// Immutable scene graph over typed nodes and directed edges.
///
/// Node order is the row order every embedding matrix uses, so it is
/// preserved exactly as given. Lookup structures tolerate invalid input
/// (duplicate ids resolve to the first occurrence, unresolvable edges are
/// skipped); [`SceneGraph::validate`] is the authority on well-formedness.
#[derive(Debug, Clone)]
pub struct SceneGraph {
    nodes: Vec<Node>,
    edges: Vec<(String, String)>,
    index: HashMap<String, usize>,
    /// Undirected incidence by node index, ascending and deduplicated.
    adjacency: Vec<Vec<usize>>,
}

impl PartialEq for SceneGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl SceneGraph {
    pub fn new(nodes: Vec<Node>, edges: Vec<(String, String)>) -> Self {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            index.entry(node.id.clone()).or_insert(i);
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (src, dst) in &edges {
            if let (Some(&s), Some(&d)) = (index.get(src.as_str()), index.get(dst.as_str())) {
                if s != d {
                    adjacency[s].push(d);
                    adjacency[d].push(s);
                }
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        SceneGraph {
            nodes,
            edges,
            index,
            adjacency,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    /// Index of the node with this id (first occurrence on duplicates).
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Every invariant violation in this graph, one entry per offense.
    /// An empty result means the graph is well-formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            out.push(Violation::EmptyGraph);
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for node in &self.nodes {
            *counts.entry(node.id.as_str()).or_insert(0) += 1;
        }
        for node in &self.nodes {
            if let Some(count) = counts.remove(node.id.as_str()) {
                if count > 1 {
                    out.push(Violation::DuplicateId {
                        id: node.id.clone(),
                    });
                }
            }
        }
        for (src, dst) in &self.edges {
            let s = self.index.get(src.as_str());
            let d = self.index.get(dst.as_str());
            if s.is_none() {
                out.push(Violation::DanglingEdge {
                    source: src.clone(),
                    target: dst.clone(),
                    missing: src.clone(),
                });
            }
            if d.is_none() && src != dst {
                out.push(Violation::DanglingEdge {
                    source: src.clone(),
                    target: dst.clone(),
                    missing: dst.clone(),
                });
            }
            if src == dst {
                out.push(Violation::SelfLoop { id: src.clone() });
                continue;
            }
            if let (Some(&s), Some(&d)) = (s, d) {
                let source_kind = self.nodes[s].kind;
                let target_kind = self.nodes[d].kind;
                if !edge_allowed(source_kind, target_kind) {
                    out.push(Violation::ForbiddenEdge {
                        source: src.clone(),
                        source_kind,
                        target: dst.clone(),
                        target_kind,
                    });
                }
            }
        }
        out
    }

    /// Ids of all nodes adjacent to `id` (ignoring edge direction) whose kind
    /// is in `kinds`, in node order, deduplicated.
    pub fn typed_neighbors(&self, id: &str, kinds: &[NodeKind]) -> Result<Vec<&str>, GraphError> {
        let m = self
            .node_index(id)
            .ok_or_else(|| GraphError::UnknownNode(id.to_string()))?;
        Ok(self
            .neighbor_indices(m, kinds)
            .into_iter()
            .map(|k| self.nodes[k].id.as_str())
            .collect())
    }

    /// [`Self::typed_neighbors`] with the node's own default kind filter.
    pub fn default_typed_neighbors(&self, id: &str) -> Result<Vec<&str>, GraphError> {
        let m = self
            .node_index(id)
            .ok_or_else(|| GraphError::UnknownNode(id.to_string()))?;
        Ok(self
            .neighbor_indices(m, self.nodes[m].kind.default_neighbor_kinds())
            .into_iter()
            .map(|k| self.nodes[k].id.as_str())
            .collect())
    }

    /// Indices of neighbors of node `m` whose kind is in `kinds`, ascending.
    pub fn neighbor_indices(&self, m: usize, kinds: &[NodeKind]) -> Vec<usize> {
        self.adjacency[m]
            .iter()
            .copied()
            .filter(|&k| kinds.contains(&self.nodes[k].kind))
            .collect()
    }

    /// Parses a graph from JSON without validating it.
    pub fn from_json_str(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc =
            serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        Ok(SceneGraph::new(doc.nodes, doc.edges))
    }

    pub fn to_json_string(&self) -> String {
        let doc = GraphDoc {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("graph serialization");
        text.push('\n');
        text
    }
}

fn edge_allowed(source: NodeKind, target: NodeKind) -> bool {
    matches!(
        (source, target),
        (NodeKind::Attribute, NodeKind::Object)
            | (NodeKind::Object, NodeKind::Relation)
            | (NodeKind::Relation, NodeKind::Object)
    )
}

/// A single well-formedness violation. Data, not an error: callers decide
/// whether any given list is fatal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyGraph,
    DuplicateId {
        id: String,
    },
    DanglingEdge {
        source: String,
        target: String,
        missing: String,
    },
    SelfLoop {
        id: String,
    },
    ForbiddenEdge {
        source: String,
        source_kind: NodeKind,
        target: String,
        target_kind: NodeKind,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyGraph => write!(f, "graph has no nodes"),
            Violation::DuplicateId { id } => write!(f, "duplicate id: {id:?}"),
            Violation::DanglingEdge {
                source,
                target,
                missing,
            } => write!(
                f,
                "edge {source:?} -> {target:?} references missing node {missing:?}"
            ),
            Violation::SelfLoop { id } => write!(f, "self-loop on node {id:?}"),
            Violation::ForbiddenEdge {
                source,
                source_kind,
                target,
                target_kind,
            } => write!(
                f,
                "forbidden edge {source:?} ({source_kind}) -> {target:?} ({target_kind})"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph parse error: {0}")]
    Parse(String),
    #[error("invalid scene graph: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown node id: {0:?}")]
    UnknownNode(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(Violation::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Parses a scene graph from a reader and validates it; any violation is an
/// error listing every offense.
pub fn load_graph<R: Read>(mut source: R) -> Result<SceneGraph, GraphError> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| GraphError::Io {
        path: "<reader>".to_string(),
        source: e,
    })?;
    let graph = SceneGraph::from_json_str(&text)?;
    let violations = graph.validate();
    if violations.is_empty() {
        Ok(graph)
    } else {
        Err(GraphError::Invalid(violations))
    }
}

/// [`load_graph`] on a filesystem path, with the path in any error.
pub fn load_graph_file(path: &Path) -> Result<SceneGraph, GraphError> {
    let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let graph = SceneGraph::from_json_str(&text)?;
    let violations = graph.validate();
    if violations.is_empty() {
        Ok(graph)
    } else {
        Err(GraphError::Invalid(violations))
    }
}

/// Free-function form of [`SceneGraph::validate`].
pub fn validate_graph(graph: &SceneGraph) -> Vec<Violation> {
    graph.validate()
}
