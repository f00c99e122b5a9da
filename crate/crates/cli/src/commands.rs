//! Subcommand implementations. Each one loads its inputs, runs the embedding
//! pipeline from the resolved config, and reports through stdout plus
//! optional output files.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use wgm_core::consistency::{corpus_loss, CorpusOptions, EmbeddedBag, InterScope, IntraVariant, LossWeights};
use wgm_core::corpus::CorpusManifest;
use wgm_core::embedding::{
    featurize, propagate_nonparametric_weighted, propagate_parametric, sample_layer_weights,
};
use wgm_core::graph::load_graph_file;
use wgm_core::transport::{gwd, TransportPlan};
use wgm_core::{EmbeddingMatrix, SceneGraph};

use crate::config::{Mode, RunConfig};
use crate::CliError;

fn load(path: &Path) -> Result<SceneGraph, CliError> {
    load_graph_file(path).map_err(|err| CliError::Data(format!("{}: {err}", path.display())))
}

/// Shared embedding pipeline: hashed (or explicit) initial features, then the
/// configured propagation. Both graphs of a pair go through the same scheme
/// and seed, so their embeddings live in one space.
fn embed_graph(graph: &SceneGraph, config: &RunConfig) -> Result<EmbeddingMatrix, CliError> {
    let start = featurize(graph, config.dim, config.seed)
        .map_err(|err| CliError::Data(err.to_string()))?;
    if config.layers == 0 {
        return Ok(start);
    }
    let propagated = match config.mode {
        Mode::Nonparametric => propagate_nonparametric_weighted(
            graph,
            &start,
            config.layers,
            config.weighting.into(),
        ),
        Mode::Parametric => {
            let weights = sample_layer_weights(config.layers, config.dim, config.seed);
            propagate_parametric(graph, &start, &weights)
        }
    };
    propagated.map_err(|err| CliError::Data(err.to_string()))
}

fn distance_between(
    left: &Path,
    right: &Path,
    config: &RunConfig,
) -> Result<(f64, TransportPlan), CliError> {
    let graph_left = load(left)?;
    let graph_right = load(right)?;
    let embedded_left = embed_graph(&graph_left, config)?;
    let embedded_right = embed_graph(&graph_right, config)?;
    let (distance, plan) = gwd(&embedded_left, &embedded_right, &config.sinkhorn())?;
    if !distance.is_finite() {
        return Err(CliError::Numeric(format!(
            "distance between {} and {} is not finite",
            left.display(),
            right.display()
        )));
    }
    Ok((distance, plan))
}

fn print_diagnostics(distance: f64, plan: &TransportPlan) {
    println!("distance {distance}");
    println!("iterations {}", plan.iterations());
    println!("marginal-violation {}", plan.marginal_violation());
}

pub fn dist(left: &Path, right: &Path, config: &RunConfig) -> Result<(), CliError> {
    let (distance, plan) = distance_between(left, right, config)?;
    print_diagnostics(distance, &plan);
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|err| CliError::Data(format!("{}: {err}", path.display())))
}

fn csv_row(values: impl Iterator<Item = f64>) -> String {
    let mut line = String::new();
    for (k, value) in values.enumerate() {
        if k > 0 {
            line.push(',');
        }
        // Display prints the shortest digits that parse back to the same
        // f64, so the CSV is lossless.
        let _ = write!(line, "{value}");
    }
    line
}

pub fn plan(left: &Path, right: &Path, out: &Path, config: &RunConfig) -> Result<(), CliError> {
    let (distance, plan) = distance_between(left, right, config)?;
    let mut csv = String::new();
    for row in plan.entries().rows() {
        csv.push_str(&csv_row(row.iter().copied()));
        csv.push('\n');
    }
    write_file(out, &csv)?;
    print_diagnostics(distance, &plan);
    Ok(())
}

pub fn embed(graph_path: &Path, out: &Path, config: &RunConfig) -> Result<(), CliError> {
    let graph = load(graph_path)?;
    let embedded = embed_graph(&graph, config)?;
    let mut csv = String::new();
    for (node, row) in graph.nodes().iter().zip(embedded.rows().rows()) {
        csv.push_str(&node.id);
        for value in row.iter() {
            let _ = write!(csv, ",{value}");
        }
        csv.push('\n');
    }
    write_file(out, &csv)
}

pub fn perturb(graph_path: &Path, prefix: &str, config: &RunConfig) -> Result<(), CliError> {
    let graph = load(graph_path)?;
    // Variants perturb the initial features; downstream commands propagate
    // them like any other explicit embeddings.
    let start = featurize(&graph, config.dim, config.seed)
        .map_err(|err| CliError::Data(err.to_string()))?;
    let variants = wgm_core::perturb(&graph, &start, &config.perturbation())?;
    for (index, (variant, _)) in variants.iter().enumerate() {
        let path = format!("{prefix}{index}.json");
        write_file(Path::new(&path), &variant.to_json_string())?;
        println!("{path}");
    }
    Ok(())
}

/// Flags that shape the batch loss: ablations and the image-augmented intra
/// variant.
#[derive(Debug, Clone, Copy, Default)]
pub struct BatchFlags {
    pub lc: f64,
    pub plus: bool,
    pub inter_only: bool,
    pub intra_only: bool,
    pub all_pairs: bool,
}

pub fn batch_loss(
    manifest_path: &Path,
    flags: &BatchFlags,
    out: Option<&Path>,
    config: &RunConfig,
) -> Result<(), CliError> {
    if !flags.lc.is_finite() {
        return Err(CliError::Usage(format!("invalid lc: {}", flags.lc)));
    }
    let manifest = CorpusManifest::load(manifest_path)
        .map_err(|err| CliError::Data(format!("{}: {err}", manifest_path.display())))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let corpus = manifest
        .resolve(base)
        .map_err(|err| CliError::Data(format!("{}: {err}", manifest_path.display())))?;

    let mut bags = Vec::with_capacity(corpus.bags.len());
    for bag in &corpus.bags {
        let embed_all = |graphs: &[SceneGraph]| -> Result<Vec<EmbeddingMatrix>, CliError> {
            graphs
                .iter()
                .map(|g| {
                    embed_graph(g, config)
                        .map_err(|err| err.prefixed(&format!("bag {}", bag.id)))
                })
                .collect()
        };
        bags.push(EmbeddedBag {
            id: bag.id.clone(),
            images: embed_all(&bag.images)?,
            sentences: embed_all(&bag.sentences)?,
        });
    }

    let options = CorpusOptions {
        weights: LossWeights {
            inter: if flags.intra_only { 0.0 } else { config.lambda1 },
            intra: if flags.inter_only { 0.0 } else { config.lambda2 },
        },
        supervised: flags.lc,
        inter_scope: if flags.all_pairs {
            InterScope::AllPairs
        } else {
            InterScope::RawOnly
        },
        intra_variant: if flags.plus {
            IntraVariant::WithImages
        } else {
            IntraVariant::SentencesOnly
        },
    };
    let report = corpus_loss(&bags, &config.sinkhorn(), &options)?;
    // Pretty JSON with a trailing newline; the same bytes go to --out.
    let mut rendered =
        serde_json::to_string_pretty(&report).expect("loss report serializes");
    rendered.push('\n');
    print!("{rendered}");
    if let Some(path) = out {
        write_file(path, &rendered)?;
    }
    Ok(())
}

/// Re-reads a plan CSV written by [`plan`]; row-major matrix of f64.
pub fn read_plan_csv(text: &str) -> Result<Array2<f64>, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        rows.push(row.map_err(|err| format!("line {}: {err}", lineno + 1))?);
    }
    if rows.is_empty() {
        return Err("empty plan".to_string());
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err("ragged rows".to_string());
    }
    let flat: Vec<f64> = rows.concat();
    Array2::from_shape_vec((flat.len() / cols, cols), flat).map_err(|err| err.to_string())
}
