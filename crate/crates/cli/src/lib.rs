//! Library half of the `wgm` binary: argument surface, config resolution,
//! and exit-code policy. The heavy lifting lives in `wgm-core`; the
//! subcommand bodies are in [`commands`].

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;
use wgm_core::augment::AugmentError;
use wgm_core::consistency::ConsistencyError;
use wgm_core::transport::TransportError;

pub mod commands;
pub mod config;

use config::{Mode, Overrides, RunConfig, Weighting};

/// CLI failures bucketed by exit code: usage and configuration problems exit
/// 1, bad input data exits 2, numeric failures exit 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn prefixed(self, context: &str) -> CliError {
        match self {
            CliError::Usage(msg) => CliError::Usage(format!("{context}: {msg}")),
            CliError::Data(msg) => CliError::Data(format!("{context}: {msg}")),
            CliError::Numeric(msg) => CliError::Numeric(format!("{context}: {msg}")),
        }
    }
}

impl From<TransportError> for CliError {
    fn from(err: TransportError) -> Self {
        match err {
            TransportError::InvalidConfig(_) => CliError::Usage(err.to_string()),
            TransportError::Unstable | TransportError::NonFiniteCost { .. } => {
                CliError::Numeric(err.to_string())
            }
            _ => CliError::Data(err.to_string()),
        }
    }
}

impl From<ConsistencyError> for CliError {
    fn from(err: ConsistencyError) -> Self {
        match err {
            ConsistencyError::Transport(inner) => inner.into(),
            ConsistencyError::NonFinite { .. } | ConsistencyError::Negative { .. } => {
                CliError::Numeric(err.to_string())
            }
            _ => CliError::Data(err.to_string()),
        }
    }
}

impl From<AugmentError> for CliError {
    fn from(err: AugmentError) -> Self {
        match err {
            AugmentError::ZeroVariants
            | AugmentError::DropProbability(_)
            | AugmentError::NoiseScale(_) => CliError::Usage(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "wgm",
    version,
    about = "Wasserstein distances and consistency losses over scene graphs"
)]
struct Cli {
    /// JSON config file; individual flags below override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Entropic regularization strength.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Inter-modal loss weight.
    #[arg(long, global = true)]
    lambda1: Option<f64>,
    /// Intra-modal loss weight.
    #[arg(long, global = true)]
    lambda2: Option<f64>,
    /// Embedding dimension.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Propagation layers (0 = initial features).
    #[arg(long, global = true)]
    layers: Option<usize>,
    /// Embedding mode.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Neighbor weighting for non-parametric propagation.
    #[arg(long, global = true, value_enum)]
    weighting: Option<Weighting>,
    /// Solver stop threshold on marginal violation.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Solver iteration cap.
    #[arg(long, global = true)]
    max_iterations: Option<usize>,
    /// Seed for hashed features, sampled weights, and perturbation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Perturbation variants per input (K).
    #[arg(long, global = true)]
    variants: Option<usize>,
    /// Gaussian jitter scale for perturbation.
    #[arg(long, global = true)]
    noise_sigma: Option<f64>,
    /// Attribute dropout probability for perturbation.
    #[arg(long, global = true)]
    attribute_drop: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the graph Wasserstein distance between two graph files.
    Dist {
        left: PathBuf,
        right: PathBuf,
    },
    /// Write the transport plan between two graph files as CSV.
    Plan {
        left: PathBuf,
        right: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the consistency loss over a corpus manifest.
    BatchLoss {
        manifest: PathBuf,
        /// Externally computed supervised loss term.
        #[arg(long, default_value_t = 0.0)]
        lc: f64,
        /// Count image-side pairs in the intra term as well.
        #[arg(long)]
        plus: bool,
        /// Ablation: keep only the inter-modal term (zeroes lambda2).
        #[arg(long, conflicts_with = "intra_only")]
        inter_only: bool,
        /// Ablation: keep only the intra-modal term (zeroes lambda1).
        #[arg(long)]
        intra_only: bool,
        /// Pair every aligned image/sentence in the inter term, not just the
        /// raw pair.
        #[arg(long)]
        all_pairs: bool,
        /// Also write the report JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write per-node embeddings for a graph file as CSV.
    Embed {
        graph: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write K perturbed variants of a graph as schema files.
    Perturb {
        graph: PathBuf,
        /// Output path prefix; files become <PREFIX><index>.json.
        #[arg(long, value_name = "PREFIX")]
        out_prefix: String,
    },
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            lambda: self.lambda,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            dim: self.dim,
            layers: self.layers,
            mode: self.mode,
            weighting: self.weighting,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            seed: self.seed,
            variants: self.variants,
            noise_sigma: self.noise_sigma,
            attribute_drop: self.attribute_drop,
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config = RunConfig::resolve(cli.config.as_deref(), &cli.overrides())?;
    config.echo();
    match &cli.command {
        Command::Dist { left, right } => commands::dist(left, right, &config),
        Command::Plan { left, right, out } => commands::plan(left, right, out, &config),
        Command::BatchLoss {
            manifest,
            lc,
            plus,
            inter_only,
            intra_only,
            all_pairs,
            out,
        } => {
            let flags = commands::BatchFlags {
                lc: *lc,
                plus: *plus,
                inter_only: *inter_only,
                intra_only: *intra_only,
                all_pairs: *all_pairs,
            };
            commands::batch_loss(manifest, &flags, out.as_deref(), &config)
        }
        Command::Embed { graph, out } => commands::embed(graph, out, &config),
        Command::Perturb { graph, out_prefix } => {
            commands::perturb(graph, out_prefix, &config)
        }
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap routes help to stdout and diagnostics to stderr.
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
