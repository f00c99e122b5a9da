//! Run configuration: defaults, config-file loading, and flag overrides.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wgm_core::embedding::NeighborWeighting;
use wgm_core::transport::SinkhornConfig;
use wgm_core::PerturbConfig;

use crate::CliError;

/// How node embeddings are produced before any distance is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Nonparametric,
    Parametric,
}

/// Neighbor weighting for the non-parametric mode. `distance` is the default
/// scheme; `inverse-distance` is the comparison switch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    Distance,
    InverseDistance,
}

impl From<Weighting> for NeighborWeighting {
    fn from(value: Weighting) -> Self {
        match value {
            Weighting::Distance => NeighborWeighting::DistanceProportional,
            Weighting::InverseDistance => NeighborWeighting::InverseDistance,
        }
    }
}

/// Every tunable shared by the subcommands. A JSON config file carries any
/// subset of these keys; command-line flags override the file; anything left
/// falls back to the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Entropic regularization strength (larger tracks exact transport).
    pub lambda: f64,
    /// Weight of the inter-modal consistency term.
    pub lambda1: f64,
    /// Weight of the intra-modal consistency term.
    pub lambda2: f64,
    /// Embedding dimension for hashed initial features.
    pub dim: usize,
    /// Propagation layers; 0 keeps the initial features.
    pub layers: usize,
    pub mode: Mode,
    pub weighting: Weighting,
    /// Solver stop threshold on the marginal violation.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Perturbation variants written per input (K).
    pub variants: usize,
    /// Gaussian jitter scale for perturbation.
    pub noise_sigma: f64,
    /// Attribute dropout probability for perturbation.
    pub attribute_drop: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lambda: 100.0,
            lambda1: 1.0,
            lambda2: 1.0,
            dim: 8,
            layers: 2,
            mode: Mode::default(),
            weighting: Weighting::default(),
            tolerance: 1e-9,
            max_iterations: 1000,
            seed: 42,
            variants: 2,
            noise_sigma: 0.01,
            attribute_drop: 0.1,
        }
    }
}

/// Optional values collected from command-line flags; `None` leaves the
/// config-file or default value in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub lambda: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub dim: Option<usize>,
    pub layers: Option<usize>,
    pub mode: Option<Mode>,
    pub weighting: Option<Weighting>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub seed: Option<u64>,
    pub variants: Option<usize>,
    pub noise_sigma: Option<f64>,
    pub attribute_drop: Option<f64>,
}

impl RunConfig {
    /// Resolves the effective config: defaults, then the file, then flags.
    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut config = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|err| {
                    CliError::Usage(format!("config {}: {err}", path.display()))
                })?;
                serde_json::from_str::<RunConfig>(&text).map_err(|err| {
                    CliError::Usage(format!("config {}: {err}", path.display()))
                })?
            }
            None => RunConfig::default(),
        };
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    fn apply(&mut self, overrides: &Overrides) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(value) = overrides.$field {
                    self.$field = value;
                })*
            };
        }
        take!(
            lambda,
            lambda1,
            lambda2,
            dim,
            layers,
            mode,
            weighting,
            tolerance,
            max_iterations,
            seed,
            variants,
            noise_sigma,
            attribute_drop
        );
    }

    fn validate(&self) -> Result<(), CliError> {
        fn bad(what: &str, detail: fmt::Arguments) -> CliError {
            CliError::Usage(format!("invalid {what}: {detail}"))
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(bad("lambda", format_args!("must be positive, got {}", self.lambda)));
        }
        for (name, value) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !value.is_finite() || value < 0.0 {
                return Err(bad(name, format_args!("must be nonnegative, got {value}")));
            }
        }
        if self.dim == 0 {
            return Err(bad("dim", format_args!("must be at least 1")));
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(bad(
                "tolerance",
                format_args!("must be positive, got {}", self.tolerance),
            ));
        }
        if self.max_iterations == 0 {
            return Err(bad("max_iterations", format_args!("must be at least 1")));
        }
        if self.variants == 0 {
            return Err(bad("variants", format_args!("must be at least 1")));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(bad(
                "noise_sigma",
                format_args!("must be nonnegative, got {}", self.noise_sigma),
            ));
        }
        if !(0.0..=1.0).contains(&self.attribute_drop) {
            return Err(bad(
                "attribute_drop",
                format_args!("must be in [0, 1], got {}", self.attribute_drop),
            ));
        }
        Ok(())
    }

    pub fn sinkhorn(&self) -> SinkhornConfig {
        SinkhornConfig {
            lambda: self.lambda,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
        }
    }

    pub fn perturbation(&self) -> PerturbConfig {
        PerturbConfig {
            variants: self.variants,
            noise_sigma: self.noise_sigma,
            attribute_drop: self.attribute_drop,
            seed: self.seed,
        }
    }

    /// One-line echo so every run is reproducible from its log.
    pub fn echo(&self) {
        // Serialization of a plain struct with stock serde cannot fail.
        let json = serde_json::to_string(self).expect("config serializes");
        eprintln!("resolved-config {json}");
    }
}
