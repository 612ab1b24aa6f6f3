//! File records for scenarios and witnesses (double precision).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Operator, PureVector};
use crate::network::{max_entangled_sources, pure_sources, with_visibility};
use crate::objects::{white_noise, Measurement};
use crate::scalar::Tolerances;
use crate::star::{builtin_functional, BellFunctional, BellFunctionalRecord};
use crate::witness::Witness;

pub const MAXIMALLY_ENTANGLED: &str = "maximally_entangled";

/// `"maximally_entangled"` or an explicit list of two-system pure states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceSpec {
    Named(String),
    States(Vec<PureVector<f64>>),
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec::Named(MAXIMALLY_ENTANGLED.into())
    }
}

/// One visibility for every source, or one per source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSpec {
    Uniform(f64),
    PerSource(Vec<f64>),
}

/// Density matrices of the sources for a central measurement on `dims`.
pub fn resolve_sources(
    spec: &SourceSpec,
    dims: &[usize],
    noise: Option<&NoiseSpec>,
) -> Result<Vec<Operator<f64>>> {
    let clean = match spec {
        SourceSpec::Named(n) if n == MAXIMALLY_ENTANGLED => max_entangled_sources(dims)?,
        SourceSpec::Named(n) => {
            return Err(Error::InvalidArgument(format!(
                "unknown source {n:?}; use {MAXIMALLY_ENTANGLED:?} or a list of states"
            )))
        }
        SourceSpec::States(s) => pure_sources(s)?,
    };
    match noise {
        None => Ok(clean),
        Some(NoiseSpec::Uniform(v)) => with_visibility(&clean, *v),
        Some(NoiseSpec::PerSource(vs)) => {
            if vs.len() != clean.len() {
                return Err(Error::DimensionMismatch {
                    expected: clean.len(),
                    found: vs.len(),
                });
            }
            clean
                .iter()
                .zip(vs)
                .map(|(s, &v)| white_noise(s, v))
                .collect()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessChoice {
    /// Built from the most negative partial-transpose eigenvector.
    #[default]
    Auto,
    Wbm,
    WbmPrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Number of evenly spaced visibilities in `[0, 1]`.
    pub points: usize,
}

fn default_basis() -> String {
    "standard".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteerScenario {
    pub bob_measurement: Measurement<f64>,
    #[serde(default)]
    pub sources: SourceSpec,
    #[serde(default = "default_basis")]
    pub basis_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub witness: WitnessChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

/// Built-in name or explicit coefficient record.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionalSpec {
    Named(String),
    Explicit(BellFunctionalRecord<f64>),
}

impl Default for FunctionalSpec {
    fn default() -> Self {
        FunctionalSpec::Named("chsh".into())
    }
}

impl FunctionalSpec {
    pub fn resolve(&self) -> Result<BellFunctional<f64>> {
        match self {
            FunctionalSpec::Named(n) => builtin_functional(n),
            FunctionalSpec::Explicit(r) => BellFunctional::try_from(r.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiScenario {
    pub bob_measurement: Measurement<f64>,
    #[serde(default)]
    pub bell_functional: FunctionalSpec,
    #[serde(default)]
    pub sources: SourceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_b_settings: Option<bool>,
    #[serde(default)]
    pub allow_non_rank_one: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    #[serde(flatten)]
    pub witness: Witness<f64>,
    pub tolerances: Tolerances<f64>,
    /// Largest `|λ|` of the operator.
    pub scale: f64,
}
