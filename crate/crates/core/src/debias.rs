//! Projection-based mitigation along a gender direction `v`.
//!
//! * Projection: `w ← w − (w·v) v`.
//! * Partial projection: `w ← w − (w·v) v + μ`, where `μ` is the mean of the
//!   target-pair means. [`MuMode::AlongDirection`] adds only the component of
//!   `μ` along `v`, `(μ·v) v`, instead of the full vector.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingSpace;
use crate::lexicon::TargetPairSet;
use crate::numerics::{dot, mean_vector, NumericsError};
use crate::subspace::GenderDirection;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DebiasError {
    #[error("direction has dimension {direction}, space has {space}")]
    DimensionMismatch { direction: usize, space: usize },
    #[error("no target pair has both members in the vocabulary")]
    NoUsablePairs,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuMode {
    /// Add the full `μ` vector.
    #[default]
    FullVector,
    /// Add only `(μ·v) v`.
    AlongDirection,
}

impl fmt::Display for MuMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MuMode::FullVector => "full_vector",
            MuMode::AlongDirection => "along_direction",
        })
    }
}

impl std::str::FromStr for MuMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" | "full_vector" => Ok(MuMode::FullVector),
            "along" | "along_direction" => Ok(MuMode::AlongDirection),
            _ => Err(format!("unknown mu mode {s:?} (expected full or along)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum DebiasMethod {
    Projection,
    PartialProjection { mu_mode: MuMode },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DebiasConfig {
    pub method: DebiasMethod,
    /// Leave target-pair words untouched.
    pub exclude_targets: bool,
}

/// `μ`: the mean over usable target pairs of each pair's mean vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuVector {
    pub components: Vec<f64>,
    pub n_pairs: usize,
}

pub fn compute_mu(
    space: &EmbeddingSpace,
    targets: &TargetPairSet,
) -> Result<MuVector, DebiasError> {
    let resolved = targets.resolve(space);
    if resolved.found.is_empty() {
        return Err(DebiasError::NoUsablePairs);
    }
    let pair_means: Vec<Vec<f64>> = resolved
        .found
        .iter()
        .map(|p| mean_vector(&[p.masculine, p.feminine]))
        .collect::<Result<_, _>>()?;
    Ok(MuVector {
        components: mean_vector(&pair_means)?,
        n_pairs: pair_means.len(),
    })
}

fn check_dim(space: &EmbeddingSpace, direction: &GenderDirection) -> Result<(), DebiasError> {
    if direction.dim() != space.dim() {
        return Err(DebiasError::DimensionMismatch {
            direction: direction.dim(),
            space: space.dim(),
        });
    }
    Ok(())
}

fn excluded_words(targets: Option<&TargetPairSet>) -> HashSet<&str> {
    targets.map(|t| t.words().collect()).unwrap_or_default()
}

fn remove_component(w: &[f64], v: &[f64]) -> Vec<f64> {
    let c = dot(w, v);
    w.iter().zip(v).map(|(x, y)| x - c * y).collect()
}

/// Removes every vector's component along the direction. Words of `exclude`
/// are copied unchanged.
pub fn project_out(
    space: &EmbeddingSpace,
    direction: &GenderDirection,
    exclude: Option<&TargetPairSet>,
) -> Result<EmbeddingSpace, DebiasError> {
    check_dim(space, direction)?;
    let v = direction.as_slice();
    let skip = excluded_words(exclude);
    Ok(space.map_vectors(|word, w| {
        if skip.contains(word) {
            w.to_vec()
        } else {
            remove_component(w, v)
        }
    }))
}

/// Projection followed by adding `μ` (or its component along the direction).
pub fn partial_project(
    space: &EmbeddingSpace,
    direction: &GenderDirection,
    mu: &MuVector,
    mode: MuMode,
    exclude: Option<&TargetPairSet>,
) -> Result<EmbeddingSpace, DebiasError> {
    check_dim(space, direction)?;
    if mu.components.len() != space.dim() {
        return Err(NumericsError::LengthMismatch {
            left: mu.components.len(),
            right: space.dim(),
        }
        .into());
    }
    let v = direction.as_slice();
    let offset: Vec<f64> = match mode {
        MuMode::FullVector => mu.components.clone(),
        MuMode::AlongDirection => {
            let c = dot(&mu.components, v);
            v.iter().map(|x| c * x).collect()
        }
    };
    let skip = excluded_words(exclude);
    Ok(space.map_vectors(|word, w| {
        if skip.contains(word) {
            return w.to_vec();
        }
        let mut out = remove_component(w, v);
        out.iter_mut().zip(&offset).for_each(|(x, o)| *x += o);
        out
    }))
}

/// Applies `config` to `space`; `μ` is computed from `targets` when needed.
pub fn debias(
    space: &EmbeddingSpace,
    targets: &TargetPairSet,
    direction: &GenderDirection,
    config: &DebiasConfig,
) -> Result<EmbeddingSpace, DebiasError> {
    let exclude = config.exclude_targets.then_some(targets);
    match config.method {
        DebiasMethod::Projection => project_out(space, direction, exclude),
        DebiasMethod::PartialProjection { mu_mode } => {
            let mu = compute_mu(space, targets)?;
            partial_project(space, direction, &mu, mu_mode, exclude)
        }
    }
}
