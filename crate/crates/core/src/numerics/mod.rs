//! Dimension-agnostic numerical kernel.
//!
//! Everything here works on plain `f64` slices so the embedding, subspace and
//! metric layers can share one set of primitives. The two non-trivial pieces,
//! the first principal component and Spearman's rank correlation, live in
//! their own submodules.

mod pca;
mod spearman;

pub use pca::{first_principal_component, MAX_POWER_ITERATIONS, POWER_ITERATION_TOLERANCE};
pub use spearman::{fractional_ranks, spearman};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `|v| - 1` accepted by [`UnitVector`].
pub const UNIT_NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("empty input")]
    Empty,
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("ragged matrix: row {row} has {got} columns, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("matrix is identically zero")]
    ZeroMatrix,
    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("vector norm {norm} is not within tolerance of 1")]
    NotUnit { norm: f64 },
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Euclidean distance `‖u − v‖₂`.
pub fn distance(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, NumericsError> {
    if u.len() != v.len() {
        return Err(NumericsError::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(NumericsError::ZeroNorm);
    }
    let c = dot(u, v) / (nu * nv);
    if !c.is_finite() {
        return Err(NumericsError::NonFinite);
    }
    Ok(c.clamp(-1.0, 1.0))
}

/// Component-wise arithmetic mean of a non-empty list of equal-length vectors.
pub fn mean_vector<V: AsRef<[f64]>>(vs: &[V]) -> Result<Vec<f64>, NumericsError> {
    let first = vs.first().ok_or(NumericsError::Empty)?.as_ref();
    let mut acc = vec![0.0; first.len()];
    for v in vs {
        let v = v.as_ref();
        if v.len() != acc.len() {
            return Err(NumericsError::LengthMismatch {
                left: acc.len(),
                right: v.len(),
            });
        }
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    let n = vs.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Dense row-major matrix of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl Matrix {
    pub fn from_rows<V: AsRef<[f64]>>(rows: &[V]) -> Result<Self, NumericsError> {
        let n_cols = rows.first().ok_or(NumericsError::Empty)?.as_ref().len();
        if n_cols == 0 {
            return Err(NumericsError::Empty);
        }
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(NumericsError::Ragged {
                    row: i,
                    expected: n_cols,
                    got: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(NumericsError::NonFinite);
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            data,
            n_rows: rows.len(),
            n_cols,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols)
    }

    /// Copy with each column's mean subtracted.
    pub fn centered(&self) -> Matrix {
        let means = mean_vector(&self.rows().collect::<Vec<_>>()).expect("matrix is non-empty");
        let mut data = self.data.clone();
        for row in data.chunks_exact_mut(self.n_cols) {
            for (x, m) in row.iter_mut().zip(&means) {
                *x -= m;
            }
        }
        Matrix { data, ..*self }
    }
}

/// A vector with Euclidean norm 1 (within [`UNIT_NORM_TOLERANCE`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Scales `v` to unit length.
    pub fn normalize(mut v: Vec<f64>) -> Result<Self, NumericsError> {
        let n = norm(&v);
        if !n.is_finite() {
            return Err(NumericsError::NonFinite);
        }
        if n == 0.0 {
            return Err(NumericsError::ZeroNorm);
        }
        v.iter_mut().for_each(|x| *x /= n);
        Ok(Self(v))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = NumericsError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        let n = norm(&v);
        if (n - 1.0).abs() > UNIT_NORM_TOLERANCE || !n.is_finite() {
            return Err(NumericsError::NotUnit { norm: n });
        }
        Ok(Self(v))
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(v: UnitVector) -> Self {
        v.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
