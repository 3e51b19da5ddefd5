//! Gender direction from target pairs.
//!
//! Two constructions are offered, both reducing to the first principal
//! component of a stacked matrix:
//!
//! * [`SubspaceMethod::Ripa`] stacks the pair differences `f − m`.
//! * [`SubspaceMethod::Pca`] stacks the deviations `f − a` and `m − a` from
//!   each pair's midpoint `a = (m + f) / 2`.
//!
//! The result is oriented so that `v · (avg(F) − avg(M)) ≥ 0`, i.e. the
//! direction points from the masculine group towards the feminine group.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingSpace;
use crate::lexicon::{GenderPair, TargetPairSet};
use crate::numerics::{self, dot, first_principal_component, Matrix, NumericsError, UnitVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubspaceError {
    #[error("no target pair has both members in the vocabulary")]
    NoUsablePairs,
    #[error("degenerate gender subspace: {0}")]
    Degenerate(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubspaceMethod {
    Pca,
    Ripa,
}

impl SubspaceMethod {
    pub const ALL: [SubspaceMethod; 2] = [SubspaceMethod::Pca, SubspaceMethod::Ripa];

    pub fn as_str(&self) -> &'static str {
        match self {
            SubspaceMethod::Pca => "pca",
            SubspaceMethod::Ripa => "ripa",
        }
    }
}

impl fmt::Display for SubspaceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SubspaceMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Ok(SubspaceMethod::Pca),
            "ripa" => Ok(SubspaceMethod::Ripa),
            _ => Err(format!(
                "unknown subspace method {s:?} (expected pca or ripa)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionOptions {
    /// Subtract column means from the stacked matrix before extracting the
    /// component. Off by default: for the difference stack the column mean
    /// is the gender signal itself.
    pub center: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderDirection {
    pub direction: UnitVector,
    pub method: SubspaceMethod,
    pub n_pairs_used: usize,
    /// `v · (avg(F) − avg(M))` over the pairs used; never negative.
    pub orientation_check: f64,
    pub skipped_pairs: Vec<GenderPair>,
    pub warnings: Vec<String>,
}

impl GenderDirection {
    pub fn as_slice(&self) -> &[f64] {
        self.direction.as_slice()
    }

    pub fn dim(&self) -> usize {
        self.direction.dim()
    }
}

pub fn ripa_direction(
    space: &EmbeddingSpace,
    targets: &TargetPairSet,
) -> Result<GenderDirection, SubspaceError> {
    gender_direction(
        space,
        targets,
        SubspaceMethod::Ripa,
        DirectionOptions::default(),
    )
}

pub fn pca_direction(
    space: &EmbeddingSpace,
    targets: &TargetPairSet,
) -> Result<GenderDirection, SubspaceError> {
    gender_direction(
        space,
        targets,
        SubspaceMethod::Pca,
        DirectionOptions::default(),
    )
}

pub fn gender_direction(
    space: &EmbeddingSpace,
    targets: &TargetPairSet,
    method: SubspaceMethod,
    options: DirectionOptions,
) -> Result<GenderDirection, SubspaceError> {
    let resolved = targets.resolve(space);
    if resolved.found.is_empty() {
        return Err(SubspaceError::NoUsablePairs);
    }

    let mut warnings: Vec<String> = resolved
        .missing
        .iter()
        .map(|p| format!("target pair {p} skipped: not in vocabulary"))
        .collect();

    let rows: Vec<Vec<f64>> = match method {
        SubspaceMethod::Ripa => resolved
            .found
            .iter()
            .map(|p| sub(p.feminine, p.masculine))
            .collect(),
        SubspaceMethod::Pca => {
            if resolved.found.len() == 1 {
                warnings.push(
                    "only one usable target pair: the two deviation rows are anti-parallel".into(),
                );
            }
            resolved
                .found
                .iter()
                .flat_map(|p| {
                    let mid: Vec<f64> = p
                        .masculine
                        .iter()
                        .zip(p.feminine)
                        .map(|(m, f)| 0.5 * (m + f))
                        .collect();
                    [sub(p.feminine, &mid), sub(p.masculine, &mid)]
                })
                .collect()
        }
    };

    let matrix = Matrix::from_rows(&rows)?;
    let mut direction = first_principal_component(&matrix, options.center)?;

    let gap = sub(
        &numerics::mean_vector(&resolved.feminine())?,
        &numerics::mean_vector(&resolved.masculine())?,
    );
    let mut orientation_check = dot(direction.as_slice(), &gap);
    if orientation_check < 0.0 {
        direction = direction.negated();
        orientation_check = -orientation_check;
    }

    Ok(GenderDirection {
        direction,
        method,
        n_pairs_used: resolved.found.len(),
        orientation_check,
        skipped_pairs: resolved.missing,
        warnings,
    })
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, SymmetricEigen};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fixture(pairs: &[(Vec<f64>, Vec<f64>)]) -> (EmbeddingSpace, TargetPairSet) {
        let dim = pairs[0].0.len();
        let mut entries = Vec::new();
        let mut names = Vec::new();
        for (i, (m, f)) in pairs.iter().enumerate() {
            entries.push((format!("m{i}"), m.clone()));
            entries.push((format!("f{i}"), f.clone()));
            names.push(GenderPair::new(format!("m{i}"), format!("f{i}")));
        }
        (
            EmbeddingSpace::from_entries(dim, entries).unwrap(),
            TargetPairSet::new("xx", names).unwrap(),
        )
    }

    fn oracle(rows: &[Vec<f64>]) -> Vec<f64> {
        let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
        let eig = SymmetricEigen::new(m.transpose() * &m);
        let idx = eig.eigenvalues.imax();
        eig.eigenvectors.column(idx).iter().copied().collect()
    }

    fn random_pairs(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..n)
            .map(|_| {
                let m = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let f = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (m, f)
            })
            .collect()
    }

    #[test]
    fn ripa_axis_aligned_differences() {
        let (space, targets) = fixture(&[
            (vec![0.0, 1.0], vec![2.0, 1.0]),
            (vec![0.0, 2.0], vec![1.0, 2.0]),
        ]);
        let d = ripa_direction(&space, &targets).unwrap();
        assert_abs_diff_eq!(d.as_slice()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.as_slice()[1], 0.0, epsilon = 1e-12);
        assert!(d.orientation_check > 0.0);
        assert_eq!(d.n_pairs_used, 2);
        assert_eq!(d.method, SubspaceMethod::Ripa);
    }

    #[test]
    fn ripa_single_pair_points_feminine() {
        let (space, targets) = fixture(&[(vec![1.0, 0.0], vec![0.0, 1.0])]);
        let d = ripa_direction(&space, &targets).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(d.as_slice()[0], -h, epsilon = 1e-10);
        assert_abs_diff_eq!(d.as_slice()[1], h, epsilon = 1e-10);
    }

    #[test]
    fn pca_symmetric_rows() {
        let (space, targets) = fixture(&[(vec![0.0, 0.0], vec![2.0, 0.0])]);
        let d = pca_direction(&space, &targets).unwrap();
        assert_abs_diff_eq!(d.as_slice()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.as_slice()[1], 0.0, epsilon = 1e-12);
        assert_eq!(d.warnings.len(), 1);
    }

    #[test]
    fn pca_planted_axis_two() {
        let (space, targets) = fixture(&[
            (vec![0.3, -0.5, 0.7], vec![0.3, 0.5, 0.7]),
            (vec![-1.0, -0.2, 0.1], vec![-1.0, 0.4, 0.1]),
        ]);
        let d = pca_direction(&space, &targets).unwrap();
        for (got, want) in d.as_slice().iter().zip([0.0, 1.0, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn ripa_random_matches_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let pairs = random_pairs(&mut rng, 10, 8);
            let (space, targets) = fixture(&pairs);
            let rows: Vec<Vec<f64>> = pairs.iter().map(|(m, f)| sub(f, m)).collect();
            let d = ripa_direction(&space, &targets).unwrap();
            assert!(dot(d.as_slice(), &oracle(&rows)).abs() >= 1.0 - 1e-8);
        }
    }

    #[test]
    fn pca_random_matches_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let pairs = random_pairs(&mut rng, 6, 8);
            let (space, targets) = fixture(&pairs);
            let rows: Vec<Vec<f64>> = pairs
                .iter()
                .flat_map(|(m, f)| {
                    let a: Vec<f64> = m.iter().zip(f).map(|(x, y)| (x + y) / 2.0).collect();
                    [sub(f, &a), sub(m, &a)]
                })
                .collect();
            let d = pca_direction(&space, &targets).unwrap();
            assert!(dot(d.as_slice(), &oracle(&rows)).abs() >= 1.0 - 1e-8);
        }
    }

    #[test]
    fn oov_pairs_are_skipped_and_recorded() {
        let space = EmbeddingSpace::from_entries(
            2,
            [
                ("m0".into(), vec![0.0, 1.0]),
                ("f0".into(), vec![1.0, 1.0]),
                ("m1".into(), vec![0.0, 2.0]),
            ],
        )
        .unwrap();
        let targets = TargetPairSet::new(
            "xx",
            vec![GenderPair::new("m0", "f0"), GenderPair::new("m1", "f1")],
        )
        .unwrap();
        let d = ripa_direction(&space, &targets).unwrap();
        assert_eq!(d.n_pairs_used, 1);
        assert_eq!(d.skipped_pairs, vec![GenderPair::new("m1", "f1")]);
        assert!(!d.warnings.is_empty());
    }

    #[test]
    fn no_usable_pairs_or_degenerate() {
        let space = EmbeddingSpace::from_entries(2, [("m0".into(), vec![1.0, 1.0])]).unwrap();
        let targets = TargetPairSet::new("xx", vec![GenderPair::new("m0", "f0")]).unwrap();
        assert_eq!(
            ripa_direction(&space, &targets),
            Err(SubspaceError::NoUsablePairs)
        );

        let (space, targets) = fixture(&[(vec![1.0, 2.0], vec![1.0, 2.0])]);
        assert!(matches!(
            ripa_direction(&space, &targets),
            Err(SubspaceError::Degenerate(NumericsError::ZeroMatrix))
        ));
        assert!(matches!(
            pca_direction(&space, &targets),
            Err(SubspaceError::Degenerate(NumericsError::ZeroMatrix))
        ));
    }

    #[test]
    fn both_methods_recover_planted_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..4 {
            let pairs: Vec<_> = (0..5)
                .map(|_| {
                    let mut b: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    b[k] = 0.0;
                    let scale = rng.gen_range(0.5..2.0);
                    let mut m = b.clone();
                    let mut f = b;
                    m[k] -= scale;
                    f[k] += scale;
                    (m, f)
                })
                .collect();
            let (space, targets) = fixture(&pairs);
            for method in SubspaceMethod::ALL {
                let d = gender_direction(&space, &targets, method, DirectionOptions::default())
                    .unwrap();
                for (j, x) in d.as_slice().iter().enumerate() {
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(*x, want, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn method_parsing() {
        assert_eq!(
            "PCA".parse::<SubspaceMethod>().unwrap(),
            SubspaceMethod::Pca
        );
        assert_eq!(
            "ripa".parse::<SubspaceMethod>().unwrap(),
            SubspaceMethod::Ripa
        );
        assert!("svd".parse::<SubspaceMethod>().is_err());
    }
}
