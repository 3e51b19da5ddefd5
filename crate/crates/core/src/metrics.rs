//! Bias scores over attribute categories.
//!
//! | metric | attributes      | value                                               | unbiased |
//! |--------|-----------------|-----------------------------------------------------|----------|
//! | ECT-n  | neutral words   | `spearman(cos(p, a1), cos(p, a2))`                  | 1        |
//! | RND-n  | neutral words   | `Σ ‖avg(M) − p‖ − ‖avg(F) − p‖`                     | 0        |
//! | ECT-g  | gendered pairs  | `spearman(cos(p_m, a1), cos(p_f, a2))`              | 1        |
//! | RND-g  | gendered pairs  | `Σ ‖avg(M) − p_m‖ − ‖avg(F) − p_f‖`                 | 0        |
//!
//! `a1 = avg(M)` and `a2 = avg(F)` are the means of the masculine and feminine
//! target vectors over the pairs with both members in the vocabulary. RND is
//! kept signed; a negative value means the attributes sit closer to the
//! masculine mean.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingSpace;
use crate::lexicon::{
    AttributeCategory, AttributeItem, AttributeWords, CategoryKind, TargetPairSet,
};
use crate::numerics::{cosine, distance, mean_vector, spearman, NumericsError};

/// Default minimum in-vocabulary fraction for a category to be scored.
pub const DEFAULT_COVERAGE_FLOOR: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("{metric} needs a {expected} category, {category:?} is {found}")]
    WrongKind {
        metric: Metric,
        category: String,
        expected: CategoryKind,
        found: CategoryKind,
    },
    #[error("category {category:?}: coverage {ratio:.3} is below the floor {floor:.3}")]
    CoverageBelowFloor {
        category: String,
        ratio: f64,
        floor: f64,
    },
    #[error("category {category:?}: {metric} needs at least {needed} usable items, found {found}")]
    TooFewUsable {
        metric: Metric,
        category: String,
        needed: usize,
        found: usize,
    },
    #[error("no target pair has both members in the vocabulary")]
    NoUsableTargetPairs,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "ECT-n")]
    EctNeutral,
    #[serde(rename = "RND-n")]
    RndNeutral,
    #[serde(rename = "ECT-g")]
    EctGendered,
    #[serde(rename = "RND-g")]
    RndGendered,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::EctNeutral => "ECT-n",
            Metric::RndNeutral => "RND-n",
            Metric::EctGendered => "ECT-g",
            Metric::RndGendered => "RND-g",
        }
    }

    pub fn is_ect(&self) -> bool {
        matches!(self, Metric::EctNeutral | Metric::EctGendered)
    }

    pub fn kind(&self) -> CategoryKind {
        match self {
            Metric::EctNeutral | Metric::RndNeutral => CategoryKind::Neutral,
            Metric::EctGendered | Metric::RndGendered => CategoryKind::GenderedPairs,
        }
    }

    /// The two metrics applicable to a category kind, ECT first.
    pub fn for_kind(kind: CategoryKind) -> [Metric; 2] {
        match kind {
            CategoryKind::Neutral => [Metric::EctNeutral, Metric::RndNeutral],
            CategoryKind::GenderedPairs => [Metric::EctGendered, Metric::RndGendered],
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub item: AttributeItem,
    pub value: f64,
}

/// One (metric, category) score.
///
/// For ECT, `per_word` holds the diagnostic `s1 − s2` per item; for RND it
/// holds each summand, and `value` is their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasScores {
    pub metric: Metric,
    pub category: String,
    pub value: f64,
    pub per_word: Vec<Contribution>,
    pub n_used: usize,
    pub n_skipped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    pub coverage_floor: f64,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            coverage_floor: DEFAULT_COVERAGE_FLOOR,
        }
    }
}

/// Masculine and feminine target means (`a1`/`avg(M)` and `a2`/`avg(F)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetMeans {
    pub masculine: Vec<f64>,
    pub feminine: Vec<f64>,
    pub n_pairs_used: usize,
}

impl TargetMeans {
    /// Means over the pairs whose members are both in `space`.
    pub fn compute(space: &EmbeddingSpace, targets: &TargetPairSet) -> Result<Self, MetricError> {
        let resolved = targets.resolve(space);
        if resolved.found.is_empty() {
            return Err(MetricError::NoUsableTargetPairs);
        }
        Ok(Self {
            masculine: mean_vector(&resolved.masculine())?,
            feminine: mean_vector(&resolved.feminine())?,
            n_pairs_used: resolved.found.len(),
        })
    }

    pub fn swapped(&self) -> Self {
        Self {
            masculine: self.feminine.clone(),
            feminine: self.masculine.clone(),
            n_pairs_used: self.n_pairs_used,
        }
    }
}

struct Usable<'s> {
    items: Vec<(AttributeItem, &'s [f64], &'s [f64])>,
    skipped: usize,
}

// For neutral categories both slices are the same word vector.
fn usable<'s>(
    space: &'s EmbeddingSpace,
    category: &AttributeCategory,
    metric: Metric,
    options: &MetricOptions,
    minimum: usize,
) -> Result<Usable<'s>, MetricError> {
    if category.kind() != metric.kind() {
        return Err(MetricError::WrongKind {
            metric,
            category: category.name.clone(),
            expected: metric.kind(),
            found: category.kind(),
        });
    }
    let items: Vec<_> = match &category.words {
        AttributeWords::Neutral(words) => words
            .iter()
            .filter_map(|w| space.get(w).map(|v| (AttributeItem::Word(w.clone()), v, v)))
            .collect(),
        AttributeWords::GenderedPairs(pairs) => pairs
            .iter()
            .filter_map(|p| {
                p.lookup(space)
                    .map(|(m, f)| (AttributeItem::Pair(p.clone()), m, f))
            })
            .collect(),
    };
    let total = category.len();
    let ratio = items.len() as f64 / total as f64;
    if ratio < options.coverage_floor {
        return Err(MetricError::CoverageBelowFloor {
            category: category.name.clone(),
            ratio,
            floor: options.coverage_floor,
        });
    }
    if items.len() < minimum {
        return Err(MetricError::TooFewUsable {
            metric,
            category: category.name.clone(),
            needed: minimum,
            found: items.len(),
        });
    }
    Ok(Usable {
        skipped: total - items.len(),
        items,
    })
}

fn ect(
    space: &EmbeddingSpace,
    means: &TargetMeans,
    category: &AttributeCategory,
    metric: Metric,
    options: &MetricOptions,
) -> Result<BiasScores, MetricError> {
    let u = usable(space, category, metric, options, 2)?;
    let mut s1 = Vec::with_capacity(u.items.len());
    let mut s2 = Vec::with_capacity(u.items.len());
    for (_, m, f) in &u.items {
        s1.push(cosine(m, &means.masculine)?);
        s2.push(cosine(f, &means.feminine)?);
    }
    let value = spearman(&s1, &s2)?;
    let per_word = u
        .items
        .into_iter()
        .zip(s1.iter().zip(&s2))
        .map(|((item, _, _), (a, b))| Contribution { item, value: a - b })
        .collect::<Vec<_>>();
    Ok(BiasScores {
        metric,
        category: category.name.clone(),
        value,
        n_used: per_word.len(),
        n_skipped: u.skipped,
        per_word,
    })
}

fn rnd(
    space: &EmbeddingSpace,
    means: &TargetMeans,
    category: &AttributeCategory,
    metric: Metric,
    options: &MetricOptions,
) -> Result<BiasScores, MetricError> {
    let u = usable(space, category, metric, options, 1)?;
    let per_word: Vec<Contribution> = u
        .items
        .into_iter()
        .map(|(item, m, f)| Contribution {
            item,
            value: distance(&means.masculine, m) - distance(&means.feminine, f),
        })
        .collect();
    let value = per_word.iter().map(|c| c.value).sum::<f64>();
    if !value.is_finite() {
        return Err(NumericsError::NonFinite.into());
    }
    Ok(BiasScores {
        metric,
        category: category.name.clone(),
        value,
        n_used: per_word.len(),
        n_skipped: u.skipped,
        per_word,
    })
}

/// Scores `category` under `metric` using precomputed target means.
pub fn evaluate(
    space: &EmbeddingSpace,
    means: &TargetMeans,
    category: &AttributeCategory,
    metric: Metric,
    options: &MetricOptions,
) -> Result<BiasScores, MetricError> {
    if means.masculine.len() != space.dim() {
        return Err(NumericsError::LengthMismatch {
            left: means.masculine.len(),
            right: space.dim(),
        }
        .into());
    }
    if metric.is_ect() {
        ect(space, means, category, metric, options)
    } else {
        rnd(space, means, category, metric, options)
    }
}

fn with_targets(
    space: &EmbeddingSpace,
    targets: &TargetPairSet,
    category: &AttributeCategory,
    metric: Metric,
    options: &MetricOptions,
) -> Result<BiasScores, MetricError> {
    let means = TargetMeans::compute(space, targets)?;
    evaluate(space, &means, category, metric, options)
}

/// ECT over a neutral category.
pub fn ect_neutral(
    space: &EmbeddingSpace,
    targets: &TargetPairSet,
    category: &AttributeCategory,
    options: &MetricOptions,
) -> Result<BiasScores, MetricError> {
    with_targets(space, targets, category, Metric::EctNeutral, options)
}

/// Signed RND over a neutral category.
pub fn rnd_neutral(
    space: &EmbeddingSpace,
    targets: &TargetPairSet,
    category: &AttributeCategory,
    options: &MetricOptions,
) -> Result<BiasScores, MetricError> {
    with_targets(space, targets, category, Metric::RndNeutral, options)
}

/// ECT over a gendered-pairs category.
pub fn ect_gendered(
    space: &EmbeddingSpace,
    targets: &TargetPairSet,
    category: &AttributeCategory,
    options: &MetricOptions,
) -> Result<BiasScores, MetricError> {
    with_targets(space, targets, category, Metric::EctGendered, options)
}

/// Signed RND over a gendered-pairs category.
pub fn rnd_gendered(
    space: &EmbeddingSpace,
    targets: &TargetPairSet,
    category: &AttributeCategory,
    options: &MetricOptions,
) -> Result<BiasScores, MetricError> {
    with_targets(space, targets, category, Metric::RndGendered, options)
}
