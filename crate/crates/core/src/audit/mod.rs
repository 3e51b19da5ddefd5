//! The full experiment grid.
//!
//! Gender directions are extracted once from the (optionally normalized)
//! input space. Each debiasing condition transforms that space and every
//! applicable metric is evaluated on every category of the transformed copy:
//! ECT-n/RND-n on neutral categories, ECT-g/RND-g on gendered ones.

mod render;

pub use render::{display_value, render_report, RenderError, ReportFormat};

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::debias::{debias, DebiasConfig, DebiasError, DebiasMethod, MuMode};
use crate::embedding::{load_vec_with_stats, EmbeddingError, EmbeddingSpace, LoadStats};
use crate::lexicon::{
    load_lexicon, validate_coverage, CategoryCoverage, CategoryKind, CoverageReport, GenderPair,
    Lexicon, LexiconError,
};
use crate::metrics::{
    evaluate, BiasScores, Metric, MetricError, MetricOptions, TargetMeans, DEFAULT_COVERAGE_FLOOR,
};
use crate::subspace::{
    gender_direction, DirectionOptions, GenderDirection, SubspaceError, SubspaceMethod,
};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("loading embeddings: {0}")]
    Embedding(#[from] EmbeddingError),
    #[error("loading lexicon: {0}")]
    Lexicon(#[from] LexiconError),
    #[error("coverage below floor {floor}:\n{}", coverage_summary(.failing))]
    CoverageBelowFloor {
        floor: f64,
        failing: Vec<CategoryCoverage>,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{method} gender direction: {source}")]
    Subspace {
        method: SubspaceMethod,
        source: SubspaceError,
    },
    #[error("target means: {0}")]
    Means(#[from] MetricError),
    #[error("debiasing ({condition}): {source}")]
    Debias {
        condition: Condition,
        source: DebiasError,
    },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

fn coverage_summary(failing: &[CategoryCoverage]) -> String {
    failing
        .iter()
        .map(|c| {
            let oov: Vec<String> = c.oov.iter().map(ToString::to_string).collect();
            format!(
                "  {}: {}/{} found ({:.1}%), OOV: {}",
                c.name,
                c.found,
                c.total,
                100.0 * c.ratio(),
                oov.join(", ")
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// One column of the result grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Baseline,
    ProjectionPca,
    ProjectionRipa,
    PartialPca,
    PartialRipa,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::Baseline,
        Condition::ProjectionPca,
        Condition::ProjectionRipa,
        Condition::PartialPca,
        Condition::PartialRipa,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::Baseline => "baseline",
            Condition::ProjectionPca => "projection_pca",
            Condition::ProjectionRipa => "projection_ripa",
            Condition::PartialPca => "partial_pca",
            Condition::PartialRipa => "partial_ripa",
        }
    }

    pub fn subspace(&self) -> Option<SubspaceMethod> {
        match self {
            Condition::Baseline => None,
            Condition::ProjectionPca | Condition::PartialPca => Some(SubspaceMethod::Pca),
            Condition::ProjectionRipa | Condition::PartialRipa => Some(SubspaceMethod::Ripa),
        }
    }

    pub fn is_partial(&self) -> bool {
        matches!(self, Condition::PartialPca | Condition::PartialRipa)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the target means of a debiased condition come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeansSource {
    /// Recompute `avg(M)`/`avg(F)` from the debiased target vectors.
    #[default]
    Recompute,
    /// Reuse the means of the untransformed space.
    Baseline,
}

impl fmt::Display for MeansSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeansSource::Recompute => "recomputed per condition",
            MeansSource::Baseline => "baseline",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub normalize: bool,
    pub coverage_floor: f64,
    pub mu_mode: MuMode,
    pub exclude_targets: bool,
    pub means_source: MeansSource,
    pub renormalize_debiased: bool,
    pub center_directions: bool,
    /// Include the full direction vectors in the provenance block.
    pub dump_directions: bool,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            normalize: true,
            coverage_floor: DEFAULT_COVERAGE_FLOOR,
            mu_mode: MuMode::default(),
            exclude_targets: false,
            means_source: MeansSource::default(),
            renormalize_debiased: false,
            center_directions: false,
            dump_directions: false,
        }
    }
}

impl AuditOptions {
    fn validate(&self) -> Result<(), AuditError> {
        if !(0.0..=1.0).contains(&self.coverage_floor) {
            return Err(AuditError::InvalidConfig(format!(
                "coverage floor {} is outside [0, 1]",
                self.coverage_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub embeddings: PathBuf,
    pub lexicon: PathBuf,
    pub options: AuditOptions,
    pub format: ReportFormat,
    pub percent: bool,
}

impl AuditConfig {
    pub fn new(embeddings: impl Into<PathBuf>, lexicon: impl Into<PathBuf>) -> Self {
        Self {
            embeddings: embeddings.into(),
            lexicon: lexicon.into(),
            options: AuditOptions::default(),
            format: ReportFormat::Text,
            percent: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Scored { scores: BiasScores },
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub condition: Condition,
    pub metric: Metric,
    pub category: String,
    #[serde(flatten)]
    pub outcome: CellOutcome,
}

impl Cell {
    pub fn scores(&self) -> Option<&BiasScores> {
        match &self.outcome {
            CellOutcome::Scored { scores } => Some(scores),
            CellOutcome::Skipped { .. } => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        self.scores().map(|s| s.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingsInfo {
    pub path: Option<String>,
    pub retained_words: usize,
    pub dim: usize,
    /// SHA-256 of the retained (pre-normalization) entries.
    pub content_sha256: String,
    pub normalized: bool,
    pub load: Option<LoadStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconInfo {
    pub path: Option<String>,
    pub sha256: Option<String>,
    pub language: String,
    pub n_target_pairs: usize,
    pub categories: Vec<CategorySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySummary {
    pub name: String,
    pub kind: CategoryKind,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionInfo {
    pub method: SubspaceMethod,
    pub n_pairs_used: usize,
    pub orientation_check: f64,
    pub skipped_pairs: Vec<GenderPair>,
    pub vector: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub embeddings: EmbeddingsInfo,
    pub lexicon: LexiconInfo,
    pub options: AuditOptions,
    pub coverage: CoverageReport,
    pub directions: Vec<DirectionInfo>,
    pub warnings: Vec<String>,
}

/// Every (condition, metric, category) cell plus the provenance block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub cells: Vec<Cell>,
}

impl BiasReport {
    pub fn cell(&self, condition: Condition, metric: Metric, category: &str) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.condition == condition && c.metric == metric && c.category == category)
    }

    pub fn value(&self, condition: Condition, metric: Metric, category: &str) -> Option<f64> {
        self.cell(condition, metric, category)?.value()
    }

    /// Category names in lexicon order.
    pub fn categories(&self) -> impl Iterator<Item = &CategorySummary> {
        self.provenance.lexicon.categories.iter()
    }
}

/// Loads both inputs (embeddings filtered to the lexicon vocabulary) and runs
/// the grid.
pub fn run_audit(config: &AuditConfig) -> Result<BiasReport, AuditError> {
    config.options.validate()?;
    let lexicon_bytes = std::fs::read(&config.lexicon).map_err(LexiconError::Io)?;
    let lexicon = load_lexicon(&config.lexicon)?;
    let filter = lexicon.vocabulary();
    let (space, stats) = load_vec_with_stats(&config.embeddings, Some(&filter))?;

    let mut report = audit_space(&space, &lexicon, &config.options)?;
    let prov = &mut report.provenance;
    prov.embeddings.path = Some(display_path(&config.embeddings));
    let mut warnings: Vec<String> = stats
        .duplicate_words
        .iter()
        .map(|w| format!("duplicate embedding line for {w:?} ignored"))
        .collect();
    warnings.append(&mut prov.warnings);
    prov.warnings = warnings;
    prov.embeddings.load = Some(stats);
    prov.lexicon.path = Some(display_path(&config.lexicon));
    prov.lexicon.sha256 = Some(hex::encode(Sha256::digest(&lexicon_bytes)));
    Ok(report)
}

fn display_path(p: &Path) -> String {
    p.display().to_string()
}

/// Runs the grid on an in-memory space. `space` is the raw input; it is
/// normalized here when the options ask for it.
pub fn audit_space(
    raw: &EmbeddingSpace,
    lexicon: &Lexicon,
    options: &AuditOptions,
) -> Result<BiasReport, AuditError> {
    options.validate()?;
    let coverage = validate_coverage(lexicon, raw);
    let failing: Vec<CategoryCoverage> = coverage
        .below_floor(options.coverage_floor)
        .into_iter()
        .cloned()
        .collect();
    if !failing.is_empty() {
        return Err(AuditError::CoverageBelowFloor {
            floor: options.coverage_floor,
            failing,
        });
    }

    let space = if options.normalize {
        raw.normalize()?
    } else {
        raw.clone()
    };
    let targets = &lexicon.targets;
    let mut warnings: Vec<String> = Vec::new();

    let dir_options = DirectionOptions {
        center: options.center_directions,
    };
    let directions: Vec<GenderDirection> = SubspaceMethod::ALL
        .iter()
        .map(|&method| {
            gender_direction(&space, targets, method, dir_options)
                .map_err(|source| AuditError::Subspace { method, source })
        })
        .collect::<Result<_, _>>()?;
    for d in &directions {
        warnings.extend(d.warnings.iter().map(|w| format!("{}: {w}", d.method)));
    }
    let direction_for = |m: SubspaceMethod| {
        directions
            .iter()
            .find(|d| d.method == m)
            .expect("both directions computed")
    };

    let baseline_means = TargetMeans::compute(&space, targets)?;
    let metric_options = MetricOptions {
        coverage_floor: options.coverage_floor,
    };

    let mut per_condition = Vec::with_capacity(Condition::ALL.len());
    for condition in Condition::ALL {
        let evaluated = match condition.subspace() {
            None => space.clone(),
            Some(method) => {
                let config = DebiasConfig {
                    method: if condition.is_partial() {
                        DebiasMethod::PartialProjection {
                            mu_mode: options.mu_mode,
                        }
                    } else {
                        DebiasMethod::Projection
                    },
                    exclude_targets: options.exclude_targets,
                };
                let out = debias(&space, targets, direction_for(method), &config)
                    .map_err(|source| AuditError::Debias { condition, source })?;
                if options.renormalize_debiased {
                    out.normalize()?
                } else {
                    out
                }
            }
        };
        let means = match (condition, options.means_source) {
            (Condition::Baseline, _) | (_, MeansSource::Baseline) => Ok(baseline_means.clone()),
            (_, MeansSource::Recompute) => TargetMeans::compute(&evaluated, targets),
        };
        per_condition.push((condition, evaluated, means));
    }

    let mut cells = Vec::new();
    for category in &lexicon.categories {
        for metric in Metric::for_kind(category.kind()) {
            for (condition, evaluated, means) in &per_condition {
                let outcome = means
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|m| evaluate(evaluated, m, category, metric, &metric_options));
                let outcome = match outcome {
                    Ok(scores) => CellOutcome::Scored { scores },
                    Err(e) => CellOutcome::Skipped {
                        reason: e.to_string(),
                    },
                };
                cells.push(Cell {
                    condition: *condition,
                    metric,
                    category: category.name.clone(),
                    outcome,
                });
            }
        }
    }

    let provenance = Provenance {
        embeddings: EmbeddingsInfo {
            path: None,
            retained_words: raw.len(),
            dim: raw.dim(),
            content_sha256: raw.content_hash(),
            normalized: space.is_normalized(),
            load: None,
        },
        lexicon: LexiconInfo {
            path: None,
            sha256: None,
            language: lexicon.language().to_owned(),
            n_target_pairs: targets.len(),
            categories: lexicon
                .categories
                .iter()
                .map(|c| CategorySummary {
                    name: c.name.clone(),
                    kind: c.kind(),
                    size: c.len(),
                })
                .collect(),
        },
        options: *options,
        coverage,
        directions: directions
            .iter()
            .map(|d| DirectionInfo {
                method: d.method,
                n_pairs_used: d.n_pairs_used,
                orientation_check: d.orientation_check,
                skipped_pairs: d.skipped_pairs.clone(),
                vector: options.dump_directions.then(|| d.as_slice().to_vec()),
            })
            .collect(),
        warnings,
    };

    Ok(BiasReport {
        schema_version: REPORT_SCHEMA_VERSION,
        provenance,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::parse_lexicon;

    fn tiny() -> (EmbeddingSpace, Lexicon) {
        let space = EmbeddingSpace::from_entries(
            3,
            [
                ("m1".into(), vec![1.0, 0.2, 0.1]),
                ("f1".into(), vec![-0.8, 0.3, 0.2]),
                ("m2".into(), vec![0.9, -0.1, 0.5]),
                ("f2".into(), vec![-1.0, 0.1, 0.4]),
                ("a".into(), vec![0.5, 0.9, -0.3]),
                ("b".into(), vec![-0.2, 0.4, 1.0]),
            ],
        )
        .unwrap();
        let lexicon = parse_lexicon(
            r#"{"language": "xx", "target_pairs": [["m1","f1"],["m2","f2"]],
                "categories": [{"name": "n", "kind": "neutral", "words": ["a","b"]}]}"#,
        )
        .unwrap();
        (space, lexicon)
    }

    #[test]
    fn grid_has_ten_cells() {
        let (space, lexicon) = tiny();
        let report = audit_space(&space, &lexicon, &AuditOptions::default()).unwrap();
        assert_eq!(report.cells.len(), 10);
        for c in Condition::ALL {
            for m in [Metric::EctNeutral, Metric::RndNeutral] {
                assert!(report.cell(c, m, "n").is_some());
            }
        }
        assert_eq!(report.provenance.directions.len(), 2);
        assert!(report
            .provenance
            .directions
            .iter()
            .all(|d| d.vector.is_none()));
    }

    #[test]
    fn invalid_floor() {
        let (space, lexicon) = tiny();
        let options = AuditOptions {
            coverage_floor: 1.5,
            ..AuditOptions::default()
        };
        assert!(matches!(
            audit_space(&space, &lexicon, &options),
            Err(AuditError::InvalidConfig(_))
        ));
    }

    #[test]
    fn coverage_failure_lists_oov() {
        let (space, _) = tiny();
        let lexicon = parse_lexicon(
            r#"{"language": "xx", "target_pairs": [["m1","f1"],["m2","f2"]],
                "categories": [{"name": "n", "kind": "neutral", "words": ["a","x","y"]}]}"#,
        )
        .unwrap();
        let err = audit_space(&space, &lexicon, &AuditOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, AuditError::CoverageBelowFloor { .. }));
        assert!(msg.contains("n: 1/3"), "{msg}");
        assert!(msg.contains("x, y"), "{msg}");
    }

    #[test]
    fn too_few_words_becomes_skipped_cell() {
        let (space, _) = tiny();
        let lexicon = parse_lexicon(
            r#"{"language": "xx", "target_pairs": [["m1","f1"],["m2","f2"]],
                "categories": [{"name": "n", "kind": "neutral", "words": ["a","zz"]}]}"#,
        )
        .unwrap();
        let report = audit_space(&space, &lexicon, &AuditOptions::default()).unwrap();
        let ect = report
            .cell(Condition::Baseline, Metric::EctNeutral, "n")
            .unwrap();
        assert!(
            matches!(&ect.outcome, CellOutcome::Skipped { reason } if reason.contains("at least 2"))
        );
        let rnd = report
            .cell(Condition::Baseline, Metric::RndNeutral, "n")
            .unwrap();
        assert_eq!(rnd.scores().unwrap().n_skipped, 1);
    }

    #[test]
    fn dump_directions_includes_vectors() {
        let (space, lexicon) = tiny();
        let options = AuditOptions {
            dump_directions: true,
            ..AuditOptions::default()
        };
        let report = audit_space(&space, &lexicon, &options).unwrap();
        assert!(report
            .provenance
            .directions
            .iter()
            .all(|d| d.vector.as_ref().map(Vec::len) == Some(3)));
    }
}
