use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use super::{BiasReport, Cell, CellOutcome, Condition};
use crate::metrics::Metric;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("unknown report format {0:?} (expected text, csv or json)")]
    UnknownFormat(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(RenderError::UnknownFormat(s.to_owned())),
        }
    }
}

/// Table rendering of a value: RND as a magnitude, scaled ×100 in percent
/// mode except RND-g, which stays a raw magnitude.
pub fn display_value(metric: Metric, value: f64, percent: bool) -> String {
    let v = if metric.is_ect() { value } else { value.abs() };
    match (percent, metric) {
        (true, Metric::RndGendered) => format!("{v:.2}"),
        (true, _) => format!("{:.1}", 100.0 * v),
        (false, _) => format!("{v:.4}"),
    }
}

/// Renders the report. `percent` only affects the text tables; csv and json
/// always carry raw signed values.
pub fn render_report(
    report: &BiasReport,
    format: ReportFormat,
    percent: bool,
) -> Result<String, RenderError> {
    match format {
        ReportFormat::Text => Ok(render_text(report, percent)),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
    }
}

const COLUMN_TITLES: [&str; 5] = [
    "Baseline",
    "Proj PCA",
    "Proj RIPA",
    "Partial PCA",
    "Partial RIPA",
];

fn render_text(report: &BiasReport, percent: bool) -> String {
    let prov = &report.provenance;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Gender bias audit: language {}, {} words retained, dim {}, {}",
        prov.lexicon.language,
        prov.embeddings.retained_words,
        prov.embeddings.dim,
        if prov.embeddings.normalized {
            "unit-normalized"
        } else {
            "raw vectors"
        }
    );
    let dirs: Vec<String> = prov
        .directions
        .iter()
        .map(|d| {
            format!(
                "{} ({} pairs, orientation {:.4})",
                d.method.as_str().to_uppercase(),
                d.n_pairs_used,
                d.orientation_check
            )
        })
        .collect();
    let _ = writeln!(out, "Directions: {}", dirs.join(", "));
    let _ = writeln!(
        out,
        "Partial projection mu: {}; target means: {}",
        prov.options.mu_mode, prov.options.means_source
    );
    if percent {
        let _ = writeln!(out, "Values in %, except RND-g. RND shown as magnitude.");
    } else {
        let _ = writeln!(
            out,
            "RND shown as magnitude; csv/json carry the signed value."
        );
    }

    let mut notes: Vec<String> = Vec::new();
    for category in report.categories() {
        let coverage = prov.coverage.category(&category.name);
        let _ = writeln!(out);
        let _ = write!(out, "[{}] {}", category.name, category.kind);
        if let Some(c) = coverage {
            let _ = write!(out, ", {}/{} in vocabulary", c.found, c.total);
        }
        let _ = writeln!(out);
        let _ = write!(out, "{:<8}", "Metric");
        for t in COLUMN_TITLES {
            let _ = write!(out, " {t:>12}");
        }
        let _ = writeln!(out);
        for metric in Metric::for_kind(category.kind) {
            let _ = write!(out, "{:<8}", metric.as_str());
            for condition in Condition::ALL {
                let text = match report.cell(condition, metric, &category.name) {
                    Some(Cell {
                        outcome: CellOutcome::Scored { scores },
                        ..
                    }) => display_value(metric, scores.value, percent),
                    Some(Cell {
                        outcome: CellOutcome::Skipped { reason },
                        ..
                    }) => {
                        notes.push(format!(
                            "{} {} {}: {reason}",
                            category.name, metric, condition
                        ));
                        format!("skip[{}]", notes.len())
                    }
                    None => "-".to_owned(),
                };
                let _ = write!(out, " {text:>12}");
            }
            let _ = writeln!(out);
        }
    }
    if !notes.is_empty() {
        let _ = writeln!(out);
        for (i, n) in notes.iter().enumerate() {
            let _ = writeln!(out, "[{}] {n}", i + 1);
        }
    }
    out
}

#[derive(Serialize)]
struct CsvRow<'a> {
    condition: &'a str,
    category: &'a str,
    kind: String,
    metric: &'a str,
    status: &'a str,
    value: Option<f64>,
    abs_value: Option<f64>,
    n_used: Option<usize>,
    n_skipped: Option<usize>,
    reason: Option<&'a str>,
}

fn render_csv(report: &BiasReport) -> Result<String, RenderError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for cell in &report.cells {
        let kind = cell.metric.kind().to_string();
        let row = match &cell.outcome {
            CellOutcome::Scored { scores } => CsvRow {
                condition: cell.condition.as_str(),
                category: &cell.category,
                kind,
                metric: cell.metric.as_str(),
                status: "scored",
                value: Some(scores.value),
                abs_value: Some(scores.value.abs()),
                n_used: Some(scores.n_used),
                n_skipped: Some(scores.n_skipped),
                reason: None,
            },
            CellOutcome::Skipped { reason } => CsvRow {
                condition: cell.condition.as_str(),
                category: &cell.category,
                kind,
                metric: cell.metric.as_str(),
                status: "skipped",
                value: None,
                abs_value: None,
                n_used: None,
                n_skipped: None,
                reason: Some(reason),
            },
        };
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
