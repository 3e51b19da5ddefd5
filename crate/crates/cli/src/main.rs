//! `genbias`: audit, debias and coverage checks for word-embedding gender bias.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Warnings go to stderr;
//! stdout carries only the requested artifact.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use genbias::audit::{render_report, MeansSource, ReportFormat};
use genbias::debias::{debias, DebiasConfig, DebiasMethod, MuMode};
use genbias::embedding::{load_vec_with_stats, save_vec, EmbeddingSpace};
use genbias::lexicon::{load_lexicon, validate_coverage, CoverageReport, GenderPair, Lexicon};
use genbias::subspace::{gender_direction, DirectionOptions, GenderDirection, SubspaceMethod};
use genbias::{run_audit, AuditConfig, AuditOptions};

#[derive(Parser)]
#[command(
    name = "genbias",
    version,
    about = "Gender-bias audit for static word embeddings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full baseline / projection / partial projection grid.
    Audit(AuditArgs),
    /// Debias an embedding space and write it as a .vec file.
    Debias(DebiasArgs),
    /// Report lexicon coverage against an embedding file.
    Coverage(InputArgs),
    /// Print a gender direction as JSON.
    DumpDirection(DumpArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Word vectors in .vec text format.
    #[arg(long, value_name = "PATH")]
    embeddings: PathBuf,
    /// Lexicon JSON document.
    #[arg(long, value_name = "PATH")]
    lexicon: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Use raw vectors instead of unit-normalizing at load time.
    #[arg(long)]
    no_normalize: bool,
    /// Minimum in-vocabulary fraction per category.
    #[arg(long, value_name = "F", default_value_t = genbias::metrics::DEFAULT_COVERAGE_FLOOR)]
    coverage_floor: f64,
    /// What partial projection adds back: the full mean vector, or only its
    /// component along the gender direction.
    #[arg(long, value_enum, default_value_t = MuArg::Full)]
    mu_mode: MuArg,
    /// Leave the target-pair words untouched when debiasing.
    #[arg(long)]
    exclude_targets: bool,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Show ECT and RND-n as percentages in text output.
    #[arg(long)]
    percent: bool,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Evaluate debiased spaces with the baseline target means.
    #[arg(long)]
    baseline_means: bool,
    /// Re-normalize debiased spaces before scoring.
    #[arg(long)]
    renormalize_debiased: bool,
    /// Center columns before extracting gender directions.
    #[arg(long)]
    center: bool,
    /// Include full direction vectors in the report provenance.
    #[arg(long)]
    dump_directions: bool,
}

#[derive(Args)]
struct DebiasArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, value_enum)]
    subspace: SubspaceArg,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = MuArg::Full)]
    mu_mode: MuArg,
    #[arg(long)]
    exclude_targets: bool,
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    center: bool,
    /// Debias the whole vocabulary instead of only the lexicon words.
    #[arg(long)]
    all_words: bool,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    subspace: SubspaceArg,
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    center: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MuArg {
    Full,
    Along,
}

impl From<MuArg> for MuMode {
    fn from(m: MuArg) -> Self {
        match m {
            MuArg::Full => MuMode::FullVector,
            MuArg::Along => MuMode::AlongDirection,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => ReportFormat::Text,
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Projection,
    Partial,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubspaceArg {
    Pca,
    Ripa,
}

impl From<SubspaceArg> for SubspaceMethod {
    fn from(s: SubspaceArg) -> Self {
        match s {
            SubspaceArg::Pca => SubspaceMethod::Pca,
            SubspaceArg::Ripa => SubspaceMethod::Ripa,
        }
    }
}

enum Failure {
    Usage(String),
    Data(String),
}

type CmdResult = Result<(), Failure>;

fn data<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Data(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Audit(args) => cmd_audit(args),
        Command::Debias(args) => cmd_debias(args),
        Command::Coverage(args) => cmd_coverage(args),
        Command::DumpDirection(args) => cmd_dump_direction(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

fn cmd_audit(args: AuditArgs) -> CmdResult {
    if !(0.0..=1.0).contains(&args.coverage_floor) {
        return Err(Failure::Usage(format!(
            "--coverage-floor must be within [0, 1], got {}",
            args.coverage_floor
        )));
    }
    let config = AuditConfig {
        embeddings: args.input.embeddings,
        lexicon: args.input.lexicon,
        options: AuditOptions {
            normalize: !args.no_normalize,
            coverage_floor: args.coverage_floor,
            mu_mode: args.mu_mode.into(),
            exclude_targets: args.exclude_targets,
            means_source: if args.baseline_means {
                MeansSource::Baseline
            } else {
                MeansSource::Recompute
            },
            renormalize_debiased: args.renormalize_debiased,
            center_directions: args.center,
            dump_directions: args.dump_directions,
        },
        format: args.format.into(),
        percent: args.percent,
    };
    let report = run_audit(&config).map_err(data)?;
    for w in &report.provenance.warnings {
        warn(w);
    }
    let rendered = render_report(&report, config.format, config.percent).map_err(data)?;
    emit(&rendered, args.out.as_deref())
}

fn emit(text: &str, out: Option<&Path>) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| data(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Inputs {
    lexicon: Lexicon,
    space: EmbeddingSpace,
}

fn load_inputs(input: &InputArgs, all_words: bool, normalize: bool) -> Result<Inputs, Failure> {
    let lexicon = load_lexicon(&input.lexicon).map_err(data)?;
    let filter: Option<HashSet<String>> = (!all_words).then(|| lexicon.vocabulary());
    let (space, stats) = load_vec_with_stats(&input.embeddings, filter.as_ref()).map_err(data)?;
    for w in &stats.duplicate_words {
        warn(&format!("duplicate embedding line for {w:?} ignored"));
    }
    let space = if normalize {
        space.normalize().map_err(data)?
    } else {
        space
    };
    Ok(Inputs { lexicon, space })
}

fn direction(
    inputs: &Inputs,
    subspace: SubspaceArg,
    center: bool,
) -> Result<GenderDirection, Failure> {
    let d = gender_direction(
        &inputs.space,
        &inputs.lexicon.targets,
        subspace.into(),
        DirectionOptions { center },
    )
    .map_err(data)?;
    for w in &d.warnings {
        warn(w);
    }
    Ok(d)
}

fn cmd_debias(args: DebiasArgs) -> CmdResult {
    let inputs = load_inputs(&args.input, args.all_words, !args.no_normalize)?;
    let dir = direction(&inputs, args.subspace, args.center)?;
    let config = DebiasConfig {
        method: match args.method {
            MethodArg::Projection => DebiasMethod::Projection,
            MethodArg::Partial => DebiasMethod::PartialProjection {
                mu_mode: args.mu_mode.into(),
            },
        },
        exclude_targets: args.exclude_targets,
    };
    let out = debias(&inputs.space, &inputs.lexicon.targets, &dir, &config).map_err(data)?;
    save_vec(&out, &args.out).map_err(|e| data(format!("{}: {e}", args.out.display())))?;
    println!(
        "{} direction: n_pairs_used={} orientation_check={}",
        dir.method, dir.n_pairs_used, dir.orientation_check
    );
    println!("wrote {} vectors to {}", out.len(), args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct DirectionDump<'a> {
    method: SubspaceMethod,
    n_pairs_used: usize,
    orientation_check: f64,
    skipped_pairs: &'a [GenderPair],
    vector: &'a [f64],
}

fn cmd_dump_direction(args: DumpArgs) -> CmdResult {
    let inputs = load_inputs(&args.input, false, !args.no_normalize)?;
    let d = direction(&inputs, args.subspace, args.center)?;
    let dump = DirectionDump {
        method: d.method,
        n_pairs_used: d.n_pairs_used,
        orientation_check: d.orientation_check,
        skipped_pairs: &d.skipped_pairs,
        vector: d.as_slice(),
    };
    let json = serde_json::to_string_pretty(&dump).map_err(data)?;
    println!("{json}");
    Ok(())
}

fn cmd_coverage(args: InputArgs) -> CmdResult {
    let lexicon = load_lexicon(&args.lexicon).map_err(data)?;
    let filter = lexicon.vocabulary();
    // Coverage is informational: a file without any lexicon word is reported,
    // not rejected.
    let space = match load_vec_with_stats(&args.embeddings, Some(&filter)) {
        Ok((space, _)) => space,
        Err(genbias::embedding::EmbeddingError::NoWordsRetained) => {
            empty_space_like(&args.embeddings).map_err(data)?
        }
        Err(e) => return Err(data(e)),
    };
    print!("{}", coverage_table(&validate_coverage(&lexicon, &space)));
    Ok(())
}

fn empty_space_like(path: &Path) -> Result<EmbeddingSpace, Box<dyn std::error::Error>> {
    let mut header = String::new();
    BufReader::new(fs::File::open(path)?).read_line(&mut header)?;
    let dim: usize = header
        .split(' ')
        .nth(1)
        .and_then(|d| d.trim().parse().ok())
        .ok_or("malformed header")?;
    Ok(EmbeddingSpace::from_entries(dim, std::iter::empty())?)
}

fn coverage_table(report: &CoverageReport) -> String {
    let mut out = format!(
        "{:<24} {:<15} {:>11} {:>6}  OOV\n",
        "category", "kind", "found/total", "ratio"
    );
    for c in std::iter::once(&report.targets).chain(&report.categories) {
        let oov: Vec<String> = c.oov.iter().map(ToString::to_string).collect();
        out.push_str(&format!(
            "{:<24} {:<15} {:>11} {:>6.2}  {}\n",
            c.name,
            c.kind.to_string(),
            format!("{}/{}", c.found, c.total),
            c.ratio(),
            oov.join(" ")
        ));
    }
    out.push_str(&format!("overall {:.2}\n", report.overall));
    out
}
