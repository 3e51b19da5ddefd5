//! Gender-bias audit and mitigation for static word embeddings of
//! grammatically gendered languages.
//!
//! The crate measures how strongly attribute words (emotions, occupations)
//! associate with masculine versus feminine seed words, extracts a gender
//! direction from masculine/feminine target pairs, and removes or rebalances
//! that direction:
//!
//! * [`embedding`]: `.vec` loading/saving and the [`EmbeddingSpace`] map.
//! * [`lexicon`]: target pairs and attribute categories, coverage checks.
//! * [`numerics`]: cosine, means, first principal component, Spearman.
//! * [`subspace`]: gender direction by pair differences or pair deviations.
//! * [`metrics`]: ECT and RND for neutral words and gendered pairs.
//! * [`debias`]: projection and partial projection.
//! * [`audit`]: the baseline/projection/partial grid and its reports.
//!
//! The guide in `book/` walks through each concept with runnable snippets.

pub mod audit;
pub mod debias;
pub mod embedding;
pub mod lexicon;
pub mod metrics;
pub mod numerics;
pub mod subspace;

pub use audit::{audit_space, run_audit, AuditConfig, AuditOptions, BiasReport, Condition};
pub use debias::{compute_mu, partial_project, project_out, DebiasConfig, DebiasMethod, MuMode};
pub use embedding::{load_vec, save_vec, EmbeddingSpace};
pub use lexicon::{
    load_lexicon, validate_coverage, AttributeCategory, GenderPair, Lexicon, TargetPairSet,
};
pub use metrics::{BiasScores, Metric, MetricOptions};
pub use subspace::{pca_direction, ripa_direction, GenderDirection, SubspaceMethod};

// Compiles the guide's code blocks as doctests so they stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/embeddings.md")]
    mod embeddings {}
    #[doc = include_str!("../../../book/src/lexicon.md")]
    mod lexicon {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/subspace.md")]
    mod subspace {}
    #[doc = include_str!("../../../book/src/debiasing.md")]
    mod debiasing {}
    #[doc = include_str!("../../../book/src/audit.md")]
    mod audit {}
    #[doc = include_str!("../../../book/src/report-schema.md")]
    mod report_schema {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
