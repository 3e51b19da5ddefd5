//! Target gender pairs and attribute categories.
//!
//! A lexicon is a UTF-8 JSON document:
//!
//! ```json
//! {
//!   "language": "hi",
//!   "target_pairs": [["राजा", "रानी"], ["लड़का", "लड़की"]],
//!   "categories": [
//!     { "name": "anger", "kind": "neutral", "words": ["गुस्सा", "क्रोध"] },
//!     { "name": "gendered_occupations", "kind": "gendered_pairs",
//!       "words": [["अभिनेता", "अभिनेत्री"]] }
//!   ]
//! }
//! ```
//!
//! Pairs are always `[masculine, feminine]`. Word order in the file is the
//! evaluation order.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingSpace;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("target pair set is empty")]
    EmptyTargets,
    #[error("need at least {needed} target pairs, found {found}")]
    TooFewTargetPairs { needed: usize, found: usize },
    #[error("unknown category kind {0:?} (expected \"neutral\" or \"gendered_pairs\")")]
    UnknownKind(String),
    #[error("category {category:?}: {reason}")]
    InvalidCategory { category: String, reason: String },
    #[error("duplicate target pair {0}")]
    DuplicateTargetPair(GenderPair),
    #[error("target pair has an empty member")]
    EmptyTargetWord,
}

/// A `(masculine, feminine)` word pair. Serialized as a two-element array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(String, String)", into = "(String, String)")]
pub struct GenderPair {
    pub masculine: String,
    pub feminine: String,
}

impl GenderPair {
    pub fn new(masculine: impl Into<String>, feminine: impl Into<String>) -> Self {
        Self {
            masculine: masculine.into(),
            feminine: feminine.into(),
        }
    }

    /// The same pair with roles exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.feminine.clone(), self.masculine.clone())
    }

    /// Both member vectors, if both are in the space.
    pub fn lookup<'a>(&self, space: &'a EmbeddingSpace) -> Option<(&'a [f64], &'a [f64])> {
        Some((space.get(&self.masculine)?, space.get(&self.feminine)?))
    }
}

impl From<(String, String)> for GenderPair {
    fn from((m, f): (String, String)) -> Self {
        Self::new(m, f)
    }
}

impl From<GenderPair> for (String, String) {
    fn from(p: GenderPair) -> Self {
        (p.masculine, p.feminine)
    }
}

impl fmt::Display for GenderPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.masculine, self.feminine)
    }
}

/// Seed pairs defining the gender concept, masculine member first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetPairSet {
    pairs: Vec<GenderPair>,
    language: String,
}

impl TargetPairSet {
    /// Minimum number of pairs a lexicon file must carry.
    pub const MIN_PAIRS: usize = 2;

    /// Programmatic construction accepts a single pair; [`load_lexicon`]
    /// additionally enforces [`Self::MIN_PAIRS`].
    pub fn new(language: impl Into<String>, pairs: Vec<GenderPair>) -> Result<Self, LexiconError> {
        if pairs.is_empty() {
            return Err(LexiconError::EmptyTargets);
        }
        let mut seen = HashSet::new();
        for p in &pairs {
            if p.masculine.is_empty() || p.feminine.is_empty() {
                return Err(LexiconError::EmptyTargetWord);
            }
            if !seen.insert(p) {
                return Err(LexiconError::DuplicateTargetPair(p.clone()));
            }
        }
        Ok(Self {
            pairs,
            language: language.into(),
        })
    }

    pub fn pairs(&self) -> &[GenderPair] {
        &self.pairs
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Every pair with masculine and feminine roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            pairs: self.pairs.iter().map(GenderPair::swapped).collect(),
            language: self.language.clone(),
        }
    }

    /// Splits pairs into those with both members in `space` and the rest.
    pub fn resolve<'s>(&self, space: &'s EmbeddingSpace) -> ResolvedPairs<'s> {
        let mut resolved = ResolvedPairs::default();
        for p in &self.pairs {
            match p.lookup(space) {
                Some((m, f)) => resolved.found.push(ResolvedPair {
                    pair: p.clone(),
                    masculine: m,
                    feminine: f,
                }),
                None => resolved.missing.push(p.clone()),
            }
        }
        resolved
    }

    /// Both members of every pair.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.pairs
            .iter()
            .flat_map(|p| [p.masculine.as_str(), p.feminine.as_str()])
    }
}

#[derive(Debug, Clone)]
pub struct ResolvedPair<'s> {
    pub pair: GenderPair,
    pub masculine: &'s [f64],
    pub feminine: &'s [f64],
}

#[derive(Debug, Clone, Default)]
pub struct ResolvedPairs<'s> {
    pub found: Vec<ResolvedPair<'s>>,
    pub missing: Vec<GenderPair>,
}

impl<'s> ResolvedPairs<'s> {
    pub fn masculine(&self) -> Vec<&'s [f64]> {
        self.found.iter().map(|p| p.masculine).collect()
    }

    pub fn feminine(&self) -> Vec<&'s [f64]> {
        self.found.iter().map(|p| p.feminine).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryKind {
    Neutral,
    GenderedPairs,
}

impl fmt::Display for CategoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CategoryKind::Neutral => "neutral",
            CategoryKind::GenderedPairs => "gendered_pairs",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AttributeWords {
    Neutral(Vec<String>),
    GenderedPairs(Vec<GenderPair>),
}

/// A named group of attribute words: a plain list (emotions, neutral
/// occupations) or a list of masculine/feminine pairs (gendered occupations).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeCategory {
    pub name: String,
    pub words: AttributeWords,
}

impl AttributeCategory {
    pub fn neutral(name: impl Into<String>, words: Vec<String>) -> Result<Self, LexiconError> {
        let name = name.into();
        let invalid = |reason: &str| LexiconError::InvalidCategory {
            category: name.clone(),
            reason: reason.to_owned(),
        };
        if words.is_empty() {
            return Err(invalid("word list is empty"));
        }
        if words.iter().any(String::is_empty) {
            return Err(invalid("empty word"));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = words.iter().find(|w| !seen.insert(*w)) {
            return Err(invalid(&format!("duplicate word {dup:?}")));
        }
        Ok(Self {
            name,
            words: AttributeWords::Neutral(words),
        })
    }

    pub fn gendered(name: impl Into<String>, pairs: Vec<GenderPair>) -> Result<Self, LexiconError> {
        let name = name.into();
        let invalid = |reason: &str| LexiconError::InvalidCategory {
            category: name.clone(),
            reason: reason.to_owned(),
        };
        if pairs.is_empty() {
            return Err(invalid("pair list is empty"));
        }
        if pairs
            .iter()
            .any(|p| p.masculine.is_empty() || p.feminine.is_empty())
        {
            return Err(invalid("empty word"));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = pairs.iter().find(|p| !seen.insert(*p)) {
            return Err(invalid(&format!("duplicate pair {dup}")));
        }
        Ok(Self {
            name,
            words: AttributeWords::GenderedPairs(pairs),
        })
    }

    pub fn kind(&self) -> CategoryKind {
        match self.words {
            AttributeWords::Neutral(_) => CategoryKind::Neutral,
            AttributeWords::GenderedPairs(_) => CategoryKind::GenderedPairs,
        }
    }

    /// Number of evaluable items: words for neutral, pairs for gendered.
    pub fn len(&self) -> usize {
        match &self.words {
            AttributeWords::Neutral(w) => w.len(),
            AttributeWords::GenderedPairs(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Gendered pairs with roles exchanged; neutral categories are unchanged.
    pub fn swapped(&self) -> Self {
        match &self.words {
            AttributeWords::Neutral(_) => self.clone(),
            AttributeWords::GenderedPairs(p) => Self {
                name: self.name.clone(),
                words: AttributeWords::GenderedPairs(p.iter().map(GenderPair::swapped).collect()),
            },
        }
    }

    fn words(&self) -> Box<dyn Iterator<Item = &str> + '_> {
        match &self.words {
            AttributeWords::Neutral(w) => Box::new(w.iter().map(String::as_str)),
            AttributeWords::GenderedPairs(p) => Box::new(
                p.iter()
                    .flat_map(|p| [p.masculine.as_str(), p.feminine.as_str()]),
            ),
        }
    }
}

/// Target pairs plus attribute categories for one language.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lexicon {
    pub targets: TargetPairSet,
    pub categories: Vec<AttributeCategory>,
}

impl Lexicon {
    pub fn language(&self) -> &str {
        self.targets.language()
    }

    /// Every word referenced anywhere in the lexicon; the filter for loading.
    pub fn vocabulary(&self) -> HashSet<String> {
        self.targets
            .words()
            .chain(self.categories.iter().flat_map(|c| c.words()))
            .map(str::to_owned)
            .collect()
    }

    pub fn category(&self, name: &str) -> Option<&AttributeCategory> {
        self.categories.iter().find(|c| c.name == name)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLexicon {
    language: String,
    target_pairs: Vec<Vec<String>>,
    categories: Vec<RawCategory>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCategory {
    name: String,
    kind: String,
    words: Vec<RawWord>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawWord {
    Word(String),
    Pair(Vec<String>),
}

fn to_pair(items: Vec<String>, context: &str) -> Result<GenderPair, LexiconError> {
    match <[String; 2]>::try_from(items) {
        Ok([m, f]) => Ok(GenderPair::new(m, f)),
        Err(items) => Err(LexiconError::Schema(format!(
            "{context}: expected a [masculine, feminine] pair, found {} element(s)",
            items.len()
        ))),
    }
}

/// Parses a lexicon document from a string.
pub fn parse_lexicon(text: &str) -> Result<Lexicon, LexiconError> {
    let raw: RawLexicon =
        serde_json::from_str(text).map_err(|e| LexiconError::Schema(e.to_string()))?;

    let pairs = raw
        .target_pairs
        .into_iter()
        .map(|p| to_pair(p, "target_pairs"))
        .collect::<Result<Vec<_>, _>>()?;
    if pairs.len() < TargetPairSet::MIN_PAIRS {
        if pairs.is_empty() {
            return Err(LexiconError::EmptyTargets);
        }
        return Err(LexiconError::TooFewTargetPairs {
            needed: TargetPairSet::MIN_PAIRS,
            found: pairs.len(),
        });
    }
    let targets = TargetPairSet::new(raw.language, pairs)?;

    let mut names = HashSet::new();
    let mut categories = Vec::with_capacity(raw.categories.len());
    for c in raw.categories {
        if c.name.is_empty() {
            return Err(LexiconError::Schema("category with empty name".into()));
        }
        if !names.insert(c.name.clone()) {
            return Err(LexiconError::Schema(format!(
                "duplicate category {:?}",
                c.name
            )));
        }
        let context = format!("category {:?}", c.name);
        let category = match c.kind.as_str() {
            "neutral" => {
                let words = c
                    .words
                    .into_iter()
                    .map(|w| match w {
                        RawWord::Word(w) => Ok(w),
                        RawWord::Pair(_) => Err(LexiconError::Schema(format!(
                            "{context}: neutral categories hold plain words, found a list"
                        ))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                AttributeCategory::neutral(c.name, words)?
            }
            "gendered_pairs" => {
                let pairs = c
                    .words
                    .into_iter()
                    .map(|w| match w {
                        RawWord::Pair(p) => to_pair(p, &context),
                        RawWord::Word(w) => Err(LexiconError::Schema(format!(
                            "{context}: expected a [masculine, feminine] pair, found {w:?}"
                        ))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                AttributeCategory::gendered(c.name, pairs)?
            }
            other => return Err(LexiconError::UnknownKind(other.to_owned())),
        };
        categories.push(category);
    }

    Ok(Lexicon {
        targets,
        categories,
    })
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| LexiconError::Schema("document is not valid UTF-8".into()))?;
    parse_lexicon(&text)
}

/// Out-of-vocabulary entry: a word, or a pair with at least one member missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttributeItem {
    Word(String),
    Pair(GenderPair),
}

impl fmt::Display for AttributeItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeItem::Word(w) => f.write_str(w),
            AttributeItem::Pair(p) => p.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCoverage {
    pub name: String,
    pub kind: CategoryKind,
    pub total: usize,
    pub found: usize,
    pub oov: Vec<AttributeItem>,
}

impl CategoryCoverage {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.found as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Coverage of the target pairs (a pair counts only if both members are found).
    pub targets: CategoryCoverage,
    pub categories: Vec<CategoryCoverage>,
    /// Found items over total items, targets included.
    pub overall: f64,
}

impl CoverageReport {
    pub fn category(&self, name: &str) -> Option<&CategoryCoverage> {
        self.categories.iter().find(|c| c.name == name)
    }

    /// Categories whose coverage ratio is below `floor`.
    pub fn below_floor(&self, floor: f64) -> Vec<&CategoryCoverage> {
        self.categories
            .iter()
            .filter(|c| c.ratio() < floor)
            .collect()
    }
}

fn pair_coverage(name: &str, pairs: &[GenderPair], space: &EmbeddingSpace) -> CategoryCoverage {
    let oov: Vec<AttributeItem> = pairs
        .iter()
        .filter(|p| p.lookup(space).is_none())
        .cloned()
        .map(AttributeItem::Pair)
        .collect();
    CategoryCoverage {
        name: name.to_owned(),
        kind: CategoryKind::GenderedPairs,
        total: pairs.len(),
        found: pairs.len() - oov.len(),
        oov,
    }
}

/// Checks every lexicon entry against the space by exact lookup.
pub fn validate_coverage(lexicon: &Lexicon, space: &EmbeddingSpace) -> CoverageReport {
    let targets = pair_coverage("target_pairs", lexicon.targets.pairs(), space);
    let categories: Vec<CategoryCoverage> = lexicon
        .categories
        .iter()
        .map(|c| match &c.words {
            AttributeWords::GenderedPairs(p) => pair_coverage(&c.name, p, space),
            AttributeWords::Neutral(words) => {
                let oov: Vec<AttributeItem> = words
                    .iter()
                    .filter(|w| !space.contains(w))
                    .cloned()
                    .map(AttributeItem::Word)
                    .collect();
                CategoryCoverage {
                    name: c.name.clone(),
                    kind: CategoryKind::Neutral,
                    total: words.len(),
                    found: words.len() - oov.len(),
                    oov,
                }
            }
        })
        .collect();

    let (found, total) = std::iter::once(&targets)
        .chain(&categories)
        .fold((0, 0), |(f, t), c| (f + c.found, t + c.total));
    CoverageReport {
        overall: if total == 0 {
            1.0
        } else {
            found as f64 / total as f64
        },
        targets,
        categories,
    }
}
