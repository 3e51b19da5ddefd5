//! Word-vector spaces and the text `.vec` format.
//!
//! A `.vec` file starts with a `<count> <dim>` header line followed by one
//! `<word> <f1> ... <f_dim>` line per word, fields separated by single spaces.
//! A single trailing space before the newline is tolerated because fastText
//! writes one; any other separator layout is rejected.
//!
//! ```
//! use genbias::embedding::read_vec;
//!
//! let text = "2 3\na 1 0 0\nb 0 1 0\n";
//! let space = read_vec(text.as_bytes(), None).unwrap();
//! assert_eq!(space.dim(), 3);
//! assert_eq!(space.get("b"), Some(&[0.0, 1.0, 0.0][..]));
//! ```

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::numerics::norm;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed header (expected `<count> <dim>`): {0:?}")]
    MalformedHeader(String),
    #[error("line {line}: expected {expected} components, found {found}")]
    WrongArity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: separators must be single spaces")]
    BadSeparator { line: usize },
    #[error("line {line}: component {column} is not a number: {value:?}")]
    NotANumber {
        line: usize,
        column: usize,
        value: String,
    },
    #[error("line {line}: non-finite component {column}")]
    NonFinite { line: usize, column: usize },
    #[error("line {line}: invalid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("line {line}: empty word")]
    EmptyWord { line: usize },
    #[error("no words retained")]
    NoWordsRetained,
    #[error("embedding space is empty")]
    EmptySpace,
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("word {word:?}: expected {expected} components, found {found}")]
    DimensionMismatch {
        word: String,
        expected: usize,
        found: usize,
    },
    #[error("word {0:?}: non-finite component")]
    NonFiniteVector(String),
    #[error("duplicate word {0:?}")]
    DuplicateWord(String),
    #[error("word {0:?} has a zero vector and cannot be normalized")]
    ZeroVector(String),
}

/// An immutable map from words to vectors of a fixed dimensionality.
/// Equality ignores insertion order.
#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    normalized: bool,
}

impl EmbeddingSpace {
    /// Builds a space from `(word, vector)` entries, checking every invariant.
    /// An empty entry list is allowed.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        let mut space = Self {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            normalized: false,
        };
        for (word, v) in entries {
            if word.is_empty() {
                return Err(EmbeddingError::EmptyWord { line: 0 });
            }
            if v.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    word,
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(EmbeddingError::NonFiniteVector(word));
            }
            if space.index.contains_key(&word) {
                return Err(EmbeddingError::DuplicateWord(word));
            }
            space.push(word, &v);
        }
        Ok(space)
    }

    fn push(&mut self, word: String, v: &[f64]) {
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(v);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Exact-match lookup. There is no subword fallback.
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.vector_at(i))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Words in insertion (file) order.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.data.chunks_exact(self.dim))
    }

    fn vector_at(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Unit-normalized copy. Fails on the first zero vector.
    pub fn normalize(&self) -> Result<Self, EmbeddingError> {
        let mut data = self.data.clone();
        for (word, v) in self.words.iter().zip(data.chunks_exact_mut(self.dim)) {
            let n = norm(v);
            if n == 0.0 {
                return Err(EmbeddingError::ZeroVector(word.clone()));
            }
            v.iter_mut().for_each(|x| *x /= n);
        }
        Ok(Self {
            data,
            normalized: true,
            ..self.clone()
        })
    }

    /// Copy with every vector passed through `f`. The normalized flag is
    /// cleared; transforms are not assumed to preserve norms.
    pub fn map_vectors<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&str, &[f64]) -> Vec<f64>,
    {
        let mut data = Vec::with_capacity(self.data.len());
        for (word, v) in self.iter() {
            let out = f(word, v);
            assert_eq!(out.len(), self.dim, "transform changed dimensionality");
            data.extend(out);
        }
        Self {
            data,
            normalized: false,
            ..self.clone()
        }
    }

    /// Hex SHA-256 over the sorted `(word, vector)` entries. Independent of
    /// insertion order and of the file the space came from.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        for i in self.sorted_indices() {
            let w = self.words[i].as_bytes();
            h.update((w.len() as u64).to_le_bytes());
            h.update(w);
            for x in self.vector_at(i) {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    fn sorted_indices(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.words.len()).collect();
        order.sort_by(|&a, &b| self.words[a].cmp(&self.words[b]));
        order
    }
}

impl PartialEq for EmbeddingSpace {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.normalized == other.normalized
            && self.len() == other.len()
            && self.iter().all(|(w, v)| other.get(w) == Some(v))
    }
}

/// Bookkeeping from a `.vec` read.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadStats {
    pub declared_count: usize,
    pub lines_read: usize,
    pub retained: usize,
    /// Later occurrences of an already-retained word; the first one wins.
    pub duplicate_lines: usize,
    pub duplicate_words: Vec<String>,
}

/// Reads a `.vec` stream. With a filter, only the listed words are parsed and
/// kept, so memory grows with the filter, not the file.
pub fn read_vec<R: BufRead>(
    reader: R,
    filter: Option<&HashSet<String>>,
) -> Result<EmbeddingSpace, EmbeddingError> {
    read_vec_with_stats(reader, filter).map(|(s, _)| s)
}

pub fn read_vec_with_stats<R: BufRead>(
    mut reader: R,
    filter: Option<&HashSet<String>>,
) -> Result<(EmbeddingSpace, LoadStats), EmbeddingError> {
    let mut buf = Vec::new();
    reader.read_until(b'\n', &mut buf)?;
    let header = std::str::from_utf8(&buf)
        .map_err(|_| EmbeddingError::InvalidUtf8 { line: 1 })?
        .trim_end_matches(['\n', '\r']);
    let (declared_count, dim) = parse_header(header)?;

    let mut space = EmbeddingSpace::from_entries(dim, std::iter::empty())?;
    let mut stats = LoadStats {
        declared_count,
        ..LoadStats::default()
    };
    let mut vector = Vec::with_capacity(dim);

    let mut line_no = 1;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = strip_line_end(&buf);
        if line.is_empty() {
            // a blank final line is just a trailing newline
            continue;
        }
        stats.lines_read += 1;

        let (word, rest) = split_word(line, line_no)?;
        let found = count_fields(rest, line_no)?;
        if found != dim {
            return Err(EmbeddingError::WrongArity {
                line: line_no,
                expected: dim,
                found,
            });
        }
        if let Some(f) = filter {
            if !f.contains(word) {
                continue;
            }
        }
        if space.contains(word) {
            stats.duplicate_lines += 1;
            stats.duplicate_words.push(word.to_owned());
            continue;
        }
        vector.clear();
        for (column, field) in rest.split(' ').enumerate() {
            let x: f64 = field.parse().map_err(|_| EmbeddingError::NotANumber {
                line: line_no,
                column: column + 1,
                value: field.to_owned(),
            })?;
            if !x.is_finite() {
                return Err(EmbeddingError::NonFinite {
                    line: line_no,
                    column: column + 1,
                });
            }
            vector.push(x);
        }
        space.push(word.to_owned(), &vector);
    }

    if space.is_empty() {
        return Err(EmbeddingError::NoWordsRetained);
    }
    stats.retained = space.len();
    Ok((space, stats))
}

pub fn load_vec(
    path: impl AsRef<Path>,
    filter: Option<&HashSet<String>>,
) -> Result<EmbeddingSpace, EmbeddingError> {
    load_vec_with_stats(path, filter).map(|(s, _)| s)
}

pub fn load_vec_with_stats(
    path: impl AsRef<Path>,
    filter: Option<&HashSet<String>>,
) -> Result<(EmbeddingSpace, LoadStats), EmbeddingError> {
    let file = File::open(path)?;
    read_vec_with_stats(BufReader::new(file), filter)
}

/// Writes `space` in `.vec` format, words sorted lexicographically. Values use
/// the shortest representation that parses back to the same `f64`.
pub fn write_vec<W: Write>(space: &EmbeddingSpace, mut w: W) -> Result<(), EmbeddingError> {
    if space.is_empty() {
        return Err(EmbeddingError::EmptySpace);
    }
    writeln!(w, "{} {}", space.len(), space.dim())?;
    for i in space.sorted_indices() {
        w.write_all(space.words[i].as_bytes())?;
        for &x in space.vector_at(i) {
            write_component(&mut w, x)?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_vec(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<(), EmbeddingError> {
    if space.is_empty() {
        return Err(EmbeddingError::EmptySpace);
    }
    let file = File::create(path)?;
    write_vec(space, BufWriter::new(file))
}

// Shortest round-trip representation; exponent form only where plain decimal
// notation would be long.
fn write_component<W: Write>(w: &mut W, x: f64) -> io::Result<()> {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        write!(w, " {x:e}")
    } else {
        write!(w, " {x}")
    }
}

fn parse_header(header: &str) -> Result<(usize, usize), EmbeddingError> {
    let bad = || EmbeddingError::MalformedHeader(header.to_owned());
    let header = header.strip_suffix(' ').unwrap_or(header);
    let mut parts = header.split(' ');
    let count = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let dim: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    if parts.next().is_some() || dim == 0 {
        return Err(bad());
    }
    Ok((count, dim))
}

fn strip_line_end(buf: &[u8]) -> &[u8] {
    let mut line = buf;
    if let Some(l) = line.strip_suffix(b"\n") {
        line = l;
    }
    if let Some(l) = line.strip_suffix(b"\r") {
        line = l;
    }
    line
}

fn split_word(line: &[u8], line_no: usize) -> Result<(&str, &str), EmbeddingError> {
    let line =
        std::str::from_utf8(line).map_err(|_| EmbeddingError::InvalidUtf8 { line: line_no })?;
    // fastText terminates each row with a space
    let line = line.strip_suffix(' ').unwrap_or(line);
    match line.split_once(' ') {
        Some(("", _)) => Err(EmbeddingError::EmptyWord { line: line_no }),
        Some((word, rest)) => Ok((word, rest)),
        None if line.is_empty() => Err(EmbeddingError::EmptyWord { line: line_no }),
        None => Ok((line, "")),
    }
}

fn count_fields(rest: &str, line_no: usize) -> Result<usize, EmbeddingError> {
    if rest.is_empty() {
        return Ok(0);
    }
    let mut n = 0;
    for field in rest.split(' ') {
        if field.is_empty() {
            return Err(EmbeddingError::BadSeparator { line: line_no });
        }
        n += 1;
    }
    Ok(n)
}
