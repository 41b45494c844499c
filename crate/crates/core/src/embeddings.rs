//! Dense word vectors: loading, cosine similarity and gloss-averaged sense
//! embeddings.
//!
//! The text format is the one used by word2vec and GloVe: an optional
//! `<vocab_size> <dim>` header, then one `word c1 c2 ... cn` line per word.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;
use std::str::FromStr;

use thiserror::Error;

use crate::taxonomy::{Pos, SynsetId, Taxonomy, TaxonomyError};

#[derive(Debug, Error, PartialEq)]
pub enum EmbeddingError {
    #[error("vector file is empty")]
    Empty,
    #[error("line {line}: expected {expected} components, found {found}")]
    Dimension {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: invalid component `{value}`")]
    NonNumeric {
        line: usize,
        column: usize,
        value: String,
    },
    #[error("header announces {announced} vectors, file has {found}")]
    VocabSize { announced: usize, found: usize },
    #[error("vector dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("`{0}` is out of vocabulary")]
    OutOfVocabulary(String),
    #[error("`{0}` has no sense with a resolvable gloss embedding")]
    NoSenseEmbedding(String),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Word vectors of a fixed dimensionality, in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSpace {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    normalized: bool,
    /// Repeated words dropped while loading (first occurrence wins).
    pub duplicates: usize,
}

impl VectorSpace {
    /// Builds a space from `(word, vector)` entries. Duplicate words keep the
    /// first vector.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut space = VectorSpace {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            normalized: false,
            duplicates: 0,
        };
        for (i, (word, v)) in entries.into_iter().enumerate() {
            if v.len() != dim {
                return Err(EmbeddingError::Dimension {
                    line: i + 1,
                    expected: dim,
                    found: v.len(),
                });
            }
            if let Some(pos) = v.iter().position(|x| !x.is_finite()) {
                return Err(EmbeddingError::NonNumeric {
                    line: i + 1,
                    column: pos + 2,
                    value: v[pos].to_string(),
                });
            }
            space.push(word, &v);
        }
        if space.words.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        Ok(space)
    }

    fn push(&mut self, word: String, v: &[f64]) {
        if self.index.contains_key(&word) {
            self.duplicates += 1;
            return;
        }
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

    /// Vocabulary in file order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major view of all vectors, `len() * dim()` values.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        self.normalized = false;
        &mut self.data
    }

    /// Scales every non-zero vector to unit length.
    pub fn normalize(&mut self) {
        for i in 0..self.words.len() {
            normalize_in_place(self.row_mut(i));
        }
        self.normalized = true;
    }

    pub(crate) fn set_normalized(&mut self, normalized: bool) {
        self.normalized = normalized;
    }

    /// Writes the space with a `<vocab_size> <dim>` header.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.words.len(), self.dim);
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for x in self.row(i) {
                let _ = write!(out, " {x:?}");
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn normalize_in_place(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Loads vectors in word2vec/GloVe text format.
pub fn load_vectors<R: Read>(mut source: R) -> Result<VectorSpace, EmbeddingError> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| EmbeddingError::Io(e.to_string()))?;
    text.parse()
}

impl FromStr for VectorSpace {
    type Err = EmbeddingError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .filter(|(_, l)| !l.trim().is_empty())
            .peekable();

        let mut header = None;
        if let Some(&(_, first)) = lines.peek() {
            let toks: Vec<&str> = first.split_whitespace().collect();
            if let [n, d] = toks[..] {
                if let (Ok(n), Ok(d)) = (n.parse::<usize>(), d.parse::<usize>()) {
                    header = Some((n, d));
                    lines.next();
                }
            }
        }

        let mut dim = header.map(|(_, d)| d);
        let mut space: Option<VectorSpace> = None;
        let mut rows = 0usize;
        let mut buf = Vec::new();
        for (lineno, line) in lines {
            let mut toks = line.split_whitespace();
            let word = toks.next().expect("non-blank line");
            buf.clear();
            for (k, tok) in toks.enumerate() {
                let x: f64 = tok
                    .parse()
                    .ok()
                    .filter(|x: &f64| x.is_finite())
                    .ok_or_else(|| EmbeddingError::NonNumeric {
                        line: lineno,
                        column: k + 2,
                        value: tok.to_string(),
                    })?;
                buf.push(x);
            }
            let expected = *dim.get_or_insert(buf.len());
            if buf.len() != expected || expected == 0 {
                return Err(EmbeddingError::Dimension {
                    line: lineno,
                    expected,
                    found: buf.len(),
                });
            }
            rows += 1;
            space
                .get_or_insert_with(|| VectorSpace {
                    dim: expected,
                    words: Vec::new(),
                    index: HashMap::new(),
                    data: Vec::new(),
                    normalized: false,
                    duplicates: 0,
                })
                .push(word.to_string(), &buf);
        }
        let space = space.ok_or(EmbeddingError::Empty)?;
        if let Some((announced, _)) = header {
            if announced != rows {
                return Err(EmbeddingError::VocabSize {
                    announced,
                    found: rows,
                });
            }
        }
        Ok(space)
    }
}

/// Cosine of two vectors, clamped to [-1, 1].
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimensionMismatch(u.len(), v.len()));
    }
    let (nu, nv) = (dot(u, u).sqrt(), dot(v, v).sqrt());
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbeddingError::ZeroNorm);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Cosine of two words' vectors; out-of-vocabulary words are reported as
/// [`EmbeddingError::OutOfVocabulary`].
pub fn word_cosine(vs: &VectorSpace, wa: &str, wb: &str) -> Result<f64, EmbeddingError> {
    let lookup = |w: &str| {
        vs.get(w)
            .ok_or_else(|| EmbeddingError::OutOfVocabulary(w.to_string()))
    };
    cosine(lookup(wa)?, lookup(wb)?)
}

/// Mean of the vectors of a synset's gloss tokens.
#[derive(Clone, Debug, PartialEq)]
pub struct SenseEmbedding {
    pub synset: SynsetId,
    pub vector: Vec<f64>,
    pub token_count: usize,
}

/// Lowercases, splits on whitespace and trims ASCII punctuation from each
/// token.
pub fn gloss_tokens(gloss: &str) -> Vec<String> {
    gloss
        .split_whitespace()
        .map(|t| {
            t.trim_matches(|c: char| c.is_ascii_punctuation())
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Averages the vectors of the gloss tokens found in `vs`; `None` when the
/// gloss is empty or no token resolves.
pub fn gloss_sense_embedding(
    vs: &VectorSpace,
    t: &Taxonomy,
    synset: &str,
) -> Result<Option<SenseEmbedding>, EmbeddingError> {
    let ix = t.ix(synset)?;
    Ok(gloss_embedding_at(vs, t, ix))
}

fn gloss_embedding_at(vs: &VectorSpace, t: &Taxonomy, ix: usize) -> Option<SenseEmbedding> {
    let s = t.synset_at(ix);
    let mut sum = vec![0.0; vs.dim()];
    let mut count = 0usize;
    for tok in gloss_tokens(&s.gloss) {
        if let Some(v) = vs.get(&tok) {
            sum.iter_mut().zip(v).for_each(|(a, b)| *a += b);
            count += 1;
        }
    }
    if count == 0 {
        return None;
    }
    sum.iter_mut().for_each(|x| *x /= count as f64);
    Some(SenseEmbedding {
        synset: s.id.clone(),
        vector: sum,
        token_count: count,
    })
}

fn resolvable_senses(
    vs: &VectorSpace,
    t: &Taxonomy,
    word: &str,
    pos: Option<Pos>,
) -> Result<Vec<SenseEmbedding>, EmbeddingError> {
    let senses: Vec<SenseEmbedding> = t
        .sense_indices(word, pos)
        .into_iter()
        .filter_map(|ix| gloss_embedding_at(vs, t, ix))
        .filter(|e| dot(&e.vector, &e.vector) > 0.0)
        .collect();
    if senses.is_empty() {
        Err(EmbeddingError::NoSenseEmbedding(word.to_string()))
    } else {
        Ok(senses)
    }
}

/// Maximum cosine over all pairs of gloss sense embeddings of two words.
pub fn sense_max_similarity(
    vs: &VectorSpace,
    t: &Taxonomy,
    wa: &str,
    wb: &str,
    pos: Option<Pos>,
) -> Result<f64, EmbeddingError> {
    let a = resolvable_senses(vs, t, wa, pos)?;
    let b = resolvable_senses(vs, t, wb, pos)?;
    let mut best = f64::NEG_INFINITY;
    for ea in &a {
        for eb in &b {
            best = best.max(cosine(&ea.vector, &eb.vector)?);
        }
    }
    Ok(best)
}
