//! Information content tables.
//!
//! Two builders: corpus-based propagation of word counts up the hypernym
//! hierarchy, and an intrinsic estimate from hyponym counts alone.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Read;
use std::str::FromStr;

use thiserror::Error;

use crate::taxonomy::{normalize_lemma, SynsetId, Taxonomy};

#[derive(Debug, Error, PartialEq)]
pub enum IcError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("total token count must be positive")]
    NonPositiveTotal,
    #[error("smoothing must be a non-negative finite number, got {0}")]
    InvalidSmoothing(f64),
    #[error("propagated mass is zero; nothing to normalize")]
    ZeroMass,
    #[error("intrinsic information content needs at least two synsets")]
    TooFewSynsets,
    #[error("i/o error: {0}")]
    Io(String),
}

/// Word counts from a corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyTable {
    counts: BTreeMap<String, u64>,
    total_tokens: u64,
}

impl FrequencyTable {
    /// `total` defaults to the sum of the counts.
    pub fn new(counts: BTreeMap<String, u64>, total: Option<u64>) -> Result<Self, IcError> {
        let total_tokens = total.unwrap_or_else(|| counts.values().sum());
        if total_tokens == 0 {
            return Err(IcError::NonPositiveTotal);
        }
        Ok(FrequencyTable {
            counts,
            total_tokens,
        })
    }

    /// Reads `word<TAB>count` lines with an optional `#total<TAB>N` header.
    pub fn parse<R: Read>(mut source: R) -> Result<Self, IcError> {
        let mut text = String::new();
        source
            .read_to_string(&mut text)
            .map_err(|e| IcError::Io(e.to_string()))?;
        text.parse()
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts
            .get(&normalize_lemma(word))
            .copied()
            .unwrap_or(0)
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, c)| (w.as_str(), *c))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl FromStr for FrequencyTable {
    type Err = IcError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut counts = BTreeMap::new();
        let mut total = None;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let word = fields.next().unwrap_or_default();
            let value = fields.next().ok_or_else(|| IcError::Parse {
                line: lineno,
                message: "expected `word<TAB>count`".into(),
            })?;
            if fields.next().is_some() {
                return Err(IcError::Parse {
                    line: lineno,
                    message: "too many fields".into(),
                });
            }
            let n: u64 = value.trim().parse().map_err(|_| IcError::Parse {
                line: lineno,
                message: format!("invalid count `{value}`"),
            })?;
            if word == "#total" {
                if lineno != 1 {
                    return Err(IcError::Parse {
                        line: lineno,
                        message: "`#total` header must be the first line".into(),
                    });
                }
                total = Some(n);
                continue;
            }
            if word.trim().is_empty() {
                return Err(IcError::Parse {
                    line: lineno,
                    message: "empty word".into(),
                });
            }
            *counts.entry(normalize_lemma(word)).or_insert(0) += n;
        }
        FrequencyTable::new(counts, total)
    }
}

/// How a word's count is shared among its senses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SenseCredit {
    /// count / |senses| to each sense.
    #[default]
    Split,
    /// The full count to every sense.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IcSource {
    Corpus,
    Intrinsic,
}

impl IcSource {
    fn tag(self) -> &'static str {
        match self {
            IcSource::Corpus => "corpus",
            IcSource::Intrinsic => "intrinsic",
        }
    }
}

/// Information content per synset.
#[derive(Clone, Debug, PartialEq)]
pub struct IcTable {
    ic: HashMap<SynsetId, f64>,
    prob: HashMap<SynsetId, f64>,
    source: IcSource,
    /// Frequency-table words that matched no synset.
    pub skipped_words: usize,
}

impl IcTable {
    pub fn ic(&self, id: &str) -> Option<f64> {
        self.ic.get(id).copied()
    }

    /// Propagated probability of the synset's subtree.
    pub fn probability(&self, id: &str) -> Option<f64> {
        self.prob.get(id).copied()
    }

    pub fn source(&self) -> IcSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.ic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ic.is_empty()
    }

    /// TSV with a `#source` header and `id<TAB>probability<TAB>ic` rows,
    /// ordered as the synsets of `t`.
    pub fn to_tsv(&self, t: &Taxonomy) -> String {
        let mut out = format!("#source\t{}\n", self.source.tag());
        for s in t.synsets() {
            if let (Some(p), Some(ic)) = (self.prob.get(&s.id), self.ic.get(&s.id)) {
                let _ = writeln!(out, "{}\t{:?}\t{:?}", s.id, p, ic);
            }
        }
        out
    }

    pub fn parse<R: Read>(mut source: R) -> Result<Self, IcError> {
        let mut text = String::new();
        source
            .read_to_string(&mut text)
            .map_err(|e| IcError::Io(e.to_string()))?;
        text.parse()
    }
}

impl FromStr for IcTable {
    type Err = IcError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut source = IcSource::Corpus;
        let mut ic = HashMap::new();
        let mut prob = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| IcError::Parse {
                line: lineno,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields[0] == "#source" {
                source = match fields.get(1).copied() {
                    Some("corpus") => IcSource::Corpus,
                    Some("intrinsic") => IcSource::Intrinsic,
                    other => return Err(err(format!("unknown source {other:?}"))),
                };
                continue;
            }
            if fields.len() != 3 {
                return Err(err("expected `id<TAB>probability<TAB>ic`".into()));
            }
            let id = SynsetId::new(fields[0]).ok_or_else(|| err("invalid synset id".into()))?;
            let p: f64 = fields[1]
                .parse()
                .map_err(|_| err(format!("invalid probability `{}`", fields[1])))?;
            let v: f64 = match fields[2] {
                "inf" => f64::INFINITY,
                s => s.parse().map_err(|_| err(format!("invalid ic `{s}`")))?,
            };
            prob.insert(id.clone(), p);
            ic.insert(id, v);
        }
        Ok(IcTable {
            ic,
            prob,
            source,
            skipped_words: 0,
        })
    }
}

fn neg_ln(p: f64) -> f64 {
    // `+ 0.0` turns -0.0 into 0.0 for P = 1.
    -p.ln() + 0.0
}

/// Resnik-style corpus information content.
///
/// Each word's count is credited to its synsets (see [`SenseCredit`]) plus
/// `smoothing` per synset. A synset's mass is its own credit plus the credit
/// of every distinct descendant, so diamonds are not double counted.
pub fn build_corpus_ic(
    t: &Taxonomy,
    freq: &FrequencyTable,
    smoothing: f64,
    credit_mode: SenseCredit,
) -> Result<IcTable, IcError> {
    if !(smoothing >= 0.0 && smoothing.is_finite()) {
        return Err(IcError::InvalidSmoothing(smoothing));
    }
    let n = t.len();
    let mut credit = vec![smoothing; n];
    let mut skipped_words = 0;
    for (word, count) in freq.iter() {
        let senses = t.sense_indices(word, None);
        if senses.is_empty() {
            skipped_words += 1;
            continue;
        }
        let share = match credit_mode {
            SenseCredit::Split => count as f64 / senses.len() as f64,
            SenseCredit::Full => count as f64,
        };
        for s in senses {
            credit[s] += share;
        }
    }

    let mut mass = vec![0.0; n];
    for (node, &c) in credit.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (anc, _) in t.ancestors(node) {
            mass[anc] += c;
        }
    }
    let total: f64 = t.root_indices().iter().map(|&r| mass[r]).sum();
    if total <= 0.0 {
        return Err(IcError::ZeroMass);
    }

    let mut ic = HashMap::with_capacity(n);
    let mut prob = HashMap::with_capacity(n);
    for (i, m) in mass.into_iter().enumerate() {
        let p = m / total;
        let id = t.id_of(i).clone();
        ic.insert(id.clone(), neg_ln(p));
        prob.insert(id, p);
    }
    Ok(IcTable {
        ic,
        prob,
        source: IcSource::Corpus,
        skipped_words,
    })
}

/// Structure-only information content from strict hyponym-descendant counts:
/// `1 - ln(hypo + 1) / ln(|synsets|)`.
pub fn build_intrinsic_ic(t: &Taxonomy) -> Result<IcTable, IcError> {
    let n = t.len();
    if n < 2 {
        return Err(IcError::TooFewSynsets);
    }
    let mut descendants = vec![0usize; n];
    for node in 0..n {
        for (anc, d) in t.ancestors(node) {
            if d > 0 {
                descendants[anc] += 1;
            }
        }
    }
    let ln_n = (n as f64).ln();
    let mut ic = HashMap::with_capacity(n);
    let mut prob = HashMap::with_capacity(n);
    for (i, hypo) in descendants.into_iter().enumerate() {
        let id = t.id_of(i).clone();
        let value = 1.0 - ((hypo + 1) as f64).ln() / ln_n;
        ic.insert(id.clone(), value.clamp(0.0, 1.0));
        prob.insert(id, (hypo + 1) as f64 / n as f64);
    }
    Ok(IcTable {
        ic,
        prob,
        source: IcSource::Intrinsic,
        skipped_words: 0,
    })
}
