//! Evaluation against gold similarity judgements: correlations, bucketed
//! analyses, mean correlation ratio and inter-group upper bounds.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::infocontent::FrequencyTable;
use crate::taxonomy::{Pos, Taxonomy};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("lists differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least two values, got {0}")]
    TooShort(usize),
    #[error("constant input has no correlation")]
    Constant,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dataset has no pairs")]
    EmptyDataset,
    #[error("duplicate pair `{0}`/`{1}`")]
    DuplicatePair(String, String),
    #[error("gold score {0} lies outside [0, 10]")]
    GoldOutOfRange(f64),
    #[error("only {0} pairs received a score; at least two are needed")]
    TooFewScored(usize),
    #[error("bucket boundaries must be strictly ascending with at least one interval")]
    InvalidBuckets,
    #[error("the {0} criterion needs {1}")]
    MissingInput(&'static str, &'static str),
    #[error("mean verb correlation is zero")]
    ZeroVerbMean,
    #[error("empty correlation list")]
    EmptyList,
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(EvalError::TooShort(x.len()));
    }
    Ok(())
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::Constant);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn fractional_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman's ρ: Pearson correlation of average-tie ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    check_pair(x, y)?;
    pearson(&fractional_ranks(x), &fractional_ranks(y))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetPos {
    Noun,
    Verb,
    Mixed,
}

impl DatasetPos {
    pub fn pos(self) -> Option<Pos> {
        match self {
            DatasetPos::Noun => Some(Pos::Noun),
            DatasetPos::Verb => Some(Pos::Verb),
            DatasetPos::Mixed => None,
        }
    }
}

impl FromStr for DatasetPos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n" | "noun" => Ok(DatasetPos::Noun),
            "v" | "verb" => Ok(DatasetPos::Verb),
            "mixed" => Ok(DatasetPos::Mixed),
            _ => Err(format!("unknown dataset part of speech `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoldPair {
    pub word1: String,
    pub word2: String,
    pub gold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalDataset {
    pub name: String,
    pub pos: DatasetPos,
    pub pairs: Vec<GoldPair>,
}

impl EvalDataset {
    pub fn new(
        name: impl Into<String>,
        pos: DatasetPos,
        pairs: Vec<GoldPair>,
    ) -> Result<Self, EvalError> {
        if pairs.is_empty() {
            return Err(EvalError::EmptyDataset);
        }
        let mut seen = HashSet::new();
        for p in &pairs {
            if !(0.0..=10.0).contains(&p.gold) {
                return Err(EvalError::GoldOutOfRange(p.gold));
            }
            let key = if p.word1 <= p.word2 {
                (p.word1.as_str(), p.word2.as_str())
            } else {
                (p.word2.as_str(), p.word1.as_str())
            };
            if !seen.insert(key) {
                return Err(EvalError::DuplicatePair(p.word1.clone(), p.word2.clone()));
            }
        }
        Ok(EvalDataset {
            name: name.into(),
            pos,
            pairs,
        })
    }

    /// Reads `word1<TAB>word2<TAB>gold` lines after one header line. With
    /// `legacy_max`, gold scores on `[0, legacy_max]` are rescaled to 0-10.
    pub fn parse(
        name: impl Into<String>,
        pos: DatasetPos,
        text: &str,
        legacy_max: Option<f64>,
    ) -> Result<Self, EvalError> {
        let scale = match legacy_max {
            Some(m) if m > 0.0 && m.is_finite() => 10.0 / m,
            Some(_) => {
                return Err(EvalError::Parse {
                    line: 0,
                    message: "rescale maximum must be positive".into(),
                })
            }
            None => 1.0,
        };
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: &str| EvalError::Parse {
                line: i + 1,
                message: message.to_string(),
            };
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() < 3 || fields[0].is_empty() || fields[1].is_empty() {
                return Err(err("expected `word1<TAB>word2<TAB>gold`"));
            }
            let gold: f64 = fields[2]
                .parse()
                .ok()
                .filter(|g: &f64| g.is_finite())
                .ok_or_else(|| err("gold score is not a number"))?;
            pairs.push(GoldPair {
                word1: fields[0].to_string(),
                word2: fields[1].to_string(),
                gold: gold * scale,
            });
        }
        EvalDataset::new(name, pos, pairs)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn gold(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.gold).collect()
    }
}

/// What a backend says about one pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Judgement {
    Score(f64),
    NoComparison,
    OutOfVocabulary,
}

/// Treatment of unscored pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Policy {
    /// Leave them out of the correlation.
    #[default]
    Skip,
    /// Give them the lowest score the backend produced.
    Floor,
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "skip" => Ok(Policy::Skip),
            "floor" => Ok(Policy::Floor),
            _ => Err(format!("unknown policy `{s}`")),
        }
    }
}

/// One line of a report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub pairs: usize,
    pub scored: usize,
    pub no_comparison: usize,
    pub oov: usize,
    /// `None` when fewer than two pairs enter the correlation or one side is
    /// constant.
    pub rho: Option<f64>,
    pub r: Option<f64>,
}

impl ReportRow {
    pub fn coverage(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.scored as f64 / self.pairs as f64
        }
    }
}

/// Backend judgements for a whole dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub judgements: Vec<Judgement>,
    pub gold: Vec<f64>,
    pub policy: Policy,
    /// Lowest score produced, used by [`Policy::Floor`].
    pub floor: f64,
    pub summary: ReportRow,
}

impl Evaluation {
    /// Correlations restricted to the given pair indices.
    pub fn subset(&self, label: impl Into<String>, indices: &[usize]) -> ReportRow {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        let (mut scored, mut no_comparison, mut oov) = (0, 0, 0);
        for &i in indices {
            let value = match self.judgements[i] {
                Judgement::Score(s) => {
                    scored += 1;
                    Some(s)
                }
                Judgement::NoComparison => {
                    no_comparison += 1;
                    None
                }
                Judgement::OutOfVocabulary => {
                    oov += 1;
                    None
                }
            };
            let value = match (value, self.policy) {
                (Some(v), _) => v,
                (None, Policy::Floor) => self.floor,
                (None, Policy::Skip) => continue,
            };
            xs.push(value);
            ys.push(self.gold[i]);
        }
        ReportRow {
            label: label.into(),
            pairs: indices.len(),
            scored,
            no_comparison,
            oov,
            rho: spearman(&xs, &ys).ok(),
            r: pearson(&xs, &ys).ok(),
        }
    }
}

/// Scores every pair with `backend`, using up to `jobs` threads. Results do
/// not depend on `jobs`.
pub fn evaluate<F>(
    backend: F,
    ds: &EvalDataset,
    policy: Policy,
    jobs: usize,
) -> Result<Evaluation, EvalError>
where
    F: Fn(&str, &str) -> Judgement + Sync,
{
    if ds.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let jobs = jobs.clamp(1, ds.len());
    let chunk = ds.len().div_ceil(jobs);
    let backend = &backend;
    let judgements: Vec<Judgement> = if jobs == 1 {
        ds.pairs
            .iter()
            .map(|p| backend(&p.word1, &p.word2))
            .collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = ds
                .pairs
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|p| backend(&p.word1, &p.word2))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("scoring thread panicked"))
                .collect()
        })
    };
    let scores: Vec<f64> = judgements
        .iter()
        .filter_map(|j| match j {
            Judgement::Score(s) => Some(*s),
            _ => None,
        })
        .collect();
    if scores.len() < 2 {
        return Err(EvalError::TooFewScored(scores.len()));
    }
    let floor = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let mut evaluation = Evaluation {
        judgements,
        gold: ds.gold(),
        policy,
        floor,
        summary: ReportRow {
            label: String::new(),
            pairs: 0,
            scored: 0,
            no_comparison: 0,
            oov: 0,
            rho: None,
            r: None,
        },
    };
    let all: Vec<usize> = (0..ds.len()).collect();
    evaluation.summary = evaluation.subset(ds.name.clone(), &all);
    Ok(evaluation)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BucketCriterion {
    Frequency,
    Polysemy,
    Intensity,
}

impl BucketCriterion {
    pub fn name(self) -> &'static str {
        match self {
            BucketCriterion::Frequency => "frequency",
            BucketCriterion::Polysemy => "polysemy",
            BucketCriterion::Intensity => "intensity",
        }
    }
}

/// Half-open intervals `[b_k, b_{k+1})`; with `closed_top` the last
/// interval also owns its upper boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct BucketSpec {
    pub criterion: BucketCriterion,
    pub boundaries: Vec<f64>,
    pub closed_top: bool,
}

impl BucketSpec {
    pub fn new(
        criterion: BucketCriterion,
        boundaries: Vec<f64>,
        closed_top: bool,
    ) -> Result<Self, EvalError> {
        if boundaries.len() < 2 || !boundaries.windows(2).all(|w| w[0] < w[1]) {
            return Err(EvalError::InvalidBuckets);
        }
        Ok(BucketSpec {
            criterion,
            boundaries,
            closed_top,
        })
    }

    fn preset(criterion: BucketCriterion, cuts: &[f64]) -> Self {
        let mut boundaries = vec![0.0];
        boundaries.extend_from_slice(cuts);
        boundaries.push(f64::INFINITY);
        BucketSpec {
            criterion,
            boundaries,
            closed_top: false,
        }
    }

    /// Below 3,000, 3,000 to 10,000, above.
    pub fn noun_frequency() -> Self {
        Self::preset(BucketCriterion::Frequency, &[3000.0, 10000.0])
    }

    /// Below 1,000, 1,000 to 5,000, above.
    pub fn verb_frequency() -> Self {
        Self::preset(BucketCriterion::Frequency, &[1000.0, 5000.0])
    }

    /// At most 2 senses, 3 or 4, 5 or more.
    pub fn noun_polysemy() -> Self {
        Self::preset(BucketCriterion::Polysemy, &[3.0, 5.0])
    }

    /// At most 2 senses, 3 to 8, 9 or more.
    pub fn verb_polysemy() -> Self {
        Self::preset(BucketCriterion::Polysemy, &[3.0, 9.0])
    }

    /// `[0,3)`, `[3,6)`, `[6,10]`.
    pub fn intensity() -> Self {
        BucketSpec {
            criterion: BucketCriterion::Intensity,
            boundaries: vec![0.0, 3.0, 6.0, 10.0],
            closed_top: true,
        }
    }

    /// Preset by name; frequency and polysemy pick the noun or verb variant
    /// from `pos`.
    pub fn named(name: &str, pos: DatasetPos) -> Option<Self> {
        let verb = pos == DatasetPos::Verb;
        match name {
            "frequency" if verb => Some(Self::verb_frequency()),
            "frequency" => Some(Self::noun_frequency()),
            "polysemy" if verb => Some(Self::verb_polysemy()),
            "polysemy" => Some(Self::noun_polysemy()),
            "intensity" => Some(Self::intensity()),
            _ => None,
        }
    }

    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.boundaries.windows(2).map(|w| (w[0], w[1]))
    }

    /// Index of the interval holding `x`.
    pub fn interval_of(&self, x: f64) -> Option<usize> {
        let b = &self.boundaries;
        let last = b.len() - 2;
        (0..=last).find(|&k| {
            b[k] <= x && (x < b[k + 1] || (k == last && self.closed_top && x == b[k + 1]))
        })
    }

    pub fn label(&self, k: usize) -> String {
        let (lo, hi) = (self.boundaries[k], self.boundaries[k + 1]);
        let close = if self.closed_top && k + 2 == self.boundaries.len() {
            ']'
        } else {
            ')'
        };
        if hi.is_infinite() {
            format!("{}:{lo}+", self.criterion.name())
        } else {
            format!("{}:[{lo},{hi}{close}", self.criterion.name())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bucket {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
    /// Indices into the dataset, in dataset order.
    pub pairs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bucketing {
    pub buckets: Vec<Bucket>,
    /// Pairs whose two words fall in different intervals, or outside all.
    pub excluded: usize,
}

/// Splits a dataset by word frequency, sense count or gold intensity.
pub fn bucketize(
    ds: &EvalDataset,
    spec: &BucketSpec,
    freq: Option<&FrequencyTable>,
    t: Option<&Taxonomy>,
) -> Result<Bucketing, EvalError> {
    let stat: Box<dyn Fn(&str) -> f64> = match spec.criterion {
        BucketCriterion::Frequency => {
            let f = freq.ok_or(EvalError::MissingInput("frequency", "a frequency table"))?;
            Box::new(move |w| f.count(w) as f64)
        }
        BucketCriterion::Polysemy => {
            let t = t.ok_or(EvalError::MissingInput("polysemy", "a taxonomy"))?;
            let pos = ds.pos.pos();
            Box::new(move |w| t.senses(w, pos).len() as f64)
        }
        BucketCriterion::Intensity => Box::new(|_| 0.0),
    };
    let mut buckets: Vec<Bucket> = spec
        .intervals()
        .enumerate()
        .map(|(k, (lo, hi))| Bucket {
            label: spec.label(k),
            lo,
            hi,
            pairs: Vec::new(),
        })
        .collect();
    let mut excluded = 0;
    for (i, p) in ds.pairs.iter().enumerate() {
        let slot = match spec.criterion {
            BucketCriterion::Intensity => spec.interval_of(p.gold),
            _ => {
                let a = spec.interval_of(stat(&p.word1));
                let b = spec.interval_of(stat(&p.word2));
                if a == b {
                    a
                } else {
                    None
                }
            }
        };
        match slot {
            Some(k) => buckets[k].pairs.push(i),
            None => excluded += 1,
        }
    }
    Ok(Bucketing { buckets, excluded })
}

/// Mean noun correlation over mean verb correlation.
pub fn mcr(noun_rhos: &[f64], verb_rhos: &[f64]) -> Result<f64, EvalError> {
    if noun_rhos.is_empty() || verb_rhos.is_empty() {
        return Err(EvalError::EmptyList);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let verb = mean(verb_rhos);
    if verb == 0.0 {
        return Err(EvalError::ZeroVerbMean);
    }
    Ok(mean(noun_rhos) / verb)
}

/// Agreement between two rating groups over the same pairs: `(r, ρ)`.
pub fn upper_bound(ratings_a: &[f64], ratings_b: &[f64]) -> Result<(f64, f64), EvalError> {
    Ok((
        pearson(ratings_a, ratings_b)?,
        spearman(ratings_a, ratings_b)?,
    ))
}

/// Rounds to `digits` significant digits and prints the shortest form that
/// reads back to the rounded value.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{:?}", x + 0.0);
    }
    let rounded: f64 = format!("{:.*e}", digits.max(1) - 1, x)
        .parse()
        .expect("scientific notation parses");
    format!("{rounded:?}")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Text,
    Tsv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "tsv" => Ok(ReportFormat::Tsv),
            _ => Err(format!("unknown report format `{s}`")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    /// Pairs left out by bucketing, when buckets were requested.
    pub excluded: Option<usize>,
}

impl EvalReport {
    pub fn render(&self, format: ReportFormat, digits: usize) -> String {
        let header = [
            "subset",
            "pairs",
            "rho",
            "r",
            "coverage",
            "no_comparison",
            "oov",
        ];
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format_sig(x, digits));
        let mut table: Vec<Vec<String>> = vec![header.iter().map(|h| h.to_string()).collect()];
        for row in &self.rows {
            table.push(vec![
                row.label.clone(),
                row.pairs.to_string(),
                opt(row.rho),
                opt(row.r),
                format_sig(row.coverage(), digits),
                row.no_comparison.to_string(),
                row.oov.to_string(),
            ]);
        }
        let mut out = String::new();
        match format {
            ReportFormat::Tsv => {
                for line in &table {
                    out.push_str(&line.join("\t"));
                    out.push('\n');
                }
                if let Some(n) = self.excluded {
                    let _ = writeln!(out, "#excluded\t{n}");
                }
            }
            ReportFormat::Text => {
                let widths: Vec<usize> = (0..header.len())
                    .map(|c| {
                        table
                            .iter()
                            .map(|l| l[c].chars().count())
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                for line in &table {
                    let cells: Vec<String> = line
                        .iter()
                        .zip(&widths)
                        .enumerate()
                        .map(|(c, (cell, w))| {
                            if c == 0 {
                                format!("{cell:<w$}")
                            } else {
                                format!("{cell:>w$}")
                            }
                        })
                        .collect();
                    out.push_str(cells.join("  ").trim_end());
                    out.push('\n');
                }
                if let Some(n) = self.excluded {
                    let _ = writeln!(out, "excluded (straddling): {n}");
                }
            }
        }
        out
    }
}
