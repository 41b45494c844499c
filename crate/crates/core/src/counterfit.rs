//! Counter-fitting: pulls synonym vectors together, pushes antonym vectors
//! apart and keeps each anchor word close to its original neighbourhood.
//!
//! The objective is `λ_S·L_S + λ_A·L_A + λ_P·L_P`, minimised by full-batch
//! gradient descent with the analytic gradient of the cosine.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use thiserror::Error;

use crate::config::{ConfigError, KeyValues};
use crate::embeddings::{dot, normalize_in_place, VectorSpace};

/// Unordered word pair, stored with the smaller word first.
pub type WordPair = (String, String);

/// Word to negative-sample neighbours.
pub type Neighborhoods = BTreeMap<String, Vec<String>>;

#[derive(Debug, Error, PartialEq)]
pub enum CounterfitError {
    #[error("line {line}: expected `word1<TAB>word2`")]
    Syntax { line: usize },
    #[error("`{0}`/`{1}` is listed as both synonyms and antonyms")]
    Conflict(String, String),
    #[error("pair `{0}`/`{1}` does not resolve in the vector space")]
    UnresolvedPair(String, String),
    #[error("`{0}` has a zero vector")]
    ZeroVector(String),
    #[error("the two spaces do not share vocabulary and dimension")]
    VocabularyMismatch,
    #[error("no constraint pair survives filtering against the vocabulary")]
    NoConstraints,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn ordered(a: &str, b: &str) -> WordPair {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Synonym and antonym pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintSet {
    synonyms: BTreeSet<WordPair>,
    antonyms: BTreeSet<WordPair>,
}

impl ConstraintSet {
    /// Self-pairs are dropped; a pair in both lists is an error.
    pub fn new<S, A>(synonyms: S, antonyms: A) -> Result<Self, CounterfitError>
    where
        S: IntoIterator<Item = (String, String)>,
        A: IntoIterator<Item = (String, String)>,
    {
        let collect = |pairs: Vec<(String, String)>| -> BTreeSet<WordPair> {
            pairs
                .into_iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| ordered(&a, &b))
                .collect()
        };
        let synonyms = collect(synonyms.into_iter().collect());
        let antonyms = collect(antonyms.into_iter().collect());
        if let Some((a, b)) = synonyms.intersection(&antonyms).next() {
            return Err(CounterfitError::Conflict(a.clone(), b.clone()));
        }
        Ok(ConstraintSet { synonyms, antonyms })
    }

    /// Builds the set from two `word1<TAB>word2` files.
    pub fn from_tsv(synonyms: &str, antonyms: &str) -> Result<Self, CounterfitError> {
        ConstraintSet::new(parse_pairs(synonyms)?, parse_pairs(antonyms)?)
    }

    pub fn synonyms(&self) -> &BTreeSet<WordPair> {
        &self.synonyms
    }

    pub fn antonyms(&self) -> &BTreeSet<WordPair> {
        &self.antonyms
    }

    pub fn len(&self) -> usize {
        self.synonyms.len() + self.antonyms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Keeps the pairs whose words both have vectors; returns the number
    /// dropped.
    pub fn restrict_to(&self, space: &VectorSpace) -> (ConstraintSet, usize) {
        let keep = |set: &BTreeSet<WordPair>| -> BTreeSet<WordPair> {
            set.iter()
                .filter(|(a, b)| space.index_of(a).is_some() && space.index_of(b).is_some())
                .cloned()
                .collect()
        };
        let restricted = ConstraintSet {
            synonyms: keep(&self.synonyms),
            antonyms: keep(&self.antonyms),
        };
        let dropped = self.len() - restricted.len();
        (restricted, dropped)
    }

    /// Words that occur in at least one pair, sorted.
    pub fn anchors(&self) -> BTreeSet<&str> {
        self.synonyms
            .iter()
            .chain(&self.antonyms)
            .flat_map(|(a, b)| [a.as_str(), b.as_str()])
            .collect()
    }

    fn partners(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut map: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (a, b) in self.synonyms.iter().chain(&self.antonyms) {
            map.entry(a).or_default().insert(b);
            map.entry(b).or_default().insert(a);
        }
        map
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CounterfitError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        match fields[..] {
            [a, b] if !a.is_empty() && !b.is_empty() => pairs.push((a.to_string(), b.to_string())),
            _ => return Err(CounterfitError::Syntax { line: i + 1 }),
        }
    }
    Ok(pairs)
}

/// How negative samples are chosen for the preservation term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NeighborMode {
    /// The `k` most similar words.
    Nearest(usize),
    /// Every word whose cosine is at least the threshold.
    Threshold(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetrofitConfig {
    pub delta_syn: f64,
    pub delta_ant: f64,
    pub neighbors: NeighborMode,
    pub lambda_syn: f64,
    pub lambda_ant: f64,
    pub lambda_preserve: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub rng_seed: u64,
}

impl Default for RetrofitConfig {
    fn default() -> Self {
        RetrofitConfig {
            delta_syn: 1.0,
            delta_ant: 0.0,
            neighbors: NeighborMode::Nearest(10),
            lambda_syn: 1.0,
            lambda_ant: 1.0,
            lambda_preserve: 1.0,
            learning_rate: 0.1,
            epochs: 20,
            rng_seed: 0,
        }
    }
}

impl RetrofitConfig {
    /// Claims the `retrofit.*` keys.
    pub fn apply(&mut self, kv: &mut KeyValues) -> Result<(), ConfigError> {
        kv.set("retrofit.delta_syn", &mut self.delta_syn)?;
        kv.set("retrofit.delta_ant", &mut self.delta_ant)?;
        kv.set("retrofit.lambda_syn", &mut self.lambda_syn)?;
        kv.set("retrofit.lambda_ant", &mut self.lambda_ant)?;
        kv.set("retrofit.lambda_preserve", &mut self.lambda_preserve)?;
        kv.set("retrofit.learning_rate", &mut self.learning_rate)?;
        kv.set("retrofit.epochs", &mut self.epochs)?;
        kv.set("retrofit.seed", &mut self.rng_seed)?;
        match (kv.take("retrofit.k")?, kv.take("retrofit.threshold")?) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid(
                    "retrofit.k and retrofit.threshold are exclusive".into(),
                ))
            }
            (Some(k), None) => self.neighbors = NeighborMode::Nearest(k),
            (None, Some(t)) => self.neighbors = NeighborMode::Threshold(t),
            (None, None) => {}
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.delta_syn > 0.0 && self.delta_syn <= 1.0) {
            return bad("retrofit.delta_syn must lie in (0, 1]");
        }
        if !(self.delta_ant >= 0.0 && self.delta_ant < 1.0) {
            return bad("retrofit.delta_ant must lie in [0, 1)");
        }
        if self.delta_ant >= self.delta_syn {
            return bad("retrofit.delta_ant must be below retrofit.delta_syn");
        }
        for (name, w) in [
            ("retrofit.lambda_syn", self.lambda_syn),
            ("retrofit.lambda_ant", self.lambda_ant),
            ("retrofit.lambda_preserve", self.lambda_preserve),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(ConfigError::Invalid(format!("{name} must be non-negative")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("retrofit.learning_rate must be positive");
        }
        match self.neighbors {
            NeighborMode::Nearest(0) => bad("retrofit.k must be at least 1"),
            NeighborMode::Threshold(t) if !(-1.0..=1.0).contains(&t) => {
                bad("retrofit.threshold must lie in [-1, 1]")
            }
            _ => Ok(()),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn cos_rows(u: &[f64], v: &[f64]) -> Option<f64> {
    let (nu, nv) = (norm(u), norm(v));
    (nu > 0.0 && nv > 0.0).then(|| (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

fn resolve(space: &VectorSpace, a: &str, b: &str) -> Result<(usize, usize), CounterfitError> {
    match (space.index_of(a), space.index_of(b)) {
        (Some(i), Some(j)) => Ok((i, j)),
        _ => Err(CounterfitError::UnresolvedPair(
            a.to_string(),
            b.to_string(),
        )),
    }
}

fn pair_cos(space: &VectorSpace, a: &str, b: &str) -> Result<f64, CounterfitError> {
    let (i, j) = resolve(space, a, b)?;
    let zero = |w: &str| CounterfitError::ZeroVector(w.to_string());
    let (u, v) = (space.row(i), space.row(j));
    if norm(u) == 0.0 {
        return Err(zero(a));
    }
    cos_rows(u, v).ok_or_else(|| zero(b))
}

/// `Σ max(0, δ_syn − cos(l, r))` over the synonym pairs.
pub fn loss_syn<'a, I>(
    space: &VectorSpace,
    pairs: I,
    delta_syn: f64,
) -> Result<f64, CounterfitError>
where
    I: IntoIterator<Item = &'a WordPair>,
{
    let mut sum = 0.0;
    for (a, b) in pairs {
        sum += (delta_syn - pair_cos(space, a, b)?).max(0.0);
    }
    Ok(sum)
}

/// `Σ max(0, δ_ant + cos(l, r))` over the antonym pairs.
pub fn loss_ant<'a, I>(
    space: &VectorSpace,
    pairs: I,
    delta_ant: f64,
) -> Result<f64, CounterfitError>
where
    I: IntoIterator<Item = &'a WordPair>,
{
    let mut sum = 0.0;
    for (a, b) in pairs {
        sum += (delta_ant + pair_cos(space, a, b)?).max(0.0);
    }
    Ok(sum)
}

/// `Σ_i Σ_{j∈Neg(i)} max(0, cos(X_i, X_j) − cos(X′_i, X′_j))`.
pub fn loss_preserve(
    original: &VectorSpace,
    current: &VectorSpace,
    neighborhoods: &Neighborhoods,
) -> Result<f64, CounterfitError> {
    if original.dim() != current.dim() || original.words() != current.words() {
        return Err(CounterfitError::VocabularyMismatch);
    }
    let mut sum = 0.0;
    for (w, neg) in neighborhoods {
        for n in neg {
            let before = pair_cos(original, w, n)?;
            let after = pair_cos(current, w, n)?;
            sum += (before - after).max(0.0);
        }
    }
    Ok(sum)
}

/// Negative samples for every word of `space`, excluding the word itself and
/// its constraint partners. Ties are broken by word order.
pub fn build_neighborhoods(
    space: &VectorSpace,
    mode: NeighborMode,
    constraints: &ConstraintSet,
) -> Neighborhoods {
    neighborhoods_for(
        space,
        space.words().iter().map(String::as_str),
        mode,
        constraints,
    )
}

/// As [`build_neighborhoods`], restricted to the given words.
pub fn neighborhoods_for<'a, I>(
    space: &VectorSpace,
    words: I,
    mode: NeighborMode,
    constraints: &ConstraintSet,
) -> Neighborhoods
where
    I: IntoIterator<Item = &'a str>,
{
    let partners = constraints.partners();
    let none = BTreeSet::new();
    let mut out = Neighborhoods::new();
    for w in words {
        let Some(i) = space.index_of(w) else { continue };
        let excluded = partners.get(w).unwrap_or(&none);
        let mut scored: Vec<(f64, &str)> = space
            .words()
            .iter()
            .enumerate()
            .filter(|&(j, other)| j != i && !excluded.contains(other.as_str()))
            .filter_map(|(j, other)| {
                cos_rows(space.row(i), space.row(j)).map(|c| (c, other.as_str()))
            })
            .collect();
        scored.sort_by(|x, y| y.0.total_cmp(&x.0).then_with(|| x.1.cmp(y.1)));
        let chosen: Vec<String> = match mode {
            NeighborMode::Nearest(k) => scored.iter().take(k).map(|s| s.1.to_string()).collect(),
            NeighborMode::Threshold(t) => scored
                .iter()
                .take_while(|s| s.0 >= t)
                .map(|s| s.1.to_string())
                .collect(),
        };
        out.insert(w.to_string(), chosen);
    }
    out
}

/// Unweighted loss components and the weighted total.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Losses {
    pub syn: f64,
    pub ant: f64,
    pub preserve: f64,
    pub total: f64,
}

/// Gradient of each loss component with respect to the flat vector data.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub syn: Vec<f64>,
    pub ant: Vec<f64>,
    pub preserve: Vec<f64>,
}

/// The counter-fitting objective over row-major vector data laid out like
/// the original space.
#[derive(Clone, Debug)]
pub struct Objective {
    dim: usize,
    rows: usize,
    syn: Vec<(usize, usize)>,
    ant: Vec<(usize, usize)>,
    /// `(i, j, cos(X_i, X_j))` on the original space.
    preserve: Vec<(usize, usize, f64)>,
    delta_syn: f64,
    delta_ant: f64,
    weights: [f64; 3],
}

impl Objective {
    /// Constraints must already be restricted to `original`.
    pub fn new(
        original: &VectorSpace,
        constraints: &ConstraintSet,
        neighborhoods: &Neighborhoods,
        cfg: &RetrofitConfig,
    ) -> Result<Self, CounterfitError> {
        let index = |set: &BTreeSet<WordPair>| -> Result<Vec<(usize, usize)>, CounterfitError> {
            set.iter().map(|(a, b)| resolve(original, a, b)).collect()
        };
        let syn = index(&constraints.synonyms)?;
        let ant = index(&constraints.antonyms)?;
        let mut preserve = Vec::new();
        for (w, neg) in neighborhoods {
            for n in neg {
                let (i, j) = resolve(original, w, n)?;
                preserve.push((i, j, pair_cos(original, w, n)?));
            }
        }
        let objective = Objective {
            dim: original.dim(),
            rows: original.len(),
            syn,
            ant,
            preserve,
            delta_syn: cfg.delta_syn,
            delta_ant: cfg.delta_ant,
            weights: [cfg.lambda_syn, cfg.lambda_ant, cfg.lambda_preserve],
        };
        if let Some(i) = objective
            .trainable()
            .into_iter()
            .find(|&i| norm(original.row(i)) == 0.0)
        {
            return Err(CounterfitError::ZeroVector(original.words()[i].clone()));
        }
        Ok(objective)
    }

    /// Rows touched by at least one loss term, ascending.
    pub fn trainable(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .syn
            .iter()
            .chain(&self.ant)
            .flat_map(|&(i, j)| [i, j])
            .chain(self.preserve.iter().flat_map(|&(i, j, _)| [i, j]))
            .collect();
        set.into_iter().collect()
    }

    fn row<'d>(&self, data: &'d [f64], i: usize) -> &'d [f64] {
        &data[i * self.dim..(i + 1) * self.dim]
    }

    fn cos(&self, data: &[f64], i: usize, j: usize) -> f64 {
        cos_rows(self.row(data, i), self.row(data, j)).unwrap_or(0.0)
    }

    pub fn losses(&self, data: &[f64]) -> Losses {
        assert_eq!(data.len(), self.rows * self.dim);
        let syn: f64 = self
            .syn
            .iter()
            .map(|&(i, j)| (self.delta_syn - self.cos(data, i, j)).max(0.0))
            .sum();
        let ant: f64 = self
            .ant
            .iter()
            .map(|&(i, j)| (self.delta_ant + self.cos(data, i, j)).max(0.0))
            .sum();
        let preserve: f64 = self
            .preserve
            .iter()
            .map(|&(i, j, c0)| (c0 - self.cos(data, i, j)).max(0.0))
            .sum();
        let [ws, wa, wp] = self.weights;
        Losses {
            syn,
            ant,
            preserve,
            total: ws * syn + wa * ant + wp * preserve,
        }
    }

    /// Adds `sign · ∂cos(X_i, X_j)` to `grad`.
    fn add_cos_grad(&self, data: &[f64], i: usize, j: usize, sign: f64, grad: &mut [f64]) {
        let (u, v) = (self.row(data, i), self.row(data, j));
        let (nu, nv) = (norm(u), norm(v));
        if nu == 0.0 || nv == 0.0 {
            return;
        }
        let c = dot(u, v) / (nu * nv);
        for k in 0..self.dim {
            let du = v[k] / (nu * nv) - c * u[k] / (nu * nu);
            let dv = u[k] / (nu * nv) - c * v[k] / (nv * nv);
            grad[i * self.dim + k] += sign * du;
            grad[j * self.dim + k] += sign * dv;
        }
    }

    /// Analytic gradient of each unweighted component. Hinges at exactly
    /// zero contribute nothing.
    pub fn gradients(&self, data: &[f64]) -> Gradients {
        let n = self.rows * self.dim;
        assert_eq!(data.len(), n);
        let mut g = Gradients {
            syn: vec![0.0; n],
            ant: vec![0.0; n],
            preserve: vec![0.0; n],
        };
        for &(i, j) in &self.syn {
            if self.delta_syn - self.cos(data, i, j) > 0.0 {
                self.add_cos_grad(data, i, j, -1.0, &mut g.syn);
            }
        }
        for &(i, j) in &self.ant {
            if self.delta_ant + self.cos(data, i, j) > 0.0 {
                self.add_cos_grad(data, i, j, 1.0, &mut g.ant);
            }
        }
        for &(i, j, c0) in &self.preserve {
            if c0 - self.cos(data, i, j) > 0.0 {
                self.add_cos_grad(data, i, j, -1.0, &mut g.preserve);
            }
        }
        g
    }

    /// Gradient of the weighted total.
    pub fn total_gradient(&self, data: &[f64]) -> Vec<f64> {
        let g = self.gradients(data);
        let [ws, wa, wp] = self.weights;
        (0..data.len())
            .map(|k| ws * g.syn[k] + wa * g.ant[k] + wp * g.preserve[k])
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetrofitReport {
    /// Losses of the input space, before any update.
    pub initial: Losses,
    /// Losses after each epoch.
    pub loss_per_epoch: Vec<Losses>,
    pub dropped_pairs: usize,
    pub trainable_words: usize,
    pub final_space: VectorSpace,
}

/// Runs counter-fitting on `space`.
pub fn counterfit(
    space: &VectorSpace,
    constraints: &ConstraintSet,
    cfg: &RetrofitConfig,
) -> Result<RetrofitReport, CounterfitError> {
    cfg.validate()?;
    let (constraints, dropped_pairs) = constraints.restrict_to(space);
    if constraints.is_empty() {
        return Err(CounterfitError::NoConstraints);
    }
    let anchors = constraints.anchors();
    let neighborhoods = neighborhoods_for(space, anchors, cfg.neighbors, &constraints);
    let objective = Objective::new(space, &constraints, &neighborhoods, cfg)?;
    let trainable = objective.trainable();

    let mut current = space.clone();
    let initial = objective.losses(current.as_slice());
    let mut loss_per_epoch = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let grad = objective.total_gradient(current.as_slice());
        let dim = current.dim();
        let data = current.as_mut_slice();
        for &i in &trainable {
            let row = &mut data[i * dim..(i + 1) * dim];
            for (x, g) in row.iter_mut().zip(&grad[i * dim..(i + 1) * dim]) {
                *x -= cfg.learning_rate * g;
            }
            normalize_in_place(row);
        }
        loss_per_epoch.push(objective.losses(current.as_slice()));
    }
    if cfg.epochs == 0 {
        current = space.clone();
    } else {
        current.set_normalized(space.is_normalized() || trainable.len() == space.len());
    }
    Ok(RetrofitReport {
        initial,
        loss_per_epoch,
        dropped_pairs,
        trainable_words: trainable.len(),
        final_space: current,
    })
}

/// Mean cosine over the pairs that resolve in `space`; `None` when none do.
pub fn mean_cosine<'a, I>(space: &VectorSpace, pairs: I) -> Option<f64>
where
    I: IntoIterator<Item = &'a WordPair>,
{
    let cosines: Vec<f64> = pairs
        .into_iter()
        .filter_map(|(a, b)| pair_cos(space, a, b).ok())
        .collect();
    (!cosines.is_empty()).then(|| cosines.iter().sum::<f64>() / cosines.len() as f64)
}

impl FromStr for NeighborMode {
    type Err = String;

    /// `k=<n>` or `threshold=<t>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected `k=<n>` or `threshold=<t>`, got `{s}`");
        match s.split_once('=') {
            Some(("k", n)) => n
                .trim()
                .parse()
                .map(NeighborMode::Nearest)
                .map_err(|_| bad()),
            Some(("threshold", t)) => t
                .trim()
                .parse()
                .map(NeighborMode::Threshold)
                .map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pair(a: &str, b: &str) -> WordPair {
        ordered(a, b)
    }

    fn space(text: &str) -> VectorSpace {
        text.parse().unwrap()
    }

    #[test]
    fn constraint_set_rules() {
        let cs = ConstraintSet::from_tsv("b\ta\na\tb\nc\tc\n", "# antonyms\nhot\tcold\n").unwrap();
        assert_eq!(cs.synonyms().iter().collect::<Vec<_>>(), [&pair("a", "b")]);
        assert_eq!(cs.antonyms().len(), 1);
        assert_eq!(
            ConstraintSet::from_tsv("a\tb\n", "b\ta\n"),
            Err(CounterfitError::Conflict("a".into(), "b".into()))
        );
        assert_eq!(
            ConstraintSet::from_tsv("a b\n", ""),
            Err(CounterfitError::Syntax { line: 1 })
        );
        let vs = space("a 1 0\nb 0 1\n");
        let (r, dropped) = ConstraintSet::from_tsv("a\tb\na\tz\n", "b\ty\n")
            .unwrap()
            .restrict_to(&vs);
        assert_eq!((r.len(), dropped), (1, 2));
    }

    #[test]
    fn hinge_losses() {
        let vs = space("l 1 0\nr 0 1\ns 1 0\nh 1 1.7320508075688772\n");
        assert_eq!(loss_syn(&vs, &[pair("l", "r")], 1.0).unwrap(), 1.0);
        assert_eq!(loss_syn(&vs, &[pair("l", "s")], 1.0).unwrap(), 0.0);
        assert_eq!(loss_syn(&vs, &[], 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            loss_ant(&vs, &[pair("l", "h")], 0.0).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_eq!(loss_ant(&vs, &[pair("l", "r")], 0.0).unwrap(), 0.0);
        let opposite = space("a 1 0\nb -1 0\n");
        assert_eq!(loss_ant(&opposite, &[pair("a", "b")], 0.0).unwrap(), 0.0);
        assert!(matches!(
            loss_syn(&vs, &[pair("l", "zz")], 1.0),
            Err(CounterfitError::UnresolvedPair(..))
        ));
    }

    #[test]
    fn preserve_loss() {
        let before = space("i 1 0\nj 0.9 0.4358898943540673\n");
        let after = space("i 1 0\nj 0.4 0.916515138991168\n");
        let hoods = Neighborhoods::from([("i".to_string(), vec!["j".to_string()])]);
        assert_eq!(loss_preserve(&before, &before, &hoods).unwrap(), 0.0);
        assert_abs_diff_eq!(
            loss_preserve(&before, &after, &hoods).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_eq!(loss_preserve(&after, &before, &hoods).unwrap(), 0.0);
        let other = space("i 1 0\nk 0 1\n");
        assert_eq!(
            loss_preserve(&before, &other, &hoods),
            Err(CounterfitError::VocabularyMismatch)
        );
    }

    #[test]
    fn neighborhoods_clamp_and_exclude() {
        let vs = space("a 1 0\nb 0 1\n");
        let hoods = build_neighborhoods(&vs, NeighborMode::Nearest(10), &ConstraintSet::default());
        assert_eq!(hoods["a"], ["b"]);
        assert_eq!(hoods["b"], ["a"]);

        let vs = space("a 1 0\nb 1 0\nc 1 0.1\nd 0 1\n");
        let cs = ConstraintSet::new([("a".into(), "c".into())], []).unwrap();
        let hoods = build_neighborhoods(&vs, NeighborMode::Nearest(2), &cs);
        assert_eq!(hoods["a"], ["b", "d"]);
        assert_eq!(hoods["b"], ["a", "c"]);
        let hoods = build_neighborhoods(&vs, NeighborMode::Threshold(0.5), &cs);
        assert_eq!(hoods["d"], Vec::<String>::new());
        assert_eq!(hoods["b"], ["a", "c"]);
    }

    #[test]
    fn config_validation_and_keys() {
        RetrofitConfig::default().validate().unwrap();
        let mut cfg = RetrofitConfig::default();
        let mut kv: KeyValues = "retrofit.k = 3\nretrofit.epochs = 0\nretrofit.delta_ant = 0.2"
            .parse()
            .unwrap();
        cfg.apply(&mut kv).unwrap();
        kv.finish().unwrap();
        assert_eq!(cfg.neighbors, NeighborMode::Nearest(3));
        assert_eq!(cfg.epochs, 0);
        assert_eq!(cfg.delta_ant, 0.2);
        for bad in [
            "retrofit.k = 0",
            "retrofit.delta_syn = 0",
            "retrofit.delta_ant = 1",
            "retrofit.learning_rate = 0",
            "retrofit.lambda_syn = -1",
            "retrofit.k = 2\nretrofit.threshold = 0.5",
        ] {
            let mut kv: KeyValues = bad.parse().unwrap();
            assert!(RetrofitConfig::default().apply(&mut kv).is_err(), "{bad}");
        }
        let mut cfg = RetrofitConfig {
            delta_syn: 0.3,
            delta_ant: 0.3,
            ..RetrofitConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.delta_ant = 0.1;
        cfg.validate().unwrap();
    }

    #[test]
    fn zero_epochs_and_empty_constraints() {
        let vs = space("a 3 0\nb 0 2\nc 1 1\n");
        let cs = ConstraintSet::new([("a".into(), "b".into())], []).unwrap();
        let cfg = RetrofitConfig {
            epochs: 0,
            ..RetrofitConfig::default()
        };
        let report = counterfit(&vs, &cs, &cfg).unwrap();
        assert_eq!(report.final_space, vs);
        assert!(report.loss_per_epoch.is_empty());
        let oov = ConstraintSet::new([("a".into(), "zzz".into())], []).unwrap();
        assert_eq!(
            counterfit(&vs, &oov, &cfg),
            Err(CounterfitError::NoConstraints)
        );
    }

    #[test]
    fn satisfied_constraints_leave_vectors() {
        let vs = space("a 1 0\nb 1 0\nc -1 0\n");
        let cs =
            ConstraintSet::new([("a".into(), "b".into())], [("a".into(), "c".into())]).unwrap();
        let report = counterfit(&vs, &cs, &RetrofitConfig::default()).unwrap();
        assert_eq!(report.initial.total, 0.0);
        for l in &report.loss_per_epoch {
            assert_eq!(l.total, 0.0);
        }
        assert_eq!(report.final_space.as_slice(), vs.as_slice());
    }

    #[test]
    fn frozen_words_do_not_move() {
        let vs = space("a 1 0.2\nb 0.1 1\nc 0.5 0.5\nfar -3 -1\n");
        let cs = ConstraintSet::new([("a".into(), "b".into())], []).unwrap();
        let cfg = RetrofitConfig {
            neighbors: NeighborMode::Nearest(1),
            ..RetrofitConfig::default()
        };
        let report = counterfit(&vs, &cs, &cfg).unwrap();
        assert_eq!(report.trainable_words, 3);
        assert_eq!(report.final_space.get("far"), vs.get("far"));
        let before = mean_cosine(&vs, cs.synonyms()).unwrap();
        let after = mean_cosine(&report.final_space, cs.synonyms()).unwrap();
        assert!(after > before);
    }

    #[test]
    fn neighbor_mode_from_str() {
        assert_eq!("k=4".parse(), Ok(NeighborMode::Nearest(4)));
        assert_eq!("threshold=0.6".parse(), Ok(NeighborMode::Threshold(0.6)));
        assert!("k".parse::<NeighborMode>().is_err());
    }
}
