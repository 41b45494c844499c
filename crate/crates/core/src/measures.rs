//! The ten taxonomic similarity measures.
//!
//! Sense-level functions take synset ids; [`word_similarity`] lifts any of
//! them to words by taking the maximum over sense pairs. Distances (Sussna,
//! Jiang-Conrath) are reported negated so that larger is always more similar.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::config::{ConfigError, KeyValues};
use crate::infocontent::IcTable;
use crate::taxonomy::{
    normalize_lemma, Pos, RelationSet, RelationType, SynsetId, Taxonomy, TaxonomyError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    Edge,
    Lch,
    Wup,
    Agi,
    Sus,
    Hso,
    Yp,
    Res,
    Jcn,
    Lin,
}

impl Measure {
    pub const ALL: [Measure; 10] = [
        Measure::Edge,
        Measure::Lch,
        Measure::Wup,
        Measure::Agi,
        Measure::Sus,
        Measure::Hso,
        Measure::Yp,
        Measure::Res,
        Measure::Jcn,
        Measure::Lin,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Measure::Edge => "edge",
            Measure::Lch => "lch",
            Measure::Wup => "wup",
            Measure::Agi => "agi",
            Measure::Sus => "sus",
            Measure::Hso => "hso",
            Measure::Yp => "yp",
            Measure::Res => "res",
            Measure::Jcn => "jcn",
            Measure::Lin => "lin",
        }
    }

    pub fn needs_ic(self) -> bool {
        matches!(self, Measure::Res | Measure::Jcn | Measure::Lin)
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Measure::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| format!("unknown measure `{s}`"))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Similarity,
    NegatedDistance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityScore {
    pub value: f64,
    pub scale: Scale,
    pub measure: Measure,
    /// Sense pair that achieved the score.
    pub sense_pair: (SynsetId, SynsetId),
}

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("{measure}: no comparison possible between `{a}` and `{b}`")]
    NoComparison {
        measure: Measure,
        a: String,
        b: String,
    },
    #[error("unknown synset `{0}`")]
    UnknownSynset(String),
    #[error("word `{word}` has no senses{}", pos.map(|p| format!(" for pos {p}")).unwrap_or_default())]
    UnknownWord { word: String, pos: Option<Pos> },
    #[error("{0} needs an information content table")]
    MissingIc(Measure),
    #[error("information content table has no entry for `{0}`")]
    IcCoverage(String),
    #[error("invalid measure configuration: {0}")]
    InvalidConfig(String),
}

impl From<TaxonomyError> for MeasureError {
    fn from(e: TaxonomyError) -> Self {
        match e {
            TaxonomyError::UnknownSynset(id) => MeasureError::UnknownSynset(id),
            other => MeasureError::InvalidConfig(other.to_string()),
        }
    }
}

/// Minimum and maximum link weight for one relation type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightBounds {
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SussnaWeights {
    pub hypernym: WeightBounds,
    pub hyponym: WeightBounds,
    pub holonym: WeightBounds,
    pub meronym: WeightBounds,
    pub antonym: WeightBounds,
}

impl SussnaWeights {
    pub fn get(&self, r: RelationType) -> WeightBounds {
        match r {
            RelationType::Hypernym => self.hypernym,
            RelationType::Hyponym => self.hyponym,
            RelationType::Holonym => self.holonym,
            RelationType::Meronym => self.meronym,
            RelationType::Antonym => self.antonym,
        }
    }

    fn get_mut(&mut self, r: RelationType) -> &mut WeightBounds {
        match r {
            RelationType::Hypernym => &mut self.hypernym,
            RelationType::Hyponym => &mut self.hyponym,
            RelationType::Holonym => &mut self.holonym,
            RelationType::Meronym => &mut self.meronym,
            RelationType::Antonym => &mut self.antonym,
        }
    }
}

impl Default for SussnaWeights {
    fn default() -> Self {
        let is_a = WeightBounds { min: 1.0, max: 2.0 };
        SussnaWeights {
            hypernym: is_a,
            hyponym: is_a,
            holonym: is_a,
            meronym: is_a,
            antonym: WeightBounds { min: 2.5, max: 2.5 },
        }
    }
}

/// Path type used by the Yang-Powers measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathType {
    /// hyper/hyponym
    Hh,
    /// holo/meronym
    Hm,
    /// syn/antonym
    Sa,
    /// identical
    Id,
}

impl PathType {
    const ALL: [PathType; 4] = [PathType::Hh, PathType::Hm, PathType::Sa, PathType::Id];

    fn tag(self) -> &'static str {
        match self {
            PathType::Hh => "hh",
            PathType::Hm => "hm",
            PathType::Sa => "sa",
            PathType::Id => "id",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathTypeWeights {
    pub hh: f64,
    pub hm: f64,
    pub sa: f64,
    pub id: f64,
}

impl PathTypeWeights {
    pub fn uniform(v: f64) -> Self {
        PathTypeWeights {
            hh: v,
            hm: v,
            sa: v,
            id: v,
        }
    }

    pub fn get(&self, t: PathType) -> f64 {
        match t {
            PathType::Hh => self.hh,
            PathType::Hm => self.hm,
            PathType::Sa => self.sa,
            PathType::Id => self.id,
        }
    }

    fn get_mut(&mut self, t: PathType) -> &mut f64 {
        match t {
            PathType::Hh => &mut self.hh,
            PathType::Hm => &mut self.hm,
            PathType::Sa => &mut self.sa,
            PathType::Id => &mut self.id,
        }
    }
}

/// Tunable constants of the measures.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureConfig {
    /// Maximum taxonomy depth `D` used by Leacock-Chodorow.
    pub max_depth: u32,
    /// Hirst-St-Onge ceiling `C`.
    pub hso_ceiling: f64,
    /// Hirst-St-Onge direction-change penalty `K`.
    pub hso_direction_penalty: f64,
    pub hso_min_len: usize,
    pub hso_max_len: usize,
    pub sussna: SussnaWeights,
    pub yp_alpha: PathTypeWeights,
    pub yp_beta: PathTypeWeights,
    /// Depth limit: paths longer than this score 0.
    pub yp_gamma: usize,
    /// Report Agirre's measure as the negated node-count / inverse-depth-sum
    /// distance instead of the inverse-depth-sum similarity.
    pub agi_textual: bool,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            max_depth: 16,
            hso_ceiling: 8.0,
            hso_direction_penalty: 1.0,
            hso_min_len: 2,
            hso_max_len: 5,
            sussna: SussnaWeights::default(),
            yp_alpha: PathTypeWeights::uniform(1.0),
            yp_beta: PathTypeWeights::uniform(0.7),
            yp_gamma: 12,
            agi_textual: false,
        }
    }
}

impl MeasureConfig {
    /// Applies recognized keys from a configuration file.
    ///
    /// Keys: `D`, `hso.C`, `hso.K`, `hso.min_len`, `hso.max_len`,
    /// `sussna.<relation>.min|max`, `yp.alpha.<t>`, `yp.beta.<t>` for
    /// `t` in `hh|hm|sa|id`, `yp.gamma`, `agi.textual`.
    pub fn apply(&mut self, kv: &mut KeyValues) -> Result<(), ConfigError> {
        kv.set("D", &mut self.max_depth)?;
        kv.set("hso.C", &mut self.hso_ceiling)?;
        kv.set("hso.K", &mut self.hso_direction_penalty)?;
        kv.set("hso.min_len", &mut self.hso_min_len)?;
        kv.set("hso.max_len", &mut self.hso_max_len)?;
        for r in RelationType::ALL {
            let bounds = self.sussna.get_mut(r);
            kv.set(&format!("sussna.{r}.min"), &mut bounds.min)?;
            kv.set(&format!("sussna.{r}.max"), &mut bounds.max)?;
        }
        for t in PathType::ALL {
            kv.set(&format!("yp.alpha.{}", t.tag()), self.yp_alpha.get_mut(t))?;
            kv.set(&format!("yp.beta.{}", t.tag()), self.yp_beta.get_mut(t))?;
        }
        kv.set("yp.gamma", &mut self.yp_gamma)?;
        kv.set("agi.textual", &mut self.agi_textual)?;
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        for t in PathType::ALL {
            let (a, b) = (self.yp_alpha.get(t), self.yp_beta.get(t));
            if !(a > 0.0 && a <= 1.0) {
                return bad(format!("yp.alpha.{} must lie in (0, 1]", t.tag()));
            }
            if !(b > 0.0 && b <= 1.0) {
                return bad(format!("yp.beta.{} must lie in (0, 1]", t.tag()));
            }
        }
        if self.yp_gamma < 1 {
            return bad("yp.gamma must be at least 1".into());
        }
        if self.max_depth < 1 {
            return bad("D must be at least 1".into());
        }
        if self.hso_min_len > self.hso_max_len {
            return bad("hso.min_len exceeds hso.max_len".into());
        }
        for r in RelationType::ALL {
            let w = self.sussna.get(r);
            if !(w.min >= 0.0 && w.max >= w.min && w.max.is_finite()) {
                return bad(format!("sussna.{r} needs 0 <= min <= max"));
            }
        }
        Ok(())
    }
}

fn no_comparison(t: &Taxonomy, measure: Measure, a: usize, b: usize) -> MeasureError {
    MeasureError::NoComparison {
        measure,
        a: t.id_of(a).to_string(),
        b: t.id_of(b).to_string(),
    }
}

fn score(
    t: &Taxonomy,
    measure: Measure,
    scale: Scale,
    value: f64,
    a: usize,
    b: usize,
) -> SimilarityScore {
    SimilarityScore {
        value,
        scale,
        measure,
        sense_pair: (t.id_of(a).clone(), t.id_of(b).clone()),
    }
}

use crate::taxonomy::Preds;

/// Folds `step` along every shortest `allowed` path from `a` to `b`,
/// combining converging paths with `merge`. Returns the path length too.
#[allow(clippy::too_many_arguments)]
fn fold_shortest_paths<T: Clone>(
    t: &Taxonomy,
    a: usize,
    b: usize,
    allowed: RelationSet,
    max_len: Option<usize>,
    init: T,
    step: &dyn Fn(&T, usize, RelationType, usize) -> T,
    merge: &dyn Fn(T, T) -> T,
) -> Option<(usize, T)> {
    fn value<T: Clone>(
        v: usize,
        preds: &Preds,
        memo: &mut HashMap<usize, T>,
        step: &dyn Fn(&T, usize, RelationType, usize) -> T,
        merge: &dyn Fn(T, T) -> T,
    ) -> T {
        if let Some(x) = memo.get(&v) {
            return x.clone();
        }
        let mut acc: Option<T> = None;
        for &(u, r) in &preds[&v] {
            let x = step(&value(u, preds, memo, step, merge), u, r, v);
            acc = Some(match acc {
                None => x,
                Some(prev) => merge(prev, x),
            });
        }
        let acc = acc.expect("shortest-path node has a predecessor");
        memo.insert(v, acc.clone());
        acc
    }
    let (len, preds) = t.shortest_links(a, b, allowed, max_len)?;
    let mut memo = HashMap::from([(a, init)]);
    Some((len, value(b, &preds, &mut memo, step, merge)))
}

fn is_a_length(t: &Taxonomy, measure: Measure, a: usize, b: usize) -> Result<usize, MeasureError> {
    t.path_at(a, b, RelationSet::IS_A, None)
        .map(|p| p.length)
        .ok_or_else(|| no_comparison(t, measure, a, b))
}

/// Rada et al. edge counting as `1 / (1 + sd)`.
pub fn sim_edge(t: &Taxonomy, a: &str, b: &str) -> Result<SimilarityScore, MeasureError> {
    edge_at(t, t.ix(a)?, t.ix(b)?)
}

fn edge_at(t: &Taxonomy, a: usize, b: usize) -> Result<SimilarityScore, MeasureError> {
    let sd = is_a_length(t, Measure::Edge, a, b)?;
    Ok(score(
        t,
        Measure::Edge,
        Scale::Similarity,
        1.0 / (1.0 + sd as f64),
        a,
        b,
    ))
}

/// Leacock-Chodorow: `-ln((sd + 1) / 2D)` with the node-counted path.
pub fn sim_lch(
    t: &Taxonomy,
    a: &str,
    b: &str,
    cfg: &MeasureConfig,
) -> Result<SimilarityScore, MeasureError> {
    lch_at(t, t.ix(a)?, t.ix(b)?, cfg)
}

fn lch_at(
    t: &Taxonomy,
    a: usize,
    b: usize,
    cfg: &MeasureConfig,
) -> Result<SimilarityScore, MeasureError> {
    if cfg.max_depth < t.max_depth() {
        return Err(MeasureError::InvalidConfig(format!(
            "D = {} is below the taxonomy depth {}",
            cfg.max_depth,
            t.max_depth()
        )));
    }
    let sd = is_a_length(t, Measure::Lch, a, b)?;
    let value = -((sd as f64 + 1.0) / (2.0 * cfg.max_depth as f64)).ln() + 0.0;
    Ok(score(t, Measure::Lch, Scale::Similarity, value, a, b))
}

/// Wu-Palmer: `2 dep(ncn) / (dep(a) + dep(b))`, where the depth of each
/// endpoint is counted through the nearest common node. On trees this is the
/// plain node depth.
pub fn sim_wup(t: &Taxonomy, a: &str, b: &str) -> Result<SimilarityScore, MeasureError> {
    wup_at(t, t.ix(a)?, t.ix(b)?)
}

fn wup_at(t: &Taxonomy, a: usize, b: usize) -> Result<SimilarityScore, MeasureError> {
    let (ncn, da, db) = t
        .ncn_with_distances(a, b)
        .ok_or_else(|| no_comparison(t, Measure::Wup, a, b))?;
    let dep = t.depth_at(ncn);
    let value = 2.0 * dep as f64 / (da + db + 2 * dep) as f64;
    Ok(score(t, Measure::Wup, Scale::Similarity, value, a, b))
}

/// Agirre et al.: `1 / Σ 1/dep(w_k)` over the nodes of the shortest IS-A
/// path, endpoints included. With `agi_textual` the negated distance
/// `|nodes| / Σ 1/dep(w_k)` is returned instead. When several shortest
/// paths exist the most similar one counts.
pub fn sim_agi(
    t: &Taxonomy,
    a: &str,
    b: &str,
    cfg: &MeasureConfig,
) -> Result<SimilarityScore, MeasureError> {
    agi_at(t, t.ix(a)?, t.ix(b)?, cfg)
}

fn agi_at(
    t: &Taxonomy,
    a: usize,
    b: usize,
    cfg: &MeasureConfig,
) -> Result<SimilarityScore, MeasureError> {
    let inv = |x: usize| 1.0 / t.depth_at(x) as f64;
    let merge: &dyn Fn(f64, f64) -> f64 = if cfg.agi_textual {
        &f64::max
    } else {
        &f64::min
    };
    // A fixed endpoint order keeps the floating-point sum symmetric.
    let (lo, hi) = (a.min(b), a.max(b));
    let (len, inv_depth) = fold_shortest_paths(
        t,
        lo,
        hi,
        RelationSet::IS_A,
        None,
        inv(lo),
        &|acc, _, _, v| acc + inv(v),
        merge,
    )
    .ok_or_else(|| no_comparison(t, Measure::Agi, a, b))?;
    Ok(if cfg.agi_textual {
        let dist = (len + 1) as f64 / inv_depth;
        score(t, Measure::Agi, Scale::NegatedDistance, -dist, a, b)
    } else {
        score(t, Measure::Agi, Scale::Similarity, 1.0 / inv_depth, a, b)
    })
}

/// Sussna's depth-scaled, fanout-weighted distance over the shortest
/// mixed-relation path, returned negated. Among equally short paths the
/// smallest total wins.
pub fn dist_sussna(
    t: &Taxonomy,
    a: &str,
    b: &str,
    cfg: &MeasureConfig,
) -> Result<SimilarityScore, MeasureError> {
    sussna_at(t, t.ix(a)?, t.ix(b)?, cfg)
}

/// Weight of leaving `x` along `r`: `max_r - (max_r - min_r) / nrl(x -> r)`.
pub fn sussna_direction_weight(
    t: &Taxonomy,
    x: &str,
    r: RelationType,
    cfg: &MeasureConfig,
) -> Result<f64, MeasureError> {
    Ok(direction_weight(t, t.ix(x)?, r, cfg))
}

fn direction_weight(t: &Taxonomy, x: usize, r: RelationType, cfg: &MeasureConfig) -> f64 {
    let w = cfg.sussna.get(r);
    let fanout = t.density_at(x, r).max(1) as f64;
    w.max - (w.max - w.min) / fanout
}

/// Distance of the single link `x --r--> y`.
pub fn sussna_link_distance(
    t: &Taxonomy,
    x: &str,
    r: RelationType,
    y: &str,
    cfg: &MeasureConfig,
) -> Result<f64, MeasureError> {
    Ok(link_distance(t, t.ix(x)?, r, t.ix(y)?, cfg))
}

fn link_distance(t: &Taxonomy, x: usize, r: RelationType, y: usize, cfg: &MeasureConfig) -> f64 {
    let forward = direction_weight(t, x, r, cfg);
    let backward = direction_weight(t, y, r.inverse(), cfg);
    (forward + backward) / (2.0 * t.depth_at(x).max(t.depth_at(y)) as f64)
}

fn sussna_at(
    t: &Taxonomy,
    a: usize,
    b: usize,
    cfg: &MeasureConfig,
) -> Result<SimilarityScore, MeasureError> {
    let (_, total) = fold_shortest_paths(
        t,
        a.min(b),
        a.max(b),
        RelationSet::ALL,
        None,
        0.0,
        &|acc, u, r, v| acc + link_distance(t, u, r, v, cfg),
        &f64::min,
    )
    .ok_or_else(|| no_comparison(t, Measure::Sus, a, b))?;
    Ok(score(
        t,
        Measure::Sus,
        Scale::NegatedDistance,
        -total + 0.0,
        a,
        b,
    ))
}

fn strong_score(cfg: &MeasureConfig) -> f64 {
    2.0 * cfg.hso_ceiling - 2.0
}

fn directly_antonymous(t: &Taxonomy, a: usize, b: usize) -> bool {
    t.neighbors(a)
        .iter()
        .any(|&(r, v)| r == RelationType::Antonym && v == b)
}

/// Sense-level Hirst-St-Onge: strong (`2C - 2`) for identical or directly
/// antonymous synsets, otherwise `C - len - K * dir` over the shortest
/// mixed path when its length is within `[hso_min_len, hso_max_len]`, else 0.
pub fn sim_hso_senses(
    t: &Taxonomy,
    a: &str,
    b: &str,
    cfg: &MeasureConfig,
) -> Result<SimilarityScore, MeasureError> {
    hso_senses_at(t, t.ix(a)?, t.ix(b)?, cfg)
}

fn hso_senses_at(
    t: &Taxonomy,
    a: usize,
    b: usize,
    cfg: &MeasureConfig,
) -> Result<SimilarityScore, MeasureError> {
    let value = if a == b || directly_antonymous(t, a, b) {
        strong_score(cfg)
    } else {
        medium_strong(t, a, b, cfg)
    };
    Ok(score(t, Measure::Hso, Scale::Similarity, value, a, b))
}

fn medium_strong(t: &Taxonomy, a: usize, b: usize, cfg: &MeasureConfig) -> f64 {
    match t.path_at(a, b, RelationSet::ALL, Some(cfg.hso_max_len)) {
        Some(p) if p.length >= cfg.hso_min_len => {
            let v = cfg.hso_ceiling
                - p.length as f64
                - cfg.hso_direction_penalty * p.direction_changes as f64;
            v.max(0.0)
        }
        _ => 0.0,
    }
}

/// True when `part` is one component of the multiword lemma `whole`.
fn is_compound_part(part: &str, whole: &str) -> bool {
    let pieces: Vec<&str> = whole.split(['_', '-']).filter(|p| !p.is_empty()).collect();
    pieces.len() > 1 && pieces.contains(&part)
}

/// Word-level Hirst-St-Onge with its three tiers.
pub fn sim_hso(
    t: &Taxonomy,
    wa: &str,
    wb: &str,
    pos: Option<Pos>,
    cfg: &MeasureConfig,
) -> Result<SimilarityScore, MeasureError> {
    let senses_a = senses_or_err(t, wa, pos)?;
    let senses_b = senses_or_err(t, wb, pos)?;
    let (na, nb) = (normalize_lemma(wa), normalize_lemma(wb));
    let hso = |value, a, b| score(t, Measure::Hso, Scale::Similarity, value, a, b);

    if na == nb {
        return Ok(hso(2.0 * cfg.hso_ceiling, senses_a[0], senses_a[0]));
    }
    for &a in &senses_a {
        if let Some(&b) = senses_b
            .iter()
            .find(|&&b| b == a || directly_antonymous(t, a, b))
        {
            return Ok(hso(strong_score(cfg), a, b));
        }
    }
    if is_compound_part(&na, &nb) || is_compound_part(&nb, &na) {
        return Ok(hso(strong_score(cfg), senses_a[0], senses_b[0]));
    }
    let mut best = hso(0.0, senses_a[0], senses_b[0]);
    for &a in &senses_a {
        for &b in &senses_b {
            let v = medium_strong(t, a, b, cfg);
            if v > best.value {
                best = hso(v, a, b);
            }
        }
    }
    Ok(best)
}

const VIA_ANTONYM: u8 = 1;
const VIA_PART: u8 = 2;

fn path_type(len: usize, flags: u8) -> PathType {
    if len == 0 {
        PathType::Id
    } else if flags & VIA_ANTONYM != 0 {
        PathType::Sa
    } else if flags & VIA_PART != 0 {
        PathType::Hm
    } else {
        PathType::Hh
    }
}

fn relation_flag(r: RelationType) -> u8 {
    match r {
        RelationType::Antonym => VIA_ANTONYM,
        RelationType::Holonym | RelationType::Meronym => VIA_PART,
        RelationType::Hypernym | RelationType::Hyponym => 0,
    }
}

/// Yang-Powers: `α_t · β_t^(max(sd,1) - 1)` when `sd <= γ`, else 0. The
/// path type `t` follows precedence id > sa > hm > hh over the relations of
/// a shortest path; with several shortest paths the best score counts.
pub fn sim_yp(
    t: &Taxonomy,
    a: &str,
    b: &str,
    cfg: &MeasureConfig,
) -> Result<SimilarityScore, MeasureError> {
    yp_at(t, t.ix(a)?, t.ix(b)?, cfg)
}

fn yp_at(
    t: &Taxonomy,
    a: usize,
    b: usize,
    cfg: &MeasureConfig,
) -> Result<SimilarityScore, MeasureError> {
    // Bit k of a mask: some shortest path carries relation flags k.
    let spread = |mask: &u8, r: RelationType| -> u8 {
        (0..4u8)
            .filter(|k| mask & (1 << k) != 0)
            .fold(0, |m, k| m | 1 << (k | relation_flag(r)))
    };
    let value = match fold_shortest_paths(
        t,
        a,
        b,
        RelationSet::ALL,
        Some(cfg.yp_gamma),
        1u8,
        &|mask, _, r, _| spread(mask, r),
        &|x, y| x | y,
    ) {
        Some((len, mask)) => (0..4u8)
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| {
                let kind = path_type(len, k);
                let exponent = len.max(1) - 1;
                cfg.yp_alpha.get(kind) * cfg.yp_beta.get(kind).powi(exponent as i32)
            })
            .fold(0.0, f64::max),
        None => 0.0,
    };
    Ok(score(t, Measure::Yp, Scale::Similarity, value, a, b))
}

struct IcTriple {
    ncn: f64,
    a: f64,
    b: f64,
}

fn ic_triple(
    t: &Taxonomy,
    ic: &IcTable,
    measure: Measure,
    a: usize,
    b: usize,
) -> Result<IcTriple, MeasureError> {
    let ncn = t
        .ncn_at(a, b)
        .ok_or_else(|| no_comparison(t, measure, a, b))?;
    let get = |x: usize| {
        let id = t.id_of(x).as_str();
        ic.ic(id)
            .ok_or_else(|| MeasureError::IcCoverage(id.to_string()))
    };
    let triple = IcTriple {
        ncn: get(ncn)?,
        a: get(a)?,
        b: get(b)?,
    };
    if !(triple.ncn.is_finite() && triple.a.is_finite() && triple.b.is_finite()) {
        return Err(no_comparison(t, measure, a, b));
    }
    Ok(triple)
}

/// Resnik: information content of the nearest common node.
pub fn sim_res(
    t: &Taxonomy,
    ic: &IcTable,
    a: &str,
    b: &str,
) -> Result<SimilarityScore, MeasureError> {
    res_at(t, ic, t.ix(a)?, t.ix(b)?)
}

fn res_at(t: &Taxonomy, ic: &IcTable, a: usize, b: usize) -> Result<SimilarityScore, MeasureError> {
    let v = ic_triple(t, ic, Measure::Res, a, b)?;
    Ok(score(t, Measure::Res, Scale::Similarity, v.ncn, a, b))
}

/// Jiang-Conrath path weight, negated: `2 IC(ncn) - IC(a) - IC(b)`.
pub fn sim_jcn(
    t: &Taxonomy,
    ic: &IcTable,
    a: &str,
    b: &str,
) -> Result<SimilarityScore, MeasureError> {
    jcn_at(t, ic, t.ix(a)?, t.ix(b)?)
}

fn jcn_at(t: &Taxonomy, ic: &IcTable, a: usize, b: usize) -> Result<SimilarityScore, MeasureError> {
    let v = ic_triple(t, ic, Measure::Jcn, a, b)?;
    let value = 2.0 * v.ncn - v.a - v.b + 0.0;
    Ok(score(t, Measure::Jcn, Scale::NegatedDistance, value, a, b))
}

/// Lin: `2 IC(ncn) / (IC(a) + IC(b))`.
pub fn sim_lin(
    t: &Taxonomy,
    ic: &IcTable,
    a: &str,
    b: &str,
) -> Result<SimilarityScore, MeasureError> {
    lin_at(t, ic, t.ix(a)?, t.ix(b)?)
}

fn lin_at(t: &Taxonomy, ic: &IcTable, a: usize, b: usize) -> Result<SimilarityScore, MeasureError> {
    let v = ic_triple(t, ic, Measure::Lin, a, b)?;
    let denom = v.a + v.b;
    if denom <= 0.0 {
        return Err(no_comparison(t, Measure::Lin, a, b));
    }
    Ok(score(
        t,
        Measure::Lin,
        Scale::Similarity,
        2.0 * v.ncn / denom,
        a,
        b,
    ))
}

/// Dispatches a sense-level measure by tag.
pub fn sense_similarity(
    t: &Taxonomy,
    measure: Measure,
    a: &str,
    b: &str,
    cfg: &MeasureConfig,
    ic: Option<&IcTable>,
) -> Result<SimilarityScore, MeasureError> {
    sense_at(t, measure, t.ix(a)?, t.ix(b)?, cfg, ic)
}

fn sense_at(
    t: &Taxonomy,
    measure: Measure,
    a: usize,
    b: usize,
    cfg: &MeasureConfig,
    ic: Option<&IcTable>,
) -> Result<SimilarityScore, MeasureError> {
    let need_ic = || ic.ok_or(MeasureError::MissingIc(measure));
    match measure {
        Measure::Edge => edge_at(t, a, b),
        Measure::Lch => lch_at(t, a, b, cfg),
        Measure::Wup => wup_at(t, a, b),
        Measure::Agi => agi_at(t, a, b, cfg),
        Measure::Sus => sussna_at(t, a, b, cfg),
        Measure::Hso => hso_senses_at(t, a, b, cfg),
        Measure::Yp => yp_at(t, a, b, cfg),
        Measure::Res => res_at(t, need_ic()?, a, b),
        Measure::Jcn => jcn_at(t, need_ic()?, a, b),
        Measure::Lin => lin_at(t, need_ic()?, a, b),
    }
}

fn senses_or_err(t: &Taxonomy, word: &str, pos: Option<Pos>) -> Result<Vec<usize>, MeasureError> {
    let senses = t.sense_indices(word, pos);
    if senses.is_empty() {
        Err(MeasureError::UnknownWord {
            word: word.to_string(),
            pos,
        })
    } else {
        Ok(senses)
    }
}

/// Word similarity as the maximum over all sense pairs.
///
/// Sense pairs without a comparison are ignored; if every pair lacks one the
/// result is [`MeasureError::NoComparison`]. Ties keep the first pair in
/// sense order.
pub fn word_similarity(
    t: &Taxonomy,
    measure: Measure,
    wa: &str,
    wb: &str,
    pos: Option<Pos>,
    cfg: &MeasureConfig,
    ic: Option<&IcTable>,
) -> Result<SimilarityScore, MeasureError> {
    if measure.needs_ic() && ic.is_none() {
        return Err(MeasureError::MissingIc(measure));
    }
    if measure == Measure::Hso {
        return sim_hso(t, wa, wb, pos, cfg);
    }
    let senses_a = senses_or_err(t, wa, pos)?;
    let senses_b = senses_or_err(t, wb, pos)?;
    let mut best: Option<SimilarityScore> = None;
    for &a in &senses_a {
        for &b in &senses_b {
            match sense_at(t, measure, a, b, cfg, ic) {
                Ok(s) => {
                    if best.as_ref().is_none_or(|cur| s.value > cur.value) {
                        best = Some(s);
                    }
                }
                Err(MeasureError::NoComparison { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    best.ok_or_else(|| MeasureError::NoComparison {
        measure,
        a: wa.to_string(),
        b: wb.to_string(),
    })
}
