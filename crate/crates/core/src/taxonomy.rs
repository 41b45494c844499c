//! Immutable IS-A / HAS-A semantic network.
//!
//! A [`Taxonomy`] is parsed from a small line-based text format:
//!
//! ```text
//! # comment
//! synset cat n cat,true_cat
//!   gloss a small domesticated feline mammal
//!   rel hypernym animal
//! ```
//!
//! Every relation is stored together with its inverse, so a file only needs
//! to list one direction of each link. Depth is node-counted: roots have
//! depth 1.

use std::borrow::Borrow;
use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::io::Read;
use std::str::FromStr;

use thiserror::Error;

/// Shortest-path predecessor links, `v -> [(u, r)]` for `u --r--> v`.
pub(crate) type Preds = HashMap<usize, Vec<(usize, RelationType)>>;

/// Opaque, non-empty synset identifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SynsetId(String);

impl SynsetId {
    pub fn new(id: impl Into<String>) -> Option<Self> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            None
        } else {
            Some(SynsetId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for SynsetId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Part of speech of a synset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
}

impl Pos {
    pub fn tag(self) -> &'static str {
        match self {
            Pos::Noun => "n",
            Pos::Verb => "v",
            Pos::Adjective => "a",
        }
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "n" | "noun" => Ok(Pos::Noun),
            "v" | "verb" => Ok(Pos::Verb),
            "a" | "adj" | "adjective" => Ok(Pos::Adjective),
            other => Err(format!("unknown part of speech `{other}`")),
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Direction class of a relation, used to count direction changes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
    Horizontal,
}

/// Typed, directed relation between synsets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationType {
    Hypernym,
    Hyponym,
    Holonym,
    Meronym,
    Antonym,
}

impl RelationType {
    pub const ALL: [RelationType; 5] = [
        RelationType::Hypernym,
        RelationType::Hyponym,
        RelationType::Holonym,
        RelationType::Meronym,
        RelationType::Antonym,
    ];

    pub fn inverse(self) -> Self {
        match self {
            RelationType::Hypernym => RelationType::Hyponym,
            RelationType::Hyponym => RelationType::Hypernym,
            RelationType::Holonym => RelationType::Meronym,
            RelationType::Meronym => RelationType::Holonym,
            RelationType::Antonym => RelationType::Antonym,
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            RelationType::Hypernym | RelationType::Holonym => Direction::Up,
            RelationType::Hyponym | RelationType::Meronym => Direction::Down,
            RelationType::Antonym => Direction::Horizontal,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationType::Hypernym => "hypernym",
            RelationType::Hyponym => "hyponym",
            RelationType::Holonym => "holonym",
            RelationType::Meronym => "meronym",
            RelationType::Antonym => "antonym",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl FromStr for RelationType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationType::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown relation type `{s}`"))
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of relation types a path search may traverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RelationSet(u8);

impl RelationSet {
    pub const EMPTY: RelationSet = RelationSet(0);
    /// Hypernym and hyponym links only.
    pub const IS_A: RelationSet = RelationSet(0b00011);
    /// Every relation type.
    pub const ALL: RelationSet = RelationSet(0b11111);

    pub fn contains(self, r: RelationType) -> bool {
        self.0 & r.bit() != 0
    }

    pub fn with(self, r: RelationType) -> Self {
        RelationSet(self.0 | r.bit())
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: RelationSet) -> bool {
        self.0 & !other.0 == 0
    }
}

impl FromIterator<RelationType> for RelationSet {
    fn from_iter<I: IntoIterator<Item = RelationType>>(iter: I) -> Self {
        iter.into_iter().fold(RelationSet::EMPTY, RelationSet::with)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Synset {
    pub id: SynsetId,
    pub pos: Pos,
    pub lemmas: Vec<String>,
    pub gloss: String,
    /// Outgoing relations, declared ones first, then materialized inverses.
    pub relations: Vec<(RelationType, SynsetId)>,
}

/// Result of a shortest-path query.
#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub length: usize,
    pub nodes: Vec<SynsetId>,
    pub relation_seq: Vec<RelationType>,
    pub direction_changes: usize,
    /// Deepest node on an IS-A path that subsumes both endpoints.
    pub ncn: Option<SynsetId>,
}

#[derive(Debug, Error, PartialEq)]
pub enum TaxonomyError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("taxonomy contains no synsets")]
    NoSynsets,
    #[error("line {line}: duplicate synset id `{id}`")]
    DuplicateSynset { id: String, line: usize },
    #[error("line {line}: relation from `{source_id}` points at unknown synset `{target}`")]
    DanglingTarget {
        source_id: String,
        target: String,
        line: usize,
    },
    #[error("line {line}: synset `{id}` relates to itself")]
    SelfRelation { id: String, line: usize },
    #[error("hypernym cycle through `{id}`")]
    HypernymCycle { id: String },
    #[error("synset `{id}` cannot reach any root")]
    Orphan { id: String },
    #[error("unknown synset `{0}`")]
    UnknownSynset(String),
    #[error("empty relation set")]
    EmptyRelationSet,
    #[error("i/o error: {0}")]
    Io(String),
}

/// Validated, immutable taxonomy.
#[derive(Clone, Debug, PartialEq)]
pub struct Taxonomy {
    synsets: Vec<Synset>,
    index: HashMap<SynsetId, usize>,
    adjacency: Vec<Vec<(RelationType, usize)>>,
    lemma_index: HashMap<String, Vec<usize>>,
    roots: Vec<usize>,
    depths: Vec<u32>,
}

struct RawSynset {
    id: String,
    pos: Pos,
    lemmas: Vec<String>,
    gloss: String,
    line: usize,
    relations: Vec<(RelationType, String, usize)>,
}

/// Whitespace-separated tokens with their 1-based character column.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push((c + 1, &line[b..byte]));
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        out.push((c + 1, &line[b..]));
    }
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> TaxonomyError {
    TaxonomyError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn parse_raw(text: &str) -> Result<Vec<RawSynset>, TaxonomyError> {
    let mut raw: Vec<RawSynset> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indented = trimmed.len() != line.len();
        let indent_cols = line.chars().count() - trimmed.chars().count();
        if !indented {
            let toks = tokens(strip_comment(line));
            match toks.first() {
                Some((_, "synset")) => {}
                Some((col, other)) => {
                    return Err(syntax(
                        lineno,
                        *col,
                        format!("expected `synset`, found `{other}`"),
                    ))
                }
                None => continue,
            }
            if toks.len() != 4 {
                let col = toks.get(4).map_or(line.chars().count() + 1, |t| t.0);
                return Err(syntax(
                    lineno,
                    col,
                    "expected `synset <id> <pos> <lemma,...>`",
                ));
            }
            let pos = toks[2]
                .1
                .parse::<Pos>()
                .map_err(|e| syntax(lineno, toks[2].0, e))?;
            let mut lemmas = Vec::new();
            for lemma in toks[3].1.split(',') {
                if lemma.is_empty() {
                    return Err(syntax(lineno, toks[3].0, "empty lemma"));
                }
                lemmas.push(lemma.to_lowercase());
            }
            raw.push(RawSynset {
                id: toks[1].1.to_string(),
                pos,
                lemmas,
                gloss: String::new(),
                line: lineno,
                relations: Vec::new(),
            });
            continue;
        }

        let current = raw
            .last_mut()
            .ok_or_else(|| syntax(lineno, indent_cols + 1, "attribute line before any synset"))?;
        if let Some(rest) = trimmed.strip_prefix("gloss") {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                current.gloss = rest.trim().to_string();
                continue;
            }
        }
        let toks = tokens(strip_comment(line));
        match toks.first() {
            Some((_, "rel")) => {}
            Some((col, other)) => {
                return Err(syntax(
                    lineno,
                    *col,
                    format!("expected `gloss` or `rel`, found `{other}`"),
                ))
            }
            None => continue,
        }
        if toks.len() != 3 {
            let col = toks.get(3).map_or(line.chars().count() + 1, |t| t.0);
            return Err(syntax(lineno, col, "expected `rel <type> <target>`"));
        }
        let rel = toks[1]
            .1
            .parse::<RelationType>()
            .map_err(|e| syntax(lineno, toks[1].0, e))?;
        current.relations.push((rel, toks[2].1.to_string(), lineno));
    }
    Ok(raw)
}

/// Parses and validates a taxonomy from a byte stream.
pub fn parse_taxonomy<R: Read>(mut source: R) -> Result<Taxonomy, TaxonomyError> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| TaxonomyError::Io(e.to_string()))?;
    text.parse()
}

impl FromStr for Taxonomy {
    type Err = TaxonomyError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        Taxonomy::build(parse_raw(text)?)
    }
}

impl Taxonomy {
    fn build(raw: Vec<RawSynset>) -> Result<Self, TaxonomyError> {
        if raw.is_empty() {
            return Err(TaxonomyError::NoSynsets);
        }
        let mut index = HashMap::with_capacity(raw.len());
        for (i, r) in raw.iter().enumerate() {
            let id = SynsetId(r.id.clone());
            if index.insert(id, i).is_some() {
                return Err(TaxonomyError::DuplicateSynset {
                    id: r.id.clone(),
                    line: r.line,
                });
            }
        }

        let n = raw.len();
        let mut adjacency: Vec<Vec<(RelationType, usize)>> = vec![Vec::new(); n];
        let mut seen: HashSet<(usize, RelationType, usize)> = HashSet::new();
        let mut add = |adj: &mut Vec<Vec<(RelationType, usize)>>, from, rel, to| {
            if seen.insert((from, rel, to)) {
                adj[from].push((rel, to));
            }
        };
        // Declared edges first so that a synset's own listing order survives
        // a serialize/parse round trip.
        let mut resolved = Vec::new();
        for (i, r) in raw.iter().enumerate() {
            for (rel, target, line) in &r.relations {
                let j =
                    *index
                        .get(target.as_str())
                        .ok_or_else(|| TaxonomyError::DanglingTarget {
                            source_id: r.id.clone(),
                            target: target.clone(),
                            line: *line,
                        })?;
                if i == j {
                    return Err(TaxonomyError::SelfRelation {
                        id: r.id.clone(),
                        line: *line,
                    });
                }
                add(&mut adjacency, i, *rel, j);
                resolved.push((i, *rel, j));
            }
        }
        for (i, rel, j) in resolved {
            add(&mut adjacency, j, rel.inverse(), i);
        }

        let roots: Vec<usize> = (0..n)
            .filter(|&i| {
                !adjacency[i]
                    .iter()
                    .any(|(r, _)| *r == RelationType::Hypernym)
            })
            .collect();

        check_acyclic(&raw, &adjacency)?;

        // Multi-source BFS down hyponym links gives the minimum number of
        // hypernym links to any root.
        let mut depths = vec![0u32; n];
        let mut frontier = roots.clone();
        for &r in &roots {
            depths[r] = 1;
        }
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for u in frontier {
                for &(rel, v) in &adjacency[u] {
                    if rel == RelationType::Hyponym && depths[v] == 0 {
                        depths[v] = depths[u] + 1;
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        if let Some(i) = depths.iter().position(|&d| d == 0) {
            return Err(TaxonomyError::Orphan {
                id: raw[i].id.clone(),
            });
        }

        let mut lemma_index: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, r) in raw.iter().enumerate() {
            for lemma in &r.lemmas {
                let senses = lemma_index.entry(lemma.clone()).or_default();
                if !senses.contains(&i) {
                    senses.push(i);
                }
            }
        }

        let mut synsets = raw
            .into_iter()
            .map(|r| Synset {
                id: SynsetId(r.id),
                pos: r.pos,
                lemmas: r.lemmas,
                gloss: r.gloss,
                relations: Vec::new(),
            })
            .collect::<Vec<_>>();
        for i in 0..n {
            let rels = adjacency[i]
                .iter()
                .map(|&(rel, j)| (rel, synsets[j].id.clone()))
                .collect();
            synsets[i].relations = rels;
        }

        Ok(Taxonomy {
            synsets,
            index,
            adjacency,
            lemma_index,
            roots,
            depths,
        })
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    /// Synsets in file order.
    pub fn synsets(&self) -> impl Iterator<Item = &Synset> {
        self.synsets.iter()
    }

    pub fn synset(&self, id: &str) -> Option<&Synset> {
        self.index.get(id).map(|&i| &self.synsets[i])
    }

    pub fn roots(&self) -> Vec<&SynsetId> {
        self.roots.iter().map(|&i| &self.synsets[i].id).collect()
    }

    pub fn max_depth(&self) -> u32 {
        self.depths.iter().copied().max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    /// Senses of `word` in file order, optionally restricted to one part of speech.
    pub fn senses(&self, word: &str, pos: Option<Pos>) -> Vec<&SynsetId> {
        self.sense_indices(word, pos)
            .into_iter()
            .map(|i| &self.synsets[i].id)
            .collect()
    }

    pub(crate) fn sense_indices(&self, word: &str, pos: Option<Pos>) -> Vec<usize> {
        let key = normalize_lemma(word);
        self.lemma_index
            .get(&key)
            .map(|senses| {
                senses
                    .iter()
                    .copied()
                    .filter(|&i| pos.is_none_or(|p| self.synsets[i].pos == p))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Every lemma in the index, sorted.
    pub fn lemmas(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.lemma_index.keys().map(String::as_str).collect();
        out.sort_unstable();
        out
    }

    pub(crate) fn ix(&self, id: &str) -> Result<usize, TaxonomyError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| TaxonomyError::UnknownSynset(id.to_string()))
    }

    pub(crate) fn id_of(&self, ix: usize) -> &SynsetId {
        &self.synsets[ix].id
    }

    pub(crate) fn synset_at(&self, ix: usize) -> &Synset {
        &self.synsets[ix]
    }

    pub(crate) fn depth_at(&self, ix: usize) -> u32 {
        self.depths[ix]
    }

    pub(crate) fn neighbors(&self, ix: usize) -> &[(RelationType, usize)] {
        &self.adjacency[ix]
    }

    pub(crate) fn root_indices(&self) -> &[usize] {
        &self.roots
    }

    pub(crate) fn density_at(&self, ix: usize, r: RelationType) -> usize {
        self.adjacency[ix]
            .iter()
            .filter(|(rel, _)| *rel == r)
            .count()
    }

    /// Node-counted depth: 1 + the fewest hypernym links to any root.
    pub fn depth(&self, id: &str) -> Result<u32, TaxonomyError> {
        Ok(self.depths[self.ix(id)?])
    }

    /// Number of `r` edges leaving `id`.
    pub fn local_density(&self, id: &str, r: RelationType) -> Result<usize, TaxonomyError> {
        Ok(self.density_at(self.ix(id)?, r))
    }

    /// Reflexive hypernym ancestors of `ix` with their minimum upward distance.
    pub(crate) fn ancestors(&self, ix: usize) -> HashMap<usize, u32> {
        let mut dist = HashMap::new();
        dist.insert(ix, 0);
        let mut frontier = vec![ix];
        let mut d = 0;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for u in frontier {
                for &(rel, v) in &self.adjacency[u] {
                    if rel == RelationType::Hypernym && !dist.contains_key(&v) {
                        dist.insert(v, d);
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    pub(crate) fn ncn_at(&self, a: usize, b: usize) -> Option<usize> {
        self.ncn_with_distances(a, b).map(|(x, _, _)| x)
    }

    /// The nearest common node with the hypernym link counts from `a` and
    /// `b` up to it.
    pub(crate) fn ncn_with_distances(&self, a: usize, b: usize) -> Option<(usize, u32, u32)> {
        let up_a = self.ancestors(a);
        let up_b = self.ancestors(b);
        up_a.iter()
            .filter_map(|(x, da)| up_b.get(x).map(|db| (*x, *da, *db)))
            .min_by(|(x, xa, xb), (y, ya, yb)| {
                (xa + xb)
                    .cmp(&(ya + yb))
                    .then(self.depths[*y].cmp(&self.depths[*x]))
                    .then(self.synsets[*x].id.cmp(&self.synsets[*y].id))
            })
    }

    /// Every link that lies on some shortest `allowed` path from `a` to `b`,
    /// as `v -> [(u, r)]` meaning `u --r--> v`, plus the path length.
    pub(crate) fn shortest_links(
        &self,
        a: usize,
        b: usize,
        allowed: RelationSet,
        max_len: Option<usize>,
    ) -> Option<(usize, Preds)> {
        let mut dist = HashMap::from([(a, 0usize)]);
        let mut preds: Preds = HashMap::new();
        let mut frontier = vec![a];
        let mut d = 0;
        while !dist.contains_key(&b) {
            if frontier.is_empty() || max_len.is_some_and(|m| d >= m) {
                return None;
            }
            d += 1;
            let mut next = Vec::new();
            for &u in &frontier {
                for &(r, v) in &self.adjacency[u] {
                    if !allowed.contains(r) {
                        continue;
                    }
                    match dist.get(&v) {
                        None => {
                            dist.insert(v, d);
                            next.push(v);
                            preds.entry(v).or_default().push((u, r));
                        }
                        Some(&dv) if dv == d => preds.entry(v).or_default().push((u, r)),
                        Some(_) => {}
                    }
                }
            }
            frontier = next;
        }
        Some((d, preds))
    }

    /// Nearest common hypernym ancestor (reflexive).
    ///
    /// Minimizes the summed upward distance from both synsets; ties go to the
    /// deeper node, then to the lexicographically smaller id.
    pub fn ncn(&self, a: &str, b: &str) -> Result<Option<SynsetId>, TaxonomyError> {
        let (a, b) = (self.ix(a)?, self.ix(b)?);
        Ok(self.ncn_at(a, b).map(|x| self.synsets[x].id.clone()))
    }

    /// Breadth-first shortest path over edges whose type is in `allowed`.
    ///
    /// Among equally short paths the one with the fewest direction changes
    /// wins. `max_len` bounds the search; `None` means unlimited.
    pub fn shortest_path(
        &self,
        a: &str,
        b: &str,
        allowed: RelationSet,
        max_len: Option<usize>,
    ) -> Result<Option<PathResult>, TaxonomyError> {
        if allowed.is_empty() {
            return Err(TaxonomyError::EmptyRelationSet);
        }
        let (a, b) = (self.ix(a)?, self.ix(b)?);
        Ok(self.path_at(a, b, allowed, max_len))
    }

    pub(crate) fn path_at(
        &self,
        a: usize,
        b: usize,
        allowed: RelationSet,
        max_len: Option<usize>,
    ) -> Option<PathResult> {
        let steps = self.path_steps(a, b, allowed, max_len)?;
        let mut nodes = vec![a];
        let mut relation_seq = Vec::with_capacity(steps.len());
        for &(rel, v) in &steps {
            relation_seq.push(rel);
            nodes.push(v);
        }
        let direction_changes = relation_seq
            .windows(2)
            .filter(|w| w[0].direction() != w[1].direction())
            .count();
        let ncn = if allowed.is_subset_of(RelationSet::IS_A) {
            let up_a = self.ancestors(a);
            let up_b = self.ancestors(b);
            nodes
                .iter()
                .copied()
                .filter(|x| up_a.contains_key(x) && up_b.contains_key(x))
                .min_by(|x, y| {
                    self.depths[*y]
                        .cmp(&self.depths[*x])
                        .then(self.synsets[*x].id.cmp(&self.synsets[*y].id))
                })
                .map(|x| self.synsets[x].id.clone())
        } else {
            None
        };
        Some(PathResult {
            length: steps.len(),
            nodes: nodes
                .into_iter()
                .map(|i| self.synsets[i].id.clone())
                .collect(),
            relation_seq,
            direction_changes,
            ncn,
        })
    }

    /// Layered BFS; within each layer a small DP keyed by (node, last
    /// direction) keeps the fewest direction changes seen so far.
    fn path_steps(
        &self,
        a: usize,
        b: usize,
        allowed: RelationSet,
        max_len: Option<usize>,
    ) -> Option<Vec<(RelationType, usize)>> {
        if a == b {
            return Some(Vec::new());
        }
        type State = (usize, Option<Direction>);
        struct Best {
            changes: usize,
            parent: Option<(State, RelationType)>,
        }
        let mut layer_of: HashMap<usize, usize> = HashMap::new();
        let mut best: HashMap<State, Best> = HashMap::new();
        layer_of.insert(a, 0);
        best.insert(
            (a, None),
            Best {
                changes: 0,
                parent: None,
            },
        );
        let mut frontier: Vec<State> = vec![(a, None)];
        let mut depth = 0usize;
        let goal = loop {
            if frontier.is_empty() || max_len.is_some_and(|m| depth >= m) {
                return None;
            }
            depth += 1;
            let mut next: Vec<State> = Vec::new();
            for &state in &frontier {
                let changes = best[&state].changes;
                let (u, last) = state;
                for &(rel, v) in &self.adjacency[u] {
                    if !allowed.contains(rel) {
                        continue;
                    }
                    match layer_of.get(&v) {
                        Some(&l) if l != depth => continue,
                        Some(_) => {}
                        None => {
                            layer_of.insert(v, depth);
                        }
                    }
                    let dir = rel.direction();
                    let cost = changes + usize::from(last.is_some_and(|d| d != dir));
                    let key = (v, Some(dir));
                    match best.get_mut(&key) {
                        Some(existing) => {
                            if cost < existing.changes {
                                existing.changes = cost;
                                existing.parent = Some((state, rel));
                            }
                        }
                        None => {
                            best.insert(
                                key,
                                Best {
                                    changes: cost,
                                    parent: Some((state, rel)),
                                },
                            );
                            next.push(key);
                        }
                    }
                }
            }
            let reached = [Direction::Up, Direction::Down, Direction::Horizontal]
                .into_iter()
                .filter_map(|d| best.get(&(b, Some(d))).map(|s| ((b, Some(d)), s.changes)))
                .min_by_key(|(_, c)| *c);
            if let Some((state, _)) = reached {
                break state;
            }
            frontier = next;
        };
        let mut steps = Vec::with_capacity(depth);
        let mut cur = goal;
        while let Some((prev, rel)) = best[&cur].parent {
            steps.push((rel, cur.0));
            cur = prev;
        }
        steps.reverse();
        Some(steps)
    }

    /// Serializes back to the text format, including materialized inverses.
    pub fn to_tax_string(&self) -> String {
        let mut out = String::new();
        for s in &self.synsets {
            let _ = writeln!(out, "synset {} {} {}", s.id, s.pos, s.lemmas.join(","));
            if !s.gloss.is_empty() {
                let _ = writeln!(out, "  gloss {}", s.gloss);
            }
            for (rel, target) in &s.relations {
                let _ = writeln!(out, "  rel {rel} {target}");
            }
        }
        out
    }
}

/// Lowercases and maps spaces to underscores, the lemma convention of the
/// file format.
pub fn normalize_lemma(word: &str) -> String {
    word.trim().to_lowercase().replace(' ', "_")
}

fn check_acyclic(
    raw: &[RawSynset],
    adjacency: &[Vec<(RelationType, usize)>],
) -> Result<(), TaxonomyError> {
    // Iterative three-colour DFS over hypernym links.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut mark = vec![Mark::White; raw.len()];
    for start in 0..raw.len() {
        if mark[start] != Mark::White {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        mark[start] = Mark::Grey;
        while let Some((u, cursor)) = stack.last_mut() {
            let u = *u;
            let next = adjacency[u][*cursor..]
                .iter()
                .position(|(r, _)| *r == RelationType::Hypernym);
            match next {
                Some(off) => {
                    let v = adjacency[u][*cursor + off].1;
                    *cursor += off + 1;
                    match mark[v] {
                        Mark::Grey => {
                            return Err(TaxonomyError::HypernymCycle {
                                id: raw[v].id.clone(),
                            })
                        }
                        Mark::White => {
                            mark[v] = Mark::Grey;
                            stack.push((v, 0));
                        }
                        Mark::Black => {}
                    }
                }
                None => {
                    mark[u] = Mark::Black;
                    stack.pop();
                }
            }
        }
    }
    Ok(())
}
