//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the library's path, ancestor or propagation code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use lexsim::counterfit::{
    neighborhoods_for, ConstraintSet, NeighborMode, Objective, RetrofitConfig,
};
use lexsim::embeddings::VectorSpace;
use lexsim::measures::{sense_similarity, PathType};
use lexsim::{
    build_corpus_ic, FrequencyTable, IcTable, Measure, MeasureConfig, MeasureError, RelationType,
    SenseCredit, Taxonomy,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOY9: &str = include_str!("../../fixtures/toy9.tax");

pub fn toy9() -> Taxonomy {
    TOY9.parse().expect("toy9 parses")
}

pub const INF: u32 = u32::MAX / 4;

fn inverse(r: RelationType) -> RelationType {
    use RelationType::*;
    match r {
        Hypernym => Hyponym,
        Hyponym => Hypernym,
        Holonym => Meronym,
        Meronym => Holonym,
        Antonym => Antonym,
    }
}

/// 0 up, 1 down, 2 horizontal.
fn direction_class(r: RelationType) -> u8 {
    use RelationType::*;
    match r {
        Hypernym | Holonym => 0,
        Hyponym | Meronym => 1,
        Antonym => 2,
    }
}

fn is_a(r: RelationType) -> bool {
    matches!(r, RelationType::Hypernym | RelationType::Hyponym)
}

fn floyd_warshall(
    n: usize,
    edges: &[BTreeSet<(RelationType, usize)>],
    keep: impl Fn(RelationType) -> bool,
) -> Vec<Vec<u32>> {
    let mut d = vec![vec![INF; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
        for &(r, v) in &edges[u] {
            if keep(r) {
                row[v] = row[v].min(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// All-pairs view of a taxonomy.
pub struct Oracle {
    pub ids: Vec<String>,
    pub index: HashMap<String, usize>,
    pub lemmas: Vec<Vec<String>>,
    pub edges: Vec<BTreeSet<(RelationType, usize)>>,
    /// Undirected IS-A distances.
    pub isa: Vec<Vec<u32>>,
    /// Distances over every relation.
    pub all: Vec<Vec<u32>>,
    /// `up[x][y]`: hypernym links from `x` up to `y`.
    pub up: Vec<Vec<u32>>,
    pub depth: Vec<u32>,
}

impl Oracle {
    pub fn new(t: &Taxonomy) -> Self {
        let mut ids: Vec<String> = t.synsets().map(|s| s.id.as_str().to_string()).collect();
        ids.sort();
        let index: HashMap<String, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let n = ids.len();
        let mut edges = vec![BTreeSet::new(); n];
        let mut lemmas = vec![Vec::new(); n];
        for s in t.synsets() {
            let u = index[s.id.as_str()];
            lemmas[u] = s.lemmas.clone();
            for (r, target) in &s.relations {
                let v = index[target.as_str()];
                edges[u].insert((*r, v));
                edges[v].insert((inverse(*r), u));
            }
        }
        let isa = floyd_warshall(n, &edges, is_a);
        let all = floyd_warshall(n, &edges, |_| true);
        let up = floyd_warshall(n, &edges, |r| r == RelationType::Hypernym);
        let roots: Vec<usize> = (0..n)
            .filter(|&u| !edges[u].iter().any(|&(r, _)| r == RelationType::Hypernym))
            .collect();
        let depth = (0..n)
            .map(|x| {
                1 + roots
                    .iter()
                    .map(|&r| up[x][r])
                    .min()
                    .expect("a root exists")
            })
            .collect();
        Oracle {
            ids,
            index,
            lemmas,
            edges,
            isa,
            all,
            up,
            depth,
        }
    }

    pub fn ix(&self, id: &str) -> usize {
        self.index[id]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    /// Common ancestor minimising the summed hypernym distance, then deepest,
    /// then smallest id.
    pub fn ncn(&self, a: usize, b: usize) -> Option<usize> {
        let mut best: Option<(u32, std::cmp::Reverse<u32>, &str, usize)> = None;
        for y in 0..self.len() {
            if self.up[a][y] < INF && self.up[b][y] < INF {
                let key = (
                    self.up[a][y] + self.up[b][y],
                    std::cmp::Reverse(self.depth[y]),
                    self.ids[y].as_str(),
                    y,
                );
                if best.as_ref().is_none_or(|b| key < *b) {
                    best = Some(key);
                }
            }
        }
        best.map(|k| k.3)
    }

    /// Every walk of exactly `dist[a][b]` links from `a` to `b`.
    pub fn shortest_walks(
        &self,
        a: usize,
        b: usize,
        isa_only: bool,
    ) -> Vec<Vec<(RelationType, usize)>> {
        let dist = if isa_only { &self.isa } else { &self.all };
        let len = dist[a][b];
        if len >= INF {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.walk(a, b, len, isa_only, dist, &mut stack, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        u: usize,
        b: usize,
        left: u32,
        isa_only: bool,
        dist: &[Vec<u32>],
        stack: &mut Vec<(RelationType, usize)>,
        out: &mut Vec<Vec<(RelationType, usize)>>,
    ) {
        if left == 0 {
            if u == b {
                out.push(stack.clone());
            }
            return;
        }
        for &(r, v) in &self.edges[u] {
            if (isa_only && !is_a(r)) || dist[v][b] != left - 1 {
                continue;
            }
            stack.push((r, v));
            self.walk(v, b, left - 1, isa_only, dist, stack, out);
            stack.pop();
        }
    }

    pub fn direction_changes(walk: &[(RelationType, usize)]) -> usize {
        walk.windows(2)
            .filter(|w| direction_class(w[0].0) != direction_class(w[1].0))
            .count()
    }

    pub fn fanout(&self, x: usize, r: RelationType) -> usize {
        self.edges[x].iter().filter(|e| e.0 == r).count()
    }

    pub fn senses(&self, word: &str) -> Vec<usize> {
        (0..self.len())
            .filter(|&x| self.lemmas[x].iter().any(|l| l.eq_ignore_ascii_case(word)))
            .collect()
    }

    /// `x` itself and everything below it.
    pub fn subsumed(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.up[y][x] < INF).collect()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.depth[x] == 1).collect()
    }
}

fn hinge_weight(o: &Oracle, x: usize, r: RelationType, cfg: &MeasureConfig) -> f64 {
    let w = cfg.sussna.get(r);
    w.max - (w.max - w.min) / o.fanout(x, r).max(1) as f64
}

pub fn oracle_edge(o: &Oracle, a: usize, b: usize) -> Option<f64> {
    let d = o.isa[a][b];
    (d < INF).then(|| 1.0 / (1.0 + d as f64))
}

pub fn oracle_lch(o: &Oracle, a: usize, b: usize, max_depth: u32) -> Option<f64> {
    let d = o.isa[a][b];
    (d < INF).then(|| -((d as f64 + 1.0) / (2.0 * max_depth as f64)).ln())
}

/// Endpoint depths are counted through the common node.
pub fn oracle_wup(o: &Oracle, a: usize, b: usize) -> Option<f64> {
    o.ncn(a, b).map(|c| {
        let dc = o.depth[c];
        2.0 * dc as f64 / (o.up[a][c] + o.up[b][c] + 2 * dc) as f64
    })
}

/// Best over every shortest IS-A walk.
pub fn oracle_agi(o: &Oracle, a: usize, b: usize, cfg: &MeasureConfig) -> Option<f64> {
    let sums: Vec<f64> = o
        .shortest_walks(a, b, true)
        .iter()
        .map(|walk| {
            std::iter::once(a)
                .chain(walk.iter().map(|s| s.1))
                .map(|x| 1.0 / o.depth[x] as f64)
                .sum()
        })
        .collect();
    if sums.is_empty() {
        return None;
    }
    let nodes = o.isa[a][b] as f64 + 1.0;
    Some(if cfg.agi_textual {
        -nodes / sums.iter().cloned().fold(f64::MIN, f64::max)
    } else {
        1.0 / sums.iter().cloned().fold(f64::MAX, f64::min)
    })
}

pub fn oracle_sussna_link(
    o: &Oracle,
    x: usize,
    r: RelationType,
    y: usize,
    cfg: &MeasureConfig,
) -> f64 {
    (hinge_weight(o, x, r, cfg) + hinge_weight(o, y, inverse(r), cfg))
        / (2.0 * o.depth[x].max(o.depth[y]) as f64)
}

/// Smallest total over every shortest walk.
pub fn oracle_sussna(o: &Oracle, a: usize, b: usize, cfg: &MeasureConfig) -> Option<f64> {
    o.shortest_walks(a, b, false)
        .iter()
        .map(|walk| {
            let mut prev = a;
            let mut total = 0.0;
            for &(r, v) in walk {
                total += oracle_sussna_link(o, prev, r, v, cfg);
                prev = v;
            }
            total
        })
        .reduce(f64::min)
        .map(|t| -t)
}

pub fn oracle_hso_senses(o: &Oracle, a: usize, b: usize, cfg: &MeasureConfig) -> f64 {
    if a == b || o.edges[a].contains(&(RelationType::Antonym, b)) {
        return 2.0 * cfg.hso_ceiling - 2.0;
    }
    let len = o.all[a][b];
    if len >= INF || (len as usize) > cfg.hso_max_len || (len as usize) < cfg.hso_min_len {
        return 0.0;
    }
    let changes = o
        .shortest_walks(a, b, false)
        .iter()
        .map(|w| Oracle::direction_changes(w))
        .min()
        .expect("a walk exists");
    (cfg.hso_ceiling - len as f64 - cfg.hso_direction_penalty * changes as f64).max(0.0)
}

fn path_type(walk: &[(RelationType, usize)]) -> PathType {
    use RelationType::*;
    if walk.is_empty() {
        PathType::Id
    } else if walk.iter().any(|s| s.0 == Antonym) {
        PathType::Sa
    } else if walk.iter().any(|s| matches!(s.0, Holonym | Meronym)) {
        PathType::Hm
    } else {
        PathType::Hh
    }
}

/// Best over every shortest walk.
pub fn oracle_yp(o: &Oracle, a: usize, b: usize, cfg: &MeasureConfig) -> f64 {
    let len = o.all[a][b];
    if len >= INF || len as usize > cfg.yp_gamma {
        return 0.0;
    }
    o.shortest_walks(a, b, false)
        .iter()
        .map(|walk| {
            let kind = path_type(walk);
            cfg.yp_alpha.get(kind) * cfg.yp_beta.get(kind).powi(len.max(1) as i32 - 1)
        })
        .fold(0.0, f64::max)
}

/// Corpus information content by explicit summation over every subsumed
/// synset. Word counts are split over the word's senses.
pub fn oracle_corpus_ic(o: &Oracle, counts: &[(&str, u64)], smoothing: f64) -> Vec<f64> {
    let mut credit = vec![smoothing; o.len()];
    for &(w, c) in counts {
        let senses = o.senses(w);
        for &s in &senses {
            credit[s] += c as f64 / senses.len() as f64;
        }
    }
    let mass: Vec<f64> = (0..o.len())
        .map(|x| o.subsumed(x).iter().map(|&y| credit[y]).sum())
        .collect();
    let total: f64 = o.roots().iter().map(|&r| mass[r]).sum();
    mass.iter().map(|m| -(m / total).ln() + 0.0).collect()
}

pub fn oracle_intrinsic_ic(o: &Oracle) -> Vec<f64> {
    let n = o.len() as f64;
    (0..o.len())
        .map(|x| 1.0 - (o.subsumed(x).len() as f64).ln() / n.ln())
        .collect()
}

/// 1-based ranks with ties averaged, by counting.
pub fn brute_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let below = x.iter().filter(|&&u| u < v).count() as f64;
            let equal = x.iter().filter(|&&u| u == v).count() as f64;
            1.0 + below + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn textbook_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// `1 - 6 Σd² / (n(n²-1))`, valid without ties.
pub fn closed_form_spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (brute_ranks(x), brute_ranks(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// Central finite differences.
pub fn numeric_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            let orig = probe[k];
            probe[k] = orig + h;
            let hi = f(&probe);
            probe[k] = orig - h;
            let lo = f(&probe);
            probe[k] = orig;
            (hi - lo) / (2.0 * h)
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|, floor)` over whole vectors.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(floor)
}

/// Vector file text for `words` with standard-normal-ish components.
pub fn random_space_text(rng: &mut ChaCha8Rng, words: &[String], dim: usize) -> String {
    let mut text = String::new();
    for w in words {
        text.push_str(w);
        for _ in 0..dim {
            let x: f64 = rng.gen_range(-1.0..1.0);
            text.push_str(&format!(" {x:?}"));
        }
        text.push('\n');
    }
    text
}

/// A random multi-parent IS-A network in file form. Node 0 is a root and a
/// few more may appear. `extra_relations` adds antonym and holonym links.
pub fn random_taxonomy_text(rng: &mut ChaCha8Rng, n: usize, extra_relations: bool) -> String {
    let mut text = String::new();
    for i in 0..n {
        text.push_str(&format!("synset s{i} n w{i},shared{}\n", i % 3));
        text.push_str(&format!("  gloss node {i}\n"));
        if i > 0 && rng.gen_bool(0.9) {
            let parents = rng.gen_range(1..=2.min(i));
            let mut chosen = BTreeSet::new();
            while chosen.len() < parents {
                chosen.insert(rng.gen_range(0..i));
            }
            for p in chosen {
                text.push_str(&format!("  rel hypernym s{p}\n"));
            }
        }
        if extra_relations && i > 1 && rng.gen_bool(0.2) {
            let other = rng.gen_range(0..i);
            let r = if rng.gen_bool(0.5) {
                "antonym"
            } else {
                "holonym"
            };
            text.push_str(&format!("  rel {r} s{other}\n"));
        }
    }
    text
}

/// Ten random 5-D words `w0..w9` from seed 7 with five synonym and five
/// antonym pairs, trained at lr 0.01 for 50 epochs.
pub fn counterfit_fixture() -> (VectorSpace, ConstraintSet, RetrofitConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let words: Vec<String> = (0..10).map(|i| format!("w{i}")).collect();
    let space: VectorSpace = random_space_text(&mut rng, &words, 5).parse().unwrap();
    let pair = |a: usize, b: usize| (format!("w{a}"), format!("w{b}"));
    let syn = [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)].map(|(a, b)| pair(a, b));
    let ant = [(0, 3), (2, 5), (4, 7), (6, 9), (8, 1)].map(|(a, b)| pair(a, b));
    let constraints = ConstraintSet::new(syn, ant).unwrap();
    let cfg = RetrofitConfig {
        learning_rate: 0.01,
        epochs: 50,
        rng_seed: 7,
        ..RetrofitConfig::default()
    };
    (space, constraints, cfg)
}

pub const SIX_PAIRS: &str = include_str!("../../fixtures/six_pairs.tsv");
pub const BUCKETS12: &str = include_str!("../../fixtures/buckets12.tsv");
pub const BUCKETS12_FREQ: &str = include_str!("../../fixtures/buckets12.freq");
pub const BUCKETS12_TAX: &str = include_str!("../../fixtures/buckets12.tax");

/// Spearman ρ of EDGE on the six-pair toy9 dataset, ranked by hand.
///
/// EDGE scores 1/3, 1/2, 1/4, 1/7, 1/2, 1/4 rank as 4, 5.5, 2.5, 1, 5.5, 2.5;
/// gold 9, 8, 6, 1, 7.5, 3 ranks as 6, 5, 3, 1, 4, 2.
pub fn six_pair_edge_rho() -> f64 {
    let x = [4.0, 5.5, 2.5, 1.0, 5.5, 2.5];
    let y = [6.0, 5.0, 3.0, 1.0, 4.0, 2.0];
    textbook_pearson(&x, &y)
}

/// Hand partitions of the twelve planted pairs: `(buckets, excluded)`.
pub fn buckets12_frequency() -> (Vec<Vec<usize>>, usize) {
    (vec![vec![0, 1, 9], vec![2, 7], vec![3, 8]], 5)
}

pub fn buckets12_polysemy() -> (Vec<Vec<usize>>, usize) {
    (vec![vec![1], vec![2, 4, 7], vec![3, 8]], 6)
}

pub fn buckets12_intensity() -> (Vec<Vec<usize>>, usize) {
    (
        vec![vec![0, 1, 6], vec![2, 3, 7, 10], vec![4, 5, 8, 9, 11]],
        0,
    )
}

pub const TOY9_FREQ: &str = include_str!("../../fixtures/toy9.freq");
pub const TOY9_COUNTS: [(&str, u64); 4] = [("cat", 2), ("dog", 2), ("plant", 4), ("car", 4)];

pub fn toy9_ic(t: &Taxonomy) -> IcTable {
    let freq: FrequencyTable = TOY9_FREQ.parse().unwrap();
    build_corpus_ic(t, &freq, 0.0, SenseCredit::Split).unwrap()
}

/// `None` stands for "no comparison".
pub fn oracle(
    o: &Oracle,
    m: Measure,
    a: usize,
    b: usize,
    cfg: &MeasureConfig,
    ic: &[f64],
) -> Option<f64> {
    let ic_ncn = || o.ncn(a, b).map(|c| ic[c]);
    match m {
        Measure::Edge => oracle_edge(o, a, b),
        Measure::Lch => oracle_lch(o, a, b, cfg.max_depth),
        Measure::Wup => oracle_wup(o, a, b),
        Measure::Agi => oracle_agi(o, a, b, cfg),
        Measure::Sus => oracle_sussna(o, a, b, cfg),
        Measure::Hso => Some(oracle_hso_senses(o, a, b, cfg)),
        Measure::Yp => Some(oracle_yp(o, a, b, cfg)),
        Measure::Res => ic_ncn(),
        Measure::Jcn => ic_ncn().map(|c| 2.0 * c - ic[a] - ic[b]),
        Measure::Lin => ic_ncn()
            .filter(|_| ic[a] + ic[b] > 0.0)
            .map(|c| 2.0 * c / (ic[a] + ic[b])),
    }
}

/// Checks every measure on every synset pair; returns the number checked.
pub fn check_all_pairs(t: &Taxonomy, cfg: &MeasureConfig, table: &IcTable, ic: &[f64]) -> usize {
    let o = Oracle::new(t);
    let mut checked = 0;
    for m in Measure::ALL {
        for a in &o.ids {
            for b in &o.ids {
                let (ia, ib) = (o.ix(a), o.ix(b));
                let got = sense_similarity(t, m, a, b, cfg, Some(table));
                match oracle(&o, m, ia, ib, cfg, ic) {
                    Some(want) => {
                        let got = got.unwrap_or_else(|e| panic!("{m} {a} {b}: {e}"));
                        assert!(
                            (got.value - want).abs() <= 1e-9,
                            "{m} {a} {b}: {} vs {want}",
                            got.value
                        );
                    }
                    None => assert!(
                        matches!(got, Err(MeasureError::NoComparison { .. })),
                        "{m} {a} {b}: expected no comparison, got {got:?}"
                    ),
                }
                checked += 1;
            }
        }
    }
    checked
}

pub struct Instance {
    pub space: VectorSpace,
    pub constraints: ConstraintSet,
    pub cfg: RetrofitConfig,
    pub point: Vec<f64>,
}

/// Eight random 5-D words with three synonym and three antonym pairs, plus
/// a perturbed evaluation point.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<String> = (0..8).map(|i| format!("v{i}")).collect();
    let space: VectorSpace = random_space_text(&mut rng, &words, 5).parse().unwrap();
    let mut pairs: Vec<(String, String)> = Vec::new();
    for i in 0..8 {
        for j in i + 1..8 {
            pairs.push((words[i].clone(), words[j].clone()));
        }
    }
    pairs.shuffle(&mut rng);
    let constraints = ConstraintSet::new(pairs[..3].to_vec(), pairs[3..6].to_vec()).unwrap();
    let cfg = RetrofitConfig {
        delta_syn: rng.gen_range(0.3..1.0),
        delta_ant: rng.gen_range(0.0..0.3),
        neighbors: NeighborMode::Nearest(3),
        ..RetrofitConfig::default()
    };
    // Moved off the original so preservation hinges are not sitting at zero.
    let point = space
        .as_slice()
        .iter()
        .map(|x| x + rng.gen_range(-0.4..0.4))
        .collect();
    Instance {
        space,
        constraints,
        cfg,
        point,
    }
}

pub fn objective(inst: &Instance) -> Objective {
    let hoods = neighborhoods_for(
        &inst.space,
        inst.constraints.anchors(),
        inst.cfg.neighbors,
        &inst.constraints,
    );
    Objective::new(&inst.space, &inst.constraints, &hoods, &inst.cfg).unwrap()
}
