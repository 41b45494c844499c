mod common;

use common::{random_taxonomy_text, toy9, Oracle, INF};
use lexsim::{Direction, Pos, RelationSet, RelationType, Taxonomy, TaxonomyError};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn toy9_shape() {
    let t = toy9();
    assert_eq!(t.len(), 9);
    assert_eq!(t.roots().len(), 1);
    assert_eq!(t.roots()[0].as_str(), "entity");
    assert_eq!(t.max_depth(), 4);
    assert_eq!(t.depth("cat").unwrap(), 4);
    assert_eq!(t.depth("vehicle").unwrap(), 3);
    assert_eq!(t.local_density("animal", RelationType::Hyponym).unwrap(), 2);
    assert_eq!(t.local_density("cat", RelationType::Hypernym).unwrap(), 1);
    assert_eq!(t.senses("auto", Some(Pos::Noun))[0].as_str(), "car");
    assert!(t.senses("cat", Some(Pos::Verb)).is_empty());
}

#[test]
fn toy9_named_paths() {
    let t = toy9();
    let p = t
        .shortest_path("cat", "dog", RelationSet::IS_A, None)
        .unwrap()
        .unwrap();
    assert_eq!(p.length, 2);
    assert_eq!(p.ncn.unwrap().as_str(), "animal");
    assert_eq!(p.direction_changes, 1);
    let p = t
        .shortest_path("cat", "car", RelationSet::IS_A, None)
        .unwrap()
        .unwrap();
    assert_eq!(p.length, 6);
    assert_eq!(p.ncn.unwrap().as_str(), "entity");
    let names: Vec<&str> = p.nodes.iter().map(|n| n.as_str()).collect();
    assert_eq!(
        names,
        ["cat", "animal", "organism", "entity", "artifact", "vehicle", "car"]
    );
    assert_eq!(t.ncn("cat", "dog").unwrap().unwrap().as_str(), "animal");
    assert_eq!(t.ncn("cat", "car").unwrap().unwrap().as_str(), "entity");
    assert_eq!(t.ncn("cat", "animal").unwrap().unwrap().as_str(), "animal");
}

fn check_against_oracle(t: &Taxonomy) {
    let o = Oracle::new(t);
    for a in &o.ids {
        assert_eq!(t.depth(a).unwrap(), o.depth[o.ix(a)], "depth {a}");
        for b in &o.ids {
            let (ia, ib) = (o.ix(a), o.ix(b));
            for (set, dist) in [(RelationSet::IS_A, &o.isa), (RelationSet::ALL, &o.all)] {
                let got = t.shortest_path(a, b, set, None).unwrap();
                match got {
                    None => assert_eq!(dist[ia][ib], INF, "{a} {b}"),
                    Some(p) => {
                        assert_eq!(p.length as u32, dist[ia][ib], "{a} {b}");
                        assert_eq!(p.nodes.len(), p.length + 1);
                        assert_eq!(p.relation_seq.len(), p.length);
                        assert_eq!(p.nodes.first().unwrap().as_str(), a.as_str());
                        assert_eq!(p.nodes.last().unwrap().as_str(), b.as_str());
                        let best = o
                            .shortest_walks(ia, ib, set == RelationSet::IS_A)
                            .iter()
                            .map(|w| Oracle::direction_changes(w))
                            .min()
                            .unwrap();
                        assert_eq!(p.direction_changes, best, "{a} {b}");
                    }
                }
            }
            let ncn = t.ncn(a, b).unwrap().map(|s| s.as_str().to_string());
            assert_eq!(ncn, o.ncn(ia, ib).map(|x| o.ids[x].clone()), "ncn {a} {b}");
        }
    }
}

#[test]
fn toy9_matches_floyd_warshall() {
    check_against_oracle(&toy9());
}

#[test]
fn path_relations_are_real_edges() {
    let t = toy9();
    let p = t
        .shortest_path("plant", "car", RelationSet::ALL, None)
        .unwrap()
        .unwrap();
    for (w, r) in p.nodes.windows(2).zip(&p.relation_seq) {
        let s = t.synset(w[0].as_str()).unwrap();
        assert!(s.relations.contains(&(*r, w[1].clone())));
    }
    assert_eq!(p.relation_seq[0].direction(), Direction::Up);
}

#[test]
fn max_len_bounds_search() {
    let t = toy9();
    assert!(t
        .shortest_path("cat", "car", RelationSet::IS_A, Some(5))
        .unwrap()
        .is_none());
    assert!(t
        .shortest_path("cat", "car", RelationSet::IS_A, Some(6))
        .unwrap()
        .is_some());
}

#[test]
fn empty_relation_set_is_rejected() {
    let t = toy9();
    assert_eq!(
        t.shortest_path("cat", "dog", RelationSet::EMPTY, None),
        Err(TaxonomyError::EmptyRelationSet)
    );
}

#[test]
fn serialization_round_trip() {
    let t = toy9();
    let back: Taxonomy = t.to_tax_string().parse().unwrap();
    assert_eq!(back.len(), t.len());
    for s in t.synsets() {
        assert_eq!(back.synset(s.id.as_str()), Some(s));
    }
}

#[test]
fn disjoint_hierarchies_have_no_path() {
    let t: Taxonomy = "synset a n a\nsynset b n b\nsynset c n c\n  rel hypernym a\n"
        .parse()
        .unwrap();
    assert!(t
        .shortest_path("c", "b", RelationSet::ALL, None)
        .unwrap()
        .is_none());
    assert!(t.ncn("c", "b").unwrap().is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_networks_match_oracle(seed in any::<u64>(), n in 2usize..14, extra in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t: Taxonomy = random_taxonomy_text(&mut rng, n, extra).parse().unwrap();
        check_against_oracle(&t);
    }

    #[test]
    fn distance_is_a_metric(seed in any::<u64>(), n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t: Taxonomy = random_taxonomy_text(&mut rng, n, true).parse().unwrap();
        let ids: Vec<String> = t.synsets().map(|s| s.id.as_str().to_string()).collect();
        let sd = |a: &str, b: &str| t.shortest_path(a, b, RelationSet::ALL, None).unwrap().map(|p| p.length);
        for a in &ids {
            prop_assert_eq!(sd(a, a), Some(0));
            for b in &ids {
                prop_assert_eq!(sd(a, b), sd(b, a));
                for c in &ids {
                    if let (Some(ab), Some(bc)) = (sd(a, b), sd(b, c)) {
                        prop_assert!(sd(a, c).unwrap() <= ab + bc);
                    }
                }
            }
        }
    }

    #[test]
    fn round_trip_preserves_random_networks(seed in any::<u64>(), n in 1usize..14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t: Taxonomy = random_taxonomy_text(&mut rng, n, true).parse().unwrap();
        let back: Taxonomy = t.to_tax_string().parse().unwrap();
        prop_assert_eq!(back.to_tax_string(), t.to_tax_string());
        prop_assert_eq!(back.edge_count(), t.edge_count());
    }
}
