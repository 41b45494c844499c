//! Lexical semantic similarity over taxonomies and word vectors, plus an
//! evaluation harness against gold human judgements.

pub mod cli;
pub mod config;
pub mod counterfit;
pub mod embeddings;
pub mod eval;
pub mod infocontent;
pub mod measures;
pub mod taxonomy;

pub use infocontent::{build_corpus_ic, build_intrinsic_ic, FrequencyTable, IcTable, SenseCredit};
pub use measures::{word_similarity, Measure, MeasureConfig, MeasureError, Scale, SimilarityScore};
pub use taxonomy::{
    parse_taxonomy, Direction, PathResult, Pos, RelationSet, RelationType, Synset, SynsetId,
    Taxonomy, TaxonomyError,
};
