//! Lexicostatistics: normalized-Levenshtein distances between Swadesh
//! wordlists, divergence times from a two-rate model of lexical change, and
//! ultrametric UPGMA trees with jackknife stability.
//!
//! The usual flow is
//! [`parse_corpus`] → [`distance_matrix`] → [`time_matrix`] → [`upgma`] → [`to_newick`].

pub mod analysis;
pub mod chrono;
pub mod corpus;
pub mod matrix;
pub mod metric;
pub mod newick;
pub mod phylo;

pub use analysis::{
    jackknife, pipeline_roundtrip, random_reference_tree, simulate_distance_matrix, synthesize_corpus,
    AnalysisError, CladeFrequency, JackknifeOptions, ReferenceTree, ResampleMode, Roundtrip, StabilityReport,
};
pub use chrono::{
    calibrate, distance_from_time, rates_from_params, time_from_distance, time_from_distance_clamped, time_matrix,
    CalibrationAnchor, ChronoError, ChronoParams, ParamsSpec, TimeMatrix, PUBLISHED_PROFILE, PUBLISHED_PROFILE_NAME,
};
pub use corpus::{
    normalize_form, parse_corpus, shared_meanings, Corpus, CorpusError, Entry, Lexicon, Meaning, NormalizeError,
    ParseOptions, TransliterationMap, VariantPolicy, WordForm,
};
pub use matrix::Square;
pub use metric::{
    distance_matrix, distance_matrix_with, levenshtein, lexical_distance, word_distance, DistanceBundle,
    DistanceMatrix, LexicalDistance, MetricError, Schedule, WordDistance,
};
pub use newick::{parse_newick, to_newick};
pub use phylo::{clade_overlap, clades, upgma, CladeOverlap, CladeSet, Dissimilarity, PhyloError, PhyloTree};
