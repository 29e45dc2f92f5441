//! Review-aware item-based collaborative filtering.
//!
//! The crate is organized as the stages of the pipeline:
//!
//! * [`corpus`] ingests Yelp-style line-delimited dumps, applies the sample
//!   thresholds and produces a seeded train/test split.
//! * [`textprep`] normalizes review text, caps repeated characters, corrects
//!   spelling against a frequency dictionary and optionally lemmatizes.
//! * [`embedding`] loads word and sentence vector files, pools word vectors
//!   into review vectors and computes cosine similarity.
//! * [`cf`] holds the item-item Pearson weights, both neighbor-selection
//!   regimes and the rating predictor.
//! * [`eval`] runs the baseline sweep and review-based runs and renders the
//!   RMSE report.
//! * [`milestone`] persists stage outputs and manifests.
//! * [`synth`] generates the small seeded corpus used by tests and the demo.

pub mod cf;
pub mod corpus;
pub mod embedding;
pub mod eval;
pub mod milestone;
mod par;
pub mod synth;
pub mod textprep;

#[cfg(feature = "cli")]
pub mod cli;

pub use cf::{
    build_matrix, item_weight, precompute_weights, predict, review_similarity,
    select_neighbors_review, select_neighbors_weight, Estimate, ItemWeight, MeanMode, NeighborSet,
    NeighborStrategy, RatingsMatrix, WeightTable,
};
pub use corpus::{filter_sample, split_train_test, RawReview, SampleSet, SampleThresholds, Split};
pub use embedding::{compose_sentence, cosine, PoolingMode, SentenceVectorStore, VectorStore};
pub use eval::{render_report, rmse, run_baseline, run_review_cf, PredictionRecord, Report};
pub use textprep::{
    damerau_levenshtein, lemmatize, normalize, preprocess_review, squash_repeats, Correction,
    FrequencyDictionary, LemmaMap, PrepOptions, TokenList,
};
