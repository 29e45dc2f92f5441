//! Item-item collaborative filtering: the ratings matrix, Pearson weights,
//! weight- and review-based neighbor selection and the rating predictor.

mod matrix;
mod neighbors;
mod predict;
mod weights;

pub use matrix::{build_matrix, RatingsMatrix};
pub use neighbors::{
    co_rated_items, review_similarity, select_neighbors_review, select_neighbors_weight, Neighbor,
    NeighborSet, NeighborStrategy,
};
pub use predict::{fallback, predict, Estimate, FallbackSource, MAX_STARS, MIDPOINT, MIN_STARS};
pub use weights::{
    item_weight, item_weight_with, precompute_weights, weight_idx, ItemWeight, MeanMode, Weight,
    WeightLookup, WeightTable,
};
