use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::weights::{Weight, WeightLookup};
use super::RatingsMatrix;
use crate::embedding::{cosine, SentenceVectorStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "k", rename_all = "lowercase")]
pub enum NeighborStrategy {
    /// The K largest weights.
    TopK(usize),
    /// Every co-rated item.
    All,
    /// Every co-rated item with a non-negative weight.
    NonNegative,
}

impl NeighborStrategy {
    /// K ∈ {5, 10, ..., 30}, then all, then non-negative.
    pub fn sweep() -> Vec<NeighborStrategy> {
        let mut v: Vec<_> = (1..=6).map(|k| NeighborStrategy::TopK(5 * k)).collect();
        v.push(NeighborStrategy::All);
        v.push(NeighborStrategy::NonNegative);
        v
    }

    pub fn label(&self) -> String {
        match self {
            NeighborStrategy::TopK(k) => format!("topk:{k}"),
            NeighborStrategy::All => "all".to_owned(),
            NeighborStrategy::NonNegative => "nonneg".to_owned(),
        }
    }
}

impl std::fmt::Display for NeighborStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub item: String,
    pub w: f64,
    pub support: usize,
    /// The weight for weight-based selection, the mean review cosine for
    /// review-based selection.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborSet {
    pub target: String,
    pub neighbors: Vec<Neighbor>,
}

impl NeighborSet {
    pub fn empty(target: &str) -> Self {
        Self {
            target: target.to_owned(),
            neighbors: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

struct Candidate {
    item: u32,
    weight: Weight,
    score: f64,
}

/// Descending score, then descending support, then ascending item id
/// (indices follow id order).
fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.weight.support.cmp(&a.weight.support))
        .then(a.item.cmp(&b.item))
}

fn finish(
    target: &str,
    m: &RatingsMatrix,
    mut cands: Vec<Candidate>,
    k: Option<usize>,
) -> NeighborSet {
    cands.sort_by(rank);
    if let Some(k) = k {
        cands.truncate(k);
    }
    NeighborSet {
        target: target.to_owned(),
        neighbors: cands
            .into_iter()
            .map(|c| Neighbor {
                item: m.item_name(c.item).to_owned(),
                w: c.weight.w,
                support: c.weight.support,
                score: c.score,
            })
            .collect(),
    }
}

/// Items sharing at least one rater with `target`, in index order.
pub fn co_rated_items(m: &RatingsMatrix, target: u32) -> Vec<u32> {
    let mut seen = vec![false; m.n_items()];
    for &(u, _) in m.item_ratings(target) {
        for &(i, _) in m.user_ratings(u) {
            seen[i as usize] = true;
        }
    }
    seen[target as usize] = false;
    seen.iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(i, _)| i as u32)
        .collect()
}

/// Neighbors of `target` ranked by item-item weight.
pub fn select_neighbors_weight<W: WeightLookup + ?Sized>(
    target: &str,
    m: &RatingsMatrix,
    strategy: NeighborStrategy,
    weights: &W,
) -> NeighborSet {
    let Some(t) = m.item_idx(target) else {
        return NeighborSet::empty(target);
    };
    let cands: Vec<Candidate> = co_rated_items(m, t)
        .into_iter()
        .map(|item| {
            let weight = weights.weight(m, t, item);
            Candidate {
                item,
                weight,
                score: weight.w,
            }
        })
        .filter(|c| strategy != NeighborStrategy::NonNegative || c.weight.w >= 0.0)
        .collect();
    let k = match strategy {
        NeighborStrategy::TopK(k) => Some(k),
        _ => None,
    };
    finish(target, m, cands, k)
}

fn similarity_idx(m: &RatingsMatrix, i: u32, j: u32, s: &SentenceVectorStore) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (u, _, _) in m.co_ratings(i, j) {
        let vi = m.review_id_idx(u, i).and_then(|id| s.get(id));
        let vj = m.review_id_idx(u, j).and_then(|id| s.get(id));
        if let (Some(a), Some(b)) = (vi, vj) {
            if let Ok(c) = cosine(a, b) {
                sum += c;
                n += 1;
            }
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Mean cosine between the two reviews of each co-rater whose reviews both
/// have vectors. `None` when no co-rater qualifies.
pub fn review_similarity(
    i: &str,
    j: &str,
    m: &RatingsMatrix,
    s: &SentenceVectorStore,
) -> Option<f64> {
    similarity_idx(m, m.item_idx(i)?, m.item_idx(j)?, s)
}

/// The `k` items the user rated whose reviews are most similar to the
/// target's, each carrying its item-item weight with the target.
pub fn select_neighbors_review<W: WeightLookup + ?Sized>(
    user: &str,
    target: &str,
    m: &RatingsMatrix,
    s: &SentenceVectorStore,
    k: usize,
    weights: &W,
) -> NeighborSet {
    let (Some(u), Some(t)) = (m.user_idx(user), m.item_idx(target)) else {
        return NeighborSet::empty(target);
    };
    let cands: Vec<Candidate> = m
        .user_ratings(u)
        .iter()
        .filter(|&&(item, _)| item != t)
        .filter_map(|&(item, _)| {
            let score = similarity_idx(m, t, item, s)?;
            Some(Candidate {
                item,
                weight: weights.weight(m, t, item),
                score,
            })
        })
        .collect();
    finish(target, m, cands, Some(k))
}
