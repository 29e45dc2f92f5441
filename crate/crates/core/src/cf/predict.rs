use serde::{Deserialize, Serialize};

use super::{NeighborSet, RatingsMatrix};

pub const MIN_STARS: f64 = 1.0;
pub const MAX_STARS: f64 = 5.0;
/// Used only when the training matrix is empty.
pub const MIDPOINT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackSource {
    ItemMean,
    UserMean,
    GlobalMean,
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Estimate {
    /// The weighted formula applied; `used` neighbors were rated by the user.
    Formula {
        raw: f64,
        clamped: f64,
        used: usize,
    },
    Fallback {
        value: f64,
        source: FallbackSource,
    },
}

impl Estimate {
    /// The rating reported for evaluation.
    pub fn value(&self) -> f64 {
        match *self {
            Estimate::Formula { clamped, .. } => clamped,
            Estimate::Fallback { value, .. } => value,
        }
    }

    /// The formula's unclamped value, if it applied.
    pub fn raw(&self) -> Option<f64> {
        match *self {
            Estimate::Formula { raw, .. } => Some(raw),
            Estimate::Fallback { .. } => None,
        }
    }

    pub fn is_fallback(&self) -> bool {
        matches!(self, Estimate::Fallback { .. })
    }
}

/// Item mean, then user mean, then global mean of the training matrix.
pub fn fallback(user: &str, item: &str, m: &RatingsMatrix) -> Estimate {
    let (value, source) = if let Some(v) = m.item_mean(item) {
        (v, FallbackSource::ItemMean)
    } else if let Some(v) = m.user_mean(user) {
        (v, FallbackSource::UserMean)
    } else if let Some(v) = m.global_mean() {
        (v, FallbackSource::GlobalMean)
    } else {
        (MIDPOINT, FallbackSource::Midpoint)
    };
    Estimate::Fallback { value, source }
}

/// Σ r(u,n)·w(i,n) / Σ |w(i,n)| over the neighbors the user rated, clamped
/// to the star range.
pub fn predict(user: &str, item: &str, neighbors: &NeighborSet, m: &RatingsMatrix) -> Estimate {
    let Some(u) = m.user_idx(user) else {
        return fallback(user, item, m);
    };
    let (mut num, mut den, mut used) = (0.0, 0.0, 0usize);
    for n in &neighbors.neighbors {
        let Some(r) = m.item_idx(&n.item).and_then(|i| m.rating_idx(u, i)) else {
            continue;
        };
        num += f64::from(r) * n.w;
        den += n.w.abs();
        used += 1;
    }
    if used == 0 || den == 0.0 {
        return fallback(user, item, m);
    }
    let raw = num / den;
    Estimate::Formula {
        raw,
        clamped: raw.clamp(MIN_STARS, MAX_STARS),
        used,
    }
}
