use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::RatingsMatrix;

/// Which users the item means are taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanMode {
    /// Means over the users who rated both items.
    #[default]
    CoRaters,
    /// Means over every rater of each item; sums still run over co-raters.
    AllRaters,
}

impl std::str::FromStr for MeanMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "co-raters" => Ok(Self::CoRaters),
            "all-raters" => Ok(Self::AllRaters),
            other => Err(format!(
                "unknown mean mode {other:?} (expected co-raters or all-raters)"
            )),
        }
    }
}

/// A Pearson weight and the number of co-raters it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub w: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemWeight {
    pub i: String,
    pub j: String,
    pub w: f64,
    pub support: usize,
}

/// Pearson correlation of items `i` and `j` over their co-raters. Pairs with
/// at most one co-rater, or with zero variance on either side, weigh 0.
pub fn weight_idx(m: &RatingsMatrix, i: u32, j: u32, mode: MeanMode) -> Weight {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    let co = m.co_ratings(i, j);
    let support = co.len();
    if support <= 1 {
        return Weight { w: 0.0, support };
    }
    let (mean_i, mean_j) = match mode {
        MeanMode::CoRaters => {
            let n = support as f64;
            (
                co.iter().map(|c| f64::from(c.1)).sum::<f64>() / n,
                co.iter().map(|c| f64::from(c.2)).sum::<f64>() / n,
            )
        }
        MeanMode::AllRaters => (
            m.item_mean_idx(i).unwrap_or(0.0),
            m.item_mean_idx(j).unwrap_or(0.0),
        ),
    };
    let (mut num, mut ss_i, mut ss_j) = (0.0, 0.0, 0.0);
    for &(_, ri, rj) in &co {
        let (di, dj) = (f64::from(ri) - mean_i, f64::from(rj) - mean_j);
        num += di * dj;
        ss_i += di * di;
        ss_j += dj * dj;
    }
    if ss_i == 0.0 || ss_j == 0.0 {
        return Weight { w: 0.0, support };
    }
    let w = (num / (ss_i.sqrt() * ss_j.sqrt())).clamp(-1.0, 1.0);
    Weight { w, support }
}

/// Weight of two items by id. Unknown items have no co-raters.
pub fn item_weight(i: &str, j: &str, m: &RatingsMatrix) -> ItemWeight {
    item_weight_with(i, j, m, MeanMode::CoRaters)
}

pub fn item_weight_with(i: &str, j: &str, m: &RatingsMatrix, mode: MeanMode) -> ItemWeight {
    let weight = match (m.item_idx(i), m.item_idx(j)) {
        (Some(a), Some(b)) => weight_idx(m, a, b, mode),
        _ => Weight { w: 0.0, support: 0 },
    };
    ItemWeight {
        i: i.to_owned(),
        j: j.to_owned(),
        w: weight.w,
        support: weight.support,
    }
}

/// Source of item-pair weights for neighbor selection.
pub trait WeightLookup: Sync {
    fn weight(&self, m: &RatingsMatrix, i: u32, j: u32) -> Weight;
}

impl WeightLookup for MeanMode {
    fn weight(&self, m: &RatingsMatrix, i: u32, j: u32) -> Weight {
        weight_idx(m, i, j, *self)
    }
}

/// Precomputed weights for every item pair with enough co-raters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightTable {
    entries: HashMap<(u32, u32), Weight>,
    min_support: usize,
}

fn key(i: u32, j: u32) -> (u32, u32) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

impl WeightTable {
    pub fn get(&self, i: u32, j: u32) -> Option<Weight> {
        self.entries.get(&key(i, j)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_support(&self) -> usize {
        self.min_support
    }

    /// Entries as named records, sorted by (i, j).
    pub fn records(&self, m: &RatingsMatrix) -> Vec<ItemWeight> {
        let mut keys: Vec<_> = self.entries.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter()
            .map(|(i, j)| {
                let w = self.entries[&(i, j)];
                ItemWeight {
                    i: m.item_name(i).to_owned(),
                    j: m.item_name(j).to_owned(),
                    w: w.w,
                    support: w.support,
                }
            })
            .collect()
    }

    /// Rebuilds a table from persisted records. Records naming items the
    /// matrix does not know are ignored.
    pub fn from_records<'a, I>(records: I, m: &RatingsMatrix, min_support: usize) -> Self
    where
        I: IntoIterator<Item = &'a ItemWeight>,
    {
        let entries = records
            .into_iter()
            .filter_map(|r| {
                let (i, j) = (m.item_idx(&r.i)?, m.item_idx(&r.j)?);
                Some((
                    key(i, j),
                    Weight {
                        w: r.w,
                        support: r.support,
                    },
                ))
            })
            .collect();
        Self {
            entries,
            min_support,
        }
    }
}

/// Pairs below the table's support threshold weigh 0.
impl WeightLookup for WeightTable {
    fn weight(&self, _m: &RatingsMatrix, i: u32, j: u32) -> Weight {
        self.get(i, j).unwrap_or(Weight { w: 0.0, support: 0 })
    }
}

/// Computes the weight of every distinct co-rated item pair with at least
/// `min_support` co-raters.
pub fn precompute_weights(m: &RatingsMatrix, min_support: usize, mode: MeanMode) -> WeightTable {
    let mut support: HashMap<(u32, u32), usize> = HashMap::new();
    for u in 0..m.n_users() as u32 {
        let row = m.user_ratings(u);
        for (a, &(i, _)) in row.iter().enumerate() {
            for &(j, _) in &row[a + 1..] {
                *support.entry((i, j)).or_default() += 1;
            }
        }
    }
    let mut pairs: Vec<(u32, u32)> = support
        .into_iter()
        .filter(|&(_, s)| s >= min_support.max(1))
        .map(|(p, _)| p)
        .collect();
    pairs.sort_unstable();
    let weights = crate::par::map(&pairs, |&(i, j)| weight_idx(m, i, j, mode));
    WeightTable {
        entries: pairs.into_iter().zip(weights).collect(),
        min_support,
    }
}
