//! Independent reference implementations used as test oracles. They work on
//! dense arrays straight from the formulas and share no code with the crate
//! beyond the review record type.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

use reviewcf::corpus::RawReview;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy")
}

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// ratings[user][item], `None` where unrated.
pub type Dense = Vec<Vec<Option<u8>>>;

/// Single-digit ids keep index order equal to lexicographic id order.
pub fn dense_reviews(d: &Dense) -> Vec<RawReview> {
    let mut out = Vec::new();
    for (u, row) in d.iter().enumerate() {
        for (i, r) in row.iter().enumerate() {
            if let Some(r) = r {
                out.push(RawReview {
                    review_id: format!("r{u}-{i}"),
                    user_id: format!("u{u}"),
                    business_id: format!("i{i}"),
                    stars: *r,
                    text: String::new(),
                    date: None,
                });
            }
        }
    }
    out
}

/// Pearson weight over the users who rated both items, means taken over
/// those users. Returns (w, support).
pub fn oracle_weight(d: &Dense, i: usize, j: usize) -> (f64, usize) {
    let pairs: Vec<(f64, f64)> = d
        .iter()
        .filter_map(|row| match (row[i], row[j]) {
            (Some(a), Some(b)) => Some((a as f64, b as f64)),
            _ => None,
        })
        .collect();
    let n = pairs.len();
    if n < 2 {
        return (0.0, n);
    }
    let mi = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let mj = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let num: f64 = pairs.iter().map(|p| (p.0 - mi) * (p.1 - mj)).sum();
    let si: f64 = pairs.iter().map(|p| (p.0 - mi).powi(2)).sum();
    let sj: f64 = pairs.iter().map(|p| (p.1 - mj).powi(2)).sum();
    if si == 0.0 || sj == 0.0 {
        return (0.0, n);
    }
    (num / (si.sqrt() * sj.sqrt()), n)
}

/// Raw weighted-average prediction over the neighbors the user rated.
pub fn oracle_raw_predict(d: &Dense, u: usize, neighbors: &[(usize, f64)]) -> Option<f64> {
    let rated: Vec<(f64, f64)> = neighbors
        .iter()
        .filter_map(|&(n, w)| d[u][n].map(|r| (r as f64, w)))
        .collect();
    let den: f64 = rated.iter().map(|p| p.1.abs()).sum();
    if rated.is_empty() || den == 0.0 {
        return None;
    }
    Some(rated.iter().map(|p| p.0 * p.1).sum::<f64>() / den)
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = xs.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn oracle_fallback(d: &Dense, u: Option<usize>, i: Option<usize>) -> f64 {
    let item = i.and_then(|i| mean(d.iter().filter_map(|row| row[i].map(f64::from))));
    let user = u.and_then(|u| mean(d[u].iter().flatten().map(|&r| f64::from(r))));
    let global = mean(d.iter().flatten().flatten().map(|&r| f64::from(r)));
    item.or(user).or(global).unwrap_or(3.0)
}

pub fn oracle_cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (na > 0.0 && nb > 0.0).then(|| (dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Select {
    TopK(usize),
    All,
    NonNeg,
    Review(usize),
}

impl Select {
    pub fn label(&self) -> String {
        match self {
            Select::TopK(k) => format!("topk:{k}"),
            Select::All => "all".into(),
            Select::NonNeg => "nonneg".into(),
            Select::Review(k) => format!("review:{k}"),
        }
    }

    pub fn baseline_sweep() -> Vec<Select> {
        let mut v: Vec<Select> = [5, 10, 15, 20, 25, 30].map(Select::TopK).to_vec();
        v.push(Select::All);
        v.push(Select::NonNeg);
        v
    }
}

/// A training matrix with string ids mapped to dense indices in sorted id
/// order.
pub struct Indexed {
    pub users: Vec<String>,
    pub items: Vec<String>,
    pub d: Dense,
    pub review: HashMap<(usize, usize), String>,
}

impl Indexed {
    /// Assumes at most one review per (user, item).
    pub fn new(train: &[RawReview]) -> Self {
        let users: Vec<String> = train
            .iter()
            .map(|r| r.user_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let items: Vec<String> = train
            .iter()
            .map(|r| r.business_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut d = vec![vec![None; items.len()]; users.len()];
        let mut review = HashMap::new();
        for r in train {
            let u = users.binary_search(&r.user_id).unwrap();
            let i = items.binary_search(&r.business_id).unwrap();
            assert!(d[u][i].is_none(), "oracle expects unique ratings");
            d[u][i] = Some(r.stars);
            review.insert((u, i), r.review_id.clone());
        }
        Self {
            users,
            items,
            d,
            review,
        }
    }

    pub fn user(&self, id: &str) -> Option<usize> {
        self.users.binary_search_by(|u| u.as_str().cmp(id)).ok()
    }

    pub fn item(&self, id: &str) -> Option<usize> {
        self.items.binary_search_by(|u| u.as_str().cmp(id)).ok()
    }

    fn similarity(&self, i: usize, j: usize, vecs: &HashMap<String, Vec<f64>>) -> Option<f64> {
        let cos: Vec<f64> = (0..self.users.len())
            .filter_map(|u| {
                let a = vecs.get(self.review.get(&(u, i))?)?;
                let b = vecs.get(self.review.get(&(u, j))?)?;
                oracle_cosine(a, b)
            })
            .collect();
        mean(cos.into_iter())
    }

    /// (item, w) neighbors of `target` for user `u`.
    pub fn select(
        &self,
        u: Option<usize>,
        target: usize,
        how: Select,
        vecs: &HashMap<String, Vec<f64>>,
    ) -> Vec<(usize, f64)> {
        let n_items = self.items.len();
        // (score, support, item, w)
        let mut cands: Vec<(f64, usize, usize, f64)> = Vec::new();
        for j in (0..n_items).filter(|&j| j != target) {
            let (w, support) = oracle_weight(&self.d, target, j);
            match how {
                Select::Review(_) => {
                    let Some(u) = u else { continue };
                    if self.d[u][j].is_none() {
                        continue;
                    }
                    if let Some(s) = self.similarity(target, j, vecs) {
                        cands.push((s, support, j, w));
                    }
                }
                _ => {
                    let co_rated = self
                        .d
                        .iter()
                        .any(|row| row[target].is_some() && row[j].is_some());
                    if !co_rated || (how == Select::NonNeg && w < 0.0) {
                        continue;
                    }
                    cands.push((w, support, j, w));
                }
            }
        }
        cands.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap()
                .then(b.1.cmp(&a.1))
                .then(a.2.cmp(&b.2))
        });
        if let Select::TopK(k) | Select::Review(k) = how {
            cands.truncate(k);
        }
        cands.into_iter().map(|c| (c.2, c.3)).collect()
    }

    /// Clamped prediction for a (user id, item id) test case.
    pub fn predict(
        &self,
        user: &str,
        item: &str,
        how: Select,
        vecs: &HashMap<String, Vec<f64>>,
    ) -> f64 {
        let (u, i) = (self.user(user), self.item(item));
        let raw = match (u, i) {
            (Some(u), Some(i)) => {
                oracle_raw_predict(&self.d, u, &self.select(Some(u), i, how, vecs))
            }
            _ => None,
        };
        match raw {
            Some(r) => r.clamp(1.0, 5.0),
            None => oracle_fallback(&self.d, u, i),
        }
    }

    pub fn rmse(&self, test: &[RawReview], how: Select, vecs: &HashMap<String, Vec<f64>>) -> f64 {
        let se: f64 = test
            .iter()
            .map(|t| {
                (self.predict(&t.user_id, &t.business_id, how, vecs) - f64::from(t.stars)).powi(2)
            })
            .sum();
        (se / test.len() as f64).sqrt()
    }
}

/// Minimal reader for the `count dim` / `key v1 .. vdim` vector format.
pub fn oracle_read_vectors(path: &Path) -> HashMap<String, Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<usize> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .map(|x| x.parse().unwrap())
        .collect();
    let out: HashMap<String, Vec<f64>> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut parts = l.split_whitespace();
            let key = parts.next().unwrap().to_owned();
            let v: Vec<f64> = parts.map(|x| x.parse().unwrap()).collect();
            assert_eq!(v.len(), header[1]);
            (key, v)
        })
        .collect();
    assert_eq!(out.len(), header[0]);
    out
}

pub fn oracle_read_reviews(path: &Path) -> Vec<RawReview> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// Edit distance by search over edit scripts. Each symbol of the working
/// string carries a tag: `UNTOUCHED + p` for the source symbol at position
/// p, `WRITTEN` for a substituted or inserted symbol, `LEFT` and `RIGHT` for
/// the halves of a transposed pair. Only untouched symbols can be
/// substituted, deleted or transposed, a transposition needs two symbols
/// adjacent in the source and in the working string, and nothing may be
/// inserted inside a transposed pair, so no substring is edited twice.
/// Returns the distance from `source` to every string reachable within
/// `max_cost` edits whose length is at most `max_len`.
pub fn restricted_edit_search(
    source: &[u8],
    alphabet: &[u8],
    max_cost: usize,
    max_len: usize,
) -> HashMap<Vec<u8>, usize> {
    const WRITTEN: u8 = 0;
    const LEFT: u8 = 1;
    const RIGHT: u8 = 2;
    const UNTOUCHED: u8 = 10;
    type State = Vec<(u8, u8)>;
    let start: State = source
        .iter()
        .enumerate()
        .map(|(p, &c)| (c, UNTOUCHED + p as u8))
        .collect();
    let mut seen: HashSet<State> = HashSet::from([start.clone()]);
    let mut frontier = vec![start];
    let mut best: HashMap<Vec<u8>, usize> = HashMap::new();
    for cost in 0..=max_cost {
        let mut next = Vec::new();
        for s in &frontier {
            let chars: Vec<u8> = s.iter().map(|p| p.0).collect();
            if chars.len() <= max_len {
                best.entry(chars).or_insert(cost);
            }
            if cost == max_cost {
                continue;
            }
            let budget = max_cost - cost - 1;
            let mut push = |t: State| {
                // Deletions are the only way to shorten; prune hopeless states.
                if t.len() <= max_len + budget && seen.insert(t.clone()) {
                    next.push(t);
                }
            };
            for p in 0..s.len() {
                if s[p].1 < UNTOUCHED {
                    continue;
                }
                let mut t = s.clone();
                t.remove(p);
                push(t);
                for &c in alphabet {
                    if c != s[p].0 {
                        let mut t = s.clone();
                        t[p] = (c, WRITTEN);
                        push(t);
                    }
                }
                if p + 1 < s.len() && s[p + 1].1 == s[p].1 + 1 {
                    let mut t = s.clone();
                    t[p] = (s[p + 1].0, LEFT);
                    t[p + 1] = (s[p].0, RIGHT);
                    push(t);
                }
            }
            for p in 0..=s.len() {
                if p > 0 && p < s.len() && s[p - 1].1 == LEFT {
                    continue;
                }
                for &c in alphabet {
                    let mut t = s.clone();
                    t.insert(p, (c, WRITTEN));
                    push(t);
                }
            }
        }
        frontier = next;
    }
    best
}

/// All strings over `alphabet` of length at most `max_len`.
pub fn all_strings(alphabet: &[u8], max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s: &Vec<u8>| {
                alphabet.iter().map(move |&c| {
                    let mut t = s.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}
