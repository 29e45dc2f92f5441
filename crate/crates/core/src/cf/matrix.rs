use std::collections::HashMap;

use crate::corpus::RawReview;

/// Sparse user × item star ratings with both transposes.
///
/// Users and items are interned in lexicographic id order, so comparing
/// indices compares ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingsMatrix {
    users: Vec<String>,
    items: Vec<String>,
    user_index: HashMap<String, u32>,
    item_index: HashMap<String, u32>,
    /// per item: (user, stars) sorted by user
    by_item: Vec<Vec<(u32, u8)>>,
    /// per user: (item, stars) sorted by item
    by_user: Vec<Vec<(u32, u8)>>,
    review_of: HashMap<(u32, u32), String>,
}

/// Builds the matrix from training reviews. When a user reviewed an item
/// more than once, the review with the latest date wins; equal or missing
/// dates fall back to input order (later wins).
pub fn build_matrix(reviews: &[RawReview]) -> RatingsMatrix {
    let mut latest: HashMap<(&str, &str), &RawReview> = HashMap::new();
    for r in reviews {
        let key = (r.user_id.as_str(), r.business_id.as_str());
        match latest.get(&key) {
            Some(prev) if prev.date > r.date => {}
            _ => {
                latest.insert(key, r);
            }
        }
    }

    let mut users: Vec<String> = latest.keys().map(|(u, _)| u.to_string()).collect();
    let mut items: Vec<String> = latest.keys().map(|(_, i)| i.to_string()).collect();
    users.sort_unstable();
    users.dedup();
    items.sort_unstable();
    items.dedup();
    let user_index: HashMap<String, u32> = users
        .iter()
        .enumerate()
        .map(|(k, u)| (u.clone(), k as u32))
        .collect();
    let item_index: HashMap<String, u32> = items
        .iter()
        .enumerate()
        .map(|(k, i)| (i.clone(), k as u32))
        .collect();

    let mut by_item = vec![Vec::new(); items.len()];
    let mut by_user = vec![Vec::new(); users.len()];
    let mut review_of = HashMap::with_capacity(latest.len());
    for ((user, item), r) in latest {
        let (u, i) = (user_index[user], item_index[item]);
        by_item[i as usize].push((u, r.stars));
        by_user[u as usize].push((i, r.stars));
        review_of.insert((u, i), r.review_id.clone());
    }
    by_item.iter_mut().for_each(|v| v.sort_unstable());
    by_user.iter_mut().for_each(|v| v.sort_unstable());

    RatingsMatrix {
        users,
        items,
        user_index,
        item_index,
        by_item,
        by_user,
        review_of,
    }
}

fn mean(ratings: &[(u32, u8)]) -> Option<f64> {
    if ratings.is_empty() {
        return None;
    }
    Some(ratings.iter().map(|&(_, r)| f64::from(r)).sum::<f64>() / ratings.len() as f64)
}

impl RatingsMatrix {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    /// Number of stored ratings.
    pub fn len(&self) -> usize {
        self.review_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.review_of.is_empty()
    }

    pub fn user_idx(&self, user: &str) -> Option<u32> {
        self.user_index.get(user).copied()
    }

    pub fn item_idx(&self, item: &str) -> Option<u32> {
        self.item_index.get(item).copied()
    }

    pub fn user_name(&self, u: u32) -> &str {
        &self.users[u as usize]
    }

    pub fn item_name(&self, i: u32) -> &str {
        &self.items[i as usize]
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    /// Raters of an item as (user, stars), sorted by user.
    pub fn item_ratings(&self, i: u32) -> &[(u32, u8)] {
        &self.by_item[i as usize]
    }

    /// Items rated by a user as (item, stars), sorted by item.
    pub fn user_ratings(&self, u: u32) -> &[(u32, u8)] {
        &self.by_user[u as usize]
    }

    pub fn rating_idx(&self, u: u32, i: u32) -> Option<u8> {
        let row = &self.by_user[u as usize];
        row.binary_search_by_key(&i, |&(item, _)| item)
            .ok()
            .map(|k| row[k].1)
    }

    pub fn rating(&self, user: &str, item: &str) -> Option<u8> {
        self.rating_idx(self.user_idx(user)?, self.item_idx(item)?)
    }

    pub fn review_id_idx(&self, u: u32, i: u32) -> Option<&str> {
        self.review_of.get(&(u, i)).map(String::as_str)
    }

    pub fn review_id(&self, user: &str, item: &str) -> Option<&str> {
        self.review_id_idx(self.user_idx(user)?, self.item_idx(item)?)
    }

    /// (user, stars of i, stars of j) for every user who rated both items,
    /// in user order.
    pub fn co_ratings(&self, i: u32, j: u32) -> Vec<(u32, u8, u8)> {
        let (a, b) = (self.item_ratings(i), self.item_ratings(j));
        let (mut x, mut y) = (0, 0);
        let mut out = Vec::new();
        while x < a.len() && y < b.len() {
            match a[x].0.cmp(&b[y].0) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    out.push((a[x].0, a[x].1, b[y].1));
                    x += 1;
                    y += 1;
                }
            }
        }
        out
    }

    pub fn item_mean_idx(&self, i: u32) -> Option<f64> {
        mean(self.item_ratings(i))
    }

    pub fn user_mean_idx(&self, u: u32) -> Option<f64> {
        mean(self.user_ratings(u))
    }

    pub fn item_mean(&self, item: &str) -> Option<f64> {
        self.item_mean_idx(self.item_idx(item)?)
    }

    pub fn user_mean(&self, user: &str) -> Option<f64> {
        self.user_mean_idx(self.user_idx(user)?)
    }

    pub fn global_mean(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let total: u64 = self
            .by_item
            .iter()
            .flatten()
            .map(|&(_, r)| u64::from(r))
            .sum();
        Some(total as f64 / self.len() as f64)
    }

    /// Checks that both transposes hold exactly the same ratings.
    pub fn is_consistent(&self) -> bool {
        let mut from_items: Vec<(u32, u32, u8)> = self
            .by_item
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(u, r)| (u, i as u32, r)))
            .collect();
        let mut from_users: Vec<(u32, u32, u8)> = self
            .by_user
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&(i, r)| (u as u32, i, r)))
            .collect();
        from_items.sort_unstable();
        from_users.sort_unstable();
        from_items == from_users
            && from_items.len() == self.review_of.len()
            && from_items
                .iter()
                .all(|&(u, i, _)| self.review_of.contains_key(&(u, i)))
    }
}
