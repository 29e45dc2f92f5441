//! Repeated-character capping, restricted Damerau-Levenshtein distance and
//! dictionary-based correction.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::FrequencyDictionary;

/// Longest run of one character kept by [`squash_repeats`].
pub const MAX_RUN: usize = 2;

/// Caps every maximal run of a repeated character at two characters.
pub fn squash_repeats(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    let mut prev = None;
    let mut run = 0;
    for c in word.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= MAX_RUN {
            out.push(c);
        }
    }
    out
}

/// Optimal string alignment distance: insertions, deletions, substitutions
/// and transpositions of adjacent characters, with no substring edited twice.
pub fn damerau_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    osa(&a, &b)
}

fn osa(a: &[char], b: &[char]) -> usize {
    let (n, m) = (a.len(), b.len());
    if n == 0 {
        return m;
    }
    if m == 0 {
        return n;
    }
    // rows i-2, i-1, i
    let mut before: Vec<usize> = vec![0; m + 1];
    let mut prev: Vec<usize> = (0..=m).collect();
    let mut cur: Vec<usize> = vec![0; m + 1];
    for i in 1..=n {
        cur[0] = i;
        for j in 1..=m {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut d = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                d = d.min(before[j - 2] + 1);
            }
            cur[j] = d;
        }
        std::mem::swap(&mut before, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m]
}

/// Outcome of spell-checking one token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Correction {
    Known(String),
    Corrected(String),
    Removed,
}

impl Correction {
    pub fn word(&self) -> Option<&str> {
        match self {
            Correction::Known(w) | Correction::Corrected(w) => Some(w),
            Correction::Removed => None,
        }
    }
}

/// Ranking key for candidates: smaller distance, then higher frequency, then
/// lexicographically smaller word.
fn better(a: (usize, u64, &str), b: (usize, u64, &str)) -> bool {
    (a.0, std::cmp::Reverse(a.1), a.2) < (b.0, std::cmp::Reverse(b.1), b.2)
}

/// Corrects `word` by scanning the whole dictionary for entries within
/// `max_d` edits.
pub fn correct_word(word: &str, dict: &FrequencyDictionary, max_d: usize) -> Correction {
    if dict.contains(word) {
        return Correction::Known(word.to_owned());
    }
    let chars: Vec<char> = word.chars().collect();
    let mut best: Option<(usize, u64, &str)> = None;
    for (candidate, freq) in dict.iter() {
        if candidate.chars().count().abs_diff(chars.len()) > max_d {
            continue;
        }
        let cand: Vec<char> = candidate.chars().collect();
        let d = osa(&chars, &cand);
        if d <= max_d && best.is_none_or(|b| better((d, freq, candidate), b)) {
            best = Some((d, freq, candidate));
        }
    }
    match best {
        Some((_, _, w)) => Correction::Corrected(w.to_owned()),
        None => Correction::Removed,
    }
}

/// Symmetric-delete index over a dictionary. Produces the same answers as
/// [`correct_word`] without scanning every entry.
pub struct SpellChecker {
    words: Vec<(String, u64)>,
    lookup: HashMap<String, u64>,
    deletes: HashMap<String, Vec<u32>>,
    max_d: usize,
}

fn deletes_within(word: &str, max_d: usize) -> HashSet<String> {
    let mut all = HashSet::new();
    all.insert(word.to_owned());
    let mut frontier = vec![word.to_owned()];
    for _ in 0..max_d {
        let mut next = Vec::new();
        for w in &frontier {
            for (i, _) in w.char_indices() {
                let mut shorter = w.clone();
                shorter.remove(i);
                if all.insert(shorter.clone()) {
                    next.push(shorter);
                }
            }
        }
        frontier = next;
    }
    all
}

impl SpellChecker {
    pub fn new(dict: &FrequencyDictionary, max_d: usize) -> Self {
        let mut words: Vec<(String, u64)> = dict.iter().map(|(w, f)| (w.to_owned(), f)).collect();
        words.sort();
        let mut deletes: HashMap<String, Vec<u32>> = HashMap::new();
        for (idx, (w, _)) in words.iter().enumerate() {
            for variant in deletes_within(w, max_d) {
                deletes.entry(variant).or_default().push(idx as u32);
            }
        }
        let lookup = words.iter().cloned().collect();
        Self {
            words,
            lookup,
            deletes,
            max_d,
        }
    }

    pub fn max_distance(&self) -> usize {
        self.max_d
    }

    pub fn correct(&self, word: &str) -> Correction {
        if self.lookup.contains_key(word) {
            return Correction::Known(word.to_owned());
        }
        let chars: Vec<char> = word.chars().collect();
        let mut seen = HashSet::new();
        let mut best: Option<(usize, u64, &str)> = None;
        for variant in deletes_within(word, self.max_d) {
            let Some(ids) = self.deletes.get(&variant) else {
                continue;
            };
            for &id in ids {
                if !seen.insert(id) {
                    continue;
                }
                let (cand, freq) = &self.words[id as usize];
                let cand_chars: Vec<char> = cand.chars().collect();
                let d = osa(&chars, &cand_chars);
                if d <= self.max_d && best.is_none_or(|b| better((d, *freq, cand), b)) {
                    best = Some((d, *freq, cand));
                }
            }
        }
        match best {
            Some((_, _, w)) => Correction::Corrected(w.to_owned()),
            None => Correction::Removed,
        }
    }
}
