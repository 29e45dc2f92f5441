use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use super::{data_lines, is_token, open, parse_err, tab_pair, TextprepError};

/// Inflected form → base form. Chains are collapsed at construction so one
/// lookup always reaches a base form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaMap {
    entries: HashMap<String, String>,
}

impl LemmaMap {
    pub fn from_pairs<I>(pairs: I) -> Result<Self, TextprepError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let raw: HashMap<String, String> =
            pairs.into_iter().filter(|(from, to)| from != to).collect();
        let mut entries = HashMap::with_capacity(raw.len());
        for from in raw.keys() {
            let mut base = &raw[from];
            let mut steps = 0;
            while let Some(next) = raw.get(base) {
                steps += 1;
                if steps > raw.len() {
                    return Err(TextprepError::LemmaCycle(from.clone()));
                }
                base = next;
            }
            entries.insert(from.clone(), base.clone());
        }
        Ok(Self { entries })
    }

    /// Parses `inflected<TAB>base` lines.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, TextprepError> {
        let mut pairs = Vec::new();
        for row in data_lines(reader) {
            let (line_no, line) = row?;
            let (from, to) = tab_pair(line_no, &line)?;
            let (from, to) = (from.trim(), to.trim());
            if !is_token(from) || !is_token(to) {
                return Err(parse_err(
                    line_no,
                    format!("bad lemma pair {from:?} → {to:?}"),
                ));
            }
            pairs.push((from.to_owned(), to.to_owned()));
        }
        Self::from_pairs(pairs)
    }

    pub fn load(path: &Path) -> Result<Self, TextprepError> {
        Self::parse(open(path)?)
    }

    pub fn get(&self, token: &str) -> Option<&str> {
        self.entries.get(token).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn lemmatize<'a>(token: &'a str, map: &'a LemmaMap) -> &'a str {
    map.get(token).unwrap_or(token)
}
