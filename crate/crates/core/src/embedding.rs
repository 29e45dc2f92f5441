//! Word and sentence vector tables, pooling and cosine similarity.
//!
//! Both file formats are plain text: a `<count> <dim>` header followed by one
//! `<key> <v1> ... <v_dim>` row per entry.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
    #[error("vector lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("undefined similarity: zero-norm vector")]
    ZeroNorm,
}

fn format_err(line: usize, message: impl Into<String>) -> EmbeddingError {
    EmbeddingError::Format {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PoolingMode {
    #[default]
    Mean,
    Max,
}

impl std::str::FromStr for PoolingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Self::Mean),
            "max" => Ok(Self::Max),
            other => Err(format!(
                "unknown pooling mode {other:?} (expected mean or max)"
            )),
        }
    }
}

/// Keyed, fixed-width vector table shared by both store kinds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VectorTable {
    pub name: String,
    pub dim: usize,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl VectorTable {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, key: impl Into<String>, v: Vec<f64>) -> Result<(), EmbeddingError> {
        if v.len() != self.dim {
            return Err(EmbeddingError::LengthMismatch(v.len(), self.dim));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(format_err(0, "non-finite component"));
        }
        self.vectors.insert(key.into(), v);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.vectors.get(key).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn parse<R: BufRead>(reader: R, name: impl Into<String>) -> Result<Self, EmbeddingError> {
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                None => return Err(format_err(1, "missing \"<count> <dim>\" header")),
                Some((i, line)) => {
                    let line = line.map_err(|e| format_err(i + 1, e.to_string()))?;
                    if !line.trim().is_empty() {
                        break (i + 1, line);
                    }
                }
            }
        };
        let fields: Vec<&str> = header.1.split_whitespace().collect();
        let (count, dim) = match fields.as_slice() {
            [c, d] => (
                c.parse::<usize>()
                    .map_err(|_| format_err(header.0, format!("bad count {c:?}")))?,
                d.parse::<usize>()
                    .map_err(|_| format_err(header.0, format!("bad dimension {d:?}")))?,
            ),
            _ => return Err(format_err(header.0, "header must be \"<count> <dim>\"")),
        };

        let mut table = VectorTable::new(name, dim);
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.map_err(|e| format_err(line_no, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().expect("non-empty line has a field");
            let values = parts
                .map(|v| {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| format_err(line_no, format!("bad value {v:?}")))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            if values.len() != dim {
                return Err(format_err(
                    line_no,
                    format!("{key:?} has {} values, header says {dim}", values.len()),
                ));
            }
            if table.vectors.insert(key.to_owned(), values).is_some() {
                return Err(EmbeddingError::Duplicate {
                    line: line_no,
                    key: key.to_owned(),
                });
            }
        }
        if table.len() != count {
            return Err(format_err(
                header.0,
                format!("header declares {count} rows, found {}", table.len()),
            ));
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let file = File::open(path).map_err(|source| EmbeddingError::Io {
            path: path.to_owned(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse(BufReader::new(file), name)
    }

    /// Writes the table sorted by key.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for (key, v) in &self.vectors {
            out.write_all(key.as_bytes())?;
            for x in v {
                write!(out, " {}", format_component(*x))?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Plain decimal with at least six significant digits and at least six
/// decimal places, trailing zeros removed.
pub fn format_component(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(6) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".to_owned();
    }
    s
}

/// Token → word vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VectorStore(pub VectorTable);

/// Review id → review vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SentenceVectorStore(pub VectorTable);

macro_rules! store_impl {
    ($ty:ident) => {
        impl $ty {
            pub fn new(name: impl Into<String>, dim: usize) -> Self {
                Self(VectorTable::new(name, dim))
            }

            pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
                VectorTable::load(path).map(Self)
            }

            pub fn parse<R: BufRead>(
                reader: R,
                name: impl Into<String>,
            ) -> Result<Self, EmbeddingError> {
                VectorTable::parse(reader, name).map(Self)
            }

            pub fn write<W: Write>(&self, out: W) -> std::io::Result<()> {
                self.0.write(out)
            }

            pub fn name(&self) -> &str {
                &self.0.name
            }

            pub fn dim(&self) -> usize {
                self.0.dim
            }

            pub fn get(&self, key: &str) -> Option<&[f64]> {
                self.0.get(key)
            }

            pub fn insert(
                &mut self,
                key: impl Into<String>,
                v: Vec<f64>,
            ) -> Result<(), EmbeddingError> {
                self.0.insert(key, v)
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }
        }
    };
}

store_impl!(VectorStore);
store_impl!(SentenceVectorStore);

pub fn load_word_vectors(path: &Path) -> Result<VectorStore, EmbeddingError> {
    VectorStore::load(path)
}

pub fn load_sentence_vectors(path: &Path) -> Result<SentenceVectorStore, EmbeddingError> {
    SentenceVectorStore::load(path)
}

/// Pools the vectors of the in-vocabulary tokens. `None` when no token has a
/// vector.
pub fn compose_sentence<S: AsRef<str>>(
    tokens: &[S],
    store: &VectorStore,
    pooling: PoolingMode,
) -> Option<Vec<f64>> {
    let mut present = tokens.iter().filter_map(|t| store.get(t.as_ref()));
    let first = present.next()?;
    let mut acc = first.to_vec();
    let mut count = 1usize;
    for v in present {
        count += 1;
        for (a, x) in acc.iter_mut().zip(v) {
            match pooling {
                PoolingMode::Mean => *a += x,
                PoolingMode::Max => *a = a.max(*x),
            }
        }
    }
    if pooling == PoolingMode::Mean && count > 1 {
        let n = count as f64;
        acc.iter_mut().for_each(|a| *a /= n);
    }
    Some(acc)
}

/// Composes one review vector per token list. Reviews without any
/// in-vocabulary token are left out.
pub fn compose_store<'a, I>(
    token_lists: I,
    store: &VectorStore,
    pooling: PoolingMode,
    name: impl Into<String>,
) -> SentenceVectorStore
where
    I: IntoIterator<Item = &'a crate::textprep::TokenList>,
{
    let mut out = SentenceVectorStore::new(name, store.dim());
    for list in token_lists {
        if let Some(v) = compose_sentence(&list.tokens, store, pooling) {
            out.0.vectors.insert(list.review_id.clone(), v);
        }
    }
    out
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, EmbeddingError> {
    if a.len() != b.len() {
        return Err(EmbeddingError::LengthMismatch(a.len(), b.len()));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::ZeroNorm);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Review ids that occur in `store` but not in `known`.
pub fn unmatched_keys<'a>(store: &'a SentenceVectorStore, known: &HashSet<&str>) -> Vec<&'a str> {
    store
        .0
        .vectors
        .keys()
        .map(String::as_str)
        .filter(|k| !known.contains(k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(rows: &[(&str, &[f64])]) -> VectorStore {
        let mut s = VectorStore::new("t", rows[0].1.len());
        for (k, v) in rows {
            s.insert(*k, v.to_vec()).unwrap();
        }
        s
    }

    #[test]
    fn parses_small_file() {
        let s =
            VectorStore::parse("2 3\nfood 0.1 0.2 0.3\ngood -1 0 1.5\n".as_bytes(), "x").unwrap();
        assert_eq!(s.dim(), 3);
        assert_eq!(s.len(), 2);
        assert_eq!(s.get("good").unwrap(), &[-1.0, 0.0, 1.5]);
    }

    #[test]
    fn arity_error_names_line() {
        let row: String = (0..299).map(|i| format!(" {i}")).collect();
        let text = format!("1 300\nword{row}\n");
        let err = VectorStore::parse(text.as_bytes(), "x").unwrap_err();
        assert!(
            matches!(err, EmbeddingError::Format { line: 2, .. }),
            "{err}"
        );
    }

    #[test]
    fn empty_vocabulary() {
        let s = VectorStore::parse("0 300\n".as_bytes(), "x").unwrap();
        assert_eq!(s.dim(), 300);
        assert!(s.is_empty());
    }

    #[test]
    fn header_count_must_match() {
        assert!(VectorStore::parse("2 1\na 1\n".as_bytes(), "x").is_err());
        assert!(VectorStore::parse("".as_bytes(), "x").is_err());
        assert!(VectorStore::parse("1\na 1\n".as_bytes(), "x").is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        assert!(VectorStore::parse("1 2\na 1 NaN\n".as_bytes(), "x").is_err());
        assert!(VectorStore::parse("1 2\na 1 inf\n".as_bytes(), "x").is_err());
    }

    #[test]
    fn sentence_store_duplicate_id() {
        let err = SentenceVectorStore::parse("2 2\nr1 1 0\nr1 0 1\n".as_bytes(), "x").unwrap_err();
        match err {
            EmbeddingError::Duplicate { line, key } => {
                assert_eq!((line, key.as_str()), (3, "r1"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn sentence_store_768() {
        let mut text = String::from("3 768\n");
        for id in ["r1", "r2", "r3"] {
            text.push_str(id);
            for i in 0..768 {
                text.push_str(&format!(" {}", i as f64 / 1000.0));
            }
            text.push('\n');
        }
        let s = SentenceVectorStore::parse(text.as_bytes(), "bert").unwrap();
        assert_eq!((s.len(), s.dim()), (3, 768));
    }

    #[test]
    fn pooling() {
        let s = store(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        assert_eq!(
            compose_sentence(&["a", "b"], &s, PoolingMode::Mean).unwrap(),
            [0.5, 0.5]
        );
        assert_eq!(
            compose_sentence(&["a", "b"], &s, PoolingMode::Max).unwrap(),
            [1.0, 1.0]
        );
        assert_eq!(compose_sentence(&["x", "y"], &s, PoolingMode::Mean), None);
        assert_eq!(compose_sentence::<&str>(&[], &s, PoolingMode::Max), None);
        assert_eq!(
            compose_sentence(&["zz", "a", "qq"], &s, PoolingMode::Mean).unwrap(),
            [1.0, 0.0]
        );
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 1.0], &[-1.0, -1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            cosine(&[1.0], &[1.0, 2.0]),
            Err(EmbeddingError::LengthMismatch(1, 2))
        ));
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 2.0]),
            Err(EmbeddingError::ZeroNorm)
        ));
    }

    #[test]
    fn component_format() {
        assert_eq!(format_component(0.0), "0");
        assert_eq!(format_component(-0.0), "0");
        assert_eq!(format_component(1.0), "1");
        assert_eq!(format_component(0.123456789), "0.123457");
        assert_eq!(format_component(0.000123456789), "0.000123457");
        assert_eq!(format_component(-2.5), "-2.5");
        assert_eq!(
            format_component(1234.56789),
            "1234.567890".trim_end_matches('0')
        );
        assert!(!format_component(1e-20).contains('e'));
    }
}
