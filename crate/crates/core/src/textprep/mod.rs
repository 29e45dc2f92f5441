//! Review text cleaning: normalization, run capping, spell correction and
//! lemmatization.

mod lemma;
mod normalize;
mod spell;

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::RawReview;

pub use lemma::{lemmatize, LemmaMap};
pub use normalize::{is_token, normalize, split_alphabetic};
pub use spell::{correct_word, damerau_levenshtein, squash_repeats, Correction, SpellChecker};

const ENGLISH_STOP_WORDS: &str = include_str!("../../data/stopwords_en.txt");
const ENGLISH_ABBREVIATIONS: &str = include_str!("../../data/abbreviations_en.tsv");
const ENGLISH_FREQUENCIES: &str = include_str!("../../data/en_freq_20k.tsv");
const ENGLISH_LEMMAS: &str = include_str!("../../data/lemma_en_20k.tsv");

#[derive(Debug, Error)]
pub enum TextprepError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("lemma map has a cycle through {0:?}")]
    LemmaCycle(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> TextprepError {
    TextprepError::Parse {
        line,
        message: message.into(),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, TextprepError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| TextprepError::Io {
            path: path.to_owned(),
            source,
        })
}

/// Non-empty lines of a reader with their 1-based line numbers.
fn data_lines<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<(usize, String), TextprepError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(Ok((i + 1, l))),
            Err(e) => Some(Err(parse_err(i + 1, e.to_string()))),
        })
}

fn tab_pair(line_no: usize, line: &str) -> Result<(&str, &str), TextprepError> {
    line.split_once('\t')
        .ok_or_else(|| parse_err(line_no, "expected two tab-separated fields"))
}

/// Word frequencies of known-correct words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyDictionary {
    entries: HashMap<String, u64>,
}

impl FrequencyDictionary {
    pub fn from_entries<I>(entries: I) -> Result<Self, TextprepError>
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut map = HashMap::new();
        for (i, (word, freq)) in entries.into_iter().enumerate() {
            Self::check(i + 1, &word, freq)?;
            if map.insert(word.clone(), freq).is_some() {
                return Err(parse_err(i + 1, format!("duplicate word {word:?}")));
            }
        }
        Ok(Self { entries: map })
    }

    fn check(line: usize, word: &str, freq: u64) -> Result<(), TextprepError> {
        if !is_token(word) {
            return Err(parse_err(line, format!("{word:?} is not a lowercase word")));
        }
        if freq == 0 {
            return Err(parse_err(line, format!("{word:?} has zero frequency")));
        }
        Ok(())
    }

    /// Parses `word<TAB>count` lines.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, TextprepError> {
        let mut map = HashMap::new();
        for row in data_lines(reader) {
            let (line_no, line) = row?;
            let (word, count) = tab_pair(line_no, &line)?;
            let freq: u64 = count
                .trim()
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad count {count:?}")))?;
            Self::check(line_no, word, freq)?;
            if map.insert(word.to_owned(), freq).is_some() {
                return Err(parse_err(line_no, format!("duplicate word {word:?}")));
            }
        }
        Ok(Self { entries: map })
    }

    pub fn load(path: &Path) -> Result<Self, TextprepError> {
        Self::parse(open(path)?)
    }

    /// Writes the dictionary sorted by word.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut rows: Vec<_> = self.iter().collect();
        rows.sort();
        for (word, freq) in rows {
            writeln!(out, "{word}\t{freq}")?;
        }
        Ok(())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn frequency(&self, word: &str) -> Option<u64> {
        self.entries.get(word).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(w, f)| (w.as_str(), *f))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Reads a one-word-per-line stop list.
pub fn parse_stop_list<R: BufRead>(reader: R) -> Result<HashSet<String>, TextprepError> {
    data_lines(reader)
        .map(|row| row.map(|(_, l)| l.trim().to_lowercase()))
        .collect()
}

pub fn load_stop_list(path: &Path) -> Result<HashSet<String>, TextprepError> {
    parse_stop_list(open(path)?)
}

/// Reads `contracted<TAB>expansion` lines.
pub fn parse_abbreviations<R: BufRead>(
    reader: R,
) -> Result<HashMap<String, String>, TextprepError> {
    let mut map = HashMap::new();
    for row in data_lines(reader) {
        let (line_no, line) = row?;
        let (short, long) = tab_pair(line_no, &line)?;
        map.insert(
            normalize::fold_apostrophes(&short.trim().to_lowercase()),
            long.trim().to_lowercase(),
        );
    }
    Ok(map)
}

pub fn load_abbreviations(path: &Path) -> Result<HashMap<String, String>, TextprepError> {
    parse_abbreviations(open(path)?)
}

/// The bundled 179-word English stop list.
pub fn english_stop_list() -> HashSet<String> {
    parse_stop_list(ENGLISH_STOP_WORDS.as_bytes()).expect("bundled stop list parses")
}

/// The bundled English contraction map.
pub fn english_abbreviations() -> HashMap<String, String> {
    parse_abbreviations(ENGLISH_ABBREVIATIONS.as_bytes()).expect("bundled abbreviations parse")
}

/// The bundled 20,000-word English frequency dictionary.
pub fn english_dictionary() -> FrequencyDictionary {
    FrequencyDictionary::parse(ENGLISH_FREQUENCIES.as_bytes()).expect("bundled dictionary parses")
}

/// The bundled lemma table covering the bundled dictionary.
pub fn english_lemmas() -> LemmaMap {
    LemmaMap::parse(ENGLISH_LEMMAS.as_bytes()).expect("bundled lemma table parses")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrepOptions {
    pub lemmatize: bool,
    pub spell_correct: bool,
    pub stop_list: HashSet<String>,
    pub abbreviation_map: HashMap<String, String>,
    pub max_edit_distance: usize,
}

impl Default for PrepOptions {
    fn default() -> Self {
        Self {
            lemmatize: false,
            spell_correct: true,
            stop_list: english_stop_list(),
            abbreviation_map: english_abbreviations(),
            max_edit_distance: 2,
        }
    }
}

impl PrepOptions {
    /// No stop words, no abbreviations.
    pub fn bare() -> Self {
        Self {
            stop_list: HashSet::new(),
            abbreviation_map: HashMap::new(),
            ..Self::default()
        }
    }

    pub fn with_stop_words<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stop_list = words.into_iter().map(Into::into).collect();
        self
    }
}

/// A cleaned review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenList {
    pub review_id: String,
    pub tokens: Vec<String>,
    /// Tokens deleted because no dictionary word was close enough.
    pub dropped: usize,
    /// Tokens changed by run capping or spell correction.
    pub corrected: usize,
}

/// Runs normalize → squash_repeats → correct → lemmatize with an exhaustive
/// dictionary scan for correction. [`Preprocessor`] gives the same result
/// with an indexed dictionary.
pub fn preprocess_review(
    review: &RawReview,
    dict: &FrequencyDictionary,
    map: &LemmaMap,
    options: &PrepOptions,
) -> TokenList {
    run_pipeline(review, map, options, |w| {
        correct_word(w, dict, options.max_edit_distance)
    })
}

fn run_pipeline<F>(
    review: &RawReview,
    map: &LemmaMap,
    options: &PrepOptions,
    correct: F,
) -> TokenList
where
    F: Fn(&str) -> Correction,
{
    let mut out = TokenList {
        review_id: review.review_id.clone(),
        tokens: Vec::new(),
        dropped: 0,
        corrected: 0,
    };
    for token in normalize(&review.text, options) {
        let word = if options.spell_correct {
            let squashed = squash_repeats(&token);
            match correct(&squashed) {
                Correction::Known(w) | Correction::Corrected(w) => w,
                Correction::Removed => {
                    out.dropped += 1;
                    continue;
                }
            }
        } else {
            token.clone()
        };
        if word != token {
            out.corrected += 1;
        }
        let word = if options.lemmatize {
            lemmatize(&word, map).to_owned()
        } else {
            word
        };
        out.tokens.push(word);
    }
    out
}

/// Reusable preprocessing pipeline holding an indexed dictionary.
pub struct Preprocessor {
    checker: SpellChecker,
    lemmas: LemmaMap,
    options: PrepOptions,
}

impl Preprocessor {
    pub fn new(dict: &FrequencyDictionary, lemmas: LemmaMap, options: PrepOptions) -> Self {
        Self {
            checker: SpellChecker::new(dict, options.max_edit_distance),
            lemmas,
            options,
        }
    }

    pub fn options(&self) -> &PrepOptions {
        &self.options
    }

    pub fn set_lemmatize(&mut self, on: bool) {
        self.options.lemmatize = on;
    }

    pub fn process(&self, review: &RawReview) -> TokenList {
        run_pipeline(review, &self.lemmas, &self.options, |w| {
            self.checker.correct(w)
        })
    }
}
