//! Ingestion of Yelp-style dumps, threshold sampling and the train/test split.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("read error at line {line}: {source}")]
    Read {
        line: usize,
        #[source]
        source: std::io::Error,
    },
    #[error("thresholds eliminate all data")]
    Empty,
    #[error("ratio components must be positive, got {0}:{1}")]
    InvalidRatio(u32, u32),
    #[error("cannot split {len} reviews at ratio {train}:{test}; need at least {}", train + test)]
    TooSmallForSplit { len: usize, train: u32, test: u32 },
}

/// One review from the review dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawReview {
    pub review_id: String,
    pub user_id: String,
    pub business_id: String,
    pub stars: u8,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
}

/// The subset of a business record the sampler looks at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusinessRecord {
    pub business_id: String,
    #[serde(default)]
    pub state: Option<String>,
    #[serde(default)]
    pub categories: Option<String>,
}

impl BusinessRecord {
    /// A business is a restaurant when one of its comma-separated categories
    /// is exactly `Restaurants`.
    pub fn is_restaurant(&self) -> bool {
        self.categories
            .as_deref()
            .map(|c| c.split(',').any(|cat| cat.trim() == "Restaurants"))
            .unwrap_or(false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    #[serde(default)]
    pub review_count: Option<u64>,
}

/// A record type that can be parsed from one line of a dump.
pub trait DumpRecord: Sized {
    fn parse_line(line: &str) -> Result<Self, String>;
}

#[derive(Deserialize)]
struct ReviewLine {
    review_id: String,
    user_id: String,
    business_id: String,
    stars: f64,
    text: String,
    #[serde(default)]
    date: Option<String>,
}

impl DumpRecord for RawReview {
    fn parse_line(line: &str) -> Result<Self, String> {
        let raw: ReviewLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if raw.stars.fract() != 0.0 || !(1.0..=5.0).contains(&raw.stars) {
            return Err(format!("stars out of range: {}", raw.stars));
        }
        Ok(RawReview {
            review_id: raw.review_id,
            user_id: raw.user_id,
            business_id: raw.business_id,
            stars: raw.stars as u8,
            text: raw.text,
            date: raw.date,
        })
    }
}

impl DumpRecord for BusinessRecord {
    fn parse_line(line: &str) -> Result<Self, String> {
        serde_json::from_str(line).map_err(|e| e.to_string())
    }
}

impl DumpRecord for UserRecord {
    fn parse_line(line: &str) -> Result<Self, String> {
        serde_json::from_str(line).map_err(|e| e.to_string())
    }
}

/// Streams records from a line-delimited dump. Lines that fail to parse are
/// counted and skipped; blank lines are ignored.
pub struct RecordReader<R, T> {
    lines: std::io::Lines<R>,
    line_no: usize,
    skipped: usize,
    first_skip: Option<(usize, String)>,
    _record: PhantomData<T>,
}

impl<R: BufRead, T: DumpRecord> RecordReader<R, T> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line_no: 0,
            skipped: 0,
            first_skip: None,
            _record: PhantomData,
        }
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// Line number and reason of the first skipped line.
    pub fn first_skip(&self) -> Option<&(usize, String)> {
        self.first_skip.as_ref()
    }
}

impl<R: BufRead, T: DumpRecord> Iterator for RecordReader<R, T> {
    type Item = Result<T, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(source) => {
                    return Some(Err(CorpusError::Read {
                        line: self.line_no + 1,
                        source,
                    }))
                }
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            match T::parse_line(&line) {
                Ok(record) => return Some(Ok(record)),
                Err(reason) => {
                    self.skipped += 1;
                    if self.first_skip.is_none() {
                        self.first_skip = Some((self.line_no, reason));
                    }
                }
            }
        }
    }
}

/// Opens a dump file for streaming.
pub fn open_records<T: DumpRecord>(
    path: &Path,
) -> Result<RecordReader<BufReader<File>, T>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(RecordReader::new(BufReader::new(file)))
}

/// Records of a fully read dump plus the number of skipped lines.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub skipped: usize,
}

pub fn load_records<T: DumpRecord>(path: &Path) -> Result<Loaded<T>, CorpusError> {
    let mut reader = open_records::<T>(path)?;
    let records = reader.by_ref().collect::<Result<Vec<_>, _>>()?;
    Ok(Loaded {
        records,
        skipped: reader.skipped(),
    })
}

pub fn load_reviews(path: &Path) -> Result<Loaded<RawReview>, CorpusError> {
    load_records(path)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusinessInfo {
    pub state: Option<String>,
    pub restaurant: bool,
}

/// business_id → region and restaurant flag.
#[derive(Debug, Clone, Default)]
pub struct BusinessIndex {
    entries: HashMap<String, BusinessInfo>,
}

impl BusinessIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, record: &BusinessRecord) {
        self.entries.insert(
            record.business_id.clone(),
            BusinessInfo {
                state: record.state.clone().filter(|s| !s.is_empty()),
                restaurant: record.is_restaurant(),
            },
        );
    }

    pub fn get(&self, business_id: &str) -> Option<&BusinessInfo> {
        self.entries.get(business_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<'a> FromIterator<&'a BusinessRecord> for BusinessIndex {
    fn from_iter<I: IntoIterator<Item = &'a BusinessRecord>>(iter: I) -> Self {
        let mut index = BusinessIndex::new();
        for record in iter {
            index.insert(record);
        }
        index
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleThresholds {
    pub min_user_reviews: usize,
    pub min_business_reviews: usize,
    pub min_review_words: usize,
    pub sample_size: usize,
    /// Keep only businesses whose state equals this code.
    pub region_filter: Option<String>,
    /// Keep only businesses categorized as `Restaurants`.
    pub restaurants_only: bool,
}

impl SampleThresholds {
    /// 35 reviews per user, 150 per business, 20 words per review, 125k
    /// sampled reviews from Massachusetts restaurants.
    pub fn yelp_ma() -> Self {
        Self {
            min_user_reviews: 35,
            min_business_reviews: 150,
            min_review_words: 20,
            sample_size: 125_000,
            region_filter: Some("MA".to_owned()),
            restaurants_only: true,
        }
    }

    /// Thresholds that keep everything.
    pub fn unrestricted() -> Self {
        Self {
            min_user_reviews: 0,
            min_business_reviews: 0,
            min_review_words: 0,
            sample_size: usize::MAX,
            region_filter: None,
            restaurants_only: false,
        }
    }

    fn filters_business(&self) -> bool {
        self.region_filter.is_some() || self.restaurants_only
    }

    fn business_ok(&self, info: Option<&BusinessInfo>) -> bool {
        if !self.filters_business() {
            return true;
        }
        let Some(info) = info else { return false };
        if self.restaurants_only && !info.restaurant {
            return false;
        }
        match (&self.region_filter, &info.state) {
            (None, _) => true,
            (Some(want), Some(state)) => want == state,
            (Some(_), None) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    pub reviews: Vec<RawReview>,
    pub provenance: SampleThresholds,
    pub seed: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: SampleSet,
    pub test: SampleSet,
    pub ratio: (u32, u32),
}

/// Drops reviews of users and businesses below their minimum count until no
/// further review is removed.
fn count_fixed_point(mut reviews: Vec<RawReview>, t: &SampleThresholds) -> Vec<RawReview> {
    loop {
        let mut by_user: HashMap<&str, usize> = HashMap::new();
        let mut by_business: HashMap<&str, usize> = HashMap::new();
        for r in &reviews {
            *by_user.entry(&r.user_id).or_default() += 1;
            *by_business.entry(&r.business_id).or_default() += 1;
        }
        let keep: Vec<bool> = reviews
            .iter()
            .map(|r| {
                by_user[r.user_id.as_str()] >= t.min_user_reviews
                    && by_business[r.business_id.as_str()] >= t.min_business_reviews
            })
            .collect();
        if keep.iter().all(|&k| k) {
            return reviews;
        }
        let mut flags = keep.into_iter();
        reviews.retain(|_| flags.next().unwrap_or(false));
    }
}

/// Applies the sampling thresholds jointly and subsamples to `sample_size`.
///
/// `word_count` gives the length of a review after text cleaning. The region
/// and word filters are applied once; the user and business counts are
/// iterated to a fixed point. When more than `sample_size` reviews survive,
/// a uniform sample without replacement is drawn with `seed` and the count
/// filter is re-applied to it, so every returned review satisfies all
/// thresholds against the returned set.
pub fn filter_sample<F>(
    reviews: Vec<RawReview>,
    businesses: &BusinessIndex,
    thresholds: &SampleThresholds,
    seed: u64,
    word_count: F,
) -> Result<SampleSet, CorpusError>
where
    F: Fn(&RawReview) -> usize + Sync,
{
    let in_region: Vec<RawReview> = reviews
        .into_iter()
        .filter(|r| thresholds.business_ok(businesses.get(&r.business_id)))
        .collect();
    let long_enough = crate::par::map(&in_region, |r| {
        thresholds.min_review_words == 0 || word_count(r) >= thresholds.min_review_words
    });
    let mut flags = long_enough.into_iter();
    let mut survivors = in_region;
    survivors.retain(|_| flags.next().unwrap_or(false));

    let mut survivors = count_fixed_point(survivors, thresholds);
    if survivors.len() > thresholds.sample_size {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked =
            rand::seq::index::sample(&mut rng, survivors.len(), thresholds.sample_size).into_vec();
        picked.sort_unstable();
        let mut picked = picked.into_iter().peekable();
        let mut position = 0usize;
        survivors.retain(|_| {
            let keep = picked.peek() == Some(&position);
            if keep {
                picked.next();
            }
            position += 1;
            keep
        });
        survivors = count_fixed_point(survivors, thresholds);
    }
    if survivors.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(SampleSet {
        reviews: survivors,
        provenance: thresholds.clone(),
        seed,
    })
}

/// Splits a sample into disjoint train and test sets at `ratio` (train:test).
/// Both halves keep the sample's original order.
pub fn split_train_test(
    sample: &SampleSet,
    ratio: (u32, u32),
    seed: u64,
) -> Result<Split, CorpusError> {
    let (train_parts, test_parts) = ratio;
    if train_parts == 0 || test_parts == 0 {
        return Err(CorpusError::InvalidRatio(train_parts, test_parts));
    }
    let n = sample.len();
    let total = (train_parts + test_parts) as usize;
    if n < total {
        return Err(CorpusError::TooSmallForSplit {
            len: n,
            train: train_parts,
            test: test_parts,
        });
    }
    let n_train = (n * train_parts as usize + total / 2) / total;

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let train_idx: HashSet<usize> = order[..n_train].iter().copied().collect();

    let (train, test): (Vec<_>, Vec<_>) = sample
        .reviews
        .iter()
        .enumerate()
        .partition(|(i, _)| train_idx.contains(i));
    let strip = |part: Vec<(usize, &RawReview)>| -> SampleSet {
        SampleSet {
            reviews: part.into_iter().map(|(_, r)| r.clone()).collect(),
            provenance: sample.provenance.clone(),
            seed,
        }
    };
    Ok(Split {
        train: strip(train),
        test: strip(test),
        ratio,
    })
}
