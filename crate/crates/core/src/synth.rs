//! Small deterministic corpora: the four-user worked example and a seeded
//! synthetic corpus with latent restaurant categories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{BusinessRecord, RawReview};
use crate::embedding::{SentenceVectorStore, VectorStore};

/// The 4 × 4 worked example; User2 has not rated Item2.
pub fn worked_example_reviews() -> Vec<RawReview> {
    let grid: [[Option<u8>; 4]; 4] = [
        [Some(1), Some(3), None, Some(4)],
        [Some(4), None, Some(2), Some(3)],
        [None, Some(5), Some(5), Some(4)],
        [Some(5), Some(2), Some(5), None],
    ];
    let mut out = Vec::new();
    for (u, row) in grid.iter().enumerate() {
        for (i, stars) in row.iter().enumerate() {
            if let Some(stars) = stars {
                out.push(RawReview {
                    review_id: format!("R{}-{}", u + 1, i + 1),
                    user_id: format!("User{}", u + 1),
                    business_id: format!("Item{}", i + 1),
                    stars: *stars,
                    text: String::new(),
                    date: None,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub users: usize,
    pub items: usize,
    pub categories: usize,
    /// Probability that a user reviewed a given item.
    pub density: f64,
    /// Standard deviation of the rating noise, in stars.
    pub rating_noise: f64,
    /// Standard deviation of a user's per-category affinity around their
    /// overall rating level.
    pub affinity_spread: f64,
    /// Standard deviation of each review-vector component around its
    /// category centroid.
    pub vector_noise: f64,
    pub dim: usize,
    pub seed: u64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            users: 20,
            items: 15,
            categories: 3,
            density: 1.0,
            rating_noise: 0.5,
            affinity_spread: 0.3,
            vector_noise: 0.3,
            dim: 8,
            seed: 2021,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ToyCorpus {
    pub reviews: Vec<RawReview>,
    pub businesses: Vec<BusinessRecord>,
    /// Review vectors: category centroid plus noise.
    pub sentence_vectors: SentenceVectorStore,
    /// Vectors for the vocabulary used in review texts.
    pub word_vectors: VectorStore,
    pub item_category: Vec<usize>,
}

const CUISINES: [(&str, [&str; 6]); 4] = [
    (
        "Italian",
        ["pasta", "pizza", "risotto", "lasagna", "gelato", "espresso"],
    ),
    (
        "Japanese",
        ["sushi", "ramen", "tempura", "sashimi", "udon", "miso"],
    ),
    (
        "American",
        ["burger", "fries", "steak", "barbecue", "wings", "milkshake"],
    ),
    (
        "Mexican",
        [
            "tacos",
            "burrito",
            "salsa",
            "nachos",
            "guacamole",
            "tortilla",
        ],
    ),
];

const SENTIMENT: [&[&str]; 5] = [
    &["awful", "terrible", "cold"],
    &["bland", "slow", "disappointing"],
    &["decent", "okay", "average"],
    &["good", "tasty", "friendly"],
    &["amazing", "delicious", "excellent"],
];

const FILLER: [&str; 8] = [
    "the", "food", "was", "and", "service", "we", "ordered", "place",
];

fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize, sd: f64) -> Vec<f64> {
    let normal = Normal::new(0.0, sd).expect("finite sd");
    (0..dim).map(|_| normal.sample(rng)).collect()
}

/// Generates the synthetic corpus. Each user has an overall rating level and
/// an affinity per category scattered around it; ratings are affinity + item
/// offset + noise rounded into 1..5.
pub fn toy_corpus(cfg: &ToyConfig) -> ToyCorpus {
    assert!(cfg.categories >= 1 && cfg.categories <= CUISINES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let centroids: Vec<Vec<f64>> = (0..cfg.categories)
        .map(|_| gaussian_vec(&mut rng, cfg.dim, 1.0))
        .collect();
    let item_category: Vec<usize> = (0..cfg.items).map(|i| i % cfg.categories).collect();
    let item_offset: Vec<f64> = (0..cfg.items).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let spread = Normal::new(0.0, cfg.affinity_spread).expect("finite spread");
    let affinity: Vec<Vec<f64>> = (0..cfg.users)
        .map(|_| {
            let level = rng.gen_range(1.5..4.5);
            (0..cfg.categories)
                .map(|_| level + spread.sample(&mut rng))
                .collect()
        })
        .collect();
    let noise = Normal::new(0.0, cfg.rating_noise).expect("finite noise");

    let mut word_vectors = VectorStore::new("toy-words", cfg.dim);
    for (c, (_, words)) in CUISINES.iter().take(cfg.categories).enumerate() {
        for w in words {
            let v: Vec<f64> = centroids[c]
                .iter()
                .zip(gaussian_vec(&mut rng, cfg.dim, 0.1))
                .map(|(a, b)| a + b)
                .collect();
            word_vectors.insert(*w, v).expect("dimension matches");
        }
    }
    for w in SENTIMENT
        .iter()
        .flat_map(|s| s.iter())
        .chain(["food", "service", "ordered", "place"].iter())
    {
        word_vectors
            .insert(*w, gaussian_vec(&mut rng, cfg.dim, 0.2))
            .expect("dimension matches");
    }

    let mut reviews = Vec::new();
    let mut sentence_vectors = SentenceVectorStore::new("toy-reviews", cfg.dim);
    for (u, user_affinity) in affinity.iter().enumerate() {
        for i in 0..cfg.items {
            if !rng.gen_bool(cfg.density) {
                continue;
            }
            let c = item_category[i];
            let score = user_affinity[c] + item_offset[i] + noise.sample(&mut rng);
            let stars = score.round().clamp(1.0, 5.0) as u8;

            let dish = CUISINES[c].1;
            let mood = SENTIMENT[stars as usize - 1];
            let mut words = Vec::with_capacity(24);
            for k in 0..24 {
                let w = match k % 3 {
                    0 => dish[rng.gen_range(0..dish.len())],
                    1 => mood[rng.gen_range(0..mood.len())],
                    _ => FILLER[rng.gen_range(0..FILLER.len())],
                };
                words.push(w);
            }
            let review_id = format!("r{:02}{:02}", u, i);
            let v: Vec<f64> = centroids[c]
                .iter()
                .zip(gaussian_vec(&mut rng, cfg.dim, cfg.vector_noise))
                .map(|(a, b)| a + b)
                .collect();
            sentence_vectors
                .insert(review_id.clone(), v)
                .expect("dimension matches");
            reviews.push(RawReview {
                review_id,
                user_id: format!("u{u:02}"),
                business_id: format!("b{i:02}"),
                stars,
                text: words.join(" "),
                date: Some(format!("2020-{:02}-{:02} 12:00:00", 1 + i % 12, 1 + u % 28)),
            });
        }
    }

    let businesses = (0..cfg.items)
        .map(|i| BusinessRecord {
            business_id: format!("b{i:02}"),
            state: Some("MA".to_owned()),
            categories: Some(format!("Restaurants, {}", CUISINES[item_category[i]].0)),
        })
        .collect();

    ToyCorpus {
        reviews,
        businesses,
        sentence_vectors,
        word_vectors,
        item_category,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_has_twelve_ratings() {
        let r = worked_example_reviews();
        assert_eq!(r.len(), 12);
        assert!(!r
            .iter()
            .any(|r| r.user_id == "User2" && r.business_id == "Item2"));
    }

    #[test]
    fn toy_corpus_is_seeded() {
        let cfg = ToyConfig::default();
        let a = toy_corpus(&cfg);
        let b = toy_corpus(&cfg);
        assert_eq!(a.reviews, b.reviews);
        assert_eq!(a.sentence_vectors, b.sentence_vectors);
        let c = toy_corpus(&ToyConfig { seed: 1, ..cfg });
        assert_ne!(a.reviews, c.reviews);
    }

    #[test]
    fn toy_corpus_shape() {
        let t = toy_corpus(&ToyConfig::default());
        assert_eq!(t.businesses.len(), 15);
        assert_eq!(t.sentence_vectors.len(), t.reviews.len());
        assert!(t.reviews.iter().all(|r| (1..=5).contains(&r.stars)));
        assert!(t.reviews.iter().all(|r| r.text.split(' ').count() == 24));
    }
}
