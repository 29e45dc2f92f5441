use std::collections::{BTreeSet, HashMap, HashSet};

use proptest::prelude::*;
use reviewcf::corpus::{
    filter_sample, split_train_test, BusinessIndex, RawReview, SampleSet, SampleThresholds,
};
use reviewcf::embedding::{
    compose_sentence, cosine, PoolingMode, SentenceVectorStore, VectorStore,
};
use reviewcf::eval::{rmse, PredictionRecord, RunKind};
use reviewcf::textprep::{
    correct_word, damerau_levenshtein, normalize, preprocess_review, squash_repeats, Correction,
    FrequencyDictionary, LemmaMap, PrepOptions, SpellChecker,
};

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-10.0f64..10.0, dim)
}

fn nonzero(v: &[f64]) -> bool {
    v.iter().any(|x| x.abs() > 1e-3)
}

fn small_dict() -> FrequencyDictionary {
    let words = [
        ("good", 90),
        ("food", 80),
        ("great", 70),
        ("place", 60),
        ("wonderful", 5),
        ("service", 50),
        ("go", 40),
        ("went", 30),
        ("goes", 20),
        ("fool", 10),
        ("god", 10),
        ("plate", 15),
        ("serve", 25),
    ];
    FrequencyDictionary::from_entries(words.iter().map(|&(w, f)| (w.to_owned(), f))).unwrap()
}

fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,9}"
}

fn review(id: usize, text: String) -> RawReview {
    RawReview {
        review_id: format!("r{id}"),
        user_id: "u".into(),
        business_id: "b".into(),
        stars: 3,
        text,
        date: None,
    }
}

fn record(truth: u8, pred: f64) -> PredictionRecord {
    PredictionRecord {
        user_id: "u".into(),
        item_id: "i".into(),
        truth,
        raw_prediction: Some(pred),
        clamped_prediction: pred,
        fallback: None,
        strategy: "s".into(),
        kind: RunKind::Baseline,
        neighbor_count: 1,
    }
}

proptest! {
    #[test]
    fn cosine_is_symmetric_and_scale_invariant(a in vector(6), b in vector(6), s in 0.01f64..100.0) {
        prop_assume!(nonzero(&a) && nonzero(&b));
        let ab = cosine(&a, &b).unwrap();
        prop_assert_eq!(ab, cosine(&b, &a).unwrap());
        prop_assert!((-1.0..=1.0).contains(&ab));
        let scaled: Vec<f64> = a.iter().map(|x| x * s).collect();
        prop_assert!((cosine(&scaled, &b).unwrap() - ab).abs() < 1e-9);
    }

    #[test]
    fn pooling_ignores_token_order(vs in proptest::collection::vec(vector(4), 1..6), seed in any::<u64>()) {
        let mut store = VectorStore::new("w", 4);
        let tokens: Vec<String> = (0..vs.len()).map(|i| format!("t{i}")).collect();
        for (t, v) in tokens.iter().zip(&vs) {
            store.insert(t.clone(), v.clone()).unwrap();
        }
        let mut shuffled = tokens.clone();
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        for mode in [PoolingMode::Mean, PoolingMode::Max] {
            let a = compose_sentence(&tokens, &store, mode).unwrap();
            let b = compose_sentence(&shuffled, &store, mode).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
        let single = compose_sentence(&tokens[..1], &store, PoolingMode::Mean).unwrap();
        prop_assert_eq!(single, vs[0].clone());
        prop_assert!(compose_sentence(&["missing"], &store, PoolingMode::Mean).is_none());
    }

    #[test]
    fn vector_files_round_trip(rows in proptest::collection::btree_map("[a-z0-9_]{1,8}", proptest::collection::vec(-1e4f64..1e4, 3), 0..12)) {
        let mut store = SentenceVectorStore::new("s", 3);
        for (k, v) in &rows {
            store.insert(k.clone(), v.clone()).unwrap();
        }
        let mut buf = Vec::new();
        store.write(&mut buf).unwrap();
        let back = SentenceVectorStore::parse(buf.as_slice(), "s").unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (k, v) in &rows {
            for (x, y) in v.iter().zip(back.get(k).unwrap()) {
                prop_assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0), "{} vs {}", x, y);
            }
        }
    }

    #[test]
    fn squash_caps_runs(w in "[a-c]{0,12}") {
        let s = squash_repeats(&w);
        let b = s.as_bytes();
        prop_assert!(b.windows(3).all(|t| !(t[0] == t[1] && t[1] == t[2])));
        prop_assert_eq!(squash_repeats(&s), s.clone());
        prop_assert!(s.len() <= w.len());
        // Same letters in the same order once runs are collapsed to one.
        let dedup = |x: &str| { let mut v: Vec<char> = x.chars().collect(); v.dedup(); v };
        prop_assert_eq!(dedup(&s), dedup(&w));
    }

    #[test]
    fn corrections_respect_the_distance_bound(w in word(), max_d in 0usize..3) {
        let dict = small_dict();
        let checker = SpellChecker::new(&dict, max_d);
        let got = correct_word(&w, &dict, max_d);
        prop_assert_eq!(&checker.correct(&w), &got);
        let best = dict.iter().map(|(d, _)| damerau_levenshtein(&w, d)).min().unwrap();
        match &got {
            Correction::Known(k) => prop_assert_eq!(k, &w),
            Correction::Corrected(c) => {
                prop_assert!(dict.contains(c));
                prop_assert_eq!(damerau_levenshtein(&w, c), best);
                prop_assert!(best <= max_d);
            }
            Correction::Removed => prop_assert!(best > max_d),
        }
    }

    #[test]
    fn damerau_levenshtein_bounds(a in "[a-d]{0,7}", b in "[a-d]{0,7}") {
        let ab = damerau_levenshtein(&a, &b);
        prop_assert_eq!(ab, damerau_levenshtein(&b, &a));
        prop_assert_eq!(ab == 0, a == b);
        prop_assert!(ab <= a.len().max(b.len()));
        prop_assert!(ab >= a.len().abs_diff(b.len()));
    }

    #[test]
    fn normalized_tokens_are_alphabetic_and_not_stop_words(text in "[A-Za-z0-9 ,.!'’-]{0,60}") {
        let options = PrepOptions::default();
        for t in normalize(&text, &options) {
            prop_assert!(t.len() >= 2 && t.bytes().all(|b| b.is_ascii_lowercase()), "{:?}", t);
            prop_assert!(!options.stop_list.contains(&t));
        }
    }

    #[test]
    fn cleaning_steps_never_grow_the_vocabulary(texts in proptest::collection::vec("[a-z ]{0,40}", 1..8)) {
        let dict = small_dict();
        let lemmas = LemmaMap::from_pairs([("went", "go"), ("goes", "go"), ("foods", "food")].map(|(a, b)| (a.to_owned(), b.to_owned()))).unwrap();
        let reviews: Vec<RawReview> = texts.into_iter().enumerate().map(|(i, t)| review(i, t)).collect();
        let bare = PrepOptions::bare();
        let vocab = |options: &PrepOptions| -> usize {
            reviews.iter()
                .flat_map(|r| preprocess_review(r, &dict, &lemmas, options).tokens)
                .collect::<BTreeSet<_>>()
                .len()
        };
        let raw = vocab(&PrepOptions { spell_correct: false, ..bare.clone() });
        let corrected = vocab(&bare);
        let lemmatized = vocab(&PrepOptions { lemmatize: true, ..bare.clone() });
        prop_assert!(corrected <= raw);
        prop_assert!(lemmatized <= corrected);
        for r in &reviews {
            for t in preprocess_review(r, &dict, &lemmas, &bare).tokens {
                prop_assert!(dict.contains(&t));
            }
        }
    }

    #[test]
    fn rmse_is_translation_invariant_and_monotone(
        cases in proptest::collection::vec((1u8..=5, -2.0f64..2.0), 1..20),
        grow in 1.0f64..3.0,
    ) {
        let base: Vec<PredictionRecord> = cases.iter().map(|&(t, e)| record(t, f64::from(t) + e)).collect();
        // Same errors against different truths.
        let shifted: Vec<PredictionRecord> = cases.iter().map(|&(t, e)| {
            let t2 = 6 - t;
            record(t2, f64::from(t2) + e)
        }).collect();
        prop_assert!((rmse(&base).unwrap() - rmse(&shifted).unwrap()).abs() < 1e-9);
        let wider: Vec<PredictionRecord> = cases.iter().map(|&(t, e)| record(t, f64::from(t) + e * grow)).collect();
        prop_assert!(rmse(&wider).unwrap() >= rmse(&base).unwrap() - 1e-12);
    }
}

fn random_reviews(seed: u64, users: usize, items: usize, n: usize) -> Vec<RawReview> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| RawReview {
            review_id: format!("r{k}"),
            user_id: format!("u{}", rng.gen_range(0..users)),
            business_id: format!("b{}", rng.gen_range(0..items)),
            stars: rng.gen_range(1..=5),
            text: "word ".repeat(rng.gen_range(0..30)),
            date: None,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filtered_sample_is_a_fixed_point(seed in any::<u64>(), min_u in 1usize..6, min_b in 1usize..8, size in 20usize..400) {
        let thresholds = SampleThresholds {
            min_user_reviews: min_u,
            min_business_reviews: min_b,
            min_review_words: 5,
            sample_size: size,
            region_filter: None,
            restaurants_only: false,
        };
        let words = |r: &RawReview| r.text.split_whitespace().count();
        let reviews = random_reviews(seed, 30, 20, 400);
        let Ok(sample) = filter_sample(reviews, &BusinessIndex::new(), &thresholds, seed, words) else {
            return Ok(());
        };
        prop_assert!(sample.len() <= size);
        let mut by_user: HashMap<&str, usize> = HashMap::new();
        let mut by_business: HashMap<&str, usize> = HashMap::new();
        for r in &sample.reviews {
            *by_user.entry(&r.user_id).or_default() += 1;
            *by_business.entry(&r.business_id).or_default() += 1;
            prop_assert!(words(r) >= 5);
        }
        prop_assert!(by_user.values().all(|&c| c >= min_u));
        prop_assert!(by_business.values().all(|&c| c >= min_b));
        let again = filter_sample(sample.reviews.clone(), &BusinessIndex::new(), &thresholds, seed, words).unwrap();
        prop_assert_eq!(again.reviews, sample.reviews);
    }

    #[test]
    fn split_partitions_without_leakage(seed in any::<u64>(), n in 5usize..300, a in 1u32..6, b in 1u32..6) {
        let sample = SampleSet {
            reviews: random_reviews(seed, 10, 10, n),
            provenance: SampleThresholds::unrestricted(),
            seed,
        };
        let split = split_train_test(&sample, (a, b), seed).unwrap();
        let train: HashSet<&str> = split.train.reviews.iter().map(|r| r.review_id.as_str()).collect();
        let test: HashSet<&str> = split.test.reviews.iter().map(|r| r.review_id.as_str()).collect();
        prop_assert!(train.is_disjoint(&test));
        prop_assert_eq!(train.len() + test.len(), n);
        let total = (a + b) as f64;
        prop_assert_eq!(split.train.len(), (n as f64 * f64::from(a) / total).round() as usize);
        let position: HashMap<&str, usize> = sample.reviews.iter().enumerate().map(|(i, r)| (r.review_id.as_str(), i)).collect();
        for part in [&split.train, &split.test] {
            let idx: Vec<usize> = part.reviews.iter().map(|r| position[r.review_id.as_str()]).collect();
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        }
        prop_assert_eq!(split_train_test(&sample, (a, b), seed).unwrap(), split);
    }
}
