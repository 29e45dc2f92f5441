//! Writes the synthetic toy corpus to a directory:
//!
//!     cargo run -p reviewcf --example toy_fixture -- crates/core/tests/fixtures/toy
//!
//! With `--scan DENSITY NOISE SPREAD K` it instead prints, for 40 seeds, how
//! often review-based neighbors at K beat the best weight-based strategy.

use std::fs;
use std::path::PathBuf;

use reviewcf::cf::{build_matrix, MeanMode, NeighborStrategy};
use reviewcf::corpus::{split_train_test, SampleSet, SampleThresholds};
use reviewcf::eval::{run_baseline, run_review_cf};
use reviewcf::milestone::to_jsonl;
use reviewcf::synth::{toy_corpus, ToyConfig};

fn scan(args: &[String]) {
    let num = |i: usize| -> f64 { args[i].parse().expect("numeric argument") };
    let (density, rating_noise, affinity_spread, k) = (num(0), num(1), num(2), num(3) as usize);
    let (mut wins, mut margin) = (0, 0.0);
    for seed in 2000..2040u64 {
        let cfg = ToyConfig {
            seed,
            density,
            rating_noise,
            affinity_spread,
            ..ToyConfig::default()
        };
        let toy = toy_corpus(&cfg);
        let sample = SampleSet {
            reviews: toy.reviews,
            provenance: SampleThresholds::unrestricted(),
            seed: 7,
        };
        let split = split_train_test(&sample, (4, 1), 7).unwrap();
        let m = build_matrix(&split.train.reviews);
        let test = &split.test.reviews;
        let best = run_baseline(&m, test, &NeighborStrategy::sweep(), &MeanMode::CoRaters)
            .unwrap()
            .iter()
            .map(|r| r.row.rmse)
            .fold(f64::INFINITY, f64::min);
        let review = run_review_cf(&m, test, &toy.sentence_vectors, k, &MeanMode::CoRaters)
            .unwrap()
            .row
            .rmse;
        println!("seed {seed}\tbest baseline {best:.6}\treview:{k} {review:.6}");
        if review < best {
            wins += 1;
        }
        margin += best - review;
    }
    println!("review wins {wins}/40, mean margin {:.4}", margin / 40.0);
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("--scan") if args.len() == 5 => scan(&args[1..]),
        Some(dir) if !dir.starts_with('-') => {
            let dir = PathBuf::from(dir);
            fs::create_dir_all(&dir).unwrap();
            let toy = toy_corpus(&ToyConfig::default());
            fs::write(dir.join("reviews.jsonl"), to_jsonl(&toy.reviews)).unwrap();
            fs::write(dir.join("business.jsonl"), to_jsonl(&toy.businesses)).unwrap();
            let mut buf = Vec::new();
            toy.sentence_vectors.write(&mut buf).unwrap();
            fs::write(dir.join("toy-reviews.vec"), buf).unwrap();
            let mut buf = Vec::new();
            toy.word_vectors.write(&mut buf).unwrap();
            fs::write(dir.join("toy-words.vec"), buf).unwrap();
            println!("{} reviews written to {}", toy.reviews.len(), dir.display());
        }
        _ => {
            eprintln!("usage: toy_fixture DIR | --scan DENSITY NOISE SPREAD K");
            std::process::exit(1);
        }
    }
}
