//! Browser bindings for the demo page. Each export takes plain values and
//! returns a JSON string; the plain `*_view` functions behind them are what
//! the native tests exercise.

use std::cell::OnceCell;

use reviewcf::cf::{
    build_matrix, item_weight, predict, select_neighbors_weight, Estimate, FallbackSource,
    MeanMode, NeighborStrategy,
};
use reviewcf::corpus::{split_train_test, SampleSet, SampleThresholds};
use reviewcf::eval::{run_baseline, run_review_cf, ReportRow};
use reviewcf::synth::{toy_corpus, ToyConfig};
use reviewcf::textprep::{
    english_dictionary, normalize, squash_repeats, Correction, PrepOptions, SpellChecker,
};
use reviewcf::RawReview;
use serde::Serialize;
use wasm_bindgen::prelude::*;

thread_local! {
    static CHECKER: OnceCell<SpellChecker> = const { OnceCell::new() };
}

#[derive(Debug, Serialize, PartialEq)]
pub struct TokenStep {
    pub token: String,
    pub squashed: String,
    /// "known", "corrected" or "removed".
    pub outcome: &'static str,
    pub result: Option<String>,
}

/// Normalizes `text` and runs every token through run capping and spelling
/// correction against the bundled dictionary (max edit distance 2).
pub fn spell_view(text: &str) -> Vec<TokenStep> {
    CHECKER.with(|cell| {
        let checker = cell.get_or_init(|| SpellChecker::new(&english_dictionary(), 2));
        normalize(text, &PrepOptions::default())
            .into_iter()
            .map(|token| {
                let squashed = squash_repeats(&token);
                let (outcome, result) = match checker.correct(&squashed) {
                    Correction::Known(w) => ("known", Some(w)),
                    Correction::Corrected(w) => ("corrected", Some(w)),
                    Correction::Removed => ("removed", None),
                };
                TokenStep {
                    token,
                    squashed,
                    outcome,
                    result,
                }
            })
            .collect()
    })
}

#[derive(Debug, Serialize, PartialEq)]
pub struct GridView {
    /// weights[i][j] for items i, j; `null` on the diagonal.
    pub weights: Vec<Vec<Option<f64>>>,
    pub support: Vec<Vec<usize>>,
    pub target: Option<TargetView>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct TargetView {
    pub user: usize,
    pub item: usize,
    pub raw: Option<f64>,
    pub value: f64,
    pub neighbors_used: usize,
    pub fallback: Option<&'static str>,
}

fn grid_reviews(grid: &[Vec<Option<u8>>]) -> Vec<RawReview> {
    let mut out = Vec::new();
    for (u, row) in grid.iter().enumerate() {
        for (i, cell) in row.iter().enumerate() {
            if let Some(stars) = *cell {
                out.push(RawReview {
                    review_id: format!("r{u}-{i}"),
                    user_id: format!("User{}", u + 1),
                    business_id: format!("Item{}", i + 1),
                    stars,
                    text: String::new(),
                    date: None,
                });
            }
        }
    }
    out
}

/// Pairwise item weights of a user × item grid (cells 1..=5 or empty) and,
/// when `target` is given, the prediction for that (user, item) cell using
/// every co-rated item as a neighbor. The target cell's own rating is
/// ignored.
pub fn grid_view(
    grid: &[Vec<Option<u8>>],
    target: Option<(usize, usize)>,
) -> Result<GridView, String> {
    let items = grid.first().map_or(0, Vec::len);
    if grid.iter().any(|r| r.len() != items) {
        return Err("rows must have equal length".into());
    }
    if grid
        .iter()
        .flatten()
        .flatten()
        .any(|s| !(1..=5).contains(s))
    {
        return Err("ratings must be between 1 and 5".into());
    }
    let mut grid = grid.to_vec();
    if let Some((u, i)) = target {
        if u >= grid.len() || i >= items {
            return Err("target cell is outside the grid".into());
        }
        grid[u][i] = None;
    }
    let m = build_matrix(&grid_reviews(&grid));
    let name = |i: usize| format!("Item{}", i + 1);
    let mut weights = vec![vec![None; items]; items];
    let mut support = vec![vec![0; items]; items];
    for i in 0..items {
        for j in 0..items {
            if i != j {
                let w = item_weight(&name(i), &name(j), &m);
                weights[i][j] = Some(w.w);
                support[i][j] = w.support;
            }
        }
    }
    let target = target.map(|(u, i)| {
        let set = select_neighbors_weight(&name(i), &m, NeighborStrategy::All, &MeanMode::CoRaters);
        let est = predict(&format!("User{}", u + 1), &name(i), &set, &m);
        let (neighbors_used, fallback) = match est {
            Estimate::Formula { used, .. } => (used, None),
            Estimate::Fallback { source, .. } => (
                0,
                Some(match source {
                    FallbackSource::ItemMean => "item mean",
                    FallbackSource::UserMean => "user mean",
                    FallbackSource::GlobalMean => "global mean",
                    FallbackSource::Midpoint => "midpoint",
                }),
            ),
        };
        TargetView {
            user: u,
            item: i,
            raw: est.raw(),
            value: est.value(),
            neighbors_used,
            fallback,
        }
    });
    Ok(GridView {
        weights,
        support,
        target,
    })
}

#[derive(Debug, Serialize, PartialEq)]
pub struct SweepRow {
    pub label: String,
    pub review: bool,
    pub rmse: f64,
    pub fallback_rate: f64,
    pub mean_neighbors: f64,
}

fn sweep_row(row: &ReportRow, review: bool) -> SweepRow {
    SweepRow {
        label: row.label.clone(),
        review,
        rmse: row.rmse,
        fallback_rate: row.fallback_rate,
        mean_neighbors: row.mean_neighbor_count,
    }
}

/// Generates the toy corpus, splits it 4:1 and evaluates the baseline sweep
/// plus review-based selection with `k` neighbors.
pub fn toy_view(
    seed: u64,
    users: usize,
    items: usize,
    density: f64,
    k: usize,
) -> Result<Vec<SweepRow>, String> {
    if !(0.0..=1.0).contains(&density) {
        return Err("density must be between 0 and 1".into());
    }
    let cfg = ToyConfig {
        seed,
        users,
        items,
        density,
        ..ToyConfig::default()
    };
    let corpus = toy_corpus(&cfg);
    let sample = SampleSet {
        reviews: corpus.reviews,
        provenance: SampleThresholds::yelp_ma(),
        seed,
    };
    let split = split_train_test(&sample, (4, 1), seed).map_err(|e| e.to_string())?;
    let m = build_matrix(&split.train.reviews);
    let test = &split.test.reviews;
    let weights = MeanMode::CoRaters;
    let mut rows: Vec<SweepRow> = run_baseline(&m, test, &NeighborStrategy::sweep(), &weights)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|r| sweep_row(&r.row, false))
        .collect();
    let review = run_review_cf(&m, test, &corpus.sentence_vectors, k, &weights)
        .map_err(|e| e.to_string())?;
    rows.push(sweep_row(&review.row, true));
    Ok(rows)
}

fn to_json<T: Serialize>(value: &Result<T, String>) -> String {
    match value {
        Ok(v) => serde_json::json!({ "ok": v }).to_string(),
        Err(e) => serde_json::json!({ "error": e }).to_string(),
    }
}

#[wasm_bindgen]
pub fn spell_trace(text: &str) -> String {
    to_json(&Ok(spell_view(text)))
}

/// `grid_json` is an array of rows, each an array of 1..5 or null.
/// A negative `user` or `item` means no target cell.
#[wasm_bindgen]
pub fn grid_weights(grid_json: &str, user: i32, item: i32) -> String {
    let result = serde_json::from_str::<Vec<Vec<Option<u8>>>>(grid_json)
        .map_err(|e| e.to_string())
        .and_then(|grid| {
            let target = (user >= 0 && item >= 0).then_some((user as usize, item as usize));
            grid_view(&grid, target)
        });
    to_json(&result)
}

#[wasm_bindgen]
pub fn toy_sweep(seed: u32, users: u32, items: u32, density: f64, k: u32) -> String {
    to_json(&toy_view(
        seed as u64,
        users as usize,
        items as usize,
        density,
        k as usize,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Vec<Vec<Option<u8>>> {
        vec![
            vec![Some(1), Some(3), None, Some(4)],
            vec![Some(4), None, Some(2), Some(3)],
            vec![None, Some(5), Some(5), Some(4)],
            vec![Some(5), Some(2), Some(5), None],
        ]
    }

    #[test]
    fn spell_trace_shows_each_step() {
        let steps = spell_view("Goooodddd food, woonderrfull!");
        assert_eq!(steps.len(), 3);
        assert_eq!(steps[0].squashed, "goodd");
        assert_eq!(steps[0].result.as_deref(), Some("good"));
        assert_eq!(steps[1].outcome, "known");
        assert_eq!(steps[2].outcome, "removed");
    }

    #[test]
    fn grid_view_reproduces_the_worked_example() {
        let v = grid_view(&table(), Some((1, 1))).unwrap();
        assert!((v.weights[0][1].unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(v.support[0][1], 2);
        assert_eq!(v.weights[1][2], Some(0.0));
        assert_eq!(v.weights[1][1], None);
        let t = v.target.unwrap();
        assert!((t.raw.unwrap() + 4.0).abs() < 1e-12);
        assert_eq!(t.value, 1.0);
    }

    #[test]
    fn target_rating_is_hidden() {
        let mut grid = table();
        grid[1][1] = Some(5);
        let v = grid_view(&grid, Some((1, 1))).unwrap();
        assert_eq!(v.target.unwrap().value, 1.0);
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(grid_view(&[vec![Some(6)]], None).is_err());
        assert!(grid_view(&[vec![Some(1)], vec![]], None).is_err());
        assert!(grid_view(&table(), Some((9, 0))).is_err());
        assert!(grid_weights("nope", -1, -1).contains("error"));
    }

    #[test]
    fn toy_sweep_has_all_rows() {
        let rows = toy_view(2021, 20, 15, 1.0, 10).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(rows.last().unwrap().review);
        assert!(rows.iter().all(|r| r.rmse.is_finite() && r.rmse > 0.0));
        let json = toy_sweep(2021, 20, 15, 1.0, 10);
        assert!(json.starts_with("{\"ok\":["));
    }
}
