//! RMSE evaluation: the weight-based baseline sweep, review-based runs and
//! the report table.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cf::{
    predict, select_neighbors_review, select_neighbors_weight, FallbackSource, NeighborSet,
    NeighborStrategy, RatingsMatrix, WeightLookup,
};
use crate::corpus::RawReview;
use crate::embedding::SentenceVectorStore;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("cannot compute RMSE of an empty prediction list")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Review,
    Baseline,
}

/// How the neighbors of a test case are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborMode {
    Weight(NeighborStrategy),
    Review(usize),
}

impl NeighborMode {
    pub fn kind(&self) -> RunKind {
        match self {
            NeighborMode::Weight(_) => RunKind::Baseline,
            NeighborMode::Review(_) => RunKind::Review,
        }
    }

    pub fn label(&self) -> String {
        match self {
            NeighborMode::Weight(s) => s.label(),
            NeighborMode::Review(k) => format!("review:{k}"),
        }
    }
}

impl std::str::FromStr for NeighborMode {
    type Err = String;

    /// `topk:K`, `all`, `nonneg` or `review:K`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let positive = |k: &str| -> Result<usize, String> {
            match k.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(format!("K must be a positive integer, got {k:?}")),
            }
        };
        match s.split_once(':') {
            Some(("topk", k)) => Ok(NeighborMode::Weight(NeighborStrategy::TopK(positive(k)?))),
            Some(("review", k)) => Ok(NeighborMode::Review(positive(k)?)),
            None if s == "all" => Ok(NeighborMode::Weight(NeighborStrategy::All)),
            None if s == "nonneg" => Ok(NeighborMode::Weight(NeighborStrategy::NonNegative)),
            _ => Err(format!(
                "unknown neighbor mode {s:?} (expected topk:K, all, nonneg or review:K)"
            )),
        }
    }
}

/// One predicted test case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub user_id: String,
    pub item_id: String,
    pub truth: u8,
    /// The unclamped formula value; `None` marks a fallback prediction.
    pub raw_prediction: Option<f64>,
    pub clamped_prediction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<FallbackSource>,
    pub strategy: String,
    pub kind: RunKind,
    pub neighbor_count: usize,
}

impl PredictionRecord {
    pub fn is_fallback(&self) -> bool {
        self.raw_prediction.is_none()
    }

    /// The raw formula value, or the fallback value.
    pub fn unclamped(&self) -> f64 {
        self.raw_prediction.unwrap_or(self.clamped_prediction)
    }
}

fn root_mean_square<I: Iterator<Item = f64>>(errors: I) -> Result<f64, EvalError> {
    let (mut sum, mut n) = (0.0, 0usize);
    for e in errors {
        sum += e * e;
        n += 1;
    }
    if n == 0 {
        return Err(EvalError::Empty);
    }
    Ok((sum / n as f64).sqrt())
}

/// RMSE of the clamped predictions against the true ratings.
pub fn rmse(records: &[PredictionRecord]) -> Result<f64, EvalError> {
    root_mean_square(
        records
            .iter()
            .map(|r| r.clamped_prediction - f64::from(r.truth)),
    )
}

/// RMSE with unclamped formula values.
pub fn raw_rmse(records: &[PredictionRecord]) -> Result<f64, EvalError> {
    root_mean_square(records.iter().map(|r| r.unclamped() - f64::from(r.truth)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub kind: RunKind,
    pub cases: usize,
    pub rmse: f64,
    pub raw_rmse: f64,
    pub fallback_count: usize,
    pub fallback_rate: f64,
    pub mean_neighbor_count: f64,
}

impl ReportRow {
    pub fn from_records(
        label: impl Into<String>,
        kind: RunKind,
        records: &[PredictionRecord],
    ) -> Result<Self, EvalError> {
        let n = records.len();
        let fallback_count = records.iter().filter(|r| r.is_fallback()).count();
        Ok(Self {
            label: label.into(),
            kind,
            cases: n,
            rmse: rmse(records)?,
            raw_rmse: raw_rmse(records)?,
            fallback_count,
            fallback_rate: fallback_count as f64 / n as f64,
            mean_neighbor_count: records.iter().map(|r| r.neighbor_count as f64).sum::<f64>()
                / n as f64,
        })
    }
}

/// A summarized run with its per-case predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub row: ReportRow,
    pub records: Vec<PredictionRecord>,
}

fn record(
    case: &RawReview,
    neighbors: &NeighborSet,
    m: &RatingsMatrix,
    strategy: &str,
    kind: RunKind,
) -> PredictionRecord {
    let estimate = predict(&case.user_id, &case.business_id, neighbors, m);
    let (fallback, neighbor_count) = match estimate {
        crate::cf::Estimate::Formula { used, .. } => (None, used),
        crate::cf::Estimate::Fallback { source, .. } => (Some(source), 0),
    };
    PredictionRecord {
        user_id: case.user_id.clone(),
        item_id: case.business_id.clone(),
        truth: case.stars,
        raw_prediction: estimate.raw(),
        clamped_prediction: estimate.value(),
        fallback,
        strategy: strategy.to_owned(),
        kind,
        neighbor_count,
    }
}

/// Predicts every test case with weight-ranked neighbors.
pub fn predict_weight<W: WeightLookup + ?Sized>(
    m: &RatingsMatrix,
    test: &[RawReview],
    strategy: NeighborStrategy,
    weights: &W,
) -> Vec<PredictionRecord> {
    // Weight-ranked neighbors depend only on the target item.
    let mut targets: Vec<&str> = test.iter().map(|r| r.business_id.as_str()).collect();
    targets.sort_unstable();
    targets.dedup();
    let sets = crate::par::map(&targets, |t| {
        select_neighbors_weight(t, m, strategy, weights)
    });
    let by_target: HashMap<&str, &NeighborSet> = targets.iter().copied().zip(sets.iter()).collect();
    let label = strategy.label();
    crate::par::map(test, |case| {
        record(
            case,
            by_target[case.business_id.as_str()],
            m,
            &label,
            RunKind::Baseline,
        )
    })
}

/// Predicts every test case with review-similarity neighbors.
pub fn predict_review<W: WeightLookup + ?Sized>(
    m: &RatingsMatrix,
    test: &[RawReview],
    s: &SentenceVectorStore,
    k: usize,
    weights: &W,
    label: &str,
) -> Vec<PredictionRecord> {
    crate::par::map(test, |case| {
        let set = select_neighbors_review(&case.user_id, &case.business_id, m, s, k, weights);
        record(case, &set, m, label, RunKind::Review)
    })
}

/// One baseline run per strategy.
pub fn run_baseline<W: WeightLookup + ?Sized>(
    m: &RatingsMatrix,
    test: &[RawReview],
    strategies: &[NeighborStrategy],
    weights: &W,
) -> Result<Vec<Run>, EvalError> {
    strategies
        .iter()
        .map(|&s| {
            let records = predict_weight(m, test, s, weights);
            let row = ReportRow::from_records(s.label(), RunKind::Baseline, &records)?;
            Ok(Run { row, records })
        })
        .collect()
}

/// A review-based run labelled `<store name> review:<k>`.
pub fn run_review_cf<W: WeightLookup + ?Sized>(
    m: &RatingsMatrix,
    test: &[RawReview],
    s: &SentenceVectorStore,
    k: usize,
    weights: &W,
) -> Result<Run, EvalError> {
    let label = format!("{} review:{k}", s.name());
    let records = predict_review(m, test, s, k, weights, &label);
    let row = ReportRow::from_records(label, RunKind::Review, &records)?;
    Ok(Run { row, records })
}

/// Review-based rows plus the baseline rows they are compared with.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub baseline: Vec<ReportRow>,
}

impl Report {
    pub fn from_rows<I: IntoIterator<Item = ReportRow>>(rows: I) -> Self {
        let (baseline, rows) = rows
            .into_iter()
            .partition(|r: &ReportRow| r.kind == RunKind::Baseline);
        Self { rows, baseline }
    }

    /// The baseline row with the lowest RMSE.
    pub fn best_baseline(&self) -> Option<&ReportRow> {
        self.baseline.iter().min_by(|a, b| by_rmse(a, b))
    }
}

fn by_rmse(a: &ReportRow, b: &ReportRow) -> std::cmp::Ordering {
    a.rmse
        .total_cmp(&b.rmse)
        .then_with(|| a.label.cmp(&b.label))
}

/// Groups prediction records by (kind, strategy) and summarizes each group.
pub fn report_from_records(records: &[PredictionRecord]) -> Result<Report, EvalError> {
    let mut groups: Vec<((RunKind, &str), Vec<PredictionRecord>)> = Vec::new();
    for r in records {
        let key = (r.kind, r.strategy.as_str());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r.clone()),
            None => groups.push((key, vec![r.clone()])),
        }
    }
    let rows = groups
        .into_iter()
        .map(|((kind, label), v)| ReportRow::from_records(label, kind, &v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report::from_rows(rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Tsv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(Self::Tsv),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(format!(
                "unknown report format {other:?} (expected tsv or markdown)"
            )),
        }
    }
}

const COLUMNS: [&str; 7] = [
    "configuration",
    "kind",
    "cases",
    "rmse",
    "raw_rmse",
    "fallback_rate",
    "mean_neighbors",
];

fn cells(r: &ReportRow) -> [String; 7] {
    [
        r.label.clone(),
        match r.kind {
            RunKind::Review => "review".to_owned(),
            RunKind::Baseline => "baseline".to_owned(),
        },
        r.cases.to_string(),
        format!("{:.6}", r.rmse),
        format!("{:.6}", r.raw_rmse),
        format!("{:.6}", r.fallback_rate),
        format!("{:.6}", r.mean_neighbor_count),
    ]
}

/// Review rows by ascending RMSE, then baseline rows by ascending RMSE
/// (best first). Ties order by label.
pub fn render_report(report: &Report, format: ReportFormat) -> String {
    let mut review: Vec<&ReportRow> = report.rows.iter().collect();
    review.sort_by(|a, b| by_rmse(a, b));
    let mut baseline: Vec<&ReportRow> = report.baseline.iter().collect();
    baseline.sort_by(|a, b| by_rmse(a, b));

    let mut out = String::new();
    match format {
        ReportFormat::Tsv => {
            out.push_str(&COLUMNS.join("\t"));
            out.push('\n');
            for r in review.iter().chain(&baseline) {
                out.push_str(&cells(r).join("\t"));
                out.push('\n');
            }
        }
        ReportFormat::Markdown => {
            let _ = writeln!(out, "| {} |", COLUMNS.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(COLUMNS.len()));
            for r in review.iter().chain(&baseline) {
                let _ = writeln!(out, "| {} |", cells(r).join(" | "));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(truth: u8, pred: f64) -> PredictionRecord {
        PredictionRecord {
            user_id: "u".into(),
            item_id: "i".into(),
            truth,
            raw_prediction: Some(pred),
            clamped_prediction: pred,
            fallback: None,
            strategy: "s".into(),
            kind: RunKind::Review,
            neighbor_count: 1,
        }
    }

    fn row(label: &str, kind: RunKind, rmse: f64) -> ReportRow {
        ReportRow {
            label: label.into(),
            kind,
            cases: 4,
            rmse,
            raw_rmse: rmse,
            fallback_count: 0,
            fallback_rate: 0.0,
            mean_neighbor_count: 2.0,
        }
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[rec(3, 3.0), rec(5, 5.0)]).unwrap(), 0.0);
        assert_eq!(rmse(&[rec(1, 2.0), rec(3, 4.0)]).unwrap(), 1.0);
        assert_eq!(rmse(&[]), Err(EvalError::Empty));
    }

    #[test]
    fn raw_rmse_uses_unclamped_values() {
        let mut r = rec(1, 1.0);
        r.raw_prediction = Some(-1.0);
        assert_eq!(rmse(&[r.clone()]).unwrap(), 0.0);
        assert_eq!(raw_rmse(&[r]).unwrap(), 2.0);
    }

    #[test]
    fn neighbor_mode_parsing() {
        assert_eq!(
            "topk:5".parse::<NeighborMode>().unwrap(),
            NeighborMode::Weight(NeighborStrategy::TopK(5))
        );
        assert_eq!(
            "review:10".parse::<NeighborMode>().unwrap(),
            NeighborMode::Review(10)
        );
        assert_eq!(
            "nonneg".parse::<NeighborMode>().unwrap(),
            NeighborMode::Weight(NeighborStrategy::NonNegative)
        );
        assert!("topk:0".parse::<NeighborMode>().is_err());
        assert!("review".parse::<NeighborMode>().is_err());
        assert!("best".parse::<NeighborMode>().is_err());
    }

    #[test]
    fn one_row_report_layout() {
        let report = Report {
            rows: vec![row("bert review:10", RunKind::Review, 0.9)],
            baseline: vec![row("topk:5", RunKind::Baseline, 1.1)],
        };
        let tsv = render_report(&report, ReportFormat::Tsv);
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("configuration\tkind"));
        assert_eq!(
            lines[1],
            "bert review:10\treview\t4\t0.900000\t0.900000\t0.000000\t2.000000"
        );
        assert!(lines[2].starts_with("topk:5\tbaseline"));
    }

    #[test]
    fn equal_rmse_orders_by_label() {
        let report = Report {
            rows: vec![
                row("zeta", RunKind::Review, 0.95),
                row("alpha", RunKind::Review, 0.95),
                row("best", RunKind::Review, 0.5),
            ],
            baseline: vec![],
        };
        let md = render_report(&report, ReportFormat::Markdown);
        let labels: Vec<&str> = md
            .lines()
            .skip(2)
            .map(|l| l.split(" | ").next().unwrap().trim_start_matches("| "))
            .collect();
        assert_eq!(labels, ["best", "alpha", "zeta"]);
    }

    #[test]
    fn best_baseline_and_grouping() {
        let mut a = rec(4, 4.0);
        a.kind = RunKind::Baseline;
        a.strategy = "topk:5".into();
        let mut b = rec(4, 2.0);
        b.kind = RunKind::Baseline;
        b.strategy = "all".into();
        let mut c = rec(4, 3.0);
        c.strategy = "bert review:10".into();
        c.raw_prediction = None;
        c.fallback = Some(FallbackSource::ItemMean);
        let report = report_from_records(&[a, b, c]).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].fallback_rate, 1.0);
        assert_eq!(report.baseline.len(), 2);
        assert_eq!(report.best_baseline().unwrap().label, "topk:5");
    }
}
