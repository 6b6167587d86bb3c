//! Result files: per-fold metric reports, the hyperparameter sweep table,
//! feature importances, and monthly distribution statistics.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use smog_core::eval::{CvOutcome, MetricsReport, SweepEntry};
use smog_core::mapping::MonthlyStats;

fn write_text(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

/// Per-fold `fold,r2,rmse,bias` rows plus a `mean` summary row. Folds whose
/// R² was undefined leave the field empty.
pub fn write_cv_report(path: &Path, outcome: &CvOutcome) -> Result<()> {
    let mut text = String::new();
    text.push_str("fold,r2,rmse,bias\n");
    for fold in &outcome.folds {
        let r2 = fold.r2.map(|v| v.to_string()).unwrap_or_default();
        writeln!(text, "{},{},{},{}", fold.fold, r2, fold.rmse, fold.bias).unwrap();
    }
    let mean_r2 = outcome.mean_r2().map(|v| v.to_string()).unwrap_or_default();
    writeln!(
        text,
        "mean,{},{},{}",
        mean_r2,
        outcome.mean_rmse(),
        outcome.mean_bias()
    )
    .unwrap();
    write_text(path, text)
}

/// A single-evaluation report in the same shape as the CV report.
pub fn write_single_report(path: &Path, report: &MetricsReport) -> Result<()> {
    let mut text = String::new();
    text.push_str("fold,r2,rmse,bias\n");
    writeln!(text, "0,{},{},{}", report.r2, report.rmse, report.bias).unwrap();
    writeln!(text, "mean,{},{},{}", report.r2, report.rmse, report.bias).unwrap();
    write_text(path, text)
}

pub fn write_sweep(path: &Path, entries: &[SweepEntry]) -> Result<()> {
    let mut text = String::new();
    text.push_str("n_estimators,max_features,mean_mse,seconds\n");
    for e in entries {
        writeln!(
            text,
            "{},{},{},{}",
            e.n_estimators,
            e.max_features.name(),
            e.mean_mse,
            e.seconds
        )
        .unwrap();
    }
    write_text(path, text)
}

pub fn write_importance(
    path: &Path,
    feature_names: &[String],
    gini: &[f64],
    permutation: &[(f64, f64)],
) -> Result<()> {
    let mut text = String::new();
    text.push_str("feature,gini,permutation_mean,permutation_std\n");
    for ((name, &g), &(mean, std)) in feature_names.iter().zip(gini).zip(permutation) {
        writeln!(text, "{name},{g},{mean},{std}").unwrap();
    }
    write_text(path, text)
}

pub fn write_monthly_stats(path: &Path, stats: &[MonthlyStats]) -> Result<()> {
    let mut text = String::new();
    text.push_str("month,min,q1,median,q3,max,mean,whisker_lo,whisker_hi,n\n");
    for s in stats {
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{}",
            s.month, s.min, s.q1, s.median, s.q3, s.max, s.mean, s.whisker_lo, s.whisker_hi, s.n
        )
        .unwrap();
    }
    write_text(path, text)
}
