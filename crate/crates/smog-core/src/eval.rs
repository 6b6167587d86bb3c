//! Model evaluation: the error/bias metrics, fold construction, the three
//! validation protocols, and the hyperparameter sweep.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::dataset::FeatureTable;
use crate::forest::{fit, ForestConfig, ForestError, MaxFeaturesMode};
use crate::geo::StationMeta;
use crate::morton::interleave16;
use crate::rng::{derive_seed, Xoshiro256};

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    LengthMismatch,
    EmptyInput,
    NonFiniteValue,
    ZeroObservationVariance,
    BadFoldCount { k: usize, n: usize },
    NoTargets,
    SchemaMismatch,
    OverlappingYears(i32),
    UnknownStation(String),
    DuplicateStationId(String),
    Forest(ForestError),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::LengthMismatch => {
                write!(f, "observations and predictions differ in length")
            }
            EvalError::EmptyInput => write!(f, "need at least one sample"),
            EvalError::NonFiniteValue => write!(f, "metric inputs must be finite"),
            EvalError::ZeroObservationVariance => {
                write!(f, "observations all equal; R² is undefined")
            }
            EvalError::BadFoldCount { k, n } => {
                write!(f, "cannot split {n} items into {k} folds")
            }
            EvalError::NoTargets => write!(f, "table carries no target column"),
            EvalError::SchemaMismatch => write!(f, "train and test schemas differ"),
            EvalError::OverlappingYears(y) => {
                write!(f, "train and test tables both contain year {y}")
            }
            EvalError::UnknownStation(id) => {
                write!(
                    f,
                    "row references station `{id}` missing from the station list"
                )
            }
            EvalError::DuplicateStationId(id) => {
                write!(f, "station id `{id}` appears more than once")
            }
            EvalError::Forest(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EvalError {}

impl From<ForestError> for EvalError {
    fn from(e: ForestError) -> Self {
        EvalError::Forest(e)
    }
}

/// The error/bias triple of one evaluation: coefficient of determination,
/// root mean squared error, and mean bias (prediction minus observation, so
/// positive means overestimation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub r2: f64,
    pub rmse: f64,
    pub bias: f64,
}

fn check_inputs(observations: &[f64], predictions: &[f64]) -> Result<(), EvalError> {
    if observations.len() != predictions.len() {
        return Err(EvalError::LengthMismatch);
    }
    if observations.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if observations
        .iter()
        .chain(predictions)
        .any(|v| !v.is_finite())
    {
        return Err(EvalError::NonFiniteValue);
    }
    Ok(())
}

/// R² of predictions against observations, or `None` when the observations
/// have zero variance.
pub fn r2_score(observations: &[f64], predictions: &[f64]) -> Option<f64> {
    let n = observations.len() as f64;
    let mean_obs: f64 = observations.iter().sum::<f64>() / n;
    let ss_res: f64 = observations
        .iter()
        .zip(predictions)
        .map(|(&o, &p)| (o - p) * (o - p))
        .sum();
    let ss_tot: f64 = observations
        .iter()
        .map(|&o| (o - mean_obs) * (o - mean_obs))
        .sum();
    if ss_tot > 0.0 {
        Some(1.0 - ss_res / ss_tot)
    } else {
        None
    }
}

/// RMSE and bias: the partial report available even when R² is undefined.
pub fn rmse_bias(observations: &[f64], predictions: &[f64]) -> Result<(f64, f64), EvalError> {
    check_inputs(observations, predictions)?;
    let n = observations.len() as f64;
    let ss_res: f64 = observations
        .iter()
        .zip(predictions)
        .map(|(&o, &p)| (o - p) * (o - p))
        .sum();
    let bias: f64 = observations
        .iter()
        .zip(predictions)
        .map(|(&o, &p)| p - o)
        .sum::<f64>()
        / n;
    Ok((libm::sqrt(ss_res / n), bias))
}

/// Mean squared error.
pub fn mse(observations: &[f64], predictions: &[f64]) -> f64 {
    let n = observations.len() as f64;
    observations
        .iter()
        .zip(predictions)
        .map(|(&o, &p)| (o - p) * (o - p))
        .sum::<f64>()
        / n
}

/// Full metric triple; errors when the observations have zero variance
/// (use [`rmse_bias`] for the partial report).
pub fn compute_metrics(
    observations: &[f64],
    predictions: &[f64],
) -> Result<MetricsReport, EvalError> {
    let (rmse, bias) = rmse_bias(observations, predictions)?;
    let r2 = r2_score(observations, predictions).ok_or(EvalError::ZeroObservationVariance)?;
    Ok(MetricsReport { r2, rmse, bias })
}

/// `k` disjoint test-index sets covering `0..n`; sizes differ by at most 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldAssignment {
    folds: Vec<Vec<usize>>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn fold(&self, i: usize) -> &[usize] {
        &self.folds[i]
    }

    pub fn folds(&self) -> &[Vec<usize>] {
        &self.folds
    }

    /// All indices not in fold `i`, in ascending order.
    pub fn complement(&self, i: usize, n: usize) -> Vec<usize> {
        let mut in_fold = alloc::vec![false; n];
        for &idx in &self.folds[i] {
            in_fold[idx] = true;
        }
        (0..n).filter(|&j| !in_fold[j]).collect()
    }
}

/// Random k-fold assignment: a seeded shuffle of `0..n` cut into contiguous
/// chunks of size `⌈n/k⌉` (the first `n mod k` folds) or `⌊n/k⌋`.
pub fn kfold_random(n: usize, k: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    if k == 0 || k > n {
        return Err(EvalError::BadFoldCount { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    Xoshiro256::from_seed(seed).shuffle(&mut order);
    let base = n / k;
    let rem = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut at = 0usize;
    for i in 0..k {
        let size = base + usize::from(i < rem);
        folds.push(order[at..at + size].to_vec());
        at += size;
    }
    Ok(FoldAssignment { folds })
}

/// Spatially spread station folds: stations are ordered along the Z-order
/// curve of their 16-bit-quantized (lat, lon) over the station bounding box
/// (ties by station id) and dealt round-robin into `k` folds, so every fold
/// samples the whole study area. The seed rotates the starting fold.
pub fn station_folds(
    stations: &[StationMeta],
    k: usize,
    seed: u64,
) -> Result<FoldAssignment, EvalError> {
    if k == 0 || k > stations.len() {
        return Err(EvalError::BadFoldCount {
            k,
            n: stations.len(),
        });
    }
    let lat_min = stations
        .iter()
        .map(|s| s.location.latitude)
        .fold(f64::INFINITY, f64::min);
    let lat_max = stations
        .iter()
        .map(|s| s.location.latitude)
        .fold(f64::NEG_INFINITY, f64::max);
    let lon_min = stations
        .iter()
        .map(|s| s.location.longitude)
        .fold(f64::INFINITY, f64::min);
    let lon_max = stations
        .iter()
        .map(|s| s.location.longitude)
        .fold(f64::NEG_INFINITY, f64::max);
    let quantize = |v: f64, lo: f64, hi: f64| -> u16 {
        if hi > lo {
            libm::floor((v - lo) / (hi - lo) * 65_535.0 + 0.5) as u16
        } else {
            0
        }
    };
    let mut order: Vec<(u32, &str, usize)> = stations
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let qlon = quantize(s.location.longitude, lon_min, lon_max);
            let qlat = quantize(s.location.latitude, lat_min, lat_max);
            (interleave16(qlon, qlat), s.station_id.as_str(), i)
        })
        .collect();
    order.sort_unstable();
    let rotation = (seed % k as u64) as usize;
    let mut folds = alloc::vec![Vec::new(); k];
    for (position, &(_, _, station)) in order.iter().enumerate() {
        folds[(position + rotation) % k].push(station);
    }
    Ok(FoldAssignment { folds })
}

/// Metrics of one evaluated fold. `r2` is `None` when that fold's test
/// observations had zero variance (the fold is then excluded from the mean
/// R², but still contributes RMSE and bias).
#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport {
    pub fold: usize,
    pub n_test: usize,
    pub r2: Option<f64>,
    pub rmse: f64,
    pub bias: f64,
}

/// Per-fold reports of a cross-validation run plus the folds skipped for
/// having no test rows at all.
#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub folds: Vec<FoldReport>,
    pub skipped_folds: Vec<usize>,
}

impl CvOutcome {
    /// Mean R² over the folds where it is defined.
    pub fn mean_r2(&self) -> Option<f64> {
        let defined: Vec<f64> = self.folds.iter().filter_map(|f| f.r2).collect();
        if defined.is_empty() {
            None
        } else {
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        }
    }

    pub fn mean_rmse(&self) -> f64 {
        self.folds.iter().map(|f| f.rmse).sum::<f64>() / self.folds.len() as f64
    }

    pub fn mean_bias(&self) -> f64 {
        self.folds.iter().map(|f| f.bias).sum::<f64>() / self.folds.len() as f64
    }
}

fn evaluate_folds(
    table: &FeatureTable,
    config: &ForestConfig,
    test_sets: &[Vec<usize>],
) -> Result<CvOutcome, EvalError> {
    let n = table.n_rows();
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for (fold, test_rows) in test_sets.iter().enumerate() {
        if test_rows.is_empty() {
            skipped.push(fold);
            continue;
        }
        let mut in_test = alloc::vec![false; n];
        for &i in test_rows {
            in_test[i] = true;
        }
        let train_rows: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
        let train = table.subset(&train_rows);
        let test = table.subset(test_rows);
        let model = fit(
            &train,
            &config.with_seed(derive_seed(config.seed, fold as u64)),
        )?;
        let predictions = model.predict(&test)?;
        let observations = test.targets();
        let (rmse, bias) = rmse_bias(&observations, &predictions)?;
        reports.push(FoldReport {
            fold,
            n_test: test_rows.len(),
            r2: r2_score(&observations, &predictions),
            rmse,
            bias,
        });
    }
    Ok(CvOutcome {
        folds: reports,
        skipped_folds: skipped,
    })
}

/// Method A: random k-fold cross-validation over rows.
pub fn run_method_a(
    table: &FeatureTable,
    config: &ForestConfig,
    k: usize,
) -> Result<CvOutcome, EvalError> {
    if !table.has_targets() {
        return Err(EvalError::NoTargets);
    }
    let folds = kfold_random(table.n_rows(), k, config.seed)?;
    evaluate_folds(table, config, folds.folds())
}

/// Method B: fit on one year's table, evaluate on another year's.
pub fn run_method_b(
    train: &FeatureTable,
    test: &FeatureTable,
    config: &ForestConfig,
) -> Result<MetricsReport, EvalError> {
    if !train.has_targets() || !test.has_targets() {
        return Err(EvalError::NoTargets);
    }
    if train.feature_names() != test.feature_names() {
        return Err(EvalError::SchemaMismatch);
    }
    let train_years: Vec<i32> = years_of(train);
    for year in years_of(test) {
        if train_years.contains(&year) {
            return Err(EvalError::OverlappingYears(year));
        }
    }
    let model = fit(train, config)?;
    let predictions = model.predict(test)?;
    compute_metrics(&test.targets(), &predictions)
}

fn years_of(table: &FeatureTable) -> Vec<i32> {
    let mut years: Vec<i32> = table
        .rows()
        .iter()
        .map(|r| crate::calendar::temporal_features(r.time).year)
        .collect();
    years.sort_unstable();
    years.dedup();
    years
}

/// Method C: blocked station k-fold cross-validation. Every row of a test
/// station is held out of training, estimating error at unmonitored
/// locations.
pub fn run_method_c(
    table: &FeatureTable,
    stations: &[StationMeta],
    config: &ForestConfig,
    k: usize,
) -> Result<CvOutcome, EvalError> {
    if !table.has_targets() {
        return Err(EvalError::NoTargets);
    }
    {
        let mut ids: Vec<&str> = stations.iter().map(|s| s.station_id.as_str()).collect();
        ids.sort_unstable();
        for pair in ids.windows(2) {
            if pair[0] == pair[1] {
                return Err(EvalError::DuplicateStationId(String::from(pair[0])));
            }
        }
    }
    let station_fold = station_folds(stations, k, config.seed)?;
    let mut fold_of_station: Vec<usize> = alloc::vec![0; stations.len()];
    for (fold, members) in station_fold.folds().iter().enumerate() {
        for &s in members {
            fold_of_station[s] = fold;
        }
    }
    let mut test_sets: Vec<Vec<usize>> = alloc::vec![Vec::new(); k];
    for (row, table_row) in table.rows().iter().enumerate() {
        let station = stations
            .iter()
            .position(|s| s.station_id == table_row.station_id)
            .ok_or_else(|| EvalError::UnknownStation(table_row.station_id.clone()))?;
        test_sets[fold_of_station[station]].push(row);
    }
    evaluate_folds(table, config, &test_sets)
}

/// One grid point of the hyperparameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub n_estimators: usize,
    pub max_features: MaxFeaturesMode,
    pub mean_mse: f64,
    pub seconds: f64,
}

/// Tree counts explored by [`hyperparameter_sweep`]: 50..=500 step 50.
pub const SWEEP_TREE_COUNTS: [usize; 10] = [50, 100, 150, 200, 250, 300, 350, 400, 450, 500];

/// Mean 3-fold cross-validation MSE for one config over a fixed fold
/// assignment.
pub fn cv_mse(
    table: &FeatureTable,
    config: &ForestConfig,
    folds: &FoldAssignment,
) -> Result<f64, EvalError> {
    let n = table.n_rows();
    let mut total = 0.0f64;
    for (fold, test_rows) in folds.folds().iter().enumerate() {
        let train = table.subset(&folds.complement(fold, n));
        let test = table.subset(test_rows);
        let model = fit(
            &train,
            &config.with_seed(derive_seed(config.seed, fold as u64)),
        )?;
        let predictions = model.predict(&test)?;
        total += mse(&test.targets(), &predictions);
    }
    Ok(total / folds.k() as f64)
}

/// Sweep the 10 tree counts × 3 subset modes: mean 3-fold CV MSE and the
/// wall-clock seconds each entry took (the clock is injected so the core
/// stays time-source free). Folds are fixed across entries for a fair
/// comparison; entry `i` fits with seed `derive_seed(seed, i)`.
pub fn hyperparameter_sweep(
    table: &FeatureTable,
    seed: u64,
    now_seconds: &mut dyn FnMut() -> f64,
) -> Result<Vec<SweepEntry>, EvalError> {
    if !table.has_targets() {
        return Err(EvalError::NoTargets);
    }
    let folds = kfold_random(table.n_rows(), 3, seed)?;
    let mut entries = Vec::with_capacity(30);
    for max_features in [
        MaxFeaturesMode::All,
        MaxFeaturesMode::Sqrt,
        MaxFeaturesMode::Log2,
    ] {
        for &n_estimators in &SWEEP_TREE_COUNTS {
            let config = ForestConfig {
                n_estimators,
                max_features,
                min_samples_split: 2,
                min_samples_leaf: 1,
                seed: derive_seed(seed, entries.len() as u64),
            };
            let start = now_seconds();
            let mean_mse = cv_mse(table, &config, &folds)?;
            let seconds = now_seconds() - start;
            entries.push(SweepEntry {
                n_estimators,
                max_features,
                mean_mse,
                seconds,
            });
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::Timestamp;
    use crate::dataset::TableRow;
    use crate::geo::{GeoPoint, StationType};
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn perfect_predictions_score_one() {
        let o = [1.0, 2.0, 3.0, 4.0];
        let m = compute_metrics(&o, &o).unwrap();
        assert_eq!(m.r2, 1.0);
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.bias, 0.0);
    }

    #[test]
    fn mean_predictor_scores_zero() {
        let o = [1.0, 2.0, 3.0];
        let p = [2.0, 2.0, 2.0];
        let m = compute_metrics(&o, &p).unwrap();
        assert_eq!(m.r2, 0.0);
        assert!((m.rmse - libm::sqrt(2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(m.bias, 0.0);
    }

    #[test]
    fn constant_offset_shows_as_bias() {
        let o = [1.0, 3.0];
        let p = [2.0, 4.0];
        let m = compute_metrics(&o, &p).unwrap();
        assert_eq!(m.r2, 0.0);
        assert_eq!(m.rmse, 1.0);
        assert_eq!(m.bias, 1.0);
    }

    #[test]
    fn degenerate_inputs_error() {
        assert!(matches!(
            compute_metrics(&[1.0, 1.0], &[1.0, 2.0]),
            Err(EvalError::ZeroObservationVariance)
        ));
        // The partial report still works.
        let (rmse, bias) = rmse_bias(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        assert!((rmse - libm::sqrt(0.5)).abs() < 1e-15);
        assert_eq!(bias, 0.5);
        assert!(compute_metrics(&[1.0], &[1.0, 2.0]).is_err());
        assert!(compute_metrics(&[], &[]).is_err());
        assert!(compute_metrics(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn kfold_shapes() {
        let folds = kfold_random(10, 10, 7).unwrap();
        assert!(folds.folds().iter().all(|f| f.len() == 1));

        let folds = kfold_random(25, 10, 7).unwrap();
        let mut sizes: Vec<usize> = folds.folds().iter().map(|f| f.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 2, 2, 2, 3, 3, 3, 3, 3]);

        // Partition: disjoint and covering.
        let mut all: Vec<usize> = folds.folds().iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..25).collect::<Vec<_>>());

        assert_eq!(kfold_random(25, 10, 7).unwrap(), folds);
        assert_ne!(kfold_random(25, 10, 8).unwrap(), folds);
        assert!(kfold_random(5, 6, 0).is_err());
        assert!(kfold_random(5, 0, 0).is_err());
    }

    fn station(id: &str, lat: f64, lon: f64) -> StationMeta {
        StationMeta::new(
            id.to_string(),
            GeoPoint::new(lat, lon, 0.0).unwrap(),
            StationType::Background,
        )
        .unwrap()
    }

    #[test]
    fn station_folds_partition_and_sizes() {
        let stations: Vec<StationMeta> = (0..25)
            .map(|i| {
                station(
                    &format!("s{i:02}"),
                    36.0 + (i / 5) as f64,
                    -9.0 + (i % 5) as f64,
                )
            })
            .collect();
        let folds = station_folds(&stations, 10, 7).unwrap();
        let mut sizes: Vec<usize> = folds.folds().iter().map(|f| f.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 2, 2, 2, 3, 3, 3, 3, 3]);
        let mut all: Vec<usize> = folds.folds().iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..25).collect::<Vec<_>>());
        assert!(station_folds(&stations, 26, 0).is_err());
    }

    #[test]
    fn colocated_station_clones_land_in_different_folds() {
        // Two locations, two clones each: round-robin over the Z-order
        // (ties by id) separates the clones.
        let stations = vec![
            station("a1", 40.0, -8.0),
            station("a2", 40.0, -8.0),
            station("b1", 41.0, -7.0),
            station("b2", 41.0, -7.0),
        ];
        let folds = station_folds(&stations, 2, 0).unwrap();
        // Z-order: a1, a2 (southwest corner) then b1, b2; dealing
        // alternates folds, so each fold holds one clone of each site.
        assert_eq!(folds.fold(0), &[0, 2]);
        assert_eq!(folds.fold(1), &[1, 3]);
        // The seed only rotates the deal.
        let rotated = station_folds(&stations, 2, 1).unwrap();
        assert_eq!(rotated.fold(0), &[1, 3]);
        assert_eq!(rotated.fold(1), &[0, 2]);
    }

    fn linear_table(n: usize, seed: u64, year_start: i64) -> FeatureTable {
        // y = 2 x0 + 5 with a pinch of noise; plenty for smoke tests.
        let mut rng = Xoshiro256::from_seed(seed);
        let rows: Vec<TableRow> = (0..n)
            .map(|i| {
                let x = rng.next_f64() * 10.0;
                let noise = rng.next_f64() * 0.2;
                TableRow {
                    features: vec![x, rng.next_f64()],
                    station_id: format!("s{:02}", i % 8),
                    time: Timestamp::from_unix(year_start + i as i64 * 3_600).unwrap(),
                    target: Some(2.0 * x + 5.0 + noise),
                }
            })
            .collect();
        FeatureTable::new(vec!["x0".to_string(), "x1".to_string()], rows).unwrap()
    }

    const Y2019: i64 = 1_546_347_600;
    const Y2018: i64 = 1_514_811_600;

    fn quick_config(n_estimators: usize, seed: u64) -> ForestConfig {
        ForestConfig {
            n_estimators,
            seed,
            ..ForestConfig::default()
        }
    }

    #[test]
    fn method_a_learns_a_clean_signal() {
        let table = linear_table(300, 3, Y2019);
        let outcome = run_method_a(&table, &quick_config(30, 7), 5).unwrap();
        assert_eq!(outcome.folds.len(), 5);
        assert!(outcome.skipped_folds.is_empty());
        assert!(outcome.mean_r2().unwrap() > 0.9);
        // Deterministic under a fixed seed.
        let again = run_method_a(&table, &quick_config(30, 7), 5).unwrap();
        assert_eq!(outcome, again);
    }

    #[test]
    fn method_b_checks_schemas_and_years() {
        let train = linear_table(200, 3, Y2019);
        let test = linear_table(100, 4, Y2018);
        let report = run_method_b(&train, &test, &quick_config(30, 7)).unwrap();
        assert!(report.r2 > 0.9);

        let overlap = linear_table(50, 5, Y2019);
        assert!(matches!(
            run_method_b(&train, &overlap, &quick_config(10, 7)),
            Err(EvalError::OverlappingYears(2019))
        ));
        let other_schema = {
            let rows: Vec<TableRow> = test
                .rows()
                .iter()
                .map(|r| TableRow {
                    features: vec![r.features[0]],
                    station_id: r.station_id.clone(),
                    time: r.time,
                    target: r.target,
                })
                .collect();
            FeatureTable::new(vec!["z".to_string()], rows).unwrap()
        };
        assert!(matches!(
            run_method_b(&train, &other_schema, &quick_config(10, 7)),
            Err(EvalError::SchemaMismatch)
        ));
    }

    #[test]
    fn method_b_shifted_targets_show_as_negative_bias() {
        let train = linear_table(300, 3, Y2019);
        let shifted = {
            let rows: Vec<TableRow> = linear_table(150, 4, Y2018)
                .rows()
                .iter()
                .map(|r| TableRow {
                    features: r.features.clone(),
                    station_id: r.station_id.clone(),
                    time: r.time,
                    target: r.target.map(|t| t + 5.0),
                })
                .collect();
            FeatureTable::new(vec!["x0".to_string(), "x1".to_string()], rows).unwrap()
        };
        let report = run_method_b(&train, &shifted, &quick_config(40, 7)).unwrap();
        assert!((report.bias + 5.0).abs() < 0.5, "bias {}", report.bias);
    }

    #[test]
    fn method_c_blocks_stations() {
        let table = linear_table(200, 6, Y2019);
        let stations: Vec<StationMeta> = (0..8)
            .map(|i| {
                station(
                    &format!("s{i:02}"),
                    36.0 + i as f64 * 0.5,
                    -9.0 + i as f64 * 0.3,
                )
            })
            .collect();
        let outcome = run_method_c(&table, &stations, &quick_config(20, 7), 4).unwrap();
        assert_eq!(outcome.folds.len(), 4);

        let folds = station_folds(&stations, 4, 7).unwrap();
        for (fold, members) in folds.folds().iter().enumerate() {
            let test_ids: Vec<&str> = members
                .iter()
                .map(|&s| stations[s].station_id.as_str())
                .collect();
            // No test station's rows may appear in training: equivalently,
            // the fold's test rows are exactly the rows of its stations.
            let expected = table
                .rows()
                .iter()
                .filter(|r| test_ids.contains(&r.station_id.as_str()))
                .count();
            assert_eq!(outcome.folds[fold].n_test, expected);
        }

        let missing = vec![station("zz", 0.0, 0.0)];
        assert!(matches!(
            run_method_c(&table, &missing, &quick_config(10, 7), 1),
            Err(EvalError::UnknownStation(_))
        ));
    }

    #[test]
    fn sweep_emits_thirty_timed_entries() {
        let table = linear_table(60, 9, Y2019);
        let mut fake_clock = 0.0f64;
        let mut entries = hyperparameter_sweep(&table, 11, &mut || {
            fake_clock += 0.5;
            fake_clock
        })
        .unwrap();
        assert_eq!(entries.len(), 30);
        for entry in &entries {
            assert!(entry.mean_mse >= 0.0);
            assert_eq!(entry.seconds, 0.5);
        }
        entries.sort_by(|a, b| {
            (a.max_features.name(), a.n_estimators).cmp(&(b.max_features.name(), b.n_estimators))
        });
        // Each of the three modes covers exactly the ten tree counts.
        for group in entries.chunks(10) {
            let counts: Vec<usize> = group.iter().map(|e| e.n_estimators).collect();
            assert_eq!(counts, SWEEP_TREE_COUNTS.to_vec());
            assert!(group
                .windows(2)
                .all(|w| w[0].max_features == w[1].max_features));
        }
    }

    #[test]
    fn rmse_squared_equals_bias_squared_plus_error_variance() {
        let mut rng = Xoshiro256::from_seed(31);
        for _ in 0..50 {
            let n = 2 + rng.below(40) as usize;
            let o: Vec<f64> = (0..n).map(|_| rng.next_f64() * 100.0).collect();
            let p: Vec<f64> = (0..n).map(|_| rng.next_f64() * 100.0).collect();
            let (rmse, bias) = rmse_bias(&o, &p).unwrap();
            let diffs: Vec<f64> = o.iter().zip(&p).map(|(&o, &p)| p - o).collect();
            let mean = diffs.iter().sum::<f64>() / n as f64;
            let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64;
            assert!((rmse * rmse - (bias * bias + var)).abs() <= 1e-9 * rmse * rmse);
            assert!(rmse >= bias.abs());
        }
    }
}
