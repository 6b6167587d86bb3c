//! Property tests for the core invariants.

use proptest::prelude::*;

use smog_core::calendar::{is_leap, temporal_features, Timestamp};
use smog_core::eval::{kfold_random, r2_score, rmse_bias};
use smog_core::geo::GeoPoint;
use smog_core::join::{interp_observation, StationSeries};
use smog_core::mapping::{monthly_stats, OverpassPredictions};
use smog_core::regrid::{bin_swath, GridSpec, SwathSample};
use smog_core::wind::wind;
use smog_core::{StationMeta, StationType};

fn ts(unix: i64) -> Timestamp {
    Timestamp::from_unix(unix).unwrap()
}

proptest! {
    #[test]
    fn wind_speed_is_rotation_invariant(u in -60.0f64..60.0, v in -60.0f64..60.0) {
        let (speed, dir) = wind(u, v);
        let (rotated, _) = wind(-v, u);
        prop_assert_eq!(speed, rotated);
        prop_assert!((0.0..360.0).contains(&dir));
    }

    #[test]
    fn wind_direction_ignores_magnitude(u in -60.0f64..60.0, v in -60.0f64..60.0) {
        prop_assume!(u != 0.0 || v != 0.0);
        let (_, dir) = wind(u, v);
        let (_, scaled) = wind(2.0 * u, 2.0 * v);
        prop_assert!((dir - scaled).abs() < 1e-9);
    }

    #[test]
    fn day_of_year_tracks_leapness(year in 1979i32..=2100, day in 0i64..365) {
        let unix = smog_core::calendar::days_from_civil(year, 1, 1) * 86_400 + day * 86_400;
        prop_assume!(day < 365 + i64::from(is_leap(year)));
        let f = temporal_features(ts(unix));
        prop_assert_eq!(f.day_of_year as i64, day + 1);
        prop_assert!((1..=7).contains(&f.day_of_week));
    }

    #[test]
    fn interpolation_never_overshoots(
        v_lo in 0.0f64..500.0,
        v_hi in 0.0f64..500.0,
        frac in 0.0f64..1.0,
    ) {
        let meta = StationMeta::new(
            "s".into(),
            GeoPoint::new(40.0, -3.0, 0.0).unwrap(),
            StationType::Background,
        )
        .unwrap();
        let t0 = 1_546_347_600i64;
        let series = StationSeries::new(meta, vec![(ts(t0), v_lo), (ts(t0 + 3_600), v_hi)]).unwrap();
        let t = ts(t0 + (frac * 3_600.0) as i64);
        let value = interp_observation(&series, t, 7_200).unwrap();
        let (lo, hi) = if v_lo <= v_hi { (v_lo, v_hi) } else { (v_hi, v_lo) };
        prop_assert!(value >= lo && value <= hi);
    }

    #[test]
    fn binning_conserves_mass_and_filters_monotonically(
        samples in prop::collection::vec(
            (36.0f64..39.0, -10.0f64..-7.0, 0.0f64..100.0, 0.0f64..1.0),
            0..300,
        ),
        qa in 0.0f64..1.0,
    ) {
        let spec = GridSpec::new(36.0, -10.0, 0.25, 12, 12).unwrap();
        let swath: Vec<SwathSample> = samples
            .iter()
            .map(|&(lat, lon, value, q)| {
                SwathSample::new(
                    GeoPoint::new(lat, lon, 0.0).unwrap(),
                    value,
                    q,
                    ts(1_546_349_400),
                )
                .unwrap()
            })
            .collect();
        let field = bin_swath(&swath, &spec, qa, "x").unwrap();

        // Mass conservation over accepted samples.
        let accepted: Vec<&SwathSample> = swath.iter().filter(|s| s.qa >= qa).collect();
        let direct: f64 = accepted.iter().map(|s| s.value).sum();
        let binned: f64 = field.cells().map(|(_, _, mean, count)| mean * count as f64).sum();
        prop_assert!((binned - direct).abs() <= 1e-9 * direct.abs().max(1.0));

        // Every accepted sample lands in exactly one cell (all are in-bounds
        // here by construction).
        let total: u32 = field.cells().map(|(_, _, _, c)| c).sum();
        prop_assert_eq!(total as usize, accepted.len());

        // Raising the threshold never increases any cell count.
        let stricter = bin_swath(&swath, &spec, (qa + 0.1).min(1.0), "x").unwrap();
        for row in 0..spec.n_rows {
            for col in 0..spec.n_cols {
                prop_assert!(stricter.count(row, col) <= field.count(row, col));
            }
        }
    }

    #[test]
    fn binning_is_order_independent(
        samples in prop::collection::vec(
            (36.0f64..37.0, -10.0f64..-9.0, 0.0f64..100.0, 0.0f64..1.0),
            1..120,
        ),
        rotate in 0usize..120,
    ) {
        let spec = GridSpec::new(36.0, -10.0, 0.25, 4, 4).unwrap();
        let build = |order: &[(f64, f64, f64, f64)]| {
            let swath: Vec<SwathSample> = order
                .iter()
                .map(|&(lat, lon, value, q)| {
                    SwathSample::new(
                        GeoPoint::new(lat, lon, 0.0).unwrap(),
                        value,
                        q,
                        ts(1_546_349_400),
                    )
                    .unwrap()
                })
                .collect();
            bin_swath(&swath, &spec, 0.5, "x").unwrap()
        };
        let field = build(&samples);
        let mut permuted = samples.clone();
        permuted.rotate_left(rotate % samples.len());
        let other = build(&permuted);
        for row in 0..spec.n_rows {
            for col in 0..spec.n_cols {
                prop_assert_eq!(field.count(row, col), other.count(row, col));
                match (field.value(row, col), other.value(row, col)) {
                    (None, None) => {}
                    (Some(a), Some(b)) => {
                        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0))
                    }
                    _ => prop_assert!(false, "occupancy differs"),
                }
            }
        }
    }

    #[test]
    fn metric_identities_hold(
        pairs in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 2..64),
    ) {
        let o: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let p: Vec<f64> = pairs.iter().map(|p| p.1).collect();

        // Perfect predictions score 1 when defined.
        if let Some(r2) = r2_score(&o, &o) {
            prop_assert!((r2 - 1.0).abs() <= 1e-9);
        }
        // The constant mean predictor scores exactly 0.
        let mean = o.iter().sum::<f64>() / o.len() as f64;
        let constant = vec![mean; o.len()];
        if let Some(r2) = r2_score(&o, &constant) {
            prop_assert!(r2.abs() <= 1e-9);
        }
        if let Some(r2) = r2_score(&o, &p) {
            prop_assert!(r2 <= 1.0 + 1e-12);
        }

        let (rmse, bias) = rmse_bias(&o, &p).unwrap();
        prop_assert!(rmse >= bias.abs() - 1e-12);
        let diffs: Vec<f64> = o.iter().zip(&p).map(|(&o, &p)| p - o).collect();
        let d_mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let d_var =
            diffs.iter().map(|d| (d - d_mean) * (d - d_mean)).sum::<f64>() / diffs.len() as f64;
        prop_assert!((rmse * rmse - (bias * bias + d_var)).abs() <= 1e-9 * (rmse * rmse).max(1.0));
    }

    #[test]
    fn kfold_partitions_everything(n in 1usize..200, k in 1usize..20, seed in 0u64..1000) {
        prop_assume!(k <= n);
        let folds = kfold_random(n, k, seed).unwrap();
        let mut seen = vec![false; n];
        for fold in folds.folds() {
            for &i in fold {
                prop_assert!(!seen[i], "index {} in two folds", i);
                seen[i] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
        let sizes: Vec<usize> = folds.folds().iter().map(|f| f.len()).collect();
        let lo = n / k;
        prop_assert!(sizes.iter().all(|&s| s == lo || s == lo + 1));
    }

    #[test]
    fn monthly_summaries_are_ordered(
        values in prop::collection::vec(0.0f64..300.0, 1..80),
        month in 1u32..=12,
    ) {
        let unix = smog_core::calendar::days_from_civil(2019, month, 10) * 86_400;
        let overpass = OverpassPredictions {
            time: ts(unix),
            cells: values.iter().map(|&v| Some(v)).collect(),
        };
        let stats = monthly_stats(&[overpass]);
        prop_assert_eq!(stats.len(), 1);
        let s = &stats[0];
        prop_assert!(s.min <= s.q1);
        prop_assert!(s.q1 <= s.median);
        prop_assert!(s.median <= s.q3);
        prop_assert!(s.q3 <= s.max);
        prop_assert!(s.whisker_lo >= s.min && s.whisker_hi <= s.max);
        prop_assert_eq!(s.n, values.len());
    }
}
