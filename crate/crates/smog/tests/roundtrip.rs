//! Property tests over the file formats: write-then-read is the identity.

use proptest::prelude::*;

use smog_core::dataset::{FeatureTable, TableRow};
use smog_core::mapping::Raster;
use smog_core::regrid::GridSpec;
use smog_core::Timestamp;

fn table_strategy() -> impl Strategy<Value = FeatureTable> {
    let n_features = 1usize..5;
    (n_features, 0usize..25, any::<bool>()).prop_flat_map(|(p, n, with_target)| {
        let row = (
            prop::collection::vec(-1e9f64..1e9, p),
            0i64..200_000_000,
            0.0f64..1e4,
        );
        prop::collection::vec(row, n).prop_map(move |raw| {
            let rows: Vec<TableRow> = raw
                .into_iter()
                .enumerate()
                .map(|(i, (features, t_offset, target))| TableRow {
                    features,
                    station_id: format!("s{i}"),
                    time: Timestamp::from_unix(1_546_300_800 + t_offset).unwrap(),
                    target: with_target.then_some(target),
                })
                .collect();
            let names = (0..p).map(|j| format!("f{j}")).collect();
            FeatureTable::new(names, rows).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feature_table_write_read_identity(table in table_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        smog::formats::write_table(&path, &table).unwrap();
        let back = smog::formats::read_table(&path).unwrap();
        prop_assert_eq!(back.feature_names(), table.feature_names());
        prop_assert_eq!(back.rows(), table.rows());
    }

    #[test]
    fn ascii_grid_write_read_identity(
        n_rows in 1usize..10,
        n_cols in 1usize..10,
        cells in prop::collection::vec(prop::option::of(-1e6f64..1e6), 100),
    ) {
        let spec = GridSpec::new(36.0, -10.0, 0.03, n_rows, n_cols).unwrap();
        let mut raster = Raster::empty(spec.clone());
        for row in 0..n_rows {
            for col in 0..n_cols {
                raster.set(row, col, cells[row * 10 + col]);
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.asc");
        smog::ascii_grid::write_ascii_grid(&path, &raster).unwrap();
        prop_assert_eq!(smog::ascii_grid::read_ascii_grid(&path).unwrap(), raster);
    }
}
