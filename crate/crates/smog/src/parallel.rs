//! Threaded drivers for training and prediction.
//!
//! Trees and rows are independent, and every tree draws from its own seed
//! stream, so the fan-out below reproduces the serial results exactly: the
//! thread count changes wall-clock time, never output.

use std::thread;

use smog_core::dataset::FeatureTable;
use smog_core::forest::{assemble, fit, fit_tree, ForestConfig, ForestError, ForestModel, Tree};

/// Train a forest using up to `threads` workers. `threads <= 1` falls back
/// to the serial reference; any thread count produces an identical model.
pub fn fit_forest(
    table: &FeatureTable,
    config: &ForestConfig,
    threads: usize,
) -> Result<ForestModel, ForestError> {
    if threads <= 1 || config.n_estimators <= 1 {
        return fit(table, config);
    }
    config.validate()?;
    if table.n_rows() == 0 {
        return Err(ForestError::EmptyTable);
    }
    if !table.has_targets() {
        return Err(ForestError::MissingTargets);
    }
    let x = table.matrix();
    let y = table.targets();
    let p = table.n_features();
    let workers = threads.min(config.n_estimators);

    let mut parts: Vec<Option<(Tree, u64, Vec<f64>)>> = Vec::new();
    parts.resize_with(config.n_estimators, || None);
    thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        for worker in 0..workers {
            let x = &x;
            let y = &y;
            handles.push(scope.spawn(move || {
                let mut built = Vec::new();
                let mut index = worker;
                while index < config.n_estimators {
                    built.push((index, fit_tree(x, y, p, config, index)));
                    index += workers;
                }
                built
            }));
        }
        for handle in handles {
            for (index, part) in handle.join().expect("tree worker panicked") {
                parts[index] = Some(part);
            }
        }
    });
    let parts: Vec<(Tree, u64, Vec<f64>)> = parts.into_iter().map(|p| p.unwrap()).collect();
    assemble(parts, table.feature_names().to_vec(), *config)
}

/// Predict every row of `table` using up to `threads` workers; identical to
/// [`ForestModel::predict`] for any thread count.
pub fn predict(
    model: &ForestModel,
    table: &FeatureTable,
    threads: usize,
) -> Result<Vec<f64>, ForestError> {
    if threads <= 1 || table.n_rows() < 2 {
        return model.predict(table);
    }
    if table.feature_names() != model.feature_names() {
        return Err(ForestError::SchemaMismatch);
    }
    let rows = table.rows();
    let workers = threads.min(rows.len());
    let chunk = rows.len().div_ceil(workers);
    let mut out = vec![0.0f64; rows.len()];
    thread::scope(|scope| {
        let mut handles = Vec::new();
        for (i, slice) in rows.chunks(chunk).enumerate() {
            handles.push((
                i,
                scope.spawn(move || {
                    slice
                        .iter()
                        .map(|row| model.predict_features(&row.features))
                        .collect::<Vec<f64>>()
                }),
            ));
        }
        for (i, handle) in handles {
            let values = handle.join().expect("prediction worker panicked");
            out[i * chunk..i * chunk + values.len()].copy_from_slice(&values);
        }
    });
    Ok(out)
}
