//! From-scratch random forest regression: bootstrap-aggregated CART trees
//! with per-node feature subsetting, plus impurity and permutation
//! importances.

mod tree;

pub use tree::{best_split, variance_decrease, Node, SplitCandidate, Tree};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dataset::FeatureTable;
use crate::eval;
use crate::rng::{derive_seed, Xoshiro256};

#[derive(Debug, Clone, PartialEq)]
pub enum ForestError {
    EmptyTable,
    MissingTargets,
    BadConfig(&'static str),
    SchemaMismatch,
    BadModel(&'static str),
    ZeroTargetVariance,
    BadRepeats,
}

impl fmt::Display for ForestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForestError::EmptyTable => write!(f, "training table is empty"),
            ForestError::MissingTargets => write!(f, "table carries no target column"),
            ForestError::BadConfig(why) => write!(f, "invalid forest config: {why}"),
            ForestError::SchemaMismatch => {
                write!(f, "table feature schema does not match the model's")
            }
            ForestError::BadModel(why) => write!(f, "invalid model: {why}"),
            ForestError::ZeroTargetVariance => {
                write!(f, "test targets have zero variance; score is undefined")
            }
            ForestError::BadRepeats => write!(f, "n_repeats must be at least 1"),
        }
    }
}

impl core::error::Error for ForestError {}

/// Size of the per-node candidate feature subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeaturesMode {
    /// Every feature (the library default historically spelled `auto`).
    All,
    /// `ceil(sqrt(p))` features.
    Sqrt,
    /// `ceil(log2(p))` features, at least 1.
    Log2,
}

impl MaxFeaturesMode {
    pub fn subset_size(self, n_features: usize) -> usize {
        match self {
            MaxFeaturesMode::All => n_features,
            MaxFeaturesMode::Sqrt => ceil_sqrt(n_features),
            MaxFeaturesMode::Log2 => ceil_log2(n_features).max(1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MaxFeaturesMode::All => "all",
            MaxFeaturesMode::Sqrt => "sqrt",
            MaxFeaturesMode::Log2 => "log2",
        }
    }

    /// Parse a mode name; `auto` is accepted as an alias for `all`.
    pub fn parse(name: &str) -> Result<Self, ForestError> {
        match name {
            "all" | "auto" => Ok(MaxFeaturesMode::All),
            "sqrt" => Ok(MaxFeaturesMode::Sqrt),
            "log2" => Ok(MaxFeaturesMode::Log2),
            _ => Err(ForestError::BadConfig("unknown max_features mode")),
        }
    }
}

fn ceil_sqrt(p: usize) -> usize {
    let mut k = 0usize;
    while k * k < p {
        k += 1;
    }
    k
}

fn ceil_log2(p: usize) -> usize {
    let mut k = 0usize;
    while (1usize << k) < p {
        k += 1;
    }
    k
}

/// Forest hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestConfig {
    pub n_estimators: usize,
    pub max_features: MaxFeaturesMode,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_estimators: 300,
            max_features: MaxFeaturesMode::Sqrt,
            min_samples_split: 2,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<(), ForestError> {
        if self.n_estimators < 1 {
            return Err(ForestError::BadConfig("n_estimators must be at least 1"));
        }
        if self.min_samples_split < 2 {
            return Err(ForestError::BadConfig(
                "min_samples_split must be at least 2",
            ));
        }
        if self.min_samples_leaf < 1 {
            return Err(ForestError::BadConfig(
                "min_samples_leaf must be at least 1",
            ));
        }
        Ok(())
    }

    /// Copy with a different seed; used to derive per-fold configs.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// A trained forest: the trees, their seeds, the feature schema, and the
/// per-feature impurity decreases accumulated during training.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<Tree>,
    tree_seeds: Vec<u64>,
    feature_names: Vec<String>,
    config: ForestConfig,
    impurity_acc: Vec<f64>,
}

/// Train one tree of a forest: bootstrap `n` rows with replacement from the
/// tree's own stream (`derive_seed(config.seed, index)`), then grow with
/// per-node feature subsets from the same stream.
///
/// Exposed separately so a parallel driver can fan trees out across workers
/// and reassemble a model identical to serial [`fit`].
pub fn fit_tree(
    x: &[f64],
    y: &[f64],
    n_features: usize,
    config: &ForestConfig,
    index: usize,
) -> (Tree, u64, Vec<f64>) {
    let tree_seed = derive_seed(config.seed, index as u64);
    let mut rng = Xoshiro256::from_seed(tree_seed);
    let n = y.len();
    let indices: Vec<u32> = (0..n).map(|_| rng.below(n as u64) as u32).collect();
    let m = config.max_features.subset_size(n_features);
    let params = tree::GrowParams {
        min_samples_split: config.min_samples_split,
        min_samples_leaf: config.min_samples_leaf,
        max_features: m,
    };
    let mut acc = vec![0.0f64; n_features];
    let rng_opt = if m < n_features { Some(&mut rng) } else { None };
    let tree = Tree::grow(x, y, n_features, indices, &params, rng_opt, &mut acc);
    (tree, tree_seed, acc)
}

/// Train a forest on `table` (serial reference implementation).
///
/// `(table, config)` fully determines the model: tree `i` draws everything
/// from `derive_seed(config.seed, i)`, so training order and parallelism
/// cannot change the result.
pub fn fit(table: &FeatureTable, config: &ForestConfig) -> Result<ForestModel, ForestError> {
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
    let mut trees = Vec::with_capacity(config.n_estimators);
    let mut tree_seeds = Vec::with_capacity(config.n_estimators);
    let mut impurity_acc = vec![0.0f64; p];
    for index in 0..config.n_estimators {
        let (tree, seed, acc) = fit_tree(&x, &y, p, config, index);
        trees.push(tree);
        tree_seeds.push(seed);
        for (total, d) in impurity_acc.iter_mut().zip(&acc) {
            *total += d;
        }
    }
    Ok(ForestModel {
        trees,
        tree_seeds,
        feature_names: table.feature_names().to_vec(),
        config: *config,
        impurity_acc,
    })
}

/// Reassemble a model from per-tree results produced by [`fit_tree`], in
/// tree-index order (the parallel driver's merge step).
pub fn assemble(
    parts: Vec<(Tree, u64, Vec<f64>)>,
    feature_names: Vec<String>,
    config: ForestConfig,
) -> Result<ForestModel, ForestError> {
    if parts.len() != config.n_estimators {
        return Err(ForestError::BadModel(
            "tree count differs from n_estimators",
        ));
    }
    let p = feature_names.len();
    let mut impurity_acc = vec![0.0f64; p];
    let mut trees = Vec::with_capacity(parts.len());
    let mut tree_seeds = Vec::with_capacity(parts.len());
    for (tree, seed, acc) in parts {
        if acc.len() != p {
            return Err(ForestError::BadModel("importance width mismatch"));
        }
        for (total, d) in impurity_acc.iter_mut().zip(&acc) {
            *total += d;
        }
        trees.push(tree);
        tree_seeds.push(seed);
    }
    Ok(ForestModel {
        trees,
        tree_seeds,
        feature_names,
        config,
        impurity_acc,
    })
}

impl ForestModel {
    /// Rebuild a model from persisted parts (the model-file path).
    pub fn from_parts(
        trees: Vec<Tree>,
        tree_seeds: Vec<u64>,
        feature_names: Vec<String>,
        config: ForestConfig,
        impurity_acc: Vec<f64>,
    ) -> Result<ForestModel, ForestError> {
        config.validate()?;
        if trees.len() != config.n_estimators {
            return Err(ForestError::BadModel(
                "tree count differs from n_estimators",
            ));
        }
        if tree_seeds.len() != trees.len() {
            return Err(ForestError::BadModel("per-tree seed count mismatch"));
        }
        if impurity_acc.len() != feature_names.len() {
            return Err(ForestError::BadModel("importance width mismatch"));
        }
        if feature_names.is_empty() {
            return Err(ForestError::BadModel("model needs at least one feature"));
        }
        for tree in &trees {
            for node in tree.nodes() {
                if let Node::Internal { feature, .. } = node {
                    if *feature >= feature_names.len() {
                        return Err(ForestError::BadModel("split feature out of range"));
                    }
                }
            }
        }
        Ok(ForestModel {
            trees,
            tree_seeds,
            feature_names,
            config,
            impurity_acc,
        })
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn tree_seeds(&self) -> &[u64] {
        &self.tree_seeds
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn impurity_acc(&self) -> &[f64] {
        &self.impurity_acc
    }

    /// Prediction for one feature vector: the mean of the tree outputs.
    pub fn predict_features(&self, features: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(features)).sum();
        sum / self.trees.len() as f64
    }

    /// Predictions for every row of `table`, which must match the model's
    /// feature schema.
    pub fn predict(&self, table: &FeatureTable) -> Result<Vec<f64>, ForestError> {
        if table.feature_names() != self.feature_names.as_slice() {
            return Err(ForestError::SchemaMismatch);
        }
        Ok(table
            .rows()
            .iter()
            .map(|row| self.predict_features(&row.features))
            .collect())
    }

    /// Normalized impurity (Gini) importance: per-feature variance-reduction
    /// totals averaged over trees and scaled to sum to 1. A forest that
    /// never split reports all zeros.
    pub fn gini_importance(&self) -> Vec<f64> {
        let n_trees = self.trees.len() as f64;
        let mut scores: Vec<f64> = self.impurity_acc.iter().map(|d| d / n_trees).collect();
        let total: f64 = scores.iter().sum();
        if total > 0.0 {
            for s in &mut scores {
                *s /= total;
            }
        }
        scores
    }

    /// Permutation importance on a held-out table: mean and population
    /// standard deviation, over `n_repeats` shuffles per feature, of the
    /// drop in R² relative to the unshuffled baseline.
    ///
    /// Shuffles draw from a single stream seeded with `seed`, iterating
    /// features in schema order with `n_repeats` shuffles each.
    pub fn permutation_importance(
        &self,
        table: &FeatureTable,
        n_repeats: usize,
        seed: u64,
    ) -> Result<Vec<(f64, f64)>, ForestError> {
        if n_repeats < 1 {
            return Err(ForestError::BadRepeats);
        }
        if table.n_rows() == 0 {
            return Err(ForestError::EmptyTable);
        }
        if !table.has_targets() {
            return Err(ForestError::MissingTargets);
        }
        let targets = table.targets();
        let baseline = eval::r2_score(&targets, &self.predict(table)?)
            .ok_or(ForestError::ZeroTargetVariance)?;

        let n = table.n_rows();
        let p = self.feature_names.len();
        let mut matrix = table.matrix();
        let mut rng = Xoshiro256::from_seed(seed);
        let mut column = vec![0.0f64; n];
        let mut out = Vec::with_capacity(p);
        for feature in 0..p {
            for (slot, row) in column.iter_mut().zip(0..n) {
                *slot = matrix[row * p + feature];
            }
            let mut drops = Vec::with_capacity(n_repeats);
            for _ in 0..n_repeats {
                let mut shuffled = column.clone();
                rng.shuffle(&mut shuffled);
                for (row, &v) in shuffled.iter().enumerate() {
                    matrix[row * p + feature] = v;
                }
                let mut predictions = Vec::with_capacity(n);
                for row in 0..n {
                    predictions.push(self.predict_features(&matrix[row * p..(row + 1) * p]));
                }
                let score = eval::r2_score(&targets, &predictions)
                    .ok_or(ForestError::ZeroTargetVariance)?;
                drops.push(baseline - score);
            }
            // Restore the original column before moving on.
            for (row, &v) in column.iter().enumerate() {
                matrix[row * p + feature] = v;
            }
            let mean = drops.iter().sum::<f64>() / n_repeats as f64;
            let var = drops.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n_repeats as f64;
            out.push((mean, libm::sqrt(var)));
        }
        Ok(out)
    }
}
