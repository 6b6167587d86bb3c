//! Versioned flat-file model serialization.
//!
//! ```text
//! smog-forest-v1
//! n_estimators = 3
//! max_features = sqrt
//! min_samples_split = 2
//! min_samples_leaf = 1
//! seed = 7
//! features = x0,x1
//! impurity = <per-feature accumulated decrease>
//! trees = 3
//! tree 0 seed=<u64> nodes=<count>
//! n <feature> <threshold>
//! l <value>
//! ...
//! end
//! ```
//!
//! Trees are serialized in preorder (`n` = internal, `l` = leaf; children
//! are implicit). Decimals use 17 significant digits (`{:.16e}`), so the
//! round-trip is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use smog_core::forest::{ForestConfig, ForestModel, MaxFeaturesMode, Node, Tree};

const MAGIC: &str = "smog-forest-v1";

pub fn write_model(path: &Path, model: &ForestModel) -> Result<()> {
    let config = model.config();
    let mut text = String::new();
    writeln!(text, "{MAGIC}").unwrap();
    writeln!(text, "n_estimators = {}", config.n_estimators).unwrap();
    writeln!(text, "max_features = {}", config.max_features.name()).unwrap();
    writeln!(text, "min_samples_split = {}", config.min_samples_split).unwrap();
    writeln!(text, "min_samples_leaf = {}", config.min_samples_leaf).unwrap();
    writeln!(text, "seed = {}", config.seed).unwrap();
    for name in model.feature_names() {
        if name.contains(',') || name.contains('\n') {
            bail!("feature name `{name}` contains a separator");
        }
    }
    writeln!(text, "features = {}", model.feature_names().join(",")).unwrap();
    let impurity: Vec<String> = model
        .impurity_acc()
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect();
    writeln!(text, "impurity = {}", impurity.join(",")).unwrap();
    writeln!(text, "trees = {}", model.trees().len()).unwrap();
    for (i, (tree, seed)) in model.trees().iter().zip(model.tree_seeds()).enumerate() {
        writeln!(text, "tree {i} seed={seed} nodes={}", tree.nodes().len()).unwrap();
        for node in tree.nodes() {
            match node {
                Node::Internal {
                    feature, threshold, ..
                } => writeln!(text, "n {feature} {threshold:.16e}").unwrap(),
                Node::Leaf { value } => writeln!(text, "l {value:.16e}").unwrap(),
            }
        }
    }
    writeln!(text, "end").unwrap();
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

pub fn read_model(path: &Path) -> Result<ForestModel> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))?;
    let mut lines = text.lines().enumerate();
    let fail =
        |line_no: usize, why: String| anyhow!("`{}` line {}: {why}", path.display(), line_no + 1);

    let (i, magic) = lines
        .next()
        .ok_or_else(|| anyhow!("`{}`: empty file", path.display()))?;
    if magic != MAGIC {
        return Err(fail(i, format!("expected `{MAGIC}`, got `{magic}`")));
    }

    let mut kv = |expect: &str| -> Result<String> {
        let (i, line) = lines
            .next()
            .ok_or_else(|| anyhow!("`{}`: truncated header", path.display()))?;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| fail(i, format!("expected `{expect} = ...`")))?;
        if key.trim() != expect {
            return Err(fail(
                i,
                format!("expected key `{expect}`, got `{}`", key.trim()),
            ));
        }
        Ok(value.trim().to_string())
    };

    let n_estimators: usize = kv("n_estimators")?.parse().context("n_estimators")?;
    let max_features = MaxFeaturesMode::parse(&kv("max_features")?)
        .map_err(|e| anyhow!("`{}`: {e}", path.display()))?;
    let min_samples_split: usize = kv("min_samples_split")?
        .parse()
        .context("min_samples_split")?;
    let min_samples_leaf: usize = kv("min_samples_leaf")?
        .parse()
        .context("min_samples_leaf")?;
    let seed: u64 = kv("seed")?.parse().context("seed")?;
    let feature_names: Vec<String> = kv("features")?.split(',').map(|s| s.to_string()).collect();
    let impurity_acc: Vec<f64> = {
        let raw = kv("impurity")?;
        raw.split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .context("impurity")?
    };
    let n_trees: usize = kv("trees")?.parse().context("trees")?;

    let mut trees = Vec::with_capacity(n_trees);
    let mut tree_seeds = Vec::with_capacity(n_trees);
    for expect_index in 0..n_trees {
        let (i, line) = lines
            .next()
            .ok_or_else(|| anyhow!("`{}`: truncated at tree {expect_index}", path.display()))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some("tree") {
            return Err(fail(i, format!("expected `tree {expect_index} ...`")));
        }
        let index: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail(i, "bad tree index".to_string()))?;
        if index != expect_index {
            return Err(fail(
                i,
                format!("expected tree {expect_index}, got {index}"),
            ));
        }
        let seed_field = parts
            .next()
            .and_then(|s| s.strip_prefix("seed="))
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| fail(i, "bad seed field".to_string()))?;
        let node_count = parts
            .next()
            .and_then(|s| s.strip_prefix("nodes="))
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| fail(i, "bad nodes field".to_string()))?;

        let mut raw: Vec<RawNode> = Vec::with_capacity(node_count);
        for _ in 0..node_count {
            let (i, line) = lines
                .next()
                .ok_or_else(|| anyhow!("`{}`: truncated tree {index}", path.display()))?;
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("n") => {
                    let feature: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| fail(i, "bad feature index".to_string()))?;
                    let threshold: f64 = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| fail(i, "bad threshold".to_string()))?;
                    raw.push(RawNode::Internal { feature, threshold });
                }
                Some("l") => {
                    let value: f64 = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| fail(i, "bad leaf value".to_string()))?;
                    raw.push(RawNode::Leaf { value });
                }
                other => return Err(fail(i, format!("expected `n` or `l` node, got {other:?}"))),
            }
        }
        let tree = link_preorder(&raw)
            .map_err(|why| anyhow!("`{}`: tree {index}: {why}", path.display()))?;
        trees.push(tree);
        tree_seeds.push(seed_field);
    }
    match lines.next() {
        Some((_, "end")) => {}
        other => bail!(
            "`{}`: expected `end`, got {:?}",
            path.display(),
            other.map(|(_, l)| l)
        ),
    }

    let config = ForestConfig {
        n_estimators,
        max_features,
        min_samples_split,
        min_samples_leaf,
        seed,
    };
    ForestModel::from_parts(trees, tree_seeds, feature_names, config, impurity_acc)
        .map_err(|e| anyhow!("`{}`: {e}", path.display()))
}

enum RawNode {
    Internal { feature: usize, threshold: f64 },
    Leaf { value: f64 },
}

/// Rebuild child links from a preorder sequence.
fn link_preorder(raw: &[RawNode]) -> Result<Tree, String> {
    let mut nodes: Vec<Node> = Vec::with_capacity(raw.len());
    let mut cursor = 0usize;
    fn walk(raw: &[RawNode], nodes: &mut Vec<Node>, cursor: &mut usize) -> Result<usize, String> {
        let at = *cursor;
        if at >= raw.len() {
            return Err("preorder sequence ends early".to_string());
        }
        *cursor += 1;
        match raw[at] {
            RawNode::Leaf { value } => {
                nodes.push(Node::Leaf { value });
                Ok(nodes.len() - 1)
            }
            RawNode::Internal { feature, threshold } => {
                let slot = nodes.len();
                nodes.push(Node::Internal {
                    feature,
                    threshold,
                    left: 0,
                    right: 0,
                });
                let left = walk(raw, nodes, cursor)?;
                let right = walk(raw, nodes, cursor)?;
                nodes[slot] = Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                };
                Ok(slot)
            }
        }
    }
    walk(raw, &mut nodes, &mut cursor)?;
    if cursor != raw.len() {
        return Err("trailing nodes after the preorder tree".to_string());
    }
    Tree::from_nodes(nodes).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use smog_core::dataset::{FeatureTable, TableRow};
    use smog_core::forest::fit;
    use smog_core::rng::Xoshiro256;
    use smog_core::Timestamp;

    fn training_table(n: usize, seed: u64) -> FeatureTable {
        let mut rng = Xoshiro256::from_seed(seed);
        let rows: Vec<TableRow> = (0..n)
            .map(|i| {
                let x0 = rng.next_f64() * 7.0;
                let x1 = rng.next_f64();
                TableRow {
                    features: vec![x0, x1],
                    station_id: format!("r{i}"),
                    time: Timestamp::from_unix(1_546_347_600 + i as i64).unwrap(),
                    target: Some(x0 * 2.0 + x1),
                }
            })
            .collect();
        FeatureTable::new(vec!["x0".to_string(), "x1".to_string()], rows).unwrap()
    }

    #[test]
    fn models_round_trip_exactly() {
        let table = training_table(80, 5);
        let config = ForestConfig {
            n_estimators: 7,
            seed: 99,
            ..ForestConfig::default()
        };
        let model = fit(&table, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        write_model(&path, &model).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(back, model);
        assert_eq!(
            back.predict(&table).unwrap(),
            model.predict(&table).unwrap()
        );
        // Re-serialization is byte-identical.
        let again = dir.path().join("model2.txt");
        write_model(&again, &back).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&again).unwrap()
        );
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        std::fs::write(&path, "not a model\n").unwrap();
        assert!(read_model(&path)
            .unwrap_err()
            .to_string()
            .contains("smog-forest-v1"));

        let table = training_table(30, 6);
        let config = ForestConfig {
            n_estimators: 2,
            seed: 1,
            ..ForestConfig::default()
        };
        let model = fit(&table, &config).unwrap();
        write_model(&path, &model).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text = text.replacen("trees = 2", "trees = 3", 1);
        std::fs::write(&path, text).unwrap();
        assert!(read_model(&path).is_err());
    }
}
