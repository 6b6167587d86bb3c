//! Exhaustive brute-force CART reference, independent of the library's
//! tree builder: it enumerates every feature and candidate threshold at
//! every node and computes variance reductions directly from population
//! variances (`impurity = Σ (y - mean)²` per side), rather than the
//! implementation's sum-of-squares shortcut. Tie-breaking follows the same
//! contract: lowest feature index, then lowest threshold, strictly positive
//! reduction required.

use smog_core::forest::{Node, Tree};

#[derive(Debug)]
pub enum RefNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<RefNode>,
        right: Box<RefNode>,
    },
}

fn mean(y: &[f64], rows: &[usize]) -> f64 {
    rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64
}

/// `n · Var(rows)` computed the direct two-pass way.
fn impurity(y: &[f64], rows: &[usize]) -> f64 {
    let mu = mean(y, rows);
    rows.iter().map(|&r| (y[r] - mu) * (y[r] - mu)).sum()
}

pub fn grow(
    x: &[f64],
    y: &[f64],
    n_features: usize,
    min_samples_split: usize,
    min_samples_leaf: usize,
) -> RefNode {
    let rows: Vec<usize> = (0..y.len()).collect();
    grow_node(x, y, n_features, &rows, min_samples_split, min_samples_leaf)
}

fn grow_node(
    x: &[f64],
    y: &[f64],
    n_features: usize,
    rows: &[usize],
    min_samples_split: usize,
    min_samples_leaf: usize,
) -> RefNode {
    let n = rows.len();
    let node_mean = mean(y, rows);
    if n < min_samples_split || rows.iter().all(|&r| y[r] == y[rows[0]]) {
        return RefNode::Leaf { value: node_mean };
    }

    let parent = impurity(y, rows);
    let mut best: Option<(usize, f64, f64)> = None;
    for feature in 0..n_features {
        let mut values: Vec<f64> = rows.iter().map(|&r| x[r * n_features + feature]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            if threshold >= pair[1] {
                continue; // midpoint collapsed onto the upper value
            }
            let left: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&r| x[r * n_features + feature] <= threshold)
                .collect();
            let right: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&r| x[r * n_features + feature] > threshold)
                .collect();
            if left.len() < min_samples_leaf || right.len() < min_samples_leaf {
                continue;
            }
            let reduction = parent - impurity(y, &left) - impurity(y, &right);
            if reduction > 0.0 && best.is_none_or(|(_, _, b)| reduction > b) {
                best = Some((feature, threshold, reduction));
            }
        }
    }

    let Some((feature, threshold, _)) = best else {
        return RefNode::Leaf { value: node_mean };
    };
    let left_rows: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&r| x[r * n_features + feature] <= threshold)
        .collect();
    let right_rows: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&r| x[r * n_features + feature] > threshold)
        .collect();
    RefNode::Split {
        feature,
        threshold,
        left: Box::new(grow_node(
            x,
            y,
            n_features,
            &left_rows,
            min_samples_split,
            min_samples_leaf,
        )),
        right: Box::new(grow_node(
            x,
            y,
            n_features,
            &right_rows,
            min_samples_split,
            min_samples_leaf,
        )),
    }
}

/// Assert node-for-node equality: same split features, bit-identical
/// thresholds, bit-identical leaf values.
pub fn assert_equivalent(tree: &Tree, reference: &RefNode, case: usize) {
    fn walk(nodes: &[Node], at: usize, reference: &RefNode, case: usize, path: &mut Vec<char>) {
        match (&nodes[at], reference) {
            (Node::Leaf { value }, RefNode::Leaf { value: expected }) => {
                assert!(
                    value == expected,
                    "case {case}, path {path:?}: leaf {value} vs oracle {expected}"
                );
            }
            (
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                },
                RefNode::Split {
                    feature: expected_feature,
                    threshold: expected_threshold,
                    left: expected_left,
                    right: expected_right,
                },
            ) => {
                assert!(
                    feature == expected_feature && threshold == expected_threshold,
                    "case {case}, path {path:?}: split ({feature}, {threshold}) vs oracle \
                     ({expected_feature}, {expected_threshold})"
                );
                path.push('L');
                walk(nodes, *left, expected_left, case, path);
                path.pop();
                path.push('R');
                walk(nodes, *right, expected_right, case, path);
                path.pop();
            }
            (got, expected) => panic!(
                "case {case}, path {path:?}: node kind mismatch: {got:?} vs oracle {expected:?}"
            ),
        }
    }
    walk(tree.nodes(), 0, reference, case, &mut Vec::new());
}
