//! CART regression trees with variance-reduction splits.

use alloc::vec::Vec;

use crate::rng::Xoshiro256;

/// A tree node. Internal nodes route `x[feature] <= threshold` left,
/// `> threshold` right; leaves predict the mean of their training targets.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A regression tree stored as a preorder node list (node 0 is the root;
/// a node's left subtree precedes its right subtree).
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

/// The winning split of a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    /// Variance reduction as defined by [`variance_decrease`].
    pub decrease: f64,
}

/// Best split of a node's samples among `candidates` (feature indices,
/// strictly ascending).
///
/// Candidate thresholds are the midpoints `(a + b) / 2` of consecutive
/// distinct sorted feature values; midpoints that round up to `b` cannot
/// separate the groups and are discarded. The decrease that ranks
/// candidates is the literal population-variance formula evaluated in node
/// order (see [`variance_decrease`]), so candidates inducing the same
/// partition compare bit-equal and ties resolve cleanly to the lowest
/// feature index, then the lowest threshold. A sum-based scan prunes
/// candidates more than a hair below the running maximum before the exact
/// formula runs. Returns `None` when all targets are equal or no candidate
/// yields a strictly positive decrease with both children holding at least
/// `min_samples_leaf` samples.
pub fn best_split(
    x: &[f64],
    y: &[f64],
    n_features: usize,
    indices: &[u32],
    candidates: &[usize],
    min_samples_leaf: usize,
) -> Option<SplitCandidate> {
    let n = indices.len();
    debug_assert!(n >= 2);
    let first = y[indices[0] as usize];
    if indices.iter().all(|&i| y[i as usize] == first) {
        return None;
    }
    // The scan works on mean-centred targets so its sums live on the
    // decrease's own scale rather than the raw target scale.
    let sum_raw: f64 = indices.iter().map(|&i| y[i as usize]).sum();
    let node_mean = sum_raw / n as f64;
    let sum_parent: f64 = indices.iter().map(|&i| y[i as usize] - node_mean).sum();
    let parent_term = sum_parent * sum_parent / n as f64;

    let mut scratch: Vec<(f64, f64)> = Vec::with_capacity(n);
    // Shortlist of candidates within a 1e-9 relative band of the best scan
    // value, kept in (feature, threshold) scan order.
    let mut band: Vec<(f64, usize, f64)> = Vec::new();
    let mut best_scan = 0.0f64;
    for &feature in candidates {
        scratch.clear();
        scratch.extend(indices.iter().map(|&i| {
            (
                x[i as usize * n_features + feature],
                y[i as usize] - node_mean,
            )
        }));
        scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let mut sum_left = 0.0f64;
        let mut n_left = 0usize;
        let mut i = 0usize;
        while i < n {
            let value = scratch[i].0;
            while i < n && scratch[i].0 == value {
                sum_left += scratch[i].1;
                n_left += 1;
                i += 1;
            }
            if i == n {
                break;
            }
            let next = scratch[i].0;
            let threshold = (value + next) / 2.0;
            if threshold >= next {
                continue; // adjacent floats: the midpoint cannot separate
            }
            let n_right = n - n_left;
            if n_left < min_samples_leaf || n_right < min_samples_leaf {
                continue;
            }
            let sum_right = sum_parent - sum_left;
            let scan = sum_left * sum_left / n_left as f64 + sum_right * sum_right / n_right as f64
                - parent_term;
            if scan <= 0.0 || scan < best_scan * (1.0 - 1e-9) {
                continue;
            }
            if scan > best_scan {
                best_scan = scan;
                let floor = best_scan * (1.0 - 1e-9);
                band.retain(|&(s, _, _)| s >= floor);
            }
            band.push((scan, feature, threshold));
        }
    }

    // Exact arbitration: the defining formula ranks the shortlist, so the
    // tie-break sees bit-equal values for equivalent partitions.
    let mut best: Option<SplitCandidate> = None;
    for &(_, feature, threshold) in &band {
        let decrease = variance_decrease(x, y, n_features, indices, feature, threshold);
        if decrease > 0.0 && best.is_none_or(|b| decrease > b.decrease) {
            best = Some(SplitCandidate {
                feature,
                threshold,
                decrease,
            });
        }
    }
    best
}

/// `Var(parent)·n - [Var(left)·n_l + Var(right)·n_r]` (population
/// variances), accumulated over the node's samples in node order. This is
/// the defining evaluation of a split's quality: it depends only on the
/// induced partition, never on per-feature sort order.
pub fn variance_decrease(
    x: &[f64],
    y: &[f64],
    n_features: usize,
    indices: &[u32],
    feature: usize,
    threshold: f64,
) -> f64 {
    let mut sum_parent = 0.0f64;
    let mut sum_left = 0.0f64;
    let mut sum_right = 0.0f64;
    let mut n_left = 0usize;
    for &i in indices {
        let target = y[i as usize];
        sum_parent += target;
        if x[i as usize * n_features + feature] <= threshold {
            sum_left += target;
            n_left += 1;
        } else {
            sum_right += target;
        }
    }
    let n = indices.len();
    let n_right = n - n_left;
    debug_assert!(n_left > 0 && n_right > 0);
    let mean_parent = sum_parent / n as f64;
    let mean_left = sum_left / n_left as f64;
    let mean_right = sum_right / n_right as f64;
    let mut ss_parent = 0.0f64;
    let mut ss_left = 0.0f64;
    let mut ss_right = 0.0f64;
    for &i in indices {
        let target = y[i as usize];
        let d = target - mean_parent;
        ss_parent += d * d;
        if x[i as usize * n_features + feature] <= threshold {
            let d = target - mean_left;
            ss_left += d * d;
        } else {
            let d = target - mean_right;
            ss_right += d * d;
        }
    }
    ss_parent - ss_left - ss_right
}

pub(crate) struct GrowParams {
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Per-node candidate subset size; `n_features` means all.
    pub max_features: usize,
}

impl Tree {
    /// Grow a tree on the sample set `indices` (row indices into `x`/`y`,
    /// kept in input order).
    ///
    /// When `rng` is supplied and `max_features < n_features`, each node
    /// draws its own candidate subset without replacement; otherwise every
    /// feature is a candidate. `impurity_acc` collects each split's variance
    /// reduction under its feature index.
    pub(crate) fn grow(
        x: &[f64],
        y: &[f64],
        n_features: usize,
        indices: Vec<u32>,
        params: &GrowParams,
        mut rng: Option<&mut Xoshiro256>,
        impurity_acc: &mut [f64],
    ) -> Tree {
        let mut nodes = Vec::new();
        let mut pool: Vec<usize> = (0..n_features).collect();
        let mut chosen: Vec<usize> = Vec::with_capacity(params.max_features);
        build_node(
            x,
            y,
            n_features,
            indices,
            params,
            &mut rng,
            impurity_acc,
            &mut nodes,
            &mut pool,
            &mut chosen,
        );
        Tree { nodes }
    }

    /// Deterministic single tree over all rows and all features: the
    /// exhaustive-CART reference used by equivalence tests.
    pub fn fit_full(
        x: &[f64],
        y: &[f64],
        n_features: usize,
        min_samples_split: usize,
        min_samples_leaf: usize,
    ) -> Tree {
        let indices: Vec<u32> = (0..y.len() as u32).collect();
        let params = GrowParams {
            min_samples_split,
            min_samples_leaf,
            max_features: n_features,
        };
        let mut acc = alloc::vec![0.0; n_features];
        Tree::grow(x, y, n_features, indices, &params, None, &mut acc)
    }

    pub fn predict_row(&self, features: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if features[feature] <= threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Rebuild a tree from its preorder node list (the model-file path).
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Tree, &'static str> {
        if nodes.is_empty() {
            return Err("tree needs at least one node");
        }
        for (i, node) in nodes.iter().enumerate() {
            if let Node::Internal { left, right, .. } = node {
                if *left != i + 1 || *right <= *left || *right >= nodes.len() {
                    return Err("node children do not form a preorder layout");
                }
            }
        }
        // Every node except the root must be referenced exactly once.
        let mut referenced = alloc::vec![false; nodes.len()];
        referenced[0] = true;
        for node in &nodes {
            if let Node::Internal { left, right, .. } = node {
                for child in [*left, *right] {
                    if referenced[child] {
                        return Err("node referenced twice");
                    }
                    referenced[child] = true;
                }
            }
        }
        if referenced.iter().any(|r| !r) {
            return Err("unreachable node");
        }
        Ok(Tree { nodes })
    }
}

#[allow(clippy::too_many_arguments)]
fn build_node(
    x: &[f64],
    y: &[f64],
    n_features: usize,
    indices: Vec<u32>,
    params: &GrowParams,
    rng: &mut Option<&mut Xoshiro256>,
    impurity_acc: &mut [f64],
    nodes: &mut Vec<Node>,
    pool: &mut Vec<usize>,
    chosen: &mut Vec<usize>,
) -> usize {
    let n = indices.len();
    let sum: f64 = indices.iter().map(|&i| y[i as usize]).sum();
    let mean = sum / n as f64;

    if n < params.min_samples_split {
        nodes.push(Node::Leaf { value: mean });
        return nodes.len() - 1;
    }

    // Per-node candidate feature subset, sampled without replacement and
    // evaluated in ascending index order for the tie-break rule.
    let split = if params.max_features < n_features {
        let rng = rng.as_deref_mut().expect("subsetting requires an rng");
        for (i, slot) in pool.iter_mut().enumerate() {
            *slot = i;
        }
        chosen.clear();
        for k in 0..params.max_features {
            let j = k + rng.below((n_features - k) as u64) as usize;
            pool.swap(k, j);
            chosen.push(pool[k]);
        }
        chosen.sort_unstable();
        best_split(x, y, n_features, &indices, chosen, params.min_samples_leaf)
    } else {
        for (i, slot) in pool.iter_mut().enumerate() {
            *slot = i;
        }
        best_split(x, y, n_features, &indices, pool, params.min_samples_leaf)
    };

    let Some(split) = split else {
        nodes.push(Node::Leaf { value: mean });
        return nodes.len() - 1;
    };

    impurity_acc[split.feature] += split.decrease;

    // Stable partition so child sample order (and thus leaf-mean summation
    // order) is reproducible.
    let mut left_set: Vec<u32> = Vec::new();
    let mut right_set: Vec<u32> = Vec::new();
    for &i in &indices {
        if x[i as usize * n_features + split.feature] <= split.threshold {
            left_set.push(i);
        } else {
            right_set.push(i);
        }
    }
    drop(indices);

    let slot = nodes.len();
    nodes.push(Node::Internal {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left = build_node(
        x,
        y,
        n_features,
        left_set,
        params,
        rng,
        impurity_acc,
        nodes,
        pool,
        chosen,
    );
    let right = build_node(
        x,
        y,
        n_features,
        right_set,
        params,
        rng,
        impurity_acc,
        nodes,
        pool,
        chosen,
    );
    nodes[slot] = Node::Internal {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    slot
}
