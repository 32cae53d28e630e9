use rand::Rng;

/// Gini impurity of a class-count vector: `1 - sum(p_k^2)`.
pub fn gini(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            p * p
        })
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Rows with `row[feature] <= threshold` descend left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: [usize; 2],
    },
}

/// A binary classification tree stored as a flat node list; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

pub(crate) struct TreeParams {
    pub max_features: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn class_counts(samples: &[usize], labels: &[bool]) -> [usize; 2] {
    let mut c = [0usize; 2];
    for &s in samples {
        c[labels[s] as usize] += 1;
    }
    c
}

/// Best threshold on one feature by weighted child Gini, or `None` when the
/// feature is constant over `samples`.
fn best_threshold(
    rows: &[Vec<f64>],
    labels: &[bool],
    samples: &[usize],
    feature: usize,
    totals: [usize; 2],
    scratch: &mut Vec<(f64, bool)>,
) -> Option<(f64, f64)> {
    scratch.clear();
    scratch.extend(samples.iter().map(|&s| (rows[s][feature], labels[s])));
    scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
    if scratch[0].0 == scratch[scratch.len() - 1].0 {
        return None;
    }
    let n = scratch.len();
    let mut left = [0usize; 2];
    let mut best: Option<(f64, f64)> = None;
    for j in 0..n - 1 {
        left[scratch[j].1 as usize] += 1;
        let (lo, hi) = (scratch[j].0, scratch[j + 1].0);
        if lo == hi {
            continue;
        }
        let right = [totals[0] - left[0], totals[1] - left[1]];
        let nl = (j + 1) as f64;
        let nr = (n - j - 1) as f64;
        let score = (nl * gini(&left) + nr * gini(&right)) / n as f64;
        if best.is_none_or(|(s, _)| score < s) {
            let mut threshold = lo + (hi - lo) / 2.0;
            if threshold >= hi {
                threshold = lo;
            }
            best = Some((score, threshold));
        }
    }
    best
}

impl DecisionTree {
    pub(crate) fn fit<R: Rng>(
        rows: &[Vec<f64>],
        labels: &[bool],
        samples: Vec<usize>,
        params: &TreeParams,
        rng: &mut R,
    ) -> Self {
        let n_features = rows.first().map_or(0, Vec::len);
        let mut nodes = Vec::new();
        let mut feature_pool: Vec<usize> = (0..n_features).collect();
        let mut scratch = Vec::new();
        // (node slot, samples, depth)
        let mut stack = vec![(0usize, samples, 0usize)];
        nodes.push(Node::Leaf { counts: [0, 0] });

        while let Some((slot, samples, depth)) = stack.pop() {
            let counts = class_counts(&samples, labels);
            let impurity = gini(&counts);
            let stop = samples.len() < params.min_samples_split
                || impurity == 0.0
                || depth >= params.max_depth
                || n_features == 0;
            let choice = if stop {
                None
            } else {
                // partial Fisher-Yates: the first `max_features` entries are the candidates
                for k in 0..params.max_features {
                    let j = rng.gen_range(k..n_features);
                    feature_pool.swap(k, j);
                }
                let mut best: Option<SplitChoice> = None;
                for &f in &feature_pool[..params.max_features] {
                    if let Some((score, threshold)) =
                        best_threshold(rows, labels, &samples, f, counts, &mut scratch)
                    {
                        if best.as_ref().is_none_or(|b| score < b.score) {
                            best = Some(SplitChoice {
                                feature: f,
                                threshold,
                                score,
                            });
                        }
                    }
                }
                best.filter(|b| b.score < impurity - 1e-12)
            };

            match choice {
                None => nodes[slot] = Node::Leaf { counts },
                Some(c) => {
                    let (l, r): (Vec<usize>, Vec<usize>) = samples
                        .iter()
                        .partition(|&&s| rows[s][c.feature] <= c.threshold);
                    let left = nodes.len();
                    let right = left + 1;
                    nodes.push(Node::Leaf { counts: [0, 0] });
                    nodes.push(Node::Leaf { counts: [0, 0] });
                    nodes[slot] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left,
                        right,
                    };
                    stack.push((right, r, depth + 1));
                    stack.push((left, l, depth + 1));
                }
            }
        }
        DecisionTree { nodes }
    }

    /// Class counts of the leaf reached by `row`.
    pub fn leaf_counts(&self, row: &[f64]) -> [usize; 2] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { counts } => return *counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Majority class of the reached leaf; ties go to class 0.
    pub fn vote(&self, row: &[f64]) -> bool {
        let c = self.leaf_counts(row);
        c[1] > c[0]
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}
