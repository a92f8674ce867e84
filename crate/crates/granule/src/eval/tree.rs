//! CART-style binary decision tree (Gini impurity, midpoint thresholds,
//! no pruning).
//!
//! Nodes split while some split has positive Gini gain and the node is not
//! pure. Gain ties resolve to the smaller feature index, then the smaller
//! threshold. Leaves predict the majority class of their samples, ties to
//! the smaller class id. Growth uses an explicit worklist, so degenerate
//! chain-shaped trees cannot overflow the stack.

use crate::data::{ClassId, Dataset};

/// Gains at or below this are treated as zero to avoid splitting on
/// floating-point dust.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(ClassId),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_classes: usize,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / t;
            p * p
        })
        .sum::<f64>()
}

fn majority(counts: &[usize]) -> ClassId {
    let best = *counts.iter().max().unwrap();
    counts.iter().position(|&c| c == best).unwrap()
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Best `(feature, threshold)` over midpoints of consecutive distinct
/// values, by Gini gain. Iteration is ascending in feature and threshold
/// and replaces only on strictly greater gain, so ties land on the smaller
/// feature, then the smaller threshold. `None` when nothing clears
/// [`MIN_GAIN`].
fn best_split(train: &Dataset, samples: &[usize], counts: &[usize]) -> Option<BestSplit> {
    let total = samples.len();
    let parent = gini(counts, total);
    let q = counts.len();
    let mut best: Option<BestSplit> = None;
    let mut column: Vec<(f64, ClassId)> = Vec::with_capacity(total);
    for feature in 0..train.n_features() {
        column.clear();
        column.extend(
            samples
                .iter()
                .map(|&id| (train.features_of(id)[feature], train.label(id))),
        );
        column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_counts = vec![0usize; q];
        let mut left_total = 0usize;
        for w in 0..total - 1 {
            left_counts[column[w].1] += 1;
            left_total += 1;
            let (a, b) = (column[w].0, column[w + 1].0);
            if a == b {
                continue;
            }
            let mut threshold = a + (b - a) / 2.0;
            // Guard against rounding up to b: keep a <= threshold < b so a
            // `<=` test separates the two values.
            if threshold >= b {
                threshold = a;
            }
            let right_total = total - left_total;
            let right_counts: Vec<usize> = counts
                .iter()
                .zip(&left_counts)
                .map(|(&c, &l)| c - l)
                .collect();
            let weighted = (left_total as f64 * gini(&left_counts, left_total)
                + right_total as f64 * gini(&right_counts, right_total))
                / total as f64;
            let gain = parent - weighted;
            if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(BestSplit {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

impl DecisionTree {
    pub fn fit(train: &Dataset) -> DecisionTree {
        let q = train.n_classes();
        let mut nodes = vec![Node::Leaf(0)];
        let root_samples: Vec<usize> = (0..train.n_samples()).collect();
        let mut work: Vec<(usize, Vec<usize>)> = vec![(0, root_samples)];
        while let Some((idx, samples)) = work.pop() {
            let mut counts = vec![0usize; q];
            for &id in &samples {
                counts[train.label(id)] += 1;
            }
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let split = if pure { None } else { best_split(train, &samples, &counts) };
            match split {
                None => nodes[idx] = Node::Leaf(majority(&counts)),
                Some(s) => {
                    let (mut left, mut right) = (Vec::new(), Vec::new());
                    for &id in &samples {
                        if train.features_of(id)[s.feature] <= s.threshold {
                            left.push(id);
                        } else {
                            right.push(id);
                        }
                    }
                    debug_assert!(!left.is_empty() && !right.is_empty());
                    let l = nodes.len();
                    nodes.push(Node::Leaf(0));
                    let r = nodes.len();
                    nodes.push(Node::Leaf(0));
                    nodes[idx] = Node::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left: l,
                        right: r,
                    };
                    work.push((l, left));
                    work.push((r, right));
                }
            }
        }
        DecisionTree { nodes, n_classes: q }
    }

    pub fn predict(&self, query: &[f64]) -> ClassId {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf(c) => return *c,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if query[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict_batch(&self, queries: &Dataset) -> Vec<ClassId> {
        (0..queries.n_samples())
            .map(|i| self.predict(queries.features_of(i)))
            .collect()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_input_is_a_single_leaf() {
        let d = Dataset::from_rows(
            vec![vec![0.0], vec![5.0], vec![9.0]],
            vec!["a".into(); 3],
        )
        .unwrap();
        let t = DecisionTree::fit(&d);
        assert_eq!(t.n_nodes(), 1);
        assert_eq!(t.predict(&[100.0]), 0);
    }

    #[test]
    fn splits_at_midpoint_between_classes() {
        let d = Dataset::from_rows(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec!["a".into(), "a".into(), "b".into(), "b".into()],
        )
        .unwrap();
        let t = DecisionTree::fit(&d);
        assert_eq!(t.n_nodes(), 3, "one split suffices");
        assert_eq!(t.predict(&[1.4]), 0);
        assert_eq!(t.predict(&[1.6]), 1);
    }

    #[test]
    fn xor_stalls_into_majority_leaf() {
        // Greedy growth sees zero gain in every single XOR split, so the
        // no-positive-gain rule stops at the root; the 2-2 majority tie
        // resolves to class 0.
        let d = Dataset::from_rows(
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ],
            vec!["a".into(), "b".into(), "b".into(), "a".into()],
        )
        .unwrap();
        let t = DecisionTree::fit(&d);
        assert_eq!(t.n_nodes(), 1);
        for s in d.iter() {
            assert_eq!(t.predict(s.features), 0);
        }
    }

    #[test]
    fn nested_bands_need_two_levels() {
        // Pattern a a | b b | a a along one axis: the root split has a
        // two-way gain tie (thresholds 1.5 and 3.5) that must resolve to
        // the smaller threshold, and the right child must split again.
        let d = Dataset::from_rows(
            (0..6).map(|i| vec![i as f64]).collect(),
            vec!["a".into(), "a".into(), "b".into(), "b".into(), "a".into(), "a".into()],
        )
        .unwrap();
        let t = DecisionTree::fit(&d);
        match &t.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 1.5, "gain tie must pick the smaller threshold");
            }
            other => panic!("expected a split, got {other:?}"),
        }
        assert_eq!(t.n_nodes(), 5, "root split plus one nested split");
        for s in d.iter() {
            assert_eq!(t.predict(s.features), s.label);
        }
    }

    #[test]
    fn tie_on_gain_prefers_lower_feature_index() {
        // Both features carry the same perfect split.
        let d = Dataset::from_rows(
            vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let t = DecisionTree::fit(&d);
        match &t.nodes[0] {
            Node::Split { feature, .. } => assert_eq!(*feature, 0),
            other => panic!("expected a split, got {other:?}"),
        }
    }

    #[test]
    fn indistinguishable_samples_become_majority_leaf() {
        let d = Dataset::from_rows(
            vec![vec![2.0]; 5],
            vec!["a".into(), "b".into(), "b".into(), "a".into(), "c".into()],
        )
        .unwrap();
        let t = DecisionTree::fit(&d);
        assert_eq!(t.n_nodes(), 1);
        // Counts a=2, b=2, c=1: majority tie between a and b goes to the
        // smaller class id (a = 0).
        assert_eq!(t.predict(&[2.0]), 0);
    }

    #[test]
    fn deep_alternating_chain_fits_without_stack_growth() {
        let n = 2001;
        let d = Dataset::from_rows(
            (0..n).map(|i| vec![i as f64]).collect(),
            (0..n).map(|i| ((i % 2) as u8).to_string()).collect(),
        )
        .unwrap();
        let t = DecisionTree::fit(&d);
        let preds = t.predict_batch(&d);
        let correct = preds
            .iter()
            .zip(d.labels())
            .filter(|(p, t)| p == t)
            .count();
        assert_eq!(correct, n, "unpruned tree must fit training data exactly");
    }

    #[test]
    fn fit_is_deterministic() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![(i * 37 % 19) as f64, (i * 11 % 23) as f64])
            .collect();
        let labels = (0..60).map(|i| ((i * 7 % 3) as u8).to_string()).collect();
        let d = Dataset::from_rows(rows, labels).unwrap();
        assert_eq!(DecisionTree::fit(&d), DecisionTree::fit(&d));
    }
}
