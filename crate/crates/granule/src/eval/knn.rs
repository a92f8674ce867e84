//! k-nearest-neighbor classifier.
//!
//! Distances tie-break by smaller sample id; votes tie-break by smaller
//! class id; `k` larger than the training set degrades to all of it.

use rayon::prelude::*;

use crate::data::{distance, ClassId, Dataset};

pub const DEFAULT_K: usize = 5;

/// Predict one query point's class by majority vote of its `k` nearest
/// training samples.
pub fn predict(train: &Dataset, query: &[f64], k: usize) -> ClassId {
    assert!(k >= 1, "k must be at least 1");
    let n = train.n_samples();
    let k = k.min(n);
    let mut dists: Vec<(f64, usize)> = (0..n)
        .map(|id| (distance(query, train.features_of(id)), id))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < n {
        dists.select_nth_unstable_by(k - 1, cmp);
        dists.truncate(k);
    }
    let mut votes = vec![0usize; train.n_classes()];
    for &(_, id) in &dists {
        votes[train.label(id)] += 1;
    }
    let best = *votes.iter().max().unwrap();
    votes.iter().position(|&v| v == best).unwrap()
}

/// Predict every row of `queries` (labels there are ignored). Output order
/// matches query order.
pub fn predict_batch(train: &Dataset, queries: &Dataset, k: usize) -> Vec<ClassId> {
    (0..queries.n_samples())
        .into_par_iter()
        .map(|i| predict(train, queries.features_of(i), k))
        .collect()
}
