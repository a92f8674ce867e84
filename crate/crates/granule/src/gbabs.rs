//! Granular-ball approximate borderline sampling (GBABS).
//!
//! After granulation, class borders are located without any pairwise
//! sample-distance work: along each feature axis, ball centers are sorted
//! and every adjacent pair of balls with different labels marks a borderline
//! crossing. From the left ball the member farthest along the axis is kept,
//! from the right ball the member nearest along the axis, and the union of
//! all kept samples (deduplicated) is the sampled subset. Radius-0 balls
//! take part like any other ball. Cost is `O(p * m log m)` for `m` balls
//! and `p` features.

use std::collections::BTreeSet;

use crate::data::{ClassId, Dataset, SampleId};
use crate::error::Result;
use crate::rdgbg::{self, GranularBall, GranulationResult};
use crate::rng::RngStream;

/// A ball reduced to what the axis sweeps need.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterRecord {
    pub ball_id: usize,
    pub label: ClassId,
    pub center: Vec<f64>,
}

/// Adjacent pair of differing-label balls along one axis. `left_ball` has
/// the smaller coordinate (ties ordered by ball id).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallPair {
    pub dim: usize,
    pub left_ball: usize,
    pub right_ball: usize,
}

/// A [`BallPair`] resolved to the two samples it contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BorderlinePair {
    pub dim: usize,
    pub left_ball: usize,
    pub right_ball: usize,
    pub left_sample: SampleId,
    pub right_sample: SampleId,
}

/// The sampled subset, with the pair evidence that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDataset {
    /// Selected sample ids, ascending, duplicates removed.
    pub sample_ids: Vec<SampleId>,
    /// All borderline pairs, ordered by `(dim, position along the axis)`.
    pub pairs: Vec<BorderlinePair>,
    /// Size of the dataset the sample was drawn from.
    pub source_n: usize,
    /// `sample_ids.len() / source_n`.
    pub ratio: f64,
}

/// Every ball's center, in ball-id order. Radius-0 balls are included.
pub fn center_set(result: &GranulationResult) -> Vec<CenterRecord> {
    result
        .balls
        .iter()
        .map(|b| CenterRecord {
            ball_id: b.ball_id,
            label: b.label,
            center: b.center.clone(),
        })
        .collect()
}

/// Sort centers along `dim` (ties by ball id) and return each adjacent pair
/// whose labels differ, in axis order.
pub fn borderline_pairs_along_dim(centers: &[CenterRecord], dim: usize) -> Vec<BallPair> {
    let mut order: Vec<usize> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| {
        centers[a].center[dim]
            .total_cmp(&centers[b].center[dim])
            .then(centers[a].ball_id.cmp(&centers[b].ball_id))
    });
    order
        .windows(2)
        .filter(|w| centers[w[0]].label != centers[w[1]].label)
        .map(|w| BallPair {
            dim,
            left_ball: centers[w[0]].ball_id,
            right_ball: centers[w[1]].ball_id,
        })
        .collect()
}

/// Member of `ball` with the extreme coordinate along `dim`; coordinate ties
/// go to the smaller sample id.
fn extreme_member(dataset: &Dataset, ball: &GranularBall, dim: usize, take_max: bool) -> SampleId {
    let mut best = ball.member_ids[0];
    let mut best_coord = dataset.features_of(best)[dim];
    // member_ids is ascending, so keeping the first strict winner makes ties
    // resolve to the smaller id.
    for &m in &ball.member_ids[1..] {
        let coord = dataset.features_of(m)[dim];
        let better = if take_max { coord > best_coord } else { coord < best_coord };
        if better {
            best = m;
            best_coord = coord;
        }
    }
    best
}

/// Resolve a ball pair to its two contributed samples: from the left ball
/// the member farthest along the axis, from the right ball the member
/// nearest along the axis.
pub fn extract_pair_samples(
    dataset: &Dataset,
    balls: &[GranularBall],
    pair: &BallPair,
) -> BorderlinePair {
    BorderlinePair {
        dim: pair.dim,
        left_ball: pair.left_ball,
        right_ball: pair.right_ball,
        left_sample: extreme_member(dataset, &balls[pair.left_ball], pair.dim, true),
        right_sample: extreme_member(dataset, &balls[pair.right_ball], pair.dim, false),
    }
}

/// Run the axis sweeps over an existing granulation and collect the
/// borderline sample.
pub fn sample_borderline(dataset: &Dataset, result: &GranulationResult) -> SampledDataset {
    let centers = center_set(result);
    let mut pairs = Vec::new();
    for dim in 0..dataset.n_features() {
        for bp in borderline_pairs_along_dim(&centers, dim) {
            pairs.push(extract_pair_samples(dataset, &result.balls, &bp));
        }
    }
    let ids: BTreeSet<SampleId> = pairs
        .iter()
        .flat_map(|p| [p.left_sample, p.right_sample])
        .collect();
    let sample_ids: Vec<SampleId> = ids.into_iter().collect();
    let source_n = dataset.n_samples();
    let ratio = sample_ids.len() as f64 / source_n as f64;
    SampledDataset {
        sample_ids,
        pairs,
        source_n,
        ratio,
    }
}

/// Granulate and sample in one call.
pub fn run_gbabs(
    dataset: &Dataset,
    rho: usize,
    rng: RngStream,
) -> Result<(GranulationResult, SampledDataset)> {
    let result = rdgbg::run_rdgbg(dataset, rho, rng)?;
    let sampled = sample_borderline(dataset, &result);
    Ok((result, sampled))
}
