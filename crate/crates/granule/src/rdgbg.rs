//! Restricted-diffusion granular-ball generation (RD-GBG).
//!
//! The algorithm covers a labeled dataset with pure granular balls. Each
//! iteration draws one candidate center per remaining class group, vets the
//! candidate against its nearest undivided neighbors (rejecting class-noise
//! points on the way), and grows a ball whose radius is capped so that it
//! neither swallows a point of another class nor overlaps an existing ball.
//! Samples inside the chosen radius are absorbed; the loop ends when no
//! potential centers remain. Undivided leftovers become radius-0 balls so
//! the output partitions the input exactly.
//!
//! Invariants of the output, checked by tests:
//! * every ball is pure (all members share the ball's label);
//! * members lie within the ball radius;
//! * regular balls do not overlap: `dist(c_a, c_b) >= r_a + r_b`;
//! * member ids and noise ids partition the sample ids exactly;
//! * identical `(dataset, rho, seed)` reproduce the identical result.

use serde::Serialize;

use crate::data::{ClassId, Dataset, SampleId};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Minimum allowed neighbor-vetting count.
pub const MIN_RHO: usize = 2;

/// Default neighbor-vetting count.
pub const DEFAULT_RHO: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BallKind {
    /// Built by the main loop with a positive radius.
    Regular,
    /// Radius-0 ball for a sample that was flagged low-density and never
    /// absorbed by another ball.
    OrphanLowDensity,
    /// Radius-0 ball for a sample that was still undivided at termination
    /// without ever being flagged. Not produced by the normal control flow;
    /// kept as a defensive case so finalization is total.
    OrphanUndivided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GranularBall {
    /// Creation order, dense from 0.
    pub ball_id: usize,
    pub center_id: SampleId,
    pub center: Vec<f64>,
    pub radius: f64,
    pub label: ClassId,
    /// Sorted ascending; always contains `center_id`.
    pub member_ids: Vec<SampleId>,
    pub kind: BallKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GranulationResult {
    pub balls: Vec<GranularBall>,
    /// Samples removed as class noise, sorted ascending.
    pub noise_ids: Vec<SampleId>,
    /// Samples that were flagged low-density at any point, sorted ascending.
    /// A flagged sample may still appear as a member of some ball.
    pub low_density_ids: Vec<SampleId>,
    pub iterations: usize,
    pub rho: usize,
    pub seed: u64,
}

impl GranulationResult {
    /// Number of balls with a positive radius.
    pub fn n_regular(&self) -> usize {
        self.balls.iter().filter(|b| b.kind == BallKind::Regular).count()
    }
}

/// Outcome of vetting one candidate center. `h` is the number of
/// heterogeneous samples among the candidate's effective-rho nearest
/// undivided neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterVerdict {
    /// Nearest undivided neighbor shares the candidate's label (h = 0),
    /// or the candidate is the only undivided sample.
    Accepted { h: usize },
    /// Nearest neighbor is the lone heterogeneous point in the
    /// neighborhood; it is removed as class noise and the candidate stands.
    AcceptedWithNoiseRemoval { removed_id: SampleId, h: usize },
    /// Every vetted neighbor disagrees with the candidate: the candidate
    /// itself is class noise.
    CenterIsNoise { h: usize },
    /// Mixed neighborhood; the candidate sits in a low-density border zone
    /// and is excluded from future candidacy (but may still be absorbed).
    LowDensity { h: usize },
}

/// One undivided neighbor of a candidate, with its distance to the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: SampleId,
    pub dist: f64,
}

/// Which radius rule produced the final radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusRule {
    /// The consistent radius fit inside the conflict-free zone.
    Consistent,
    /// The consistent radius conflicted with an existing ball; the radius
    /// was clipped to the farthest neighbor inside the conflict-free zone.
    Clipped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusChoice {
    /// Consistent radius: distance to the farthest neighbor of the maximal
    /// same-label prefix.
    pub cr: f64,
    /// Distance to the nearest existing ball surface; infinite when no
    /// balls exist yet.
    pub r_conf: f64,
    /// Fallback radius, present only when the clipped rule applied.
    pub r_max: Option<f64>,
    pub chosen: f64,
    pub rule: RadiusRule,
}

/// A class group of potential centers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CenterGroup {
    pub label: ClassId,
    /// Ascending sample ids.
    pub member_ids: Vec<SampleId>,
}

/// Group the potential centers (undivided and not flagged low-density) by
/// class. Groups are ordered by descending size, ties by ascending class id.
pub fn group_potential_centers(
    dataset: &Dataset,
    undivided_ids: &[SampleId],
    low_density: &[bool],
) -> Vec<CenterGroup> {
    let mut by_class: Vec<Vec<SampleId>> = vec![Vec::new(); dataset.n_classes()];
    for &id in undivided_ids {
        if !low_density[id] {
            by_class[dataset.label(id)].push(id);
        }
    }
    let mut groups: Vec<CenterGroup> = by_class
        .into_iter()
        .enumerate()
        .filter(|(_, ids)| !ids.is_empty())
        .map(|(label, member_ids)| CenterGroup { label, member_ids })
        .collect();
    groups.sort_by(|a, b| {
        b.member_ids
            .len()
            .cmp(&a.member_ids.len())
            .then(a.label.cmp(&b.label))
    });
    groups
}

/// Draw one uniform candidate center per group, in group order.
pub fn draw_candidate_centers(
    groups: &[CenterGroup],
    rng: &mut RngStream,
) -> Vec<(SampleId, ClassId)> {
    groups
        .iter()
        .map(|g| (g.member_ids[rng.pick(g.member_ids.len())], g.label))
        .collect()
}

/// Vet a candidate center against its nearest undivided neighbors.
///
/// Returns the verdict and the candidate's undivided neighbors sorted by
/// `(distance, id)`. The effective vetting count is `min(rho, |U| - 1)`
/// where `U` is the undivided set including the candidate.
pub fn detect_center(
    dataset: &Dataset,
    center_id: SampleId,
    center_label: ClassId,
    undivided_ids: &[SampleId],
    rho: usize,
) -> (CenterVerdict, Vec<Neighbor>) {
    let center = dataset.features_of(center_id);
    let mut neighbors: Vec<Neighbor> = undivided_ids
        .iter()
        .filter(|&&id| id != center_id)
        .map(|&id| Neighbor {
            id,
            dist: crate::data::distance(center, dataset.features_of(id)),
        })
        .collect();
    neighbors.sort_unstable_by(|a, b| a.dist.total_cmp(&b.dist).then(a.id.cmp(&b.id)));

    if neighbors.is_empty() {
        return (CenterVerdict::Accepted { h: 0 }, neighbors);
    }
    if dataset.label(neighbors[0].id) == center_label {
        return (CenterVerdict::Accepted { h: 0 }, neighbors);
    }
    let rho_eff = rho.min(neighbors.len());
    let h = neighbors[..rho_eff]
        .iter()
        .filter(|n| dataset.label(n.id) != center_label)
        .count();
    // The all-heterogeneous check comes before the lone-outlier check: with
    // rho_eff == 1 both conditions hold and the candidate, not its neighbor,
    // is the noise point.
    let verdict = if h == rho_eff {
        CenterVerdict::CenterIsNoise { h }
    } else if h == 1 {
        CenterVerdict::AcceptedWithNoiseRemoval {
            removed_id: neighbors[0].id,
            h,
        }
    } else {
        CenterVerdict::LowDensity { h }
    };
    (verdict, neighbors)
}

/// Consistent radius: distance to the farthest neighbor of the maximal
/// same-label prefix of the `(distance, id)`-sorted neighbor list.
///
/// When the first heterogeneous neighbor is tied in distance with the end of
/// that prefix, the prefix is shrunk past the tie so the returned radius is
/// strictly below the nearest heterogeneous distance; a ball of this radius
/// can never capture a heterogeneous sample.
pub fn consistent_radius(
    dataset: &Dataset,
    center_label: ClassId,
    neighbors: &[Neighbor],
) -> f64 {
    let first_het = neighbors
        .iter()
        .position(|n| dataset.label(n.id) != center_label);
    let mut omega = first_het.unwrap_or(neighbors.len());
    if let Some(fh) = first_het {
        let het_dist = neighbors[fh].dist;
        while omega > 0 && neighbors[omega - 1].dist == het_dist {
            omega -= 1;
        }
    }
    if omega == 0 {
        0.0
    } else {
        neighbors[omega - 1].dist
    }
}

/// Distance from `center` to the nearest surface of any existing ball:
/// `min(dist(center, ball.center) - ball.radius)`, infinite when no balls
/// exist. A non-positive result means the center lies inside an existing
/// ball, which the absorption step should have made impossible.
pub fn conflict_radius(center: &[f64], balls: &[GranularBall]) -> Result<f64> {
    let mut r_conf = f64::INFINITY;
    for ball in balls {
        let margin = crate::data::distance(center, &ball.center) - ball.radius;
        if margin <= 0.0 {
            return Err(Error::internal(format!(
                "candidate center lies inside ball {} (margin {margin})",
                ball.ball_id
            )));
        }
        r_conf = r_conf.min(margin);
    }
    Ok(r_conf)
}

/// Pick the final radius: the consistent radius when it fits inside the
/// conflict-free zone, otherwise the farthest neighbor distance that does
/// (0 when no neighbor fits).
pub fn choose_radius(cr: f64, r_conf: f64, neighbors: &[Neighbor]) -> RadiusChoice {
    if cr <= r_conf {
        RadiusChoice {
            cr,
            r_conf,
            r_max: None,
            chosen: cr,
            rule: RadiusRule::Consistent,
        }
    } else {
        let r_max = neighbors
            .iter()
            .map(|n| n.dist)
            .filter(|&d| d <= r_conf)
            .fold(0.0f64, f64::max);
        RadiusChoice {
            cr,
            r_conf,
            r_max: Some(r_max),
            chosen: r_max,
            rule: RadiusRule::Clipped,
        }
    }
}

/// Member set of a new ball: the center plus every neighbor within
/// `radius`. Errors if any collected member has a different label, since the
/// radius rules are supposed to make that impossible.
pub fn collect_members(
    dataset: &Dataset,
    center_id: SampleId,
    center_label: ClassId,
    radius: f64,
    neighbors: &[Neighbor],
) -> Result<Vec<SampleId>> {
    let mut members = vec![center_id];
    for n in neighbors.iter().take_while(|n| n.dist <= radius) {
        members.push(n.id);
    }
    for &m in &members {
        if dataset.label(m) != center_label {
            return Err(Error::internal(format!(
                "ball at center {center_id} (class {center_label}) absorbed sample {m} of class {}",
                dataset.label(m)
            )));
        }
    }
    members.sort_unstable();
    Ok(members)
}

/// Run the full granulation. `rho` must be at least [`MIN_RHO`]. The stream
/// should be freshly constructed or derived; its seed is recorded in the
/// result so the run can be replayed.
pub fn run_rdgbg(dataset: &Dataset, rho: usize, mut rng: RngStream) -> Result<GranulationResult> {
    if rho < MIN_RHO {
        return Err(Error::usage(format!(
            "rho must be at least {MIN_RHO}, got {rho}"
        )));
    }
    let n = dataset.n_samples();
    let seed = rng.seed();
    let mut undivided = vec![true; n];
    let mut low_density = vec![false; n];
    let mut ever_flagged = vec![false; n];
    let mut balls: Vec<GranularBall> = Vec::new();
    let mut noise_ids: Vec<SampleId> = Vec::new();
    let mut iterations = 0usize;

    loop {
        let undivided_ids: Vec<SampleId> = (0..n).filter(|&i| undivided[i]).collect();
        let groups = group_potential_centers(dataset, &undivided_ids, &low_density);
        if groups.is_empty() {
            break;
        }
        iterations += 1;
        let candidates = draw_candidate_centers(&groups, &mut rng);
        for (center_id, center_label) in candidates {
            // An earlier candidate in this iteration may have absorbed or
            // removed this one.
            if !undivided[center_id] {
                continue;
            }
            let current: Vec<SampleId> = (0..n).filter(|&i| undivided[i]).collect();
            let (verdict, mut neighbors) =
                detect_center(dataset, center_id, center_label, &current, rho);
            match verdict {
                CenterVerdict::CenterIsNoise { .. } => {
                    undivided[center_id] = false;
                    noise_ids.push(center_id);
                    continue;
                }
                CenterVerdict::LowDensity { .. } => {
                    low_density[center_id] = true;
                    ever_flagged[center_id] = true;
                    continue;
                }
                CenterVerdict::AcceptedWithNoiseRemoval { removed_id, .. } => {
                    undivided[removed_id] = false;
                    noise_ids.push(removed_id);
                    neighbors.retain(|nb| nb.id != removed_id);
                }
                CenterVerdict::Accepted { .. } => {}
            }
            let cr = consistent_radius(dataset, center_label, &neighbors);
            let r_conf = conflict_radius(dataset.features_of(center_id), &balls)?;
            let choice = choose_radius(cr, r_conf, &neighbors);
            if choice.chosen > 0.0 {
                let members =
                    collect_members(dataset, center_id, center_label, choice.chosen, &neighbors)?;
                for &m in &members {
                    undivided[m] = false;
                }
                balls.push(GranularBall {
                    ball_id: balls.len(),
                    center_id,
                    center: dataset.features_of(center_id).to_vec(),
                    radius: choice.chosen,
                    label: center_label,
                    member_ids: members,
                    kind: BallKind::Regular,
                });
            } else {
                // No absorbable neighborhood; exclude from future candidacy.
                low_density[center_id] = true;
                ever_flagged[center_id] = true;
            }
        }
    }

    // Leftover undivided samples become their own radius-0 balls.
    for id in 0..n {
        if undivided[id] {
            balls.push(GranularBall {
                ball_id: balls.len(),
                center_id: id,
                center: dataset.features_of(id).to_vec(),
                radius: 0.0,
                label: dataset.label(id),
                member_ids: vec![id],
                kind: if ever_flagged[id] {
                    BallKind::OrphanLowDensity
                } else {
                    BallKind::OrphanUndivided
                },
            });
        }
    }

    noise_ids.sort_unstable();
    let low_density_ids: Vec<SampleId> = (0..n).filter(|&i| ever_flagged[i]).collect();
    Ok(GranulationResult {
        balls,
        noise_ids,
        low_density_ids,
        iterations,
        rho,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// 1-D dataset helper: (coordinate, label char) pairs in id order.
    fn line(points: &[(f64, char)]) -> Dataset {
        Dataset::from_rows(
            points.iter().map(|&(x, _)| vec![x]).collect(),
            points.iter().map(|&(_, c)| c.to_string()).collect(),
        )
        .unwrap()
    }

    fn all_ids(d: &Dataset) -> Vec<SampleId> {
        (0..d.n_samples()).collect()
    }

    #[test]
    fn groups_ordered_by_size_then_class() {
        // class a: 2 samples, b: 3, c: 2 -> order b, a, c.
        let d = line(&[
            (0.0, 'a'),
            (1.0, 'a'),
            (2.0, 'b'),
            (3.0, 'b'),
            (4.0, 'b'),
            (5.0, 'c'),
            (6.0, 'c'),
        ]);
        let groups = group_potential_centers(&d, &all_ids(&d), &[false; 7]);
        let labels: Vec<ClassId> = groups.iter().map(|g| g.label).collect();
        assert_eq!(labels, vec![1, 0, 2]);
        assert_eq!(groups[0].member_ids, vec![2, 3, 4]);

        // Flagging one b drops the tie to a two-way between a and b.
        let mut flags = vec![false; 7];
        flags[2] = true;
        let groups = group_potential_centers(&d, &all_ids(&d), &flags);
        let labels: Vec<ClassId> = groups.iter().map(|g| g.label).collect();
        assert_eq!(labels, vec![0, 1, 2], "two-way size ties break by class id");
    }

    #[test]
    fn draw_takes_one_member_per_group_uniformly() {
        let groups = vec![
            CenterGroup {
                label: 0,
                member_ids: vec![10, 11, 12, 13],
            },
            CenterGroup {
                label: 1,
                member_ids: vec![20],
            },
        ];
        let mut counts = [0usize; 4];
        for seed in 0..2000 {
            let mut rng = RngStream::new(seed);
            let picks = draw_candidate_centers(&groups, &mut rng);
            assert_eq!(picks.len(), 2);
            assert!(groups[0].member_ids.contains(&picks[0].0));
            assert_eq!(picks[1], (20, 1));
            counts[picks[0].0 - 10] += 1;
        }
        for &c in &counts {
            assert!(c > 350, "uniform draw looks skewed: {counts:?}");
        }
    }

    #[test]
    fn detect_accepts_when_nearest_agrees() {
        let d = line(&[(0.0, 'a'), (1.0, 'a'), (5.0, 'b')]);
        let (verdict, neighbors) = detect_center(&d, 0, 0, &all_ids(&d), 5);
        assert_eq!(verdict, CenterVerdict::Accepted { h: 0 });
        assert_eq!(neighbors[0].id, 1);
        assert_eq!(neighbors[1].id, 2);
    }

    #[test]
    fn detect_marks_surrounded_center_as_noise() {
        // Candidate 'a' at 0 surrounded by five 'b'; a far 'a' keeps
        // rho_eff at 5.
        let d = line(&[
            (0.0, 'a'),
            (1.0, 'b'),
            (2.0, 'b'),
            (3.0, 'b'),
            (4.0, 'b'),
            (5.0, 'b'),
            (100.0, 'a'),
        ]);
        let (verdict, _) = detect_center(&d, 0, 0, &all_ids(&d), 5);
        assert_eq!(verdict, CenterVerdict::CenterIsNoise { h: 5 });
    }

    #[test]
    fn detect_removes_lone_heterogeneous_nearest() {
        let d = line(&[(0.0, 'a'), (1.0, 'b'), (2.0, 'a'), (3.0, 'a'), (4.0, 'a')]);
        let (verdict, _) = detect_center(&d, 0, 0, &all_ids(&d), 4);
        assert_eq!(
            verdict,
            CenterVerdict::AcceptedWithNoiseRemoval { removed_id: 1, h: 1 }
        );
    }

    #[test]
    fn detect_flags_mixed_neighborhood_as_low_density() {
        let d = line(&[
            (0.0, 'a'),
            (1.0, 'b'),
            (2.0, 'b'),
            (3.0, 'a'),
            (4.0, 'a'),
            (5.0, 'a'),
        ]);
        let (verdict, _) = detect_center(&d, 0, 0, &all_ids(&d), 5);
        assert_eq!(verdict, CenterVerdict::LowDensity { h: 2 });
    }

    #[test]
    fn detect_clamps_rho_to_available_neighbors() {
        // Only two neighbors; rho 5 degrades to rho_eff 2.
        let d = line(&[(0.0, 'a'), (1.0, 'b'), (2.0, 'b')]);
        let (verdict, _) = detect_center(&d, 0, 0, &all_ids(&d), 5);
        assert_eq!(verdict, CenterVerdict::CenterIsNoise { h: 2 });

        let d = line(&[(0.0, 'a'), (1.0, 'b'), (2.0, 'a')]);
        let (verdict, _) = detect_center(&d, 0, 0, &all_ids(&d), 5);
        assert_eq!(
            verdict,
            CenterVerdict::AcceptedWithNoiseRemoval { removed_id: 1, h: 1 }
        );
    }

    #[test]
    fn detect_lone_sample_accepted_with_no_neighbors() {
        let d = line(&[(0.0, 'a'), (1.0, 'b')]);
        let (verdict, neighbors) = detect_center(&d, 0, 0, &[0], 5);
        assert_eq!(verdict, CenterVerdict::Accepted { h: 0 });
        assert!(neighbors.is_empty());
    }

    #[test]
    fn detect_two_sample_disagreement_blames_the_candidate() {
        // rho_eff = 1 and the lone neighbor disagrees: both the
        // all-heterogeneous and the lone-outlier condition hold, and the
        // candidate must be the one ruled noise.
        let d = line(&[(0.0, 'a'), (1.0, 'b')]);
        let (verdict, _) = detect_center(&d, 0, 0, &all_ids(&d), 5);
        assert_eq!(verdict, CenterVerdict::CenterIsNoise { h: 1 });
    }

    #[test]
    fn detect_breaks_distance_ties_by_smaller_id() {
        let d = line(&[(0.0, 'a'), (1.0, 'b'), (-1.0, 'a')]);
        let (_, neighbors) = detect_center(&d, 0, 0, &all_ids(&d), 2);
        assert_eq!(neighbors[0].id, 1, "tie at distance 1 goes to smaller id");
        assert_eq!(neighbors[1].id, 2);
    }

    #[test]
    fn radius_covers_maximal_homogeneous_prefix() {
        // Neighbors at 1..=11 homogeneous, heterogeneous at 12: the radius
        // reaches the 11th neighbor.
        let mut pts = vec![(0.0, 'a')];
        for i in 1..=11 {
            pts.push((i as f64, 'a'));
        }
        pts.push((12.0, 'b'));
        let d = line(&pts);
        let (_, neighbors) = detect_center(&d, 0, 0, &all_ids(&d), 5);
        assert_eq!(consistent_radius(&d, 0, &neighbors), 11.0);
    }

    #[test]
    fn radius_spans_everything_when_no_heterogeneous_neighbor() {
        let d = line(&[(0.0, 'a'), (3.0, 'a'), (7.0, 'a')]);
        let (_, neighbors) = detect_center(&d, 0, 0, &all_ids(&d), 5);
        assert_eq!(consistent_radius(&d, 0, &neighbors), 7.0);
    }

    #[test]
    fn radius_backs_off_distance_tie_with_heterogeneous_point() {
        // 'a' at 1 and 'b' at 2 are both distance-tied candidates for the
        // prefix end (|2-0|=2, |1-0|=1; craft a real tie instead):
        // center 0, 'a' at -2 and 'b' at 2 tie at distance 2.
        let d = line(&[(0.0, 'a'), (1.0, 'a'), (-2.0, 'a'), (2.0, 'b')]);
        let (_, neighbors) = detect_center(&d, 0, 0, &all_ids(&d), 5);
        // Sorted: (1, d=1), (-2, d=2), (2, d=2 het). Naive prefix would end
        // at distance 2 and swallow the 'b'; the radius must stop at 1.
        assert_eq!(consistent_radius(&d, 0, &neighbors), 1.0);

        // All same-label neighbors tied with the heterogeneous one: no safe
        // radius remains.
        let d = line(&[(0.0, 'a'), (-2.0, 'a'), (2.0, 'b')]);
        let (_, neighbors) = detect_center(&d, 0, 0, &all_ids(&d), 5);
        assert_eq!(consistent_radius(&d, 0, &neighbors), 0.0);
    }

    #[test]
    fn conflict_radius_min_surface_distance() {
        let ball = |ball_id, center: Vec<f64>, radius| GranularBall {
            ball_id,
            center_id: 0,
            center,
            radius,
            label: 0,
            member_ids: vec![0],
            kind: BallKind::Regular,
        };
        assert_eq!(conflict_radius(&[0.0], &[]).unwrap(), f64::INFINITY);
        let balls = vec![ball(0, vec![10.0], 2.0), ball(1, vec![-5.0], 1.0)];
        assert_eq!(conflict_radius(&[0.0], &balls).unwrap(), 4.0);
        // Center on or inside a ball surface is an internal error.
        let err = conflict_radius(&[8.0], &balls).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn choose_radius_prefers_consistent_then_clips() {
        let neighbors = vec![
            Neighbor { id: 1, dist: 1.0 },
            Neighbor { id: 2, dist: 2.5 },
            Neighbor { id: 3, dist: 4.0 },
        ];
        let c = choose_radius(4.0, 10.0, &neighbors);
        assert_eq!(c.rule, RadiusRule::Consistent);
        assert_eq!(c.chosen, 4.0);
        assert_eq!(c.r_max, None);

        let c = choose_radius(4.0, 3.0, &neighbors);
        assert_eq!(c.rule, RadiusRule::Clipped);
        assert_eq!(c.r_max, Some(2.5));
        assert_eq!(c.chosen, 2.5);

        let c = choose_radius(4.0, 0.5, &neighbors);
        assert_eq!(c.chosen, 0.0, "no neighbor fits the conflict-free zone");
    }

    #[test]
    fn collect_members_takes_closed_ball_and_checks_purity() {
        let d = line(&[(0.0, 'a'), (1.0, 'a'), (2.0, 'a'), (3.0, 'b')]);
        let (_, neighbors) = detect_center(&d, 0, 0, &all_ids(&d), 3);
        let members = collect_members(&d, 0, 0, 2.0, &neighbors).unwrap();
        assert_eq!(members, vec![0, 1, 2], "boundary sample at distance 2 included");

        // A radius that reaches the 'b' sample must error, not build an
        // impure ball.
        let err = collect_members(&d, 0, 0, 3.0, &neighbors).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn rho_below_minimum_is_a_usage_error() {
        let d = line(&[(0.0, 'a'), (1.0, 'a')]);
        let err = run_rdgbg(&d, 1, RngStream::new(0)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn single_class_dataset_yields_one_ball_with_everything() {
        let d = line(&[(0.0, 'a'), (1.5, 'a'), (3.0, 'a'), (7.0, 'a'), (9.0, 'a')]);
        for seed in 0..10 {
            let r = run_rdgbg(&d, 2, RngStream::new(seed)).unwrap();
            assert_eq!(r.balls.len(), 1, "seed {seed}");
            let b = &r.balls[0];
            assert_eq!(b.kind, BallKind::Regular);
            assert_eq!(b.member_ids, vec![0, 1, 2, 3, 4]);
            assert!(r.noise_ids.is_empty());
        }
    }

    #[test]
    fn two_tight_clusters_become_two_balls_under_any_seed() {
        let d = line(&[
            (0.0, 'a'),
            (0.1, 'a'),
            (0.2, 'a'),
            (10.0, 'b'),
            (10.1, 'b'),
            (10.2, 'b'),
        ]);
        for seed in 0..25 {
            let r = run_rdgbg(&d, 2, RngStream::new(seed)).unwrap();
            assert_eq!(r.balls.len(), 2, "seed {seed}: {r:?}");
            let mut members: Vec<Vec<SampleId>> =
                r.balls.iter().map(|b| b.member_ids.clone()).collect();
            members.sort();
            assert_eq!(members, vec![vec![0, 1, 2], vec![3, 4, 5]]);
            assert!(r.noise_ids.is_empty());
        }
    }

    #[test]
    fn isolated_opposite_point_is_always_ruled_noise() {
        // One 'b' embedded in an 'a' run: whichever side examines it first,
        // it ends up in noise_ids and never inside a ball.
        let d = line(&[
            (0.0, 'a'),
            (1.0, 'a'),
            (2.0, 'a'),
            (2.5, 'b'),
            (3.0, 'a'),
            (4.0, 'a'),
            (5.0, 'a'),
        ]);
        for seed in 0..25 {
            let r = run_rdgbg(&d, 3, RngStream::new(seed)).unwrap();
            assert_eq!(r.noise_ids, vec![3], "seed {seed}");
            for b in &r.balls {
                assert_eq!(b.label, 0, "seed {seed}: only class-a balls expected");
            }
        }
    }

    #[test]
    fn identical_inputs_reproduce_identical_results() {
        let d = line(&[
            (0.0, 'a'),
            (0.4, 'a'),
            (1.1, 'b'),
            (1.3, 'b'),
            (2.2, 'a'),
            (2.4, 'a'),
            (3.0, 'b'),
        ]);
        let r1 = run_rdgbg(&d, 3, RngStream::new(77)).unwrap();
        let r2 = run_rdgbg(&d, 3, RngStream::new(77)).unwrap();
        assert_eq!(r1, r2);
    }

    /// Structural checks shared by the randomized tests below.
    fn assert_sound(d: &Dataset, r: &GranulationResult) {
        let n = d.n_samples();
        let mut seen = vec![0usize; n];
        for b in &r.balls {
            assert!(b.member_ids.contains(&b.center_id));
            assert!(b.member_ids.windows(2).all(|w| w[0] < w[1]));
            let eps = 1e-9 * (1.0 + b.radius);
            for &m in &b.member_ids {
                assert_eq!(d.label(m), b.label, "impure ball {}", b.ball_id);
                let dist = crate::data::distance(&b.center, d.features_of(m));
                assert!(dist <= b.radius + eps, "member outside ball {}", b.ball_id);
                seen[m] += 1;
            }
            if b.kind != BallKind::Regular {
                assert_eq!(b.radius, 0.0);
            }
        }
        for &id in &r.noise_ids {
            seen[id] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1), "not an exact partition: {seen:?}");
        for (i, a) in r.balls.iter().enumerate() {
            for b in &r.balls[..i] {
                let dist = crate::data::distance(&a.center, &b.center);
                let eps = 1e-9 * (1.0 + a.radius.max(b.radius));
                assert!(
                    dist >= a.radius + b.radius - eps,
                    "balls {} and {} overlap",
                    a.ball_id,
                    b.ball_id
                );
            }
        }
    }

    #[test]
    fn randomized_lines_always_partition_cleanly() {
        for seed in 0..40u64 {
            let mut rng = RngStream::new(seed ^ 0xDEAD);
            let n = 5 + rng.pick(30);
            let pts: Vec<(f64, char)> = (0..n)
                .map(|_| {
                    (
                        rng.pick(1000) as f64 / 10.0,
                        if rng.pick(3) == 0 { 'b' } else { 'a' },
                    )
                })
                .collect();
            let d = line(&pts);
            if d.n_classes() < 1 {
                continue;
            }
            for rho in [2, 3, 5] {
                let r = run_rdgbg(&d, rho, RngStream::new(seed)).unwrap();
                assert_sound(&d, &r);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn granulation_invariants_hold_on_random_data(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 2), 4..40),
            labels_raw in prop::collection::vec(0u8..3, 4..40),
            seed in 0u64..1000,
            rho in 2usize..6,
        ) {
            let n = rows.len().min(labels_raw.len());
            let d = Dataset::from_rows(
                rows[..n].to_vec(),
                labels_raw[..n].iter().map(|c| c.to_string()).collect(),
            ).unwrap();
            let r = run_rdgbg(&d, rho, RngStream::new(seed)).unwrap();
            assert_sound(&d, &r);
            let again = run_rdgbg(&d, rho, RngStream::new(seed)).unwrap();
            prop_assert_eq!(r, again);
        }
    }
}
