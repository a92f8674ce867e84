//! Experiment harness: synthetic dataset generators, class-noise
//! injection, and the simple-random-sampling baseline.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, SampleId};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Count of affected samples for a given ratio: `round(ratio * n)` with
/// halves away from zero.
fn rounded_count(ratio: f64, n: usize) -> usize {
    (ratio * n as f64).round() as usize
}

/// Uniform sample of `round(ratio * n)` distinct ids, sorted ascending.
pub fn srs_sample(dataset: &Dataset, ratio: f64, rng: &mut RngStream) -> Result<Vec<SampleId>> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::usage(format!(
            "sampling ratio must be in [0, 1], got {ratio}"
        )));
    }
    srs_sample_count(dataset, rounded_count(ratio, dataset.n_samples()), rng)
}

/// Uniform sample of exactly `count` distinct ids, sorted ascending.
pub fn srs_sample_count(
    dataset: &Dataset,
    count: usize,
    rng: &mut RngStream,
) -> Result<Vec<SampleId>> {
    let n = dataset.n_samples();
    if count > n {
        return Err(Error::usage(format!(
            "cannot sample {count} of {n} samples without replacement"
        )));
    }
    let mut ids: Vec<SampleId> = index::sample(rng, n, count).into_iter().collect();
    ids.sort_unstable();
    Ok(ids)
}

/// Record of a noise-injection run.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub ratio: f64,
    /// Ids whose label was flipped, sorted ascending.
    pub flipped_ids: Vec<SampleId>,
}

/// Flip the labels of `round(ratio * n)` distinct samples, each to a
/// uniformly random *different* class. Requires at least two classes and
/// `ratio < 1`.
pub fn inject_class_noise(
    dataset: &Dataset,
    ratio: f64,
    rng: &mut RngStream,
) -> Result<(Dataset, NoiseSpec)> {
    if dataset.n_classes() < 2 {
        return Err(Error::usage(
            "class-noise injection needs at least two classes",
        ));
    }
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::usage(format!(
            "noise ratio must be in [0, 1), got {ratio}"
        )));
    }
    let n = dataset.n_samples();
    let q = dataset.n_classes();
    let count = rounded_count(ratio, n);
    let mut flipped_ids: Vec<SampleId> = index::sample(rng, n, count).into_iter().collect();
    flipped_ids.sort_unstable();

    let mut labels: Vec<usize> = dataset.labels().to_vec();
    for &id in &flipped_ids {
        let old = labels[id];
        let k = rng.pick(q - 1);
        labels[id] = if k >= old { k + 1 } else { k };
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| dataset.features_of(i).to_vec()).collect();
    let noisy = Dataset::from_parts(rows, labels, dataset.label_names().to_vec())?;
    Ok((noisy, NoiseSpec { ratio, flipped_ids }))
}

/// Gaussian blobs: `q` classes of `n_per_class` points in `p` dimensions.
/// Class `j`'s blob center sits on axis `j % p` at
/// `separation * (1 + j / p)`, so centers are distinct for any `q`.
/// Rows are grouped by class in class-id order.
pub fn gen_blobs(
    n_per_class: usize,
    q: usize,
    p: usize,
    separation: f64,
    spread: f64,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if n_per_class == 0 || q == 0 || p == 0 {
        return Err(Error::usage(
            "gen_blobs needs n_per_class, classes, and features all >= 1",
        ));
    }
    if !(separation.is_finite() && spread.is_finite() && spread >= 0.0 && separation > 0.0) {
        return Err(Error::usage(
            "gen_blobs needs separation > 0 and spread >= 0",
        ));
    }
    let mut rows = Vec::with_capacity(n_per_class * q);
    let mut labels = Vec::with_capacity(n_per_class * q);
    for class in 0..q {
        let mut center = vec![0.0f64; p];
        center[class % p] = separation * (1.0 + (class / p) as f64);
        for _ in 0..n_per_class {
            let row: Vec<f64> = center
                .iter()
                .map(|&c| {
                    let z: f64 = rng.sample(StandardNormal);
                    c + spread * z
                })
                .collect();
            rows.push(row);
            labels.push(class);
        }
    }
    Dataset::from_parts(rows, labels, (0..q).map(|c| c.to_string()).collect())
}

/// Concentric 2-D rings, one class per ring. Each point sits at a uniform
/// angle and a radius drawn uniformly from `ring_radius ± thickness/2`.
/// Radii must be strictly increasing and rings must not touch.
pub fn gen_rings(
    n_per_ring: usize,
    radii: &[f64],
    thickness: f64,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if n_per_ring == 0 || radii.is_empty() {
        return Err(Error::usage(
            "gen_rings needs n_per_ring >= 1 and at least one radius",
        ));
    }
    if !(thickness.is_finite() && thickness > 0.0) {
        return Err(Error::usage("gen_rings needs thickness > 0"));
    }
    if radii.iter().any(|r| !r.is_finite()) || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::usage("ring radii must be finite and strictly increasing"));
    }
    if radii[0] - thickness / 2.0 <= 0.0 {
        return Err(Error::usage(
            "innermost ring would cross the origin; reduce thickness",
        ));
    }
    if let Some(min_gap) = radii.windows(2).map(|w| w[1] - w[0]).min_by(f64::total_cmp) {
        if thickness >= min_gap {
            return Err(Error::usage(
                "rings touch; thickness must be below the smallest radius gap",
            ));
        }
    }
    let q = radii.len();
    let mut rows = Vec::with_capacity(n_per_ring * q);
    let mut labels = Vec::with_capacity(n_per_ring * q);
    for (class, &radius) in radii.iter().enumerate() {
        for _ in 0..n_per_ring {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let rad = radius + rng.random_range(-thickness / 2.0..thickness / 2.0);
            rows.push(vec![rad * theta.cos(), rad * theta.sin()]);
            labels.push(class);
        }
    }
    Dataset::from_parts(rows, labels, (0..q).map(|c| c.to_string()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Dataset {
        Dataset::from_rows(
            (0..n).map(|i| vec![i as f64]).collect(),
            (0..n).map(|i| (i % 3).to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn srs_count_rounds_halves_up() {
        let d = grid(10);
        let mut rng = RngStream::new(0);
        assert_eq!(srs_sample(&d, 0.25, &mut rng).unwrap().len(), 3, "2.5 rounds away from zero");
        assert_eq!(srs_sample(&d, 0.24, &mut rng).unwrap().len(), 2);
        assert_eq!(srs_sample(&d, 0.0, &mut rng).unwrap().len(), 0);
        assert_eq!(srs_sample(&d, 1.0, &mut rng).unwrap().len(), 10);
        assert!(srs_sample(&d, 1.1, &mut rng).is_err());
        assert!(srs_sample(&d, -0.1, &mut rng).is_err());
    }

    #[test]
    fn srs_ids_distinct_sorted_deterministic() {
        let d = grid(50);
        let a = srs_sample(&d, 0.4, &mut RngStream::new(9)).unwrap();
        let b = srs_sample(&d, 0.4, &mut RngStream::new(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(a.iter().all(|&id| id < 50));
    }

    #[test]
    fn noise_flips_exactly_the_reported_ids_to_other_classes() {
        let d = grid(30);
        let (noisy, spec) = inject_class_noise(&d, 0.3, &mut RngStream::new(4)).unwrap();
        assert_eq!(spec.flipped_ids.len(), 9);
        for id in 0..30 {
            if spec.flipped_ids.contains(&id) {
                assert_ne!(noisy.label(id), d.label(id), "id {id} must change class");
            } else {
                assert_eq!(noisy.label(id), d.label(id), "id {id} must keep its class");
            }
            assert_eq!(noisy.features_of(id), d.features_of(id));
        }
        assert_eq!(noisy.label_names(), d.label_names());
    }

    #[test]
    fn noise_targets_every_other_class_eventually() {
        let d = grid(300);
        let (noisy, spec) = inject_class_noise(&d, 0.9, &mut RngStream::new(1)).unwrap();
        // With q = 3 and 270 flips, both alternatives of some class must
        // both occur; count replacement classes for original class 0.
        let mut hit = [false; 3];
        for &id in &spec.flipped_ids {
            if d.label(id) == 0 {
                hit[noisy.label(id)] = true;
            }
        }
        assert!(!hit[0]);
        assert!(hit[1] && hit[2], "flips should reach all other classes");
    }

    #[test]
    fn noise_rejects_degenerate_requests() {
        let single = Dataset::from_rows(vec![vec![0.0]; 4], vec!["x".into(); 4]).unwrap();
        assert!(inject_class_noise(&single, 0.2, &mut RngStream::new(0)).is_err());
        let d = grid(10);
        assert!(inject_class_noise(&d, 1.0, &mut RngStream::new(0)).is_err());
        let (same, spec) = inject_class_noise(&d, 0.0, &mut RngStream::new(0)).unwrap();
        assert_eq!(&same, &d);
        assert!(spec.flipped_ids.is_empty());
    }

    #[test]
    fn blobs_have_expected_shape_and_separability() {
        let d = gen_blobs(25, 4, 3, 10.0, 0.5, &mut RngStream::new(7)).unwrap();
        assert_eq!(d.n_samples(), 100);
        assert_eq!(d.n_features(), 3);
        assert_eq!(d.n_classes(), 4);
        assert_eq!(d.class_counts(), vec![25; 4]);
        // Wide separation, tight spread: nearest cross-class pair is far
        // apart compared to spread.
        let mut min_cross = f64::INFINITY;
        for a in d.iter() {
            for b in d.iter() {
                if a.label != b.label {
                    min_cross = min_cross.min(crate::data::distance(a.features, b.features));
                }
            }
        }
        assert!(min_cross > 3.0, "blobs overlap: min cross-class dist {min_cross}");
    }

    #[test]
    fn blobs_deterministic_per_seed() {
        let a = gen_blobs(10, 2, 2, 5.0, 1.0, &mut RngStream::new(42)).unwrap();
        let b = gen_blobs(10, 2, 2, 5.0, 1.0, &mut RngStream::new(42)).unwrap();
        assert_eq!(a, b);
        let c = gen_blobs(10, 2, 2, 5.0, 1.0, &mut RngStream::new(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rings_stay_in_their_annulus() {
        let radii = [1.0, 2.0, 3.5];
        let d = gen_rings(40, &radii, 0.4, &mut RngStream::new(11)).unwrap();
        assert_eq!(d.n_samples(), 120);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.n_classes(), 3);
        for s in d.iter() {
            let r = (s.features[0].powi(2) + s.features[1].powi(2)).sqrt();
            let target = radii[s.label];
            assert!(
                (r - target).abs() <= 0.2 + 1e-12,
                "point of ring {} at radius {r}",
                s.label
            );
        }
    }

    #[test]
    fn rings_reject_bad_geometry() {
        let mut rng = RngStream::new(0);
        assert!(gen_rings(10, &[], 0.1, &mut rng).is_err());
        assert!(gen_rings(10, &[2.0, 1.0], 0.1, &mut rng).is_err());
        assert!(gen_rings(10, &[1.0, 1.0], 0.1, &mut rng).is_err());
        assert!(gen_rings(10, &[1.0, 2.0], 1.0, &mut rng).is_err(), "touching rings");
        assert!(gen_rings(10, &[0.1], 0.3, &mut rng).is_err(), "crosses origin");
        assert!(gen_rings(0, &[1.0], 0.1, &mut rng).is_err());
    }
}
