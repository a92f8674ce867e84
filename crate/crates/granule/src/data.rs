//! In-memory dataset model.
//!
//! A [`Dataset`] is an immutable table of `n` samples with `p` numeric
//! features and one class label per sample. Labels are stored as dense
//! class ids (`0..q`), assigned in order of first appearance of the raw
//! label text; the original label strings are kept for display and export.
//! Sample ids are row positions and stay stable for the lifetime of a
//! dataset. Derived datasets (subsets, normalized copies) renumber rows,
//! so callers that need to refer back to the parent keep the id list used
//! to build the child.

use serde::Serialize;

use crate::error::{Error, Result};

pub type SampleId = usize;
pub type ClassId = usize;

/// Euclidean distance between two feature vectors of equal length.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "distance: dimension mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Borrowed view of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleView<'a> {
    pub id: SampleId,
    pub features: &'a [f64],
    pub label: ClassId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Row-major, `n * p` values, all finite.
    features: Vec<f64>,
    labels: Vec<ClassId>,
    n_features: usize,
    /// Raw label text per class id; length is the number of classes.
    label_names: Vec<String>,
    /// Column names when the source had a header row.
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    /// Build a dataset from feature rows and raw label strings. Class ids
    /// are assigned in first-appearance order of the label text.
    pub fn from_rows(rows: Vec<Vec<f64>>, raw_labels: Vec<String>) -> Result<Dataset> {
        if rows.len() != raw_labels.len() {
            return Err(Error::usage(format!(
                "{} feature rows but {} labels",
                rows.len(),
                raw_labels.len()
            )));
        }
        let mut label_names: Vec<String> = Vec::new();
        let mut labels = Vec::with_capacity(raw_labels.len());
        for raw in raw_labels {
            let id = match label_names.iter().position(|l| *l == raw) {
                Some(id) => id,
                None => {
                    label_names.push(raw);
                    label_names.len() - 1
                }
            };
            labels.push(id);
        }
        Dataset::from_parts(rows, labels, label_names)
    }

    /// Build a dataset from feature rows and pre-assigned dense class ids.
    pub fn from_parts(
        rows: Vec<Vec<f64>>,
        labels: Vec<ClassId>,
        label_names: Vec<String>,
    ) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::usage("dataset has no samples"));
        }
        if rows.len() != labels.len() {
            return Err(Error::usage(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let n_features = rows[0].len();
        if n_features == 0 {
            return Err(Error::usage("dataset has no feature columns"));
        }
        if label_names.is_empty() {
            return Err(Error::usage("dataset has no classes"));
        }
        let mut features = Vec::with_capacity(rows.len() * n_features);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::usage(format!(
                    "row {} has {} features, expected {}",
                    i,
                    row.len(),
                    n_features
                )));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::usage(format!(
                        "row {i} contains a non-finite feature value"
                    )));
                }
                features.push(v);
            }
        }
        for (i, &l) in labels.iter().enumerate() {
            if l >= label_names.len() {
                return Err(Error::usage(format!(
                    "row {i} has class id {l} but only {} classes are named",
                    label_names.len()
                )));
            }
        }
        Ok(Dataset {
            features,
            labels,
            n_features,
            label_names,
            feature_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Dataset> {
        if names.len() != self.n_features {
            return Err(Error::usage(format!(
                "{} feature names for {} feature columns",
                names.len(),
                self.n_features
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn label(&self, id: SampleId) -> ClassId {
        self.labels[id]
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    pub fn features_of(&self, id: SampleId) -> &[f64] {
        let start = id * self.n_features;
        &self.features[start..start + self.n_features]
    }

    pub fn label_name(&self, class: ClassId) -> &str {
        &self.label_names[class]
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn sample(&self, id: SampleId) -> SampleView<'_> {
        SampleView {
            id,
            features: self.features_of(id),
            label: self.labels[id],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = SampleView<'_>> {
        (0..self.n_samples()).map(move |id| self.sample(id))
    }

    /// Distance between two samples by id.
    pub fn dist(&self, a: SampleId, b: SampleId) -> f64 {
        distance(self.features_of(a), self.features_of(b))
    }

    /// Per-class sample counts, indexed by class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn summarize(&self) -> DatasetSummary {
        let counts = self.class_counts();
        let max = counts.iter().copied().max().unwrap_or(0);
        let min = counts.iter().copied().filter(|&c| c > 0).min().unwrap_or(0);
        let imbalance_ratio = if min == 0 { f64::NAN } else { max as f64 / min as f64 };
        DatasetSummary {
            n_samples: self.n_samples(),
            n_features: self.n_features,
            n_classes: self.n_classes(),
            class_labels: self.label_names.clone(),
            class_counts: counts,
            imbalance_ratio,
        }
    }

    /// Min-max normalize every feature column to `[0, 1]`. Constant columns
    /// map to 0.0. Labels, names, and sample ids are unchanged.
    pub fn normalize_min_max(&self) -> Dataset {
        let n = self.n_samples();
        let p = self.n_features;
        let mut mins = vec![f64::INFINITY; p];
        let mut maxs = vec![f64::NEG_INFINITY; p];
        for row in 0..n {
            let feats = self.features_of(row);
            for (j, &v) in feats.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        let mut features = Vec::with_capacity(n * p);
        for row in 0..n {
            let feats = self.features_of(row);
            for (j, &v) in feats.iter().enumerate() {
                let range = maxs[j] - mins[j];
                features.push(if range > 0.0 { (v - mins[j]) / range } else { 0.0 });
            }
        }
        Dataset {
            features,
            labels: self.labels.clone(),
            n_features: p,
            label_names: self.label_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Dataset made of the given rows, in the given order. The class space
    /// (ids and names) is preserved even if some class has no row in the
    /// subset. New sample ids are positions in `ids`; the caller keeps `ids`
    /// to map back to this dataset.
    pub fn subset(&self, ids: &[SampleId]) -> Result<Dataset> {
        if ids.is_empty() {
            return Err(Error::usage("subset has no samples"));
        }
        let mut features = Vec::with_capacity(ids.len() * self.n_features);
        let mut labels = Vec::with_capacity(ids.len());
        for &id in ids {
            if id >= self.n_samples() {
                return Err(Error::internal(format!(
                    "subset id {id} out of range for {} samples",
                    self.n_samples()
                )));
            }
            features.extend_from_slice(self.features_of(id));
            labels.push(self.labels[id]);
        }
        Ok(Dataset {
            features,
            labels,
            n_features: self.n_features,
            label_names: self.label_names.clone(),
            feature_names: self.feature_names.clone(),
        })
    }
}

/// Shape and class-balance description of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub class_labels: Vec<String>,
    pub class_counts: Vec<usize>,
    /// Largest class count over smallest non-empty class count.
    pub imbalance_ratio: f64,
}
