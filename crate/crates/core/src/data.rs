//! Datasets, deterministic partitioning and per-feature sort orders.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

use crate::error::{Error, Result};

/// Dense `N x D` feature matrix (row-major) with class labels in `0..K`.
///
/// Immutable once constructed; every constructor validates the invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    num_features: usize,
    num_classes: usize,
    feature_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from a row-major matrix.
    ///
    /// `K` is `1 + max(label)` unless `num_classes` declares it; a declared
    /// value smaller than a present label is an error. `K < 2` is rejected.
    pub fn new(
        features: Vec<f64>,
        num_features: usize,
        labels: Vec<usize>,
        num_classes: Option<usize>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::NoSamples);
        }
        if num_features == 0 {
            return Err(Error::NoFeatures);
        }
        let expected = labels.len() * num_features;
        if features.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: features.len(),
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature {
                row: pos / num_features,
                column: pos % num_features,
            });
        }
        let max_label = labels.iter().copied().max().unwrap_or(0);
        let num_classes = match num_classes {
            Some(k) => {
                if let Some(row) = labels.iter().position(|&y| y >= k) {
                    return Err(Error::LabelOutOfRange {
                        row,
                        label: labels[row],
                        num_classes: k,
                    });
                }
                k
            }
            None => max_label + 1,
        };
        if num_classes < 2 {
            return Err(Error::TooFewClasses {
                algorithm: "a classification dataset",
                found: num_classes,
                required: 2,
            });
        }
        let feature_names = (0..num_features).map(|j| format!("f{j}")).collect();
        Ok(Self {
            features,
            labels,
            num_features,
            num_classes,
            feature_names,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.num_features {
            return Err(Error::ShapeMismatch {
                expected: self.num_features,
                found: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn num_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Row-major feature matrix.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.num_features..(i + 1) * self.num_features]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.num_features)
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.features[row * self.num_features + feature]
    }

    /// Rows at `indices`, in that order. `K` and feature names carry over.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::NoSamples);
        }
        let mut features = Vec::with_capacity(indices.len() * self.num_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Ok(Self {
            features,
            labels,
            num_features: self.num_features,
            num_classes: self.num_classes,
            feature_names: self.feature_names.clone(),
        })
    }
}

/// Replaces each listed nominal column by one binary indicator column per code.
///
/// `columns` pairs a column index with its cardinality `c`; codes must be
/// integers in `0..c`. Expanded columns take the position of the original
/// column and are named `name=code`.
pub fn one_hot_expand(ds: &Dataset, columns: &[(usize, usize)]) -> Result<Dataset> {
    if columns.is_empty() {
        return Ok(ds.clone());
    }
    let d = ds.num_features;
    let mut cardinality = vec![0usize; d];
    for &(column, card) in columns {
        if column >= d {
            return Err(Error::ColumnOutOfRange {
                column,
                num_features: d,
            });
        }
        if card == 0 {
            return Err(Error::InvalidParameter {
                name: "cardinality",
                reason: format!("column {column} has cardinality 0"),
            });
        }
        if cardinality[column] != 0 {
            return Err(Error::DuplicateColumn { column });
        }
        cardinality[column] = card;
    }
    let new_d: usize = cardinality.iter().map(|&c| c.max(1)).sum();
    let mut features = Vec::with_capacity(ds.num_samples() * new_d);
    for (row, x) in ds.rows().enumerate() {
        for (column, (&v, &card)) in x.iter().zip(&cardinality).enumerate() {
            if card == 0 {
                features.push(v);
                continue;
            }
            if v < 0.0 || libm::trunc(v) != v || v >= card as f64 {
                return Err(Error::CodeOutOfRange {
                    row,
                    column,
                    value: v,
                    cardinality: card,
                });
            }
            let code = v as usize;
            features.extend((0..card).map(|c| if c == code { 1.0 } else { 0.0 }));
        }
    }
    let mut names = Vec::with_capacity(new_d);
    for (name, &card) in ds.feature_names.iter().zip(&cardinality) {
        if card == 0 {
            names.push(name.clone());
        } else {
            names.extend((0..card).map(|c| format!("{name}={c}")));
        }
    }
    Ok(Dataset {
        features,
        labels: ds.labels.clone(),
        num_features: new_d,
        num_classes: ds.num_classes,
        feature_names: names,
    })
}

/// Uniform integer in `0..=bound` by rejection on 64-bit draws.
fn uniform_inclusive(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    if bound == u64::MAX {
        return rng.next_u64();
    }
    let range = bound + 1;
    // Largest multiple of `range` representable; draws at or above it are rejected.
    let zone = u64::MAX - (u64::MAX - range + 1) % range;
    loop {
        let v = rng.next_u64();
        if v <= zone {
            return v % range;
        }
    }
}

/// Random halving of `0..n` into sorted index lists of sizes `ceil(n/2)` and
/// `floor(n/2)`.
///
/// The generator is ChaCha8 keyed with the 32-byte seed whose first eight
/// bytes are `seed` in little-endian order and the rest zero. A Fisher-Yates
/// shuffle runs from the last position down, drawing `j` uniformly in `0..=i`
/// by rejection sampling; the first `ceil(n/2)` shuffled indices form the first
/// half. Both halves are returned in ascending order. This procedure is part
/// of the split-manifest contract and must not change.
pub fn split_indices(n: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::TooFewSamples {
            found: n,
            required: 2,
        });
    }
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = uniform_inclusive(&mut rng, i as u64) as usize;
        perm.swap(i, j);
    }
    let mut second = perm.split_off(n.div_ceil(2));
    let mut first = perm;
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

/// Seeded random halving of a dataset; see [`split_indices`].
pub fn split_halves(ds: &Dataset, seed: u64) -> Result<(Dataset, Dataset)> {
    let (a, b) = split_indices(ds.num_samples(), seed)?;
    Ok((ds.subset(&a)?, ds.subset(&b)?))
}

/// Per-feature ascending sort orders used by the split search.
///
/// Also carries the column-major copy of the feature values so tree fitting
/// needs nothing else from the dataset.
#[derive(Debug, Clone)]
pub struct FeatureOrder {
    num_samples: usize,
    num_features: usize,
    /// `D x N`, feature-major.
    columns: Vec<f64>,
    /// `D x N`, feature-major; 0-based sample ids.
    permutations: Vec<u32>,
    constant: Vec<bool>,
}

impl FeatureOrder {
    pub fn num_samples(&self) -> usize {
        self.num_samples
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    /// Sample ids of `feature` in non-decreasing value order (ties by id).
    pub fn permutation(&self, feature: usize) -> &[u32] {
        &self.permutations[feature * self.num_samples..(feature + 1) * self.num_samples]
    }

    /// Values of `feature` indexed by sample id.
    pub fn column(&self, feature: usize) -> &[f64] {
        &self.columns[feature * self.num_samples..(feature + 1) * self.num_samples]
    }

    pub fn is_constant(&self, feature: usize) -> bool {
        self.constant[feature]
    }
}

/// Stable per-feature sort of sample ids by value.
pub fn presort(ds: &Dataset) -> FeatureOrder {
    let n = ds.num_samples();
    let d = ds.num_features();
    assert!(
        n <= u32::MAX as usize,
        "too many samples for 32-bit sample ids"
    );
    let mut columns = vec![0.0; n * d];
    for (i, x) in ds.rows().enumerate() {
        for (j, &v) in x.iter().enumerate() {
            columns[j * n + i] = v;
        }
    }
    let mut permutations = Vec::with_capacity(n * d);
    let mut constant = Vec::with_capacity(d);
    for j in 0..d {
        let col = &columns[j * n..(j + 1) * n];
        let mut perm: Vec<u32> = (0..n as u32).collect();
        // Values are finite, so partial_cmp is total here; sort_by is stable.
        perm.sort_by(|&a, &b| {
            col[a as usize]
                .partial_cmp(&col[b as usize])
                .unwrap_or(Ordering::Equal)
        });
        constant.push(col[perm[0] as usize] == col[perm[n - 1] as usize]);
        permutations.extend_from_slice(&perm);
    }
    FeatureOrder {
        num_samples: n,
        num_features: d,
        columns,
        permutations,
        constant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    fn toy(n: usize) -> Dataset {
        let features = (0..n).map(|i| i as f64).collect();
        let labels = (0..n).map(|i| i % 3).collect();
        Dataset::new(features, 1, labels, None).unwrap()
    }

    #[test]
    fn infers_num_classes() {
        let ds = Dataset::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 2, vec![0, 1, 2], None).unwrap();
        assert_eq!(
            (ds.num_samples(), ds.num_features(), ds.num_classes()),
            (3, 2, 3)
        );
    }

    #[test]
    fn declared_num_classes_can_exceed_observed() {
        let ds = Dataset::new(vec![0.0, 1.0], 1, vec![0, 1], Some(5)).unwrap();
        assert_eq!(ds.num_classes(), 5);
    }

    #[test]
    fn rejects_label_beyond_declared_k() {
        let err = Dataset::new(vec![0.0; 3], 1, vec![0, 7, 1], Some(3)).unwrap_err();
        assert_eq!(
            err,
            Error::LabelOutOfRange {
                row: 1,
                label: 7,
                num_classes: 3
            }
        );
    }

    #[test]
    fn rejects_non_finite_and_single_class() {
        let err = Dataset::new(vec![0.0, f64::NAN], 1, vec![0, 1], None).unwrap_err();
        assert_eq!(err, Error::NonFiniteFeature { row: 1, column: 0 });
        assert!(matches!(
            Dataset::new(vec![0.0, 1.0], 1, vec![0, 0], None),
            Err(Error::TooFewClasses { .. })
        ));
    }

    #[test]
    fn one_hot_poker_dimensions() {
        // Five (suit, rank) pairs; suits at even positions with 4 codes.
        let row: Vec<f64> = vec![0.0, 10.0, 1.0, 11.0, 2.0, 12.0, 3.0, 13.0, 0.0, 1.0];
        let ds = Dataset::new(row.repeat(2), 10, vec![0, 1], None).unwrap();
        let cols: Vec<(usize, usize)> = (0..5).map(|s| (2 * s, 4)).collect();
        let out = one_hot_expand(&ds, &cols).unwrap();
        assert_eq!(out.num_features(), 25);
        assert_eq!(out.labels(), ds.labels());
        assert_eq!(&out.row(0)[..5], &[1.0, 0.0, 0.0, 0.0, 10.0]);
        assert_eq!(out.feature_names()[1], "f0=1");
    }

    #[test]
    fn one_hot_empty_set_is_identity() {
        let ds = toy(6);
        assert_eq!(one_hot_expand(&ds, &[]).unwrap(), ds);
    }

    #[test]
    fn one_hot_rejects_bad_codes_and_columns() {
        let ds = Dataset::new(vec![4.0, 1.0], 1, vec![0, 1], None).unwrap();
        assert!(matches!(
            one_hot_expand(&ds, &[(0, 4)]),
            Err(Error::CodeOutOfRange { row: 0, .. })
        ));
        let ds = Dataset::new(vec![0.5, 1.0], 1, vec![0, 1], None).unwrap();
        assert!(matches!(
            one_hot_expand(&ds, &[(0, 4)]),
            Err(Error::CodeOutOfRange { .. })
        ));
        assert!(matches!(
            one_hot_expand(&ds, &[(3, 4)]),
            Err(Error::ColumnOutOfRange { .. })
        ));
    }

    #[test]
    fn split_sizes_and_partition() {
        let (a, b) = split_halves(&toy(10), 42).unwrap();
        assert_eq!((a.num_samples(), b.num_samples()), (5, 5));
        let mut all: Vec<u64> = a.rows().chain(b.rows()).map(|r| r[0] as u64).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic_and_seed_dependent() {
        assert_eq!(
            split_indices(1000, 7).unwrap(),
            split_indices(1000, 7).unwrap()
        );
        assert_ne!(
            split_indices(1000, 7).unwrap(),
            split_indices(1000, 8).unwrap()
        );
    }

    #[test]
    fn split_covertype_size() {
        let (a, b) = split_indices(581_012, 1).unwrap();
        assert_eq!((a.len(), b.len()), (290_506, 290_506));
    }

    #[test]
    fn split_needs_two_rows() {
        assert_eq!(
            split_indices(1, 0).unwrap_err(),
            Error::TooFewSamples {
                found: 1,
                required: 2
            }
        );
    }

    #[test]
    fn presort_small_column() {
        let ds = Dataset::new(vec![3.0, 1.0, 2.0], 1, vec![0, 1, 0], None).unwrap();
        let order = presort(&ds);
        let one_based: Vec<u32> = order.permutation(0).iter().map(|&i| i + 1).collect();
        assert_eq!(one_based, [2, 3, 1]);
        assert!(!order.is_constant(0));
    }

    #[test]
    fn presort_constant_column_keeps_identity() {
        let ds = Dataset::new(vec![5.0; 4], 1, vec![0, 1, 0, 1], None).unwrap();
        let order = presort(&ds);
        assert!(order.is_constant(0));
        assert_eq!(order.permutation(0), &[0, 1, 2, 3]);
    }

    #[test]
    fn split_indices_cover_small_n() {
        for n in 2..40 {
            let (a, b) = split_indices(n, n as u64).unwrap();
            assert_eq!(a.len(), n.div_ceil(2));
            assert_eq!(b.len(), n / 2);
            let set: BTreeSet<usize> = a.iter().chain(&b).copied().collect();
            assert_eq!(set.len(), n);
            assert_eq!(*set.iter().next_back().unwrap(), n - 1);
        }
    }
}
