use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::tree::RegressionTree;

/// Boosting variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Mart,
    /// Robust logitboost.
    Logitboost,
    AbcMart,
    AbcLogitboost,
    /// Logitboost with clipped working responses and centered updates.
    ClassicLogitboost,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Mart,
        Algorithm::AbcMart,
        Algorithm::Logitboost,
        Algorithm::AbcLogitboost,
        Algorithm::ClassicLogitboost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mart => "mart",
            Algorithm::Logitboost => "logitboost",
            Algorithm::AbcMart => "abc-mart",
            Algorithm::AbcLogitboost => "abc-logitboost",
            Algorithm::ClassicLogitboost => "classic-logitboost",
        }
    }

    pub fn is_abc(self) -> bool {
        matches!(self, Algorithm::AbcMart | Algorithm::AbcLogitboost)
    }

    /// Fewest classes the algorithm accepts.
    pub fn min_classes(self) -> usize {
        if self.is_abc() {
            3
        } else {
            2
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter {
                name: "algorithm",
                reason: format!("unknown algorithm {s:?}"),
            })
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    /// Terminal nodes per tree (`J`).
    pub max_leaves: usize,
    /// Shrinkage `nu`.
    pub shrinkage: f64,
    /// Iteration budget `M`.
    pub iterations: usize,
    pub min_leaf: usize,
    /// Response bound for classic logitboost.
    pub z_max: f64,
    /// Training stops once the loss drops below this.
    pub loss_stop: f64,
}

impl TrainConfig {
    /// `J = 20`, `nu = 0.1`, `min_leaf = 1`, `z_max = 4`, `loss_stop = 1e-10`.
    pub fn new(algorithm: Algorithm, iterations: usize) -> Self {
        Self {
            algorithm,
            max_leaves: 20,
            shrinkage: 0.1,
            iterations,
            min_leaf: 1,
            z_max: 4.0,
            loss_stop: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.into(),
            })
        };
        if self.max_leaves < 2 {
            return invalid("J", "must be at least 2");
        }
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return invalid("nu", "must lie in (0, 1]");
        }
        if self.min_leaf == 0 {
            return invalid("min_leaf", "must be at least 1");
        }
        if !(2.0..=4.0).contains(&self.z_max) {
            return invalid("z_max", "must lie in [2, 4]");
        }
        if !self.loss_stop.is_finite() || self.loss_stop < 0.0 {
            return invalid("loss_stop", "must be finite and non-negative");
        }
        Ok(())
    }
}

/// Trees added in one boosting iteration.
///
/// Non-abc iterations hold one tree per class, in class order. Abc iterations
/// hold `K - 1` trees for the classes other than `base`, in ascending class
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    base: Option<usize>,
    trees: Vec<RegressionTree>,
}

impl IterationRecord {
    pub fn new(base: Option<usize>, trees: Vec<RegressionTree>) -> Self {
        Self { base, trees }
    }

    pub fn base(&self) -> Option<usize> {
        self.base
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    /// `(class, tree)` pairs.
    pub fn class_trees(&self) -> impl Iterator<Item = (usize, &RegressionTree)> + '_ {
        let base = self.base;
        (0..)
            .filter(move |&k| Some(k) != base)
            .zip(self.trees.iter())
    }
}

/// How one iteration's tree outputs move the scores of a sample.
///
/// Training and prediction both go through this function, so replaying a
/// model reproduces the trainer's scores bit for bit.
#[inline]
pub(crate) fn accumulate(
    algorithm: Algorithm,
    shrinkage: f64,
    base: Option<usize>,
    outputs: &[f64],
    scores: &mut [f64],
) {
    match (algorithm, base) {
        (Algorithm::ClassicLogitboost, _) => {
            let k = scores.len() as f64;
            let mean = outputs.iter().sum::<f64>() / k;
            let step = shrinkage * (k - 1.0) / k;
            for (f, &o) in scores.iter_mut().zip(outputs) {
                *f += step * (o - mean);
            }
        }
        (_, Some(b)) => {
            let mut others = 0.0;
            let non_base = scores
                .iter_mut()
                .enumerate()
                .filter(|&(class, _)| class != b)
                .map(|(_, f)| f);
            for (f, &o) in non_base.zip(outputs) {
                *f += shrinkage * o;
                others += *f;
            }
            scores[b] = -others;
        }
        (_, None) => {
            for (f, &o) in scores.iter_mut().zip(outputs) {
                *f += shrinkage * o;
            }
        }
    }
}

/// Trained additive model.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedModel {
    config: TrainConfig,
    num_classes: usize,
    num_features: usize,
    iterations: Vec<IterationRecord>,
}

impl BoostedModel {
    /// Model with no iterations; every score is zero.
    pub fn empty(config: TrainConfig, num_classes: usize, num_features: usize) -> Self {
        Self {
            config,
            num_classes,
            num_features,
            iterations: Vec::new(),
        }
    }

    /// Assembles a model, checking the per-iteration tree layout.
    pub fn from_parts(
        config: TrainConfig,
        num_classes: usize,
        num_features: usize,
        iterations: Vec<IterationRecord>,
    ) -> Result<Self> {
        let algorithm = config.algorithm;
        if num_classes < algorithm.min_classes() {
            return Err(Error::TooFewClasses {
                algorithm: algorithm.name(),
                found: num_classes,
                required: algorithm.min_classes(),
            });
        }
        if num_features == 0 {
            return Err(Error::NoFeatures);
        }
        for (m, record) in iterations.iter().enumerate() {
            let bad = |reason: &str| Error::InvalidParameter {
                name: "iteration",
                reason: format!("iteration {}: {reason}", m + 1),
            };
            match (algorithm.is_abc(), record.base) {
                (true, Some(b)) if b < num_classes => {
                    if record.trees.len() != num_classes - 1 {
                        return Err(bad("abc iterations need K - 1 trees"));
                    }
                }
                (true, _) => return Err(bad("abc iterations need a base class below K")),
                (false, None) => {
                    if record.trees.len() != num_classes {
                        return Err(bad("iterations need K trees"));
                    }
                }
                (false, Some(_)) => return Err(bad("base class on a non-abc iteration")),
            }
            if record
                .trees
                .iter()
                .any(|t| t.num_features() != num_features)
            {
                return Err(bad("tree dimensionality differs from the model"));
            }
        }
        Ok(Self {
            config,
            num_classes,
            num_features,
            iterations,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn algorithm(&self) -> Algorithm {
        self.config.algorithm
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn iterations(&self) -> &[IterationRecord] {
        &self.iterations
    }

    pub(crate) fn push(&mut self, record: IterationRecord) {
        self.iterations.push(record);
    }

    /// Replays every iteration on `x` into `scores` (length `K`, zeroed by
    /// the caller). No dimension check.
    pub fn accumulate_scores(&self, x: &[f64], scores: &mut [f64]) {
        let mut outputs = vec![0.0; self.num_classes];
        for record in &self.iterations {
            self.apply_record(record, x, &mut outputs, scores);
        }
    }

    #[inline]
    pub(crate) fn apply_record(
        &self,
        record: &IterationRecord,
        x: &[f64],
        outputs: &mut [f64],
        scores: &mut [f64],
    ) {
        for (o, tree) in outputs.iter_mut().zip(&record.trees) {
            *o = tree.evaluate(x);
        }
        accumulate(
            self.config.algorithm,
            self.config.shrinkage,
            record.base,
            &outputs[..record.trees.len()],
            scores,
        );
    }

    fn check_dimension(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.num_features {
            return Err(Error::DimensionMismatch {
                expected: self.num_features,
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// Final scores `F(x)` for every class.
pub fn predict_scores(model: &BoostedModel, x: &[f64]) -> Result<Vec<f64>> {
    model.check_dimension(x)?;
    let mut scores = vec![0.0; model.num_classes];
    model.accumulate_scores(x, &mut scores);
    Ok(scores)
}

/// Index of the largest score; ties to the smallest class id.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

/// Predicted class: `argmax_k F_k(x)`, ties to the smallest class id.
pub fn predict_class(model: &BoostedModel, x: &[f64]) -> Result<usize> {
    predict_scores(model, x).map(|s| argmax(&s))
}
