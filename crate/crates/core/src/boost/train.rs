use alloc::vec;
use alloc::vec::Vec;

use super::loss::{
    abc_residuals, classic_pairs, logit_residuals, neg_log_likelihood, softmax_probs, softmax_row,
};
use super::model::{accumulate, argmax, Algorithm, BoostedModel, IterationRecord, TrainConfig};
use crate::data::{presort, Dataset, FeatureOrder};
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::tree::{fit_tree_assigned, RegressionTree, SplitCriterion, TreeParams};

/// Scores `F` and probabilities `P = softmax(F)`, both `N x K` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreState {
    num_classes: usize,
    scores: Vec<f64>,
    probs: Vec<f64>,
}

impl ScoreState {
    /// `F = 0`, `P = 1/K`.
    pub fn new(num_samples: usize, num_classes: usize) -> Self {
        Self {
            num_classes,
            scores: vec![0.0; num_samples * num_classes],
            probs: vec![1.0 / num_classes as f64; num_samples * num_classes],
        }
    }

    pub fn from_scores(scores: Vec<f64>, num_classes: usize) -> Self {
        let probs = softmax_probs(&scores, num_classes);
        Self {
            num_classes,
            scores,
            probs,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn score_row(&self, i: usize) -> &[f64] {
        &self.scores[i * self.num_classes..(i + 1) * self.num_classes]
    }

    pub fn prob_row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.num_classes..(i + 1) * self.num_classes]
    }

    fn refresh(&mut self) {
        for (f, p) in self
            .scores
            .chunks_exact(self.num_classes)
            .zip(self.probs.chunks_exact_mut(self.num_classes))
        {
            softmax_row(f, p);
        }
    }
}

/// Per-iteration training history.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    /// Loss before the first iteration, `N ln K`.
    pub initial_loss: f64,
    /// Training loss after each iteration.
    pub losses: Vec<f64>,
    /// Misclassified monitor rows after each iteration; empty without a monitor.
    pub monitor_errors: Vec<usize>,
    /// Committed base class per iteration (abc variants only).
    pub base_classes: Vec<usize>,
}

/// One base-class candidate evaluated during an abc iteration.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub base: usize,
    /// Training loss if this candidate were committed.
    pub loss: f64,
    /// Trees for the classes other than `base`, ascending.
    pub trees: Vec<RegressionTree>,
}

#[derive(Debug, Clone, Copy)]
pub enum IterationDetail<'a> {
    PerClass,
    Classic {
        /// Largest `|z|` among the working responses of this iteration.
        max_abs_response: f64,
    },
    Abc {
        /// Every candidate, indexed by base class.
        candidates: &'a [Candidate],
    },
}

/// Snapshot handed to the observer after each committed iteration.
#[derive(Debug, Clone, Copy)]
pub struct IterationEvent<'a> {
    /// 1-based.
    pub iteration: usize,
    /// `F` before this iteration.
    pub previous_scores: &'a [f64],
    pub state: &'a ScoreState,
    pub loss: f64,
    pub monitor_errors: Option<usize>,
    pub record: &'a IterationRecord,
    pub detail: IterationDetail<'a>,
}

/// Trains a model; see [`train_with_observer`].
pub fn train(
    config: &TrainConfig,
    data: &Dataset,
    monitor: Option<&Dataset>,
) -> Result<(BoostedModel, TrainingLog)> {
    train_with_observer(config, data, monitor, |_| {})
}

/// Trains `config.algorithm` on `data` for up to `config.iterations`
/// iterations, stopping early once the training loss drops below
/// `config.loss_stop`. When `monitor` is given, its misclassification count is
/// logged after every iteration. `observer` sees every committed iteration.
pub fn train_with_observer<F>(
    config: &TrainConfig,
    data: &Dataset,
    monitor: Option<&Dataset>,
    mut observer: F,
) -> Result<(BoostedModel, TrainingLog)>
where
    F: FnMut(&IterationEvent<'_>),
{
    config.validate()?;
    let algorithm = config.algorithm;
    let k = data.num_classes();
    if k < algorithm.min_classes() {
        return Err(Error::TooFewClasses {
            algorithm: algorithm.name(),
            found: k,
            required: algorithm.min_classes(),
        });
    }
    if let Some(m) = monitor {
        if m.num_features() != data.num_features() {
            return Err(Error::DimensionMismatch {
                expected: data.num_features(),
                found: m.num_features(),
            });
        }
        if m.num_classes() > k {
            let row = m.labels().iter().position(|&y| y >= k).unwrap_or(0);
            return Err(Error::LabelOutOfRange {
                row,
                label: m.labels()[row],
                num_classes: k,
            });
        }
    }

    let order = presort(data);
    let trainer = Trainer {
        config,
        labels: data.labels(),
        order: &order,
        num_classes: k,
        params: TreeParams {
            max_leaves: config.max_leaves,
            criterion: match algorithm {
                Algorithm::Mart | Algorithm::AbcMart => SplitCriterion::FirstOrder,
                _ => SplitCriterion::SecondOrder,
            },
            min_leaf: config.min_leaf,
        },
    };

    let n = data.num_samples();
    let mut state = ScoreState::new(n, k);
    let mut model = BoostedModel::empty(*config, k, data.num_features());
    let mut log = TrainingLog {
        initial_loss: n as f64 * libm::log(k as f64),
        ..TrainingLog::default()
    };
    let mut monitor_scores = monitor.map(|m| vec![0.0; m.num_samples() * k]);
    let mut outputs = vec![0.0; k];

    for iteration in 1..=config.iterations {
        let previous = state.scores.clone();
        let step = trainer.step(&mut state, iteration)?;
        state.refresh();
        let loss = neg_log_likelihood(&state.probs, data.labels(), k);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { iteration });
        }

        let record = IterationRecord::new(step.base, step.trees);
        let monitor_errors = match (monitor, monitor_scores.as_mut()) {
            (Some(m), Some(scores)) => {
                let mut errors = 0;
                for ((x, f), &y) in m.rows().zip(scores.chunks_exact_mut(k)).zip(m.labels()) {
                    model.apply_record(&record, x, &mut outputs, f);
                    errors += usize::from(argmax(f) != y);
                }
                log.monitor_errors.push(errors);
                Some(errors)
            }
            _ => None,
        };
        log.losses.push(loss);
        if let Some(b) = step.base {
            log.base_classes.push(b);
        }
        let detail = match algorithm {
            Algorithm::ClassicLogitboost => IterationDetail::Classic {
                max_abs_response: step.max_abs_response,
            },
            a if a.is_abc() => IterationDetail::Abc {
                candidates: &step.candidates,
            },
            _ => IterationDetail::PerClass,
        };
        observer(&IterationEvent {
            iteration,
            previous_scores: &previous,
            state: &state,
            loss,
            monitor_errors,
            record: &record,
            detail,
        });
        model.push(record);
        if loss < config.loss_stop {
            break;
        }
    }
    Ok((model, log))
}

struct Trainer<'a> {
    config: &'a TrainConfig,
    labels: &'a [usize],
    order: &'a FeatureOrder,
    num_classes: usize,
    params: TreeParams,
}

struct Step {
    base: Option<usize>,
    trees: Vec<RegressionTree>,
    candidates: Vec<Candidate>,
    max_abs_response: f64,
}

struct Evaluated {
    candidate: Candidate,
    scores: Vec<f64>,
}

impl Trainer<'_> {
    /// Fits this iteration's trees and moves `state.scores`; `state.probs` is
    /// left for the caller to refresh.
    fn step(&self, state: &mut ScoreState, iteration: usize) -> Result<Step> {
        match self.config.algorithm {
            Algorithm::Mart | Algorithm::Logitboost => self.per_class_step(state),
            Algorithm::ClassicLogitboost => self.classic_step(state),
            Algorithm::AbcMart | Algorithm::AbcLogitboost => self.abc_step(state, iteration),
        }
    }

    fn per_class_step(&self, state: &mut ScoreState) -> Result<Step> {
        let k = self.num_classes;
        let factor = (k as f64 - 1.0) / k as f64;
        let fits = map_indexed(k, |class| {
            let pairs = logit_residuals(&state.probs, self.labels, k, class);
            fit_tree_assigned(&pairs, self.order, self.params).map(|(mut tree, assign)| {
                tree.scale_leaves(factor);
                (tree, assign)
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        self.apply(&fits, None, &mut state.scores);
        Ok(Step {
            base: None,
            trees: fits.into_iter().map(|(t, _)| t).collect(),
            candidates: Vec::new(),
            max_abs_response: 0.0,
        })
    }

    fn classic_step(&self, state: &mut ScoreState) -> Result<Step> {
        let k = self.num_classes;
        let z_max = self.config.z_max;
        let fits = map_indexed(k, |class| {
            let (pairs, max_abs) = classic_pairs(&state.probs, self.labels, k, class, z_max);
            fit_tree_assigned(&pairs, self.order, self.params)
                .map(|(tree, assign)| (tree, assign, max_abs))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let max_abs_response = fits.iter().map(|f| f.2).fold(0.0, f64::max);
        let fits: Vec<_> = fits.into_iter().map(|(t, a, _)| (t, a)).collect();
        self.apply(&fits, None, &mut state.scores);
        Ok(Step {
            base: None,
            trees: fits.into_iter().map(|(t, _)| t).collect(),
            candidates: Vec::new(),
            max_abs_response,
        })
    }

    fn abc_step(&self, state: &mut ScoreState, iteration: usize) -> Result<Step> {
        let k = self.num_classes;
        let evaluated = map_indexed(k, |base| self.abc_candidate(state, base))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        // argmin over candidates; NaN never wins, ties keep the smaller base.
        let mut best: Option<usize> = None;
        for (b, e) in evaluated.iter().enumerate() {
            let loss = e.candidate.loss;
            if !loss.is_nan() && best.is_none_or(|j| loss < evaluated[j].candidate.loss) {
                best = Some(b);
            }
        }
        let Some(best) = best else {
            return Err(Error::NonFiniteLoss { iteration });
        };
        let mut candidates = Vec::with_capacity(k);
        let mut committed = None;
        for (b, e) in evaluated.into_iter().enumerate() {
            if b == best {
                state.scores = e.scores;
                committed = Some(e.candidate.trees.clone());
            }
            candidates.push(e.candidate);
        }
        Ok(Step {
            base: Some(best),
            trees: committed.unwrap_or_default(),
            candidates,
            max_abs_response: 0.0,
        })
    }

    /// Fits the `K - 1` trees for one base class and scores the result.
    fn abc_candidate(&self, state: &ScoreState, base: usize) -> Result<Evaluated> {
        let k = self.num_classes;
        let mut fits = Vec::with_capacity(k - 1);
        for class in (0..k).filter(|&c| c != base) {
            let pairs = abc_residuals(&state.probs, self.labels, k, class, base)?;
            fits.push(fit_tree_assigned(&pairs, self.order, self.params)?);
        }
        let mut scores = state.scores.clone();
        self.apply(&fits, Some(base), &mut scores);
        let probs = softmax_probs(&scores, k);
        let loss = neg_log_likelihood(&probs, self.labels, k);
        Ok(Evaluated {
            candidate: Candidate {
                base,
                loss,
                trees: fits.into_iter().map(|(t, _)| t).collect(),
            },
            scores,
        })
    }

    /// Adds the fitted trees' outputs to every training row, reading each
    /// sample's leaf from the fit's assignment.
    fn apply(&self, fits: &[(RegressionTree, Vec<u32>)], base: Option<usize>, scores: &mut [f64]) {
        let mut outputs = vec![0.0; fits.len()];
        for (i, row) in scores.chunks_exact_mut(self.num_classes).enumerate() {
            for (o, (tree, assign)) in outputs.iter_mut().zip(fits) {
                *o = tree.leaf_value(assign[i] as usize);
            }
            accumulate(
                self.config.algorithm,
                self.config.shrinkage,
                base,
                &outputs,
                row,
            );
        }
    }
}
