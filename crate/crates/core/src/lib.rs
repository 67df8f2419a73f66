//! Multi-class gradient tree boosting under the softmax negative log-likelihood.
//!
//! Five trainers share one regression-tree kernel:
//!
//! * **mart**: first-order split gain, second-order leaf values.
//! * **robust logitboost**: second-order (weighted least squares) split gain.
//! * **abc-mart** / **abc-logitboost**: the sum-to-zero formulation where one
//!   *base class* is eliminated per iteration, chosen by exhaustive search over
//!   all `K` candidates.
//! * **classic logitboost**: the clipped working-response formulation, kept as
//!   a reference.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is off.
//! File formats, persistence and the command-line tool live in the `abcboost`
//! crate. Enabling `parallel` fans independent tree fits out over rayon; the
//! results are identical to the sequential path.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod boost;
pub mod data;
mod error;
pub mod eval;
mod exec;
pub mod tree;

pub use boost::{
    predict_class, predict_scores, train, train_with_observer, Algorithm, BoostedModel, Candidate,
    IterationDetail, IterationEvent, IterationRecord, ScoreState, TrainConfig, TrainingLog,
};
pub use data::{one_hot_expand, presort, split_halves, split_indices, Dataset, FeatureOrder};
pub use error::{Error, Result};
pub use eval::{error_count, error_curve, normal_upper_tail, p_value, CurvePoint, EvalReport};
pub use tree::{
    best_split, fit_tree, fit_tree_assigned, gain_at_split, GradientPair, Node, NodeStats,
    RegressionTree, SplitCandidate, SplitCriterion, TreeParams,
};
