//! Boosting trainers, probability and loss computations, and prediction.

pub mod loss;
mod model;
mod train;

pub use loss::{
    abc_residuals, logit_residuals, neg_log_likelihood, softmax_probs, PROBABILITY_FLOOR,
};
pub use model::{
    argmax, predict_class, predict_scores, Algorithm, BoostedModel, IterationRecord, TrainConfig,
};
pub use train::{
    train, train_with_observer, Candidate, IterationDetail, IterationEvent, ScoreState, TrainingLog,
};
