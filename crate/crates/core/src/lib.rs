//! Cross-validated AUC estimation for small samples: leave-one-out,
//! leave-pair-out and tournament leave-pair-out (TLPO) estimators, ROC
//! analysis from tournament rankings, and a Monte-Carlo harness for
//! measuring estimator bias and variance on synthetic data.
//!
//! The numeric code is generic over [`Scalar`] (`f32`, `f64`); aliases for
//! the common `f64` instantiations are provided at the crate root.

pub mod crossval;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod learners;
pub mod linalg;
pub mod roc;
pub mod scalar;
pub mod seed;
pub mod synth;
pub mod tournament;

pub use crossval::{
    complete_pair_predictions, kfold_averaged_auc, kfold_pooled_auc, loo_auc, lpo_auc, CvPrediction,
    PairPredictionTable, PairScores,
};
pub use dataset::{Dataset, IndexPair, Label, Subset};
pub use error::{Error, Result};
pub use harness::{
    run_cell, run_grid, run_subsample, CellPlan, CellSource, EstimateReport, Estimator,
    ExperimentConfig, GridOutcome, KfoldSettings,
};
pub use learners::{
    ClassFrequencyLearner, ConstantLearner, HoldOut, Knn, KnnConfig, Learner, LearnerSpec,
    Intercept, RandomLearner, Ridge, RidgeConfig, TrainedModel,
};
pub use roc::{classify_at, heaviside, roc_curve, wmw_auc, ConfusionCounts, RocCurve, RocPoint, ScoredSample};
pub use scalar::Scalar;
pub use synth::{generate, generate_test_set, SynthSpec};
pub use tournament::{
    build_tournament, consistency, ranking, tlpo_auc, tournament_scores, ConsistencyReport,
    Outcome, TournamentGraph, TournamentScores,
};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type ScoredSample64 = ScoredSample<f64>;
pub type RocCurve64 = RocCurve<f64>;
pub type RocPoint64 = RocPoint<f64>;
pub type PairPredictionTable64 = PairPredictionTable<f64>;
pub type RidgeConfig64 = RidgeConfig<f64>;
pub type KnnConfig64 = KnnConfig<f64>;
pub type Learner64 = dyn Learner<f64>;
