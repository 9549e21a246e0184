//! Learner contract and the bundled learning algorithms.
//!
//! A [`Learner`] turns a training [`Dataset`] into a [`TrainedModel`].
//! Cross-validation goes through [`Learner::hold_out`], which by default
//! retrains on an explicit subset but lets a learner reuse work that does
//! not depend on the held-out units (pairwise distances, Gram matrices).

mod baseline;
mod knn;
mod ridge;

use serde::{Deserialize, Serialize};

pub use baseline::{ClassFrequencyLearner, ConstantLearner, RandomLearner};
pub use knn::{knn_fit, Knn, KnnConfig, KnnModel};
pub use ridge::{ridge_fit, ridge_fit_dual, ridge_fit_primal, Intercept, Ridge, RidgeConfig, RidgeModel};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A fitted prediction function over feature vectors.
pub trait TrainedModel<T>: Send + Sync {
    fn predict(&self, x: &[T]) -> T;
}

pub trait Learner<T: Scalar>: Send + Sync {
    fn name(&self) -> &'static str;

    /// Fits on `train`. Deterministic given `(train, seed)`.
    fn fit(&self, train: &Dataset<T>, seed: u64) -> Result<Box<dyn TrainedModel<T>>>;

    /// Hold-out evaluator over the full sample `ds`.
    fn hold_out<'a>(&'a self, ds: &'a Dataset<T>) -> Result<Box<dyn HoldOut<T> + 'a>> {
        Ok(Box::new(Retrain { learner: self, ds }))
    }
}

/// One cross-validation round: train without some units, predict them.
pub trait HoldOut<T>: Send + Sync {
    /// Trains on every unit not in `held_out` (original indices) and returns
    /// the predictions for `held_out`, in the same order.
    fn predict_held_out(&self, held_out: &[usize], seed: u64) -> Result<Vec<T>>;
}

/// Default hold-out: materialize the training subset and call `fit`.
pub struct Retrain<'a, T, L: ?Sized> {
    learner: &'a L,
    ds: &'a Dataset<T>,
}

impl<'a, T: Scalar, L: Learner<T> + ?Sized> Retrain<'a, T, L> {
    pub fn new(learner: &'a L, ds: &'a Dataset<T>) -> Self {
        Self { learner, ds }
    }
}

impl<T: Scalar, L: Learner<T> + ?Sized> HoldOut<T> for Retrain<'_, T, L> {
    fn predict_held_out(&self, held_out: &[usize], seed: u64) -> Result<Vec<T>> {
        let train = self.ds.subset_excluding(held_out)?;
        let model = self.learner.fit(&train.data, seed)?;
        Ok(held_out.iter().map(|&u| model.predict(self.ds.row(u))).collect())
    }
}

/// Serializable learner selection, used by the experiment harness and CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LearnerSpec {
    Ridge { lambda: f64, intercept: Intercept<f64> },
    Knn { k: usize, epsilon: f64 },
    Constant { value: f64 },
    ClassFreq,
    Random { seed: u64 },
}

impl LearnerSpec {
    /// Parses `ridge | ridge-centered | knn | constant | classfreq | random`
    /// with default parameters; `random` takes its seed from `seed`.
    pub fn parse(name: &str, seed: u64) -> Result<Self> {
        Ok(match name.trim() {
            "ridge" => LearnerSpec::Ridge {
                lambda: 1.0,
                intercept: Intercept::Penalized(1.0),
            },
            "ridge-centered" => LearnerSpec::Ridge {
                lambda: 1.0,
                intercept: Intercept::Centered,
            },
            "knn" => LearnerSpec::Knn {
                k: 3,
                epsilon: 1e-12,
            },
            "constant" => LearnerSpec::Constant { value: 0.0 },
            "classfreq" => LearnerSpec::ClassFreq,
            "random" => LearnerSpec::Random { seed },
            other => return Err(Error::Config(format!("unknown learner `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Ridge {
                intercept: Intercept::Centered,
                ..
            } => "ridge-centered",
            LearnerSpec::Ridge { .. } => "ridge",
            LearnerSpec::Knn { .. } => "knn",
            LearnerSpec::Constant { .. } => "constant",
            LearnerSpec::ClassFreq => "classfreq",
            LearnerSpec::Random { .. } => "random",
        }
    }

    pub fn build<T: Scalar>(&self) -> Result<Box<dyn Learner<T>>> {
        Ok(match *self {
            LearnerSpec::Ridge { lambda, intercept } => Box::new(Ridge::new(RidgeConfig {
                lambda: T::of(lambda),
                intercept: match intercept {
                    Intercept::Penalized(c) => Intercept::Penalized(T::of(c)),
                    Intercept::Centered => Intercept::Centered,
                },
            })?),
            LearnerSpec::Knn { k, epsilon } => Box::new(Knn::new(KnnConfig {
                k,
                epsilon: T::of(epsilon),
            })?),
            LearnerSpec::Constant { value } => Box::new(ConstantLearner::new(T::of(value))),
            LearnerSpec::ClassFreq => Box::new(ClassFrequencyLearner),
            LearnerSpec::Random { seed } => Box::new(RandomLearner::new(seed)),
        })
    }
}
