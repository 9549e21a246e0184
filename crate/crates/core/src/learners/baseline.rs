//! Diagnostic learners that ignore the features: the perfectly stable
//! constant learner, the class-frequency learner that exposes the pooling
//! bias of leave-one-out, and the maximally unstable random learner.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{HoldOut, Learner, TrainedModel};
use crate::scalar::Scalar;
use crate::seed::{mix_seed, symmetric_unit};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant<T>(pub T);

impl<T: Scalar> TrainedModel<T> for Constant<T> {
    fn predict(&self, _x: &[T]) -> T {
        self.0
    }
}

/// Always predicts the same value, whatever it was trained on.
#[derive(Clone, Copy, Debug)]
pub struct ConstantLearner<T> {
    value: T,
}

impl<T: Scalar> ConstantLearner<T> {
    pub fn new(value: T) -> Self {
        Self { value }
    }
}

impl<T: Scalar> Learner<T> for ConstantLearner<T> {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn fit(&self, _train: &Dataset<T>, _seed: u64) -> Result<Box<dyn TrainedModel<T>>> {
        Ok(Box::new(Constant(self.value)))
    }
}

/// Predicts `1/p - 1/n` for every input, where `p` and `n` are the class
/// counts of the training set.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClassFrequencyLearner;

impl<T: Scalar> Learner<T> for ClassFrequencyLearner {
    fn name(&self) -> &'static str {
        "classfreq"
    }

    fn fit(&self, train: &Dataset<T>, _seed: u64) -> Result<Box<dyn TrainedModel<T>>> {
        let (p, n) = train.class_counts();
        if p == 0 {
            return Err(Error::EmptyClass("positive"));
        }
        if n == 0 {
            return Err(Error::EmptyClass("negative"));
        }
        Ok(Box::new(Constant(
            T::one() / T::of_usize(p) - T::one() / T::of_usize(n),
        )))
    }
}

const UNIT_KEY: u64 = 0x756e_6974;

/// Ignores its training data and draws a fresh prediction function with
/// values uniform on `[-1, 1]` for every `(learner seed, fit seed)`.
#[derive(Clone, Copy, Debug)]
pub struct RandomLearner {
    seed: u64,
}

impl RandomLearner {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

/// A fixed draw: the value for a feature vector is keyed by its bit pattern.
#[derive(Clone, Copy, Debug)]
pub struct RandomFunction {
    key: u64,
}

impl<T: Scalar> TrainedModel<T> for RandomFunction {
    fn predict(&self, x: &[T]) -> T {
        let bits: Vec<u64> = x.iter().map(|v| v.as_f64().to_bits()).collect();
        T::of(symmetric_unit(mix_seed(self.key, &bits)))
    }
}

impl<T: Scalar> Learner<T> for RandomLearner {
    fn name(&self) -> &'static str {
        "random"
    }

    fn fit(&self, _train: &Dataset<T>, seed: u64) -> Result<Box<dyn TrainedModel<T>>> {
        Ok(Box::new(RandomFunction {
            key: mix_seed(self.seed, &[seed]),
        }))
    }

    fn hold_out<'a>(&'a self, _ds: &'a Dataset<T>) -> Result<Box<dyn HoldOut<T> + 'a>> {
        Ok(Box::new(RandomHoldOut { seed: self.seed }))
    }
}

/// Within cross-validation the function is keyed by unit index.
struct RandomHoldOut {
    seed: u64,
}

impl<T: Scalar> HoldOut<T> for RandomHoldOut {
    fn predict_held_out(&self, held_out: &[usize], seed: u64) -> Result<Vec<T>> {
        let key = mix_seed(self.seed, &[seed]);
        Ok(held_out
            .iter()
            .map(|&u| T::of(symmetric_unit(mix_seed(key, &[UNIT_KEY, u as u64]))))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;

    fn ds(pos: usize, neg: usize) -> Dataset<f64> {
        let m = pos + neg;
        let rows: Vec<Vec<f64>> = (0..m).map(|i| vec![i as f64]).collect();
        let labels = (0..m).map(|i| if i < pos { Label::Positive } else { Label::Negative }).collect();
        Dataset::from_rows(&rows, labels).unwrap()
    }

    #[test]
    fn constant_predicts_its_value() {
        let model = ConstantLearner::new(0.7).fit(&ds(3, 4), 1).unwrap();
        assert_eq!(model.predict(&[123.0]), 0.7);
    }

    #[test]
    fn class_frequency_values() {
        let model = ClassFrequencyLearner.fit(&ds(14, 15), 0).unwrap();
        assert_eq!(model.predict(&[0.0]), 1.0 / 14.0 - 1.0 / 15.0);
        assert!((model.predict(&[0.0]) - 0.004_761_904_761_904_762).abs() < 1e-15);
        let model = Learner::<f64>::fit(&ClassFrequencyLearner, &ds(15, 15), 0).unwrap();
        assert_eq!(model.predict(&[0.0]), 0.0);
        assert!(matches!(
            Learner::<f64>::fit(&ClassFrequencyLearner, &ds(0, 3), 0),
            Err(Error::EmptyClass("positive"))
        ));
    }

    #[test]
    fn random_learner_is_fixed_per_fit_and_fresh_across_fits() {
        let data = ds(5, 5);
        let learner = RandomLearner::new(42);
        let a = learner.fit(&data, 1).unwrap();
        let a2 = learner.fit(&data, 1).unwrap();
        let b = learner.fit(&data, 2).unwrap();
        let probe: Vec<f64> = data.rows().map(|r| a.predict(r)).collect();
        assert_eq!(probe, data.rows().map(|r| a2.predict(r)).collect::<Vec<_>>());
        assert_ne!(probe, data.rows().map(|r| b.predict(r)).collect::<Vec<_>>());
        assert!(probe.iter().all(|v| (-1.0..=1.0).contains(v)));

        let h = Learner::<f64>::hold_out(&learner, &data).unwrap();
        let x = h.predict_held_out(&[2, 7], 9).unwrap();
        assert_eq!(x, h.predict_held_out(&[2, 7], 9).unwrap());
        assert_ne!(x, h.predict_held_out(&[2, 7], 10).unwrap());
        assert!(x.iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}
