//! Seeded Gaussian two-class data.
//!
//! Non-signal columns are standard normal for both classes. Each of the
//! first `signal_features` columns has mean `+mu` for positives and `-mu`
//! for negatives, unit variance. Positives come first in row order.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::{mix_seed, rng, tag};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub m: usize,
    pub pos_fraction: f64,
    pub d: usize,
    pub signal_features: usize,
    pub mu: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Spec with the default class-mean offset of 0.5 and seed 0.
    pub fn new(m: usize, pos_fraction: f64, d: usize, signal_features: usize) -> Self {
        Self {
            m,
            pos_fraction,
            d,
            signal_features,
            mu: 0.5,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `round(pos_fraction * n)`, halves rounded up.
    pub fn positives_for(&self, n: usize) -> usize {
        ((self.pos_fraction * n as f64) + 0.5).floor() as usize
    }

    pub fn n_pos(&self) -> usize {
        self.positives_for(self.m)
    }

    pub fn is_signal(&self) -> bool {
        self.signal_features > 0
    }

    /// Checks the spec and that both classes are non-empty.
    pub fn validate(&self) -> Result<()> {
        if !(self.pos_fraction > 0.0 && self.pos_fraction < 1.0) {
            return Err(Error::Config(format!(
                "positive fraction must lie in (0, 1), got {}",
                self.pos_fraction
            )));
        }
        if self.m < 2 {
            return Err(Error::Config(format!("sample size must be >= 2, got {}", self.m)));
        }
        if self.d == 0 {
            return Err(Error::Config("feature count must be >= 1".into()));
        }
        if self.signal_features > self.d {
            return Err(Error::Config(format!(
                "{} signal features exceed {} features",
                self.signal_features, self.d
            )));
        }
        if !self.mu.is_finite() {
            return Err(Error::Config(format!("mean offset must be finite, got {}", self.mu)));
        }
        let pos = self.n_pos();
        if pos == 0 || pos >= self.m {
            return Err(Error::Config(format!(
                "{} positives out of {} leaves a class empty",
                pos, self.m
            )));
        }
        Ok(())
    }
}

/// Draws units one at a time: all positives, then all negatives.
pub struct UnitSampler<'a> {
    spec: &'a SynthSpec,
    rng: ChaCha8Rng,
    pos_left: usize,
    left: usize,
}

impl<'a> UnitSampler<'a> {
    fn new(spec: &'a SynthSpec, n: usize, stream: u64) -> Self {
        Self {
            spec,
            rng: rng(mix_seed(spec.seed, &[stream])),
            pos_left: spec.positives_for(n),
            left: n,
        }
    }

    /// The training-sample stream.
    pub fn train(spec: &'a SynthSpec) -> Self {
        Self::new(spec, spec.m, tag::TRAIN)
    }

    /// An `n`-unit test stream, independent of the training stream.
    pub fn test(spec: &'a SynthSpec, n: usize) -> Self {
        Self::new(spec, n, tag::TEST)
    }

    /// Appends the next unit's features to `buf`.
    pub fn next_into<T: Scalar>(&mut self, buf: &mut Vec<T>) -> Option<Label> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        let label = if self.pos_left > 0 {
            self.pos_left -= 1;
            Label::Positive
        } else {
            Label::Negative
        };
        let shift = if label.is_positive() { self.spec.mu } else { -self.spec.mu };
        for col in 0..self.spec.d {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            let v = if col < self.spec.signal_features { z + shift } else { z };
            buf.push(T::of(v));
        }
        Some(label)
    }

    pub fn remaining(&self) -> usize {
        self.left
    }
}

fn collect<T: Scalar>(mut sampler: UnitSampler<'_>, d: usize) -> Result<Dataset<T>> {
    let mut features = Vec::with_capacity(sampler.remaining() * d);
    let mut labels = Vec::with_capacity(sampler.remaining());
    while let Some(label) = sampler.next_into(&mut features) {
        labels.push(label);
    }
    Dataset::new(features, d, labels)
}

/// The training sample described by `spec`.
pub fn generate<T: Scalar>(spec: &SynthSpec) -> Result<Dataset<T>> {
    spec.validate()?;
    collect(UnitSampler::train(spec), spec.d)
}

/// `n_test` fresh units from the same distribution and class fraction.
pub fn generate_test_set<T: Scalar>(spec: &SynthSpec, n_test: usize) -> Result<Dataset<T>> {
    spec.validate()?;
    collect(UnitSampler::test(spec, n_test), spec.d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_split_and_shape() {
        let ds: Dataset<f64> = generate(&SynthSpec::new(30, 0.5, 10, 1).with_seed(3)).unwrap();
        assert_eq!((ds.len(), ds.dim()), (30, 10));
        assert_eq!(ds.class_counts(), (15, 15));

        let ds: Dataset<f64> = generate(&SynthSpec::new(30, 0.1, 1000, 10).with_seed(3)).unwrap();
        assert_eq!(ds.class_counts(), (3, 27));
        assert_eq!(ds.dim(), 1000);
    }

    #[test]
    fn standard_grid_counts_are_exact() {
        for (frac, pos) in [(0.1, 3), (0.2, 6), (0.3, 9), (0.4, 12), (0.5, 15)] {
            assert_eq!(SynthSpec::new(30, frac, 10, 0).n_pos(), pos);
        }
        assert_eq!(SynthSpec::new(5, 0.5, 1, 0).n_pos(), 3);
    }

    #[test]
    fn rejects_degenerate_specs() {
        assert!(SynthSpec::new(30, 1.0, 10, 0).validate().is_err());
        assert!(SynthSpec::new(30, 0.0, 10, 0).validate().is_err());
        assert!(SynthSpec::new(30, 0.01, 10, 0).validate().is_err());
        assert!(SynthSpec::new(30, 0.5, 10, 11).validate().is_err());
        assert!(SynthSpec::new(30, 0.5, 0, 0).validate().is_err());
        assert!(generate::<f64>(&SynthSpec::new(30, 0.99, 10, 0)).is_err());
    }

    #[test]
    fn deterministic_and_stream_separated() {
        let spec = SynthSpec::new(20, 0.3, 4, 1).with_seed(77);
        let a: Dataset<f64> = generate(&spec).unwrap();
        assert_eq!(a, generate(&spec).unwrap());
        let t: Dataset<f64> = generate_test_set(&spec, 20).unwrap();
        assert_ne!(a.features(), t.features());
        assert_eq!(t, generate_test_set(&spec, 20).unwrap());
        let f32s: Dataset<f32> = generate(&spec).unwrap();
        for (x, y) in a.features().iter().zip(f32s.features()) {
            assert_eq!(*x as f32, *y);
        }
    }

    #[test]
    fn test_set_size() {
        let spec = SynthSpec::new(30, 0.2, 3, 1).with_seed(1);
        let t: Dataset<f64> = generate_test_set(&spec, 10_000).unwrap();
        assert_eq!(t.len(), 10_000);
        assert_eq!(t.class_counts(), (2000, 8000));
    }

    #[test]
    fn column_means() {
        let spec = SynthSpec::new(30, 0.5, 3, 1).with_seed(5);
        let t: Dataset<f64> = generate_test_set(&spec, 100_000).unwrap();
        for col in 0..3 {
            for class in [Label::Positive, Label::Negative] {
                let vals: Vec<f64> = (0..t.len())
                    .filter(|&i| t.label(i) == class)
                    .map(|i| t.row(i)[col])
                    .collect();
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                let expect = match (col, class) {
                    (0, Label::Positive) => 0.5,
                    (0, Label::Negative) => -0.5,
                    _ => 0.0,
                };
                assert!((mean - expect).abs() < 0.02, "col {col} {class:?}: {mean}");
            }
        }
    }
}
