//! Cross-validation AUC estimators.
//!
//! Every round holds out a set of units, trains on the rest and predicts
//! the held-out units. Round seeds are derived from the run seed and the
//! sorted held-out indices ([`round_seed`]), so an estimator gives the same
//! answer whether rounds run sequentially or on a thread pool, and the
//! same round appearing in two estimators (a `k = m` fold and a LOO round,
//! an LPO pair and a tournament pair) sees the same seed.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dataset::{Dataset, IndexPair, Label};
use crate::error::{Error, Result};
use crate::learners::{HoldOut, Learner};
use crate::roc::{half_points, wmw_auc, ScoredSample};
use crate::scalar::Scalar;
use crate::seed::{mix_seed, rng, round_seed, tag};

/// Held-out prediction for one unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvPrediction<T> {
    pub unit: usize,
    pub score: T,
    /// Index of the round (fold, or unit for LOO) that produced it.
    pub round: usize,
}

/// Predictions of one leave-pair-out round, both from the same model
/// trained without `pair.i` and `pair.j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairScores<T> {
    pub pair: IndexPair,
    pub score_i: T,
    pub score_j: T,
}

/// Results of leaving out every unordered pair once, stored in
/// lexicographic `(i < j)` order.
#[derive(Clone, Debug, PartialEq)]
pub struct PairPredictionTable<T> {
    m: usize,
    entries: Vec<PairScores<T>>,
}

impl<T: Scalar> PairPredictionTable<T> {
    pub fn from_entries(m: usize, entries: Vec<PairScores<T>>) -> Result<Self> {
        if entries.len() != m * m.saturating_sub(1) / 2 {
            return Err(Error::Shape(format!(
                "{} pair entries for {m} units",
                entries.len()
            )));
        }
        for (e, expect) in entries.iter().zip(IndexPair::all(m)) {
            if e.pair != expect {
                return Err(Error::Shape(format!(
                    "pair ({}, {}) out of order",
                    e.pair.i, e.pair.j
                )));
            }
        }
        Ok(Self { m, entries })
    }

    pub fn units(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[PairScores<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        i * (2 * self.m - i - 1) / 2 + (j - i - 1)
    }

    /// `(f(i), f(j))` from the round that held out `i` and `j`.
    pub fn get(&self, i: usize, j: usize) -> Option<(T, T)> {
        if i == j || i >= self.m || j >= self.m {
            return None;
        }
        let e = &self.entries[self.slot(i.min(j), i.max(j))];
        Some(if i < j {
            (e.score_i, e.score_j)
        } else {
            (e.score_j, e.score_i)
        })
    }

    /// Leave-pair-out AUC from the positive/negative entries.
    pub fn lpo_auc(&self, labels: &[Label]) -> Result<T> {
        if labels.len() != self.m {
            return Err(Error::Shape(format!(
                "{} labels for a {}-unit table",
                labels.len(),
                self.m
            )));
        }
        require_both_classes(labels)?;
        let mut half_wins = 0u64;
        let mut pairs = 0u64;
        for e in &self.entries {
            let (a, b) = (labels[e.pair.i], labels[e.pair.j]);
            if a == b {
                continue;
            }
            half_wins += if a.is_positive() {
                half_points(e.score_i, e.score_j)
            } else {
                half_points(e.score_j, e.score_i)
            };
            pairs += 1;
        }
        Ok(T::of(half_wins as f64 / (2 * pairs) as f64))
    }
}

fn require_both_classes(labels: &[Label]) -> Result<(usize, usize)> {
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    let neg = labels.len() - pos;
    if pos == 0 {
        return Err(Error::EmptyClass("positive"));
    }
    if neg == 0 {
        return Err(Error::EmptyClass("negative"));
    }
    Ok((pos, neg))
}

fn pooled_auc<T: Scalar>(ds: &Dataset<T>, preds: &[CvPrediction<T>]) -> Result<T> {
    let mut scores = vec![T::zero(); ds.len()];
    for p in preds {
        scores[p.unit] = p.score;
    }
    wmw_auc(&ScoredSample::new(scores, ds.labels().to_vec())?)
}

/// Leave-one-out predictions, one round per unit.
pub fn loo_predictions<T: Scalar>(
    ds: &Dataset<T>,
    hold_out: &dyn HoldOut<T>,
    seed: u64,
) -> Result<Vec<CvPrediction<T>>> {
    if ds.len() < 2 {
        return Err(Error::TooFewRows {
            got: ds.len(),
            need: 2,
        });
    }
    (0..ds.len())
        .into_par_iter()
        .map(|u| {
            let score = hold_out.predict_held_out(&[u], round_seed(seed, &[u]))?[0];
            Ok(CvPrediction {
                unit: u,
                score,
                round: u,
            })
        })
        .collect()
}

/// LOO AUC: pooled held-out predictions scored with the WMW statistic.
pub fn loo_auc<T: Scalar>(ds: &Dataset<T>, learner: &dyn Learner<T>, seed: u64) -> Result<T> {
    loo_auc_with(ds, learner.hold_out(ds)?.as_ref(), seed)
}

pub fn loo_auc_with<T: Scalar>(ds: &Dataset<T>, hold_out: &dyn HoldOut<T>, seed: u64) -> Result<T> {
    require_both_classes(ds.labels())?;
    pooled_auc(ds, &loo_predictions(ds, hold_out, seed)?)
}

fn pair_round<T: Scalar>(hold_out: &dyn HoldOut<T>, pair: IndexPair, seed: u64) -> Result<PairScores<T>> {
    let s = hold_out.predict_held_out(&[pair.i, pair.j], round_seed(seed, &[pair.i, pair.j]))?;
    Ok(PairScores {
        pair,
        score_i: s[0],
        score_j: s[1],
    })
}

fn require_pairs(m: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::TooFewRows { got: m, need: 3 });
    }
    Ok(())
}

/// LPO AUC: one round per positive/negative pair, comparing only the two
/// predictions of that round.
pub fn lpo_auc<T: Scalar>(ds: &Dataset<T>, learner: &dyn Learner<T>, seed: u64) -> Result<T> {
    lpo_auc_with(ds, learner.hold_out(ds)?.as_ref(), seed)
}

pub fn lpo_auc_with<T: Scalar>(ds: &Dataset<T>, hold_out: &dyn HoldOut<T>, seed: u64) -> Result<T> {
    require_pairs(ds.len())?;
    let (pos, neg) = require_both_classes(ds.labels())?;
    let pairs: Vec<IndexPair> = IndexPair::all(ds.len())
        .filter(|p| ds.label(p.i) != ds.label(p.j))
        .collect();
    debug_assert_eq!(pairs.len(), pos * neg);
    let half_wins: Vec<u64> = pairs
        .into_par_iter()
        .map(|pair| {
            let r = pair_round(hold_out, pair, seed)?;
            Ok(if ds.label(pair.i).is_positive() {
                half_points(r.score_i, r.score_j)
            } else {
                half_points(r.score_j, r.score_i)
            })
        })
        .collect::<Result<_>>()?;
    let total: u64 = half_wins.iter().sum();
    Ok(T::of(total as f64 / (2 * pos * neg) as f64))
}

/// Leaves out every unordered pair, same-class pairs included.
pub fn complete_pair_predictions<T: Scalar>(
    ds: &Dataset<T>,
    learner: &dyn Learner<T>,
    seed: u64,
) -> Result<PairPredictionTable<T>> {
    complete_pair_predictions_with(ds, learner.hold_out(ds)?.as_ref(), seed)
}

pub fn complete_pair_predictions_with<T: Scalar>(
    ds: &Dataset<T>,
    hold_out: &dyn HoldOut<T>,
    seed: u64,
) -> Result<PairPredictionTable<T>> {
    let m = ds.len();
    require_pairs(m)?;
    let pairs: Vec<IndexPair> = IndexPair::all(m).collect();
    let entries = pairs
        .into_par_iter()
        .map(|pair| pair_round(hold_out, pair, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(PairPredictionTable { m, entries })
}

/// Splits units into `k` folds: indices are shuffled with the run seed and
/// dealt round-robin. With `stratified`, each class is shuffled and dealt
/// separately, negatives continuing where positives stopped. Each fold is
/// returned sorted.
pub fn fold_assignment(labels: &[Label], k: usize, seed: u64, stratified: bool) -> Result<Vec<Vec<usize>>> {
    let m = labels.len();
    if k < 2 || k > m {
        return Err(Error::Config(format!("fold count {k} outside [2, {m}]")));
    }
    let mut r = rng(mix_seed(seed, &[tag::FOLDS]));
    let mut folds = vec![Vec::new(); k];
    let mut next = 0usize;
    let groups: Vec<Vec<usize>> = if stratified {
        [Label::Positive, Label::Negative]
            .iter()
            .map(|&c| (0..m).filter(|&i| labels[i] == c).collect())
            .collect()
    } else {
        vec![(0..m).collect()]
    };
    for mut group in groups {
        group.shuffle(&mut r);
        for u in group {
            folds[next % k].push(u);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Held-out predictions of every fold, in unit order within each fold.
pub fn kfold_predictions<T: Scalar>(
    hold_out: &dyn HoldOut<T>,
    folds: &[Vec<usize>],
    seed: u64,
) -> Result<Vec<CvPrediction<T>>> {
    let per_fold = folds
        .par_iter()
        .enumerate()
        .map(|(round, fold)| {
            let scores = hold_out.predict_held_out(fold, round_seed(seed, fold))?;
            Ok(fold
                .iter()
                .zip(scores)
                .map(|(&unit, score)| CvPrediction { unit, score, round })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_fold.into_iter().flatten().collect())
}

/// Pooled K-fold: one AUC over the predictions of all folds.
pub fn kfold_pooled_auc<T: Scalar>(
    ds: &Dataset<T>,
    learner: &dyn Learner<T>,
    k: usize,
    seed: u64,
    stratified: bool,
) -> Result<T> {
    kfold_pooled_auc_with(ds, learner.hold_out(ds)?.as_ref(), k, seed, stratified)
}

pub fn kfold_pooled_auc_with<T: Scalar>(
    ds: &Dataset<T>,
    hold_out: &dyn HoldOut<T>,
    k: usize,
    seed: u64,
    stratified: bool,
) -> Result<T> {
    let folds = fold_assignment(ds.labels(), k, seed, stratified)?;
    require_both_classes(ds.labels())?;
    pooled_auc(ds, &kfold_predictions(hold_out, &folds, seed)?)
}

/// Averaged K-fold: mean of per-fold AUCs over folds holding both classes.
/// Returns the AUC and the number of folds it averages.
pub fn kfold_averaged_auc<T: Scalar>(
    ds: &Dataset<T>,
    learner: &dyn Learner<T>,
    k: usize,
    seed: u64,
    stratified: bool,
) -> Result<(T, usize)> {
    kfold_averaged_auc_with(ds, learner.hold_out(ds)?.as_ref(), k, seed, stratified)
}

pub fn kfold_averaged_auc_with<T: Scalar>(
    ds: &Dataset<T>,
    hold_out: &dyn HoldOut<T>,
    k: usize,
    seed: u64,
    stratified: bool,
) -> Result<(T, usize)> {
    let folds = fold_assignment(ds.labels(), k, seed, stratified)?;
    let preds = kfold_predictions(hold_out, &folds, seed)?;
    let mut sum = T::zero();
    let mut usable = 0usize;
    let mut offset = 0usize;
    for fold in &folds {
        let chunk = &preds[offset..offset + fold.len()];
        offset += fold.len();
        let labels: Vec<Label> = fold.iter().map(|&u| ds.label(u)).collect();
        if require_both_classes(&labels).is_err() {
            continue;
        }
        let scores = chunk.iter().map(|p| p.score).collect();
        sum += wmw_auc(&ScoredSample::new(scores, labels)?)?;
        usable += 1;
    }
    if usable == 0 {
        return Err(Error::NoUsableFolds);
    }
    Ok((sum / T::of_usize(usable), usable))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{ClassFrequencyLearner, ConstantLearner, Ridge, RidgeConfig};
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn balanced(pos: usize, neg: usize) -> Dataset<f64> {
        let m = pos + neg;
        let rows: Vec<Vec<f64>> = (0..m).map(|i| vec![(i as f64 * 0.37).sin(), i as f64 % 3.0]).collect();
        let labels = (0..m).map(|i| if i < pos { Label::Positive } else { Label::Negative }).collect();
        Dataset::from_rows(&rows, labels).unwrap()
    }

    struct Counting<'a> {
        inner: Box<dyn HoldOut<f64> + 'a>,
        calls: AtomicUsize,
    }

    impl HoldOut<f64> for Counting<'_> {
        fn predict_held_out(&self, held_out: &[usize], seed: u64) -> Result<Vec<f64>> {
            self.calls.fetch_add(1, Ordering::Relaxed);
            self.inner.predict_held_out(held_out, seed)
        }
    }

    #[test]
    fn constant_learner_gives_half_everywhere() {
        let ds = balanced(4, 6);
        let c = ConstantLearner::new(0.0);
        assert_eq!(loo_auc(&ds, &c, 1).unwrap(), 0.5);
        assert_eq!(lpo_auc(&ds, &c, 1).unwrap(), 0.5);
        assert_eq!(kfold_pooled_auc(&ds, &c, 3, 1, true).unwrap(), 0.5);
        assert_eq!(kfold_averaged_auc(&ds, &c, 2, 1, true).unwrap().0, 0.5);
        let table = complete_pair_predictions(&ds, &c, 1).unwrap();
        assert!(table.entries().iter().all(|e| e.score_i == e.score_j));
    }

    #[test]
    fn class_frequency_pathology() {
        let ds = balanced(15, 15);
        assert_eq!(loo_auc(&ds, &ClassFrequencyLearner, 0).unwrap(), 1.0);
        assert_eq!(lpo_auc(&ds, &ClassFrequencyLearner, 0).unwrap(), 0.5);
        assert_eq!(kfold_pooled_auc(&ds, &ClassFrequencyLearner, 30, 0, false).unwrap(), 1.0);
    }

    #[test]
    fn lpo_round_count() {
        let ds = balanced(4, 7);
        let ridge = Ridge::new(RidgeConfig::new(1.0)).unwrap();
        let counting = Counting {
            inner: ridge.hold_out(&ds).unwrap(),
            calls: AtomicUsize::new(0),
        };
        lpo_auc_with(&ds, &counting, 3).unwrap();
        assert_eq!(counting.calls.load(Ordering::Relaxed), 28);
        let table = complete_pair_predictions_with(&ds, &counting, 3).unwrap();
        assert_eq!(table.len(), 55);
        assert_eq!(counting.calls.load(Ordering::Relaxed), 28 + 55);
    }

    #[test]
    fn table_lookup_is_symmetric() {
        let ds = balanced(3, 3);
        let ridge = Ridge::new(RidgeConfig::new(1.0)).unwrap();
        let table = complete_pair_predictions(&ds, &ridge, 0).unwrap();
        let (a, b) = table.get(1, 4).unwrap();
        assert_eq!(table.get(4, 1).unwrap(), (b, a));
        assert!(table.get(2, 2).is_none());
        assert!(table.get(0, 6).is_none());
    }

    #[test]
    fn folds_partition_units() {
        let labels: Vec<Label> = (0..23).map(|i| if i % 4 == 0 { Label::Positive } else { Label::Negative }).collect();
        for stratified in [false, true] {
            let folds = fold_assignment(&labels, 5, 8, stratified).unwrap();
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            assert_eq!(all, (0..23).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            if stratified {
                for f in &folds {
                    let pos = f.iter().filter(|&&u| labels[u].is_positive()).count();
                    assert!((1..=2).contains(&pos), "{f:?}");
                }
            }
        }
        assert!(fold_assignment(&labels, 1, 0, false).is_err());
        assert!(fold_assignment(&labels, 24, 0, false).is_err());
    }

    #[test]
    fn averaged_skips_single_class_folds() {
        // Two positives, six folds: at most two folds can hold a positive.
        let ds = balanced(2, 10);
        let c = ConstantLearner::new(1.0);
        let (auc, usable) = kfold_averaged_auc(&ds, &c, 6, 4, true).unwrap();
        assert_eq!(auc, 0.5);
        assert_eq!(usable, 2);
        let ds = balanced(1, 5);
        let err = kfold_averaged_auc(&ds, &c, 6, 4, true).unwrap_err();
        assert!(matches!(err, Error::NoUsableFolds));
    }

    #[test]
    fn errors_on_degenerate_input() {
        let ds = balanced(5, 0);
        let c = ConstantLearner::new(0.0);
        assert!(matches!(loo_auc(&ds, &c, 0), Err(Error::EmptyClass(_))));
        assert!(matches!(lpo_auc(&ds, &c, 0), Err(Error::EmptyClass(_))));
        let two = balanced(1, 1);
        assert!(matches!(lpo_auc(&two, &c, 0), Err(Error::TooFewRows { .. })));
        assert!(loo_auc(&two, &c, 0).is_ok());
    }
}
