use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::learners::{HoldOut, Learner, TrainedModel};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnnConfig<T> {
    pub k: usize,
    /// Added to every distance before inversion.
    pub epsilon: T,
}

impl<T: Scalar> Default for KnnConfig<T> {
    fn default() -> Self {
        Self {
            k: 3,
            epsilon: T::of(1e-12),
        }
    }
}

fn check<T: Scalar>(cfg: &KnnConfig<T>) -> Result<()> {
    if cfg.k == 0 {
        return Err(Error::Config("knn k must be >= 1".into()));
    }
    if !(cfg.epsilon > T::zero()) || !cfg.epsilon.is_finite() {
        return Err(Error::Config(format!("knn epsilon must be > 0, got {}", cfg.epsilon)));
    }
    Ok(())
}

fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

/// Inverse-distance vote of the `k` nearest candidates: positives add
/// `1/(dist+eps)`, negatives subtract it. Distance ties go to the earlier
/// candidate.
fn vote<T: Scalar>(candidates: &mut [(T, usize, Label)], cfg: &KnnConfig<T>) -> T {
    let k = cfg.k.min(candidates.len());
    candidates.sort_by(|a, b| a.0.order(&b.0).then(a.1.cmp(&b.1)));
    candidates[..k].iter().fold(T::zero(), |acc, &(dist, _, label)| {
        let w = T::one() / (dist + cfg.epsilon);
        if label.is_positive() {
            acc + w
        } else {
            acc - w
        }
    })
}

/// Stores the training sample; prediction is an inverse-distance weighted
/// vote over the nearest neighbours.
#[derive(Clone, Debug)]
pub struct KnnModel<T> {
    train: Dataset<T>,
    cfg: KnnConfig<T>,
}

impl<T: Scalar> TrainedModel<T> for KnnModel<T> {
    fn predict(&self, x: &[T]) -> T {
        let mut cands: Vec<_> = self
            .train
            .rows()
            .zip(self.train.labels())
            .enumerate()
            .map(|(i, (row, &label))| (euclidean(x, row), i, label))
            .collect();
        vote(&mut cands, &self.cfg)
    }
}

pub fn knn_fit<T: Scalar>(ds: &Dataset<T>, cfg: &KnnConfig<T>) -> Result<KnnModel<T>> {
    check(cfg)?;
    Ok(KnnModel {
        train: ds.clone(),
        cfg: *cfg,
    })
}

#[derive(Clone, Debug)]
pub struct Knn<T> {
    cfg: KnnConfig<T>,
}

impl<T: Scalar> Knn<T> {
    pub fn new(cfg: KnnConfig<T>) -> Result<Self> {
        check(&cfg)?;
        Ok(Self { cfg })
    }
}

impl<T: Scalar> Learner<T> for Knn<T> {
    fn name(&self) -> &'static str {
        "knn"
    }

    fn fit(&self, train: &Dataset<T>, _seed: u64) -> Result<Box<dyn TrainedModel<T>>> {
        Ok(Box::new(knn_fit(train, &self.cfg)?))
    }

    fn hold_out<'a>(&'a self, ds: &'a Dataset<T>) -> Result<Box<dyn HoldOut<T> + 'a>> {
        let m = ds.len();
        let mut dist = vec![T::zero(); m * m];
        for q in 0..m {
            for t in 0..m {
                dist[q * m + t] = euclidean(ds.row(q), ds.row(t));
            }
        }
        Ok(Box::new(KnnHoldOut {
            ds,
            dist,
            cfg: self.cfg,
        }))
    }
}

/// Same votes as retraining, read from a precomputed distance matrix.
struct KnnHoldOut<'a, T> {
    ds: &'a Dataset<T>,
    dist: Vec<T>,
    cfg: KnnConfig<T>,
}

impl<T: Scalar> HoldOut<T> for KnnHoldOut<'_, T> {
    fn predict_held_out(&self, held_out: &[usize], _seed: u64) -> Result<Vec<T>> {
        let m = self.ds.len();
        let mut excluded = vec![false; m];
        for &u in held_out {
            if u >= m {
                return Err(Error::IndexOutOfRange { index: u, m });
            }
            excluded[u] = true;
        }
        if excluded.iter().all(|&e| e) {
            return Err(Error::ExcludeAll(m));
        }
        let mut cands = Vec::with_capacity(m);
        Ok(held_out
            .iter()
            .map(|&q| {
                cands.clear();
                cands.extend(
                    (0..m)
                        .filter(|&t| !excluded[t])
                        .enumerate()
                        .map(|(rank, t)| (self.dist[q * m + t], rank, self.ds.label(t))),
                );
                vote(&mut cands, &self.cfg)
            })
            .collect())
    }
}
