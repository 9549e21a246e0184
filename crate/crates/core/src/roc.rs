//! Pairwise comparison scoring, the Wilcoxon-Mann-Whitney AUC, ROC curves
//! and confusion counts.
//!
//! Raw scores are compared exactly: equal scores are a tie worth one half,
//! both in [`wmw_auc`] and as the diagonal segments of [`roc_curve`].

use std::cmp::Ordering;
use std::io::Write;

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Step function scoring one comparison: `1` above zero, `0.5` at zero,
/// `0` below.
pub fn heaviside<T: Scalar>(a: T) -> Result<T> {
    match a.partial_cmp(&T::zero()) {
        Some(Ordering::Greater) => Ok(T::one()),
        Some(Ordering::Equal) => Ok(T::of(0.5)),
        Some(Ordering::Less) => Ok(T::zero()),
        None => Err(Error::NotANumber),
    }
}

/// Twice the Heaviside value of `a - b`, as an integer. Exact for finite
/// inputs, where `a - b` and `a.cmp(b)` agree in sign.
#[inline]
pub(crate) fn half_points<T: Scalar>(a: T, b: T) -> u64 {
    if a > b {
        2
    } else if a == b {
        1
    } else {
        0
    }
}

/// Predictions paired with class marks.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredSample<T> {
    scores: Vec<T>,
    labels: Vec<Label>,
}

impl<T: Scalar> ScoredSample<T> {
    pub fn new(scores: Vec<T>, labels: Vec<Label>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} scores for {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::NotANumber);
        }
        Ok(Self { scores, labels })
    }

    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// `(n_pos, n_neg)`, or an error if either is zero.
    fn both_classes(&self) -> Result<(usize, usize)> {
        let pos = self.labels.iter().filter(|l| l.is_positive()).count();
        let neg = self.labels.len() - pos;
        if pos == 0 {
            return Err(Error::EmptyClass("positive"));
        }
        if neg == 0 {
            return Err(Error::EmptyClass("negative"));
        }
        Ok((pos, neg))
    }

    /// Units sorted by score (ascending), grouped into runs of equal score.
    /// Yields `(score, positives, negatives)` per run.
    fn tie_groups(&self, descending: bool) -> Vec<(T, u64, u64)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.scores[a].order(&self.scores[b]));
        if descending {
            order.reverse();
        }
        let mut groups: Vec<(T, u64, u64)> = Vec::new();
        for i in order {
            let s = self.scores[i];
            let is_pos = self.labels[i].is_positive();
            match groups.last_mut() {
                Some(g) if g.0 == s => {
                    if is_pos {
                        g.1 += 1
                    } else {
                        g.2 += 1
                    }
                }
                _ => groups.push((s, is_pos as u64, (!is_pos) as u64)),
            }
        }
        groups
    }
}

/// Fraction of positive/negative pairs ordered correctly, ties counting
/// one half. Runs in `O(m log m)` by walking tie groups in score order.
pub fn wmw_auc<T: Scalar>(s: &ScoredSample<T>) -> Result<T> {
    let (pos, neg) = s.both_classes()?;
    let mut neg_below = 0u64;
    let mut half_wins = 0u128;
    for (_, p, n) in s.tie_groups(false) {
        half_wins += p as u128 * (2 * neg_below + n) as u128;
        neg_below += n;
    }
    let denom = 2 * pos as u128 * neg as u128;
    Ok(T::of(half_wins as f64 / denom as f64))
}

/// Convenience wrapper over [`wmw_auc`].
pub fn auc_of<T: Scalar>(scores: &[T], labels: &[Label]) -> Result<T> {
    wmw_auc(&ScoredSample::new(scores.to_vec(), labels.to_vec())?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    /// `tp / (tp + fn)`; `None` without positives.
    pub fn tpr(&self) -> Option<f64> {
        let p = self.tp + self.fn_;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }

    /// `fp / (fp + tn)`; `None` without negatives.
    pub fn fpr(&self) -> Option<f64> {
        let n = self.fp + self.tn;
        (n > 0).then(|| self.fp as f64 / n as f64)
    }
}

/// Classifies a unit positive iff its score is at least `t`.
pub fn classify_at<T: Scalar>(s: &ScoredSample<T>, t: T) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for (&score, label) in s.scores.iter().zip(&s.labels) {
        match (score >= t, label.is_positive()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint<T> {
    pub fpr: T,
    pub tpr: T,
    /// Units scoring at least this value are called positive. The origin
    /// carries `+inf`.
    pub threshold: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve<T> {
    pub points: Vec<RocPoint<T>>,
    /// Trapezoid area under `points`.
    pub auc: T,
}

/// Sweeps the threshold down through every distinct score. Units sharing a
/// score enter together, so ties draw a diagonal segment.
pub fn roc_curve<T: Scalar>(s: &ScoredSample<T>) -> Result<RocCurve<T>> {
    let (pos, neg) = s.both_classes()?;
    let (p, n) = (T::of_usize(pos), T::of_usize(neg));
    let groups = s.tie_groups(true);
    let mut points = Vec::with_capacity(groups.len() + 1);
    points.push(RocPoint {
        fpr: T::zero(),
        tpr: T::zero(),
        threshold: T::infinity(),
    });
    let (mut tp, mut fp) = (0u64, 0u64);
    for (score, gp, gn) in groups {
        tp += gp;
        fp += gn;
        points.push(RocPoint {
            fpr: T::of(fp as f64) / n,
            tpr: T::of(tp as f64) / p,
            threshold: score,
        });
    }
    let auc = trapezoid(&points);
    Ok(RocCurve { points, auc })
}

/// Trapezoid rule over consecutive ROC points.
pub fn trapezoid<T: Scalar>(points: &[RocPoint<T>]) -> T {
    let half = T::of(0.5);
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) * half)
        .sum()
}

/// `fpr,tpr,threshold` rows.
pub fn write_roc_csv<T: Scalar, W: Write>(curve: &RocCurve<T>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["fpr", "tpr", "threshold"])?;
    for pt in &curve.points {
        w.write_record([pt.fpr.to_string(), pt.tpr.to_string(), pt.threshold.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    fn sample(scores: &[f64], labels: &[Label]) -> ScoredSample<f64> {
        ScoredSample::new(scores.to_vec(), labels.to_vec()).unwrap()
    }

    #[test]
    fn heaviside_cases() {
        assert_eq!(heaviside(0.3).unwrap(), 1.0);
        assert_eq!(heaviside(0.0).unwrap(), 0.5);
        assert_eq!(heaviside(-0.0).unwrap(), 0.5);
        assert_eq!(heaviside(-2.0).unwrap(), 0.0);
        assert!(matches!(heaviside(f64::NAN), Err(Error::NotANumber)));
    }

    #[test]
    fn wmw_with_a_tie() {
        let s = sample(&[2.0, 3.0, 1.0, 2.0], &[P, P, N, N]);
        assert_eq!(wmw_auc(&s).unwrap(), 0.875);
    }

    #[test]
    fn wmw_extremes() {
        assert_eq!(wmw_auc(&sample(&[5.0, 6.0, 1.0, 2.0], &[P, P, N, N])).unwrap(), 1.0);
        assert_eq!(wmw_auc(&sample(&[1.0; 4], &[P, N, P, N])).unwrap(), 0.5);
        assert!(matches!(
            wmw_auc(&sample(&[1.0, 2.0], &[P, P])),
            Err(Error::EmptyClass("negative"))
        ));
        assert!(ScoredSample::new(vec![f64::NAN, 1.0], vec![P, N]).is_err());
        assert!(ScoredSample::new(vec![1.0], vec![P, N]).is_err());
    }

    #[test]
    fn classify_boundaries() {
        let s = sample(&[0.1, 0.9], &[N, P]);
        assert_eq!(classify_at(&s, 0.5), ConfusionCounts { tp: 1, fp: 0, tn: 1, fn_: 0 });
        let low = classify_at(&s, -1.0);
        assert_eq!((low.fn_, low.tn), (0, 0));
        let high = classify_at(&s, 2.0);
        assert_eq!((high.tp, high.fp), (0, 0));
        // Score equal to the threshold is called positive.
        assert_eq!(classify_at(&s, 0.9).tp, 1);
    }

    #[test]
    fn separated_curve_has_corner() {
        let curve = roc_curve(&sample(&[0.9, 0.8, 0.1, 0.2], &[P, P, N, N])).unwrap();
        assert!(curve.points.iter().any(|p| p.fpr == 0.0 && p.tpr == 1.0));
        assert_eq!(curve.auc, 1.0);
        let last = curve.points.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn constant_scores_give_diagonal() {
        let curve = roc_curve(&sample(&[0.3; 5], &[P, N, N, P, N])).unwrap();
        assert_eq!(curve.points.len(), 2);
        assert_eq!((curve.points[1].fpr, curve.points[1].tpr), (1.0, 1.0));
        assert_eq!(curve.auc, 0.5);
    }

    #[test]
    fn csv_export() {
        let curve = roc_curve(&sample(&[1.0, 0.0], &[P, N])).unwrap();
        let mut out = Vec::new();
        write_roc_csv(&curve, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "fpr,tpr,threshold\n0,0,inf\n0,1,1\n1,1,0\n");
    }
}
