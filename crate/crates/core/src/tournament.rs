//! Round-robin tournament over sample units built from complete
//! leave-pair-out predictions.
//!
//! Unit `i` beats `j` when its prediction exceeds `j`'s in the round that
//! held out both. Scores count wins with ties worth one half; the ranking
//! and the tournament AUC use those scores directly. Circular triads and
//! the coefficient of consistency need a strict tournament, so ties are
//! first resolved in favour of the lower index.

use std::io::Write;

use crate::crossval::PairPredictionTable;
use crate::dataset::{IndexPair, Label};
use crate::error::{Error, Result};
use crate::roc::{wmw_auc, ScoredSample};
use crate::scalar::Scalar;

/// Result of the match between `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// The lower-indexed unit wins.
    First,
    /// The higher-indexed unit wins.
    Second,
    Tie,
}

impl Outcome {
    fn as_str(self) -> &'static str {
        match self {
            Outcome::First => "i",
            Outcome::Second => "j",
            Outcome::Tie => "tie",
        }
    }
}

/// Complete tournament: one outcome per unordered pair, stored in
/// lexicographic `(i < j)` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TournamentGraph {
    m: usize,
    outcomes: Vec<Outcome>,
}

impl TournamentGraph {
    pub fn new(m: usize, outcomes: Vec<Outcome>) -> Result<Self> {
        if outcomes.len() != m * m.saturating_sub(1) / 2 {
            return Err(Error::Shape(format!(
                "{} outcomes for {m} units",
                outcomes.len()
            )));
        }
        Ok(Self { m, outcomes })
    }

    /// Builds a tournament from `outcome(i, j)` evaluated for every `i < j`.
    pub fn from_fn(m: usize, mut outcome: impl FnMut(usize, usize) -> Outcome) -> Self {
        let outcomes = IndexPair::all(m).map(|p| outcome(p.i, p.j)).collect();
        Self { m, outcomes }
    }

    pub fn units(&self) -> usize {
        self.m
    }

    /// Outcomes paired with their `(i, j)`, `i < j`.
    pub fn matches(&self) -> impl Iterator<Item = (IndexPair, Outcome)> + '_ {
        IndexPair::all(self.m).zip(self.outcomes.iter().copied())
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        i * (2 * self.m - i - 1) / 2 + (j - i - 1)
    }

    /// Outcome between `i < j`.
    pub fn outcome(&self, i: usize, j: usize) -> Option<Outcome> {
        (i < j && j < self.m).then(|| self.outcomes[self.slot(i, j)])
    }

    /// Whether `a` beats `b` outright (ties are not wins).
    pub fn beats(&self, a: usize, b: usize) -> bool {
        if a == b || a >= self.m || b >= self.m {
            return false;
        }
        let o = self.outcomes[self.slot(a.min(b), a.max(b))];
        if a < b {
            o == Outcome::First
        } else {
            o == Outcome::Second
        }
    }

    pub fn tie_count(&self) -> usize {
        self.outcomes.iter().filter(|&&o| o == Outcome::Tie).count()
    }

    /// Copy with every tie awarded to the lower-indexed unit.
    pub fn resolve_ties(&self) -> Self {
        Self {
            m: self.m,
            outcomes: self
                .outcomes
                .iter()
                .map(|&o| if o == Outcome::Tie { Outcome::First } else { o })
                .collect(),
        }
    }

    /// `i,j,outcome` rows with `outcome` one of `i`, `j`, `tie` (the winner).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["i", "j", "outcome"])?;
        for (p, o) in self.matches() {
            w.write_record([p.i.to_string(), p.j.to_string(), o.as_str().to_string()])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Orients each pair by the two predictions of its round.
pub fn build_tournament<T: Scalar>(table: &PairPredictionTable<T>) -> TournamentGraph {
    let outcomes = table
        .entries()
        .iter()
        .map(|e| {
            if e.score_i > e.score_j {
                Outcome::First
            } else if e.score_i < e.score_j {
                Outcome::Second
            } else {
                Outcome::Tie
            }
        })
        .collect();
    TournamentGraph {
        m: table.units(),
        outcomes,
    }
}

/// Win counts, kept as exact half-points (a win is 2, a tie 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TournamentScores {
    half_points: Vec<u64>,
}

impl TournamentScores {
    pub fn len(&self) -> usize {
        self.half_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.half_points.is_empty()
    }

    pub fn half_points(&self) -> &[u64] {
        &self.half_points
    }

    pub fn get<T: Scalar>(&self, i: usize) -> T {
        T::of(self.half_points[i] as f64 * 0.5)
    }

    pub fn values<T: Scalar>(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    /// `unit,score,label` rows, label written as `1`/`0`.
    pub fn write_csv<W: Write>(&self, labels: &[Label], writer: W) -> Result<()> {
        if labels.len() != self.len() {
            return Err(Error::Shape(format!(
                "{} labels for {} scores",
                labels.len(),
                self.len()
            )));
        }
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["unit", "score", "label"])?;
        for (u, l) in labels.iter().enumerate() {
            w.write_record([
                u.to_string(),
                self.get::<f64>(u).to_string(),
                if l.is_positive() { "1" } else { "0" }.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Out-degree of every unit, ties counting one half.
pub fn tournament_scores(g: &TournamentGraph) -> TournamentScores {
    let mut half_points = vec![0u64; g.m];
    for (p, o) in g.matches() {
        match o {
            Outcome::First => half_points[p.i] += 2,
            Outcome::Second => half_points[p.j] += 2,
            Outcome::Tie => {
                half_points[p.i] += 1;
                half_points[p.j] += 1;
            }
        }
    }
    TournamentScores { half_points }
}

/// WMW AUC with tournament scores as the predictions.
pub fn tlpo_auc<T: Scalar>(scores: &TournamentScores, labels: &[Label]) -> Result<T> {
    wmw_auc(&ScoredSample::new(scores.values(), labels.to_vec())?)
}

/// Units by descending score, equal scores by ascending index.
pub fn ranking(scores: &TournamentScores) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores.half_points[b].cmp(&scores.half_points[a]).then(a.cmp(&b)));
    order
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConsistencyReport {
    /// Circular triads after tie resolution.
    pub c: u64,
    pub c_max: u64,
    /// `1 - c / c_max`; 1 when fewer than three units.
    pub xi: f64,
    /// Ties resolved before counting.
    pub ties_broken: usize,
}

/// Largest possible number of circular triads among `m` units.
pub fn max_circular_triads(m: usize) -> u64 {
    let m = m as u64;
    if m < 3 {
        0
    } else if m % 2 == 1 {
        (m * m * m - m) / 24
    } else {
        (m * m * m - 4 * m) / 24
    }
}

/// Counts circular triads from the score sequence,
/// `c = m(m-1)(2m-1)/12 - (1/2) sum s_i^2`, after resolving ties to the
/// lower index.
pub fn consistency(g: &TournamentGraph) -> ConsistencyReport {
    let ties_broken = g.tie_count();
    let strict = tournament_scores(&g.resolve_ties());
    let m = g.m as u128;
    // sum_{k<m} k^2 = m(m-1)(2m-1)/6, so c = (that - sum s^2) / 2.
    let transitive = m * m.saturating_sub(1) * (2 * m).saturating_sub(1) / 6;
    let squares: u128 = strict
        .half_points
        .iter()
        .map(|&h| {
            let s = (h / 2) as u128;
            s * s
        })
        .sum();
    let c = ((transitive - squares) / 2) as u64;
    let c_max = max_circular_triads(g.m);
    let xi = if c_max == 0 {
        1.0
    } else {
        1.0 - c as f64 / c_max as f64
    };
    ConsistencyReport {
        c,
        c_max,
        xi,
        ties_broken,
    }
}
