//! Repetition sweeps over synthetic or subsampled data.
//!
//! Each repetition draws a training sample, computes the requested
//! cross-validation estimates for every learner, trains a final model on
//! the whole sample and measures its true AUC: exactly 0.5 for non-signal
//! designs, otherwise the WMW AUC on a fresh test draw (synthetic) or on
//! the units left out of the draw (subsample). Repetitions may run in
//! parallel; aggregation always folds them in repetition order.

mod report;
mod stats;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{manifest, write_outputs, write_report_csv, REPORT_COLUMNS};
pub use stats::OnlineStats;

use crate::crossval::{
    complete_pair_predictions_with, kfold_averaged_auc_with, kfold_pooled_auc_with, loo_auc_with,
    lpo_auc_with,
};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{Learner, LearnerSpec};
use crate::roc::{wmw_auc, ScoredSample};
use crate::scalar::Scalar;
use crate::seed::{mix_seed, rng, tag};
use crate::synth::{generate, SynthSpec, UnitSampler};
use crate::tournament::{build_tournament, consistency, tlpo_auc, tournament_scores};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Loo,
    Lpo,
    Tlpo,
    KfoldPooled,
    KfoldAveraged,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::Loo,
        Estimator::Lpo,
        Estimator::Tlpo,
        Estimator::KfoldPooled,
        Estimator::KfoldAveraged,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Loo => "loo",
            Estimator::Lpo => "lpo",
            Estimator::Tlpo => "tlpo",
            Estimator::KfoldPooled => "kfold-pooled",
            Estimator::KfoldAveraged => "kfold-averaged",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown estimator `{s}`")))
    }

    /// Parses a comma-separated list, keeping order and dropping repeats.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let e = Self::parse(part)?;
            if !out.contains(&e) {
                out.push(e);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("no estimators requested".into()));
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KfoldSettings {
    pub k: usize,
    pub stratified: bool,
}

impl Default for KfoldSettings {
    fn default() -> Self {
        Self {
            k: 5,
            stratified: true,
        }
    }
}

/// What every cell of a sweep runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPlan {
    pub learners: Vec<LearnerSpec>,
    pub estimators: Vec<Estimator>,
    pub repetitions: usize,
    pub n_test: usize,
    pub seed: u64,
    pub kfold: KfoldSettings,
}

impl CellPlan {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be >= 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("no estimators requested".into()));
        }
        if self.learners.is_empty() {
            return Err(Error::Config("no learners requested".into()));
        }
        Ok(())
    }
}

/// Parameters identifying a cell in the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    /// `synthetic` or `subsample`.
    pub source: String,
    pub m: usize,
    pub pos_fraction: f64,
    pub d: usize,
    pub signal_features: Option<usize>,
    pub mu: Option<f64>,
}

impl CellParams {
    pub fn synthetic(spec: &SynthSpec) -> Self {
        Self {
            source: "synthetic".into(),
            m: spec.m,
            pos_fraction: spec.pos_fraction,
            d: spec.d,
            signal_features: Some(spec.signal_features),
            mu: Some(spec.mu),
        }
    }

    fn describe(&self) -> String {
        format!(
            "{} cell m={} pos_fraction={} d={} signal={}",
            self.source,
            self.m,
            self.pos_fraction,
            self.d,
            self.signal_features.map_or("-".to_string(), |s| s.to_string())
        )
    }
}

/// Aggregate over repetitions for one (cell, learner, estimator).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub cell: CellParams,
    pub learner: String,
    pub estimator: Estimator,
    pub mean_auc: f64,
    pub var_auc: f64,
    /// Mean of estimate minus true AUC.
    pub mean_delta: f64,
    pub var_delta: f64,
    pub mean_xi: Option<f64>,
    pub mean_ties_broken: Option<f64>,
    pub reps: usize,
}

/// Estimates from one repetition for one learner.
#[derive(Clone, Debug, PartialEq)]
struct LearnerOutcome {
    truth: f64,
    /// Parallel to the plan's estimators.
    estimates: Vec<f64>,
    xi: Option<f64>,
    ties_broken: Option<f64>,
}

/// Where a cell's training samples and true AUCs come from.
pub enum CellSource<'a, T> {
    Synthetic(SynthSpec),
    /// Draw `take` units without replacement from `data`, `round(pos_fraction
    /// * take)` of them positive; the true AUC is measured on the rest.
    Subsample {
        data: &'a Dataset<T>,
        take: usize,
        pos_fraction: f64,
    },
}

impl<T: Scalar> CellSource<'_, T> {
    pub fn params(&self) -> CellParams {
        match self {
            CellSource::Synthetic(spec) => CellParams::synthetic(spec),
            CellSource::Subsample {
                data,
                take,
                pos_fraction,
            } => CellParams {
                source: "subsample".into(),
                m: *take,
                pos_fraction: *pos_fraction,
                d: data.dim(),
                signal_features: None,
                mu: None,
            },
        }
    }

    fn key(&self) -> u64 {
        let p = self.params();
        mix_seed(
            tag::CELL,
            &[
                p.m as u64,
                p.pos_fraction.to_bits(),
                p.d as u64,
                p.signal_features.map_or(u64::MAX, |s| s as u64),
                p.mu.unwrap_or(f64::NAN).to_bits(),
            ],
        )
    }

    fn validate(&self) -> Result<()> {
        match self {
            CellSource::Synthetic(spec) => spec.validate(),
            CellSource::Subsample {
                data,
                take,
                pos_fraction,
            } => {
                let pos = subsample_positives(*take, *pos_fraction);
                let (have_pos, have_neg) = data.class_counts();
                if pos == 0 || pos >= *take {
                    return Err(Error::Config(format!(
                        "{pos} positives out of {take} leaves a class empty"
                    )));
                }
                if pos > have_pos || take - pos > have_neg {
                    return Err(Error::Config(format!(
                        "cannot draw {pos} positives and {} negatives from {have_pos}/{have_neg}",
                        take - pos
                    )));
                }
                if *take >= data.len() {
                    return Err(Error::Config("subsample leaves no units for the true AUC".into()));
                }
                Ok(())
            }
        }
    }
}

fn subsample_positives(take: usize, pos_fraction: f64) -> usize {
    ((pos_fraction * take as f64) + 0.5).floor() as usize
}

/// Training sample for one repetition, with the held-back units when
/// subsampling.
struct Draw<T> {
    train: Dataset<T>,
    rest: Option<Dataset<T>>,
    spec: Option<SynthSpec>,
}

fn draw<T: Scalar>(source: &CellSource<'_, T>, rep_seed: u64) -> Result<Draw<T>> {
    match source {
        CellSource::Synthetic(spec) => {
            let spec = spec.clone().with_seed(rep_seed);
            Ok(Draw {
                train: generate(&spec)?,
                rest: None,
                spec: Some(spec),
            })
        }
        CellSource::Subsample {
            data,
            take,
            pos_fraction,
        } => {
            let pos_needed = subsample_positives(*take, *pos_fraction);
            let mut r = rng(mix_seed(rep_seed, &[tag::SUBSAMPLE]));
            let mut pos = data.positives();
            let mut neg = data.negatives();
            pos.shuffle(&mut r);
            neg.shuffle(&mut r);
            let mut chosen: Vec<usize> = pos[..pos_needed]
                .iter()
                .chain(&neg[..take - pos_needed])
                .copied()
                .collect();
            chosen.sort_unstable();
            let train = data.select(&chosen)?;
            let rest = data.subset_excluding(&chosen)?.data;
            Ok(Draw {
                train,
                rest: Some(rest),
                spec: None,
            })
        }
    }
}

const TEST_CHUNK: usize = 512;

/// True AUC of the final model trained on the whole draw.
fn true_auc<T: Scalar>(
    learner: &dyn Learner<T>,
    draw: &Draw<T>,
    n_test: usize,
    rep_seed: u64,
) -> Result<f64> {
    if let Some(spec) = &draw.spec {
        if !spec.is_signal() {
            return Ok(0.5);
        }
    }
    let model = learner.fit(&draw.train, mix_seed(rep_seed, &[tag::FINAL_MODEL]))?;
    let (scores, labels) = match (&draw.rest, &draw.spec) {
        (Some(rest), _) => (
            rest.rows().map(|r| model.predict(r)).collect::<Vec<T>>(),
            rest.labels().to_vec(),
        ),
        (None, Some(spec)) => {
            let mut sampler = UnitSampler::test(spec, n_test);
            let mut scores = Vec::with_capacity(n_test);
            let mut labels = Vec::with_capacity(n_test);
            let mut buf: Vec<T> = Vec::with_capacity(TEST_CHUNK * spec.d);
            loop {
                buf.clear();
                let before = labels.len();
                while labels.len() - before < TEST_CHUNK {
                    match sampler.next_into(&mut buf) {
                        Some(l) => labels.push(l),
                        None => break,
                    }
                }
                if labels.len() == before {
                    break;
                }
                scores.extend(buf.chunks_exact(spec.d).map(|r| model.predict(r)));
            }
            (scores, labels)
        }
        (None, None) => unreachable!("draw has neither a spec nor held-back units"),
    };
    Ok(wmw_auc(&ScoredSample::new(scores, labels)?)?.as_f64())
}

fn run_learner<T: Scalar>(
    learner: &dyn Learner<T>,
    draw: &Draw<T>,
    plan: &CellPlan,
    rep_seed: u64,
) -> Result<LearnerOutcome> {
    let ds = &draw.train;
    let hold_out = learner.hold_out(ds)?;
    let hold_out = hold_out.as_ref();
    let wants = |e| plan.estimators.contains(&e);

    // LPO rounds are a subset of the tournament's, with the same seeds.
    let table = if wants(Estimator::Tlpo) {
        Some(complete_pair_predictions_with(ds, hold_out, rep_seed)?)
    } else {
        None
    };
    let mut xi = None;
    let mut ties_broken = None;
    let mut estimates = Vec::with_capacity(plan.estimators.len());
    for &est in &plan.estimators {
        let auc: T = match est {
            Estimator::Loo => loo_auc_with(ds, hold_out, rep_seed)?,
            Estimator::Lpo => match &table {
                Some(t) => t.lpo_auc(ds.labels())?,
                None => lpo_auc_with(ds, hold_out, rep_seed)?,
            },
            Estimator::Tlpo => {
                let g = build_tournament(table.as_ref().expect("table built for tlpo"));
                let report = consistency(&g);
                xi = Some(report.xi);
                ties_broken = Some(report.ties_broken as f64);
                tlpo_auc(&tournament_scores(&g), ds.labels())?
            }
            Estimator::KfoldPooled => {
                kfold_pooled_auc_with(ds, hold_out, plan.kfold.k, rep_seed, plan.kfold.stratified)?
            }
            Estimator::KfoldAveraged => {
                kfold_averaged_auc_with(ds, hold_out, plan.kfold.k, rep_seed, plan.kfold.stratified)?.0
            }
        };
        estimates.push(auc.as_f64());
    }
    Ok(LearnerOutcome {
        truth: true_auc(learner, draw, plan.n_test, rep_seed)?,
        estimates,
        xi,
        ties_broken,
    })
}

/// Seed of repetition `rep` of the cell `key`.
fn rep_seed(master: u64, key: u64, rep: usize) -> u64 {
    mix_seed(master, &[key, rep as u64])
}

/// Runs `plan.repetitions` repetitions of one cell for every learner and
/// returns one report per (learner, estimator), learners outermost.
pub fn run_cell<T: Scalar>(source: &CellSource<'_, T>, plan: &CellPlan) -> Result<Vec<EstimateReport>> {
    plan.validate()?;
    let params = source.params();
    source.validate().map_err(|e| e.context(params.describe()))?;
    let learners: Vec<Box<dyn Learner<T>>> = plan
        .learners
        .iter()
        .map(|l| l.build())
        .collect::<Result<_>>()?;
    let key = source.key();

    let outcomes: Vec<Vec<LearnerOutcome>> = (0..plan.repetitions)
        .into_par_iter()
        .map(|rep| {
            let seed = rep_seed(plan.seed, key, rep);
            let draw = draw(source, seed)?;
            learners
                .iter()
                .map(|l| {
                    run_learner(l.as_ref(), &draw, plan, seed).map_err(|e| {
                        e.context(format!("{}, learner {}, repetition {rep}", params.describe(), l.name()))
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut reports = Vec::new();
    for (li, spec) in plan.learners.iter().enumerate() {
        for (ei, &estimator) in plan.estimators.iter().enumerate() {
            let mut auc = OnlineStats::new();
            let mut delta = OnlineStats::new();
            let mut xi = OnlineStats::new();
            let mut ties = OnlineStats::new();
            for rep in &outcomes {
                let o = &rep[li];
                auc.push(o.estimates[ei]);
                delta.push(o.estimates[ei] - o.truth);
                if estimator == Estimator::Tlpo {
                    xi.push(o.xi.expect("tlpo records xi"));
                    ties.push(o.ties_broken.expect("tlpo records ties"));
                }
            }
            reports.push(EstimateReport {
                cell: params.clone(),
                learner: spec.name().to_string(),
                estimator,
                mean_auc: auc.mean(),
                var_auc: auc.variance(),
                mean_delta: delta.mean(),
                var_delta: delta.variance(),
                mean_xi: (xi.count() > 0).then(|| xi.mean()),
                mean_ties_broken: (ties.count() > 0).then(|| ties.mean()),
                reps: plan.repetitions,
            });
        }
    }
    Ok(reports)
}

/// A synthetic sweep: every cell runs the same plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub cells: Vec<SynthSpec>,
    pub plan: CellPlan,
}

pub const STANDARD_FRACTIONS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
/// `(features, signal features)` of the four synthetic designs.
pub const STANDARD_DESIGNS: [(usize, usize); 4] = [(10, 0), (1000, 0), (10, 1), (1000, 10)];

impl ExperimentConfig {
    /// Cartesian product of designs and positive fractions at `m` units.
    pub fn grid(m: usize, fractions: &[f64], designs: &[(usize, usize)], plan: CellPlan) -> Self {
        let cells = designs
            .iter()
            .flat_map(|&(d, s)| fractions.iter().map(move |&f| SynthSpec::new(m, f, d, s)))
            .collect();
        Self { cells, plan }
    }

    /// 30 units, 10-50% positives, four designs, ridge and KNN, LOO/LPO/TLPO.
    pub fn standard_synthetic(repetitions: usize, n_test: usize, seed: u64) -> Self {
        let plan = CellPlan {
            learners: vec![
                LearnerSpec::parse("ridge", seed).expect("builtin"),
                LearnerSpec::parse("knn", seed).expect("builtin"),
            ],
            estimators: vec![Estimator::Loo, Estimator::Lpo, Estimator::Tlpo],
            repetitions,
            n_test,
            seed,
            kfold: KfoldSettings::default(),
        };
        Self::grid(30, &STANDARD_FRACTIONS, &STANDARD_DESIGNS, plan)
    }
}

/// A cell that could not be completed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell: CellParams,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub reports: Vec<EstimateReport>,
    pub failures: Vec<CellFailure>,
}

impl GridOutcome {
    fn push(&mut self, params: CellParams, result: Result<Vec<EstimateReport>>) {
        match result {
            Ok(r) => self.reports.extend(r),
            Err(e) => self.failures.push(CellFailure {
                cell: params,
                error: e.to_string(),
            }),
        }
    }
}

/// Runs every cell in order; a failing cell is recorded and skipped.
pub fn run_grid<T: Scalar>(cfg: &ExperimentConfig) -> Result<GridOutcome> {
    cfg.plan.validate()?;
    let mut out = GridOutcome::default();
    for spec in &cfg.cells {
        let source = CellSource::<T>::Synthetic(spec.clone());
        out.push(source.params(), run_cell(&source, &cfg.plan));
    }
    Ok(out)
}

/// Repeated subsampling of an ingested dataset at each positive fraction.
pub fn run_subsample<T: Scalar>(
    data: &Dataset<T>,
    take: usize,
    fractions: &[f64],
    plan: &CellPlan,
) -> Result<GridOutcome> {
    plan.validate()?;
    let mut out = GridOutcome::default();
    for &pos_fraction in fractions {
        let source = CellSource::Subsample {
            data,
            take,
            pos_fraction,
        };
        out.push(source.params(), run_cell(&source, plan));
    }
    Ok(out)
}
