//! `tlpo`: synthetic data, cross-validated AUC estimates, ROC plot data and
//! Monte-Carlo replication of estimator bias and variance.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use tlpo::crossval::{complete_pair_predictions, kfold_averaged_auc, kfold_pooled_auc, loo_auc};
use tlpo::harness::{
    run_grid, run_subsample, write_outputs, CellPlan, Estimator, ExperimentConfig, GridOutcome, KfoldSettings,
    STANDARD_DESIGNS, STANDARD_FRACTIONS,
};
use tlpo::roc::write_roc_csv;
use tlpo::seed::{mix_seed, tag};
use tlpo::{
    build_tournament, consistency, generate, generate_test_set, roc_curve, tlpo_auc, tournament_scores, Dataset64,
    LearnerSpec, ScoredSample, SynthSpec,
};

#[derive(Parser)]
#[command(name = "tlpo", version, about = "Cross-validated AUC estimation with tournament leave-pair-out")]
struct Cli {
    /// Master seed; every output is a function of the flags and this value.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the number of cores). Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file, or directory for `experiment`. Standard output when omitted.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Gaussian dataset as CSV.
    Synth(SynthArgs),
    /// Estimate the AUC of a learner on a CSV dataset.
    Eval(EvalArgs),
    /// Emit ROC curve points for plotting.
    Roc(RocArgs),
    /// Run a repeated-sampling bias/variance study.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    pos_fraction: f64,
    #[arg(long)]
    d: usize,
    /// Number of features whose positive-class mean is shifted.
    #[arg(long, default_value_t = 0)]
    signal: usize,
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    /// Also write an independent test set of this many rows.
    #[arg(long, requires = "test_output")]
    test_rows: Option<usize>,
    #[arg(long, requires = "test_rows")]
    test_output: Option<PathBuf>,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "label")]
    label_column: String,
}

#[derive(Args)]
struct LearnerArgs {
    /// ridge | ridge-centered | knn | constant | classfreq | random
    #[arg(long, default_value = "ridge")]
    learner: String,
    /// Ridge regularization.
    #[arg(long)]
    lambda: Option<f64>,
    /// KNN neighbour count.
    #[arg(long)]
    k: Option<usize>,
}

impl LearnerArgs {
    fn spec(&self, seed: u64) -> Result<LearnerSpec> {
        let mut spec = LearnerSpec::parse(&self.learner, seed)?;
        match &mut spec {
            LearnerSpec::Ridge { lambda, .. } => {
                if let Some(l) = self.lambda {
                    *lambda = l;
                }
            }
            LearnerSpec::Knn { k, .. } => {
                if let Some(n) = self.k {
                    *k = n;
                }
            }
            _ => {}
        }
        if self.lambda.is_some() && !matches!(spec, LearnerSpec::Ridge { .. }) {
            bail!("--lambda only applies to ridge");
        }
        if self.k.is_some() && !matches!(spec, LearnerSpec::Knn { .. }) {
            bail!("--k only applies to knn");
        }
        Ok(spec)
    }
}

#[derive(Args)]
struct KfoldArgs {
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    stratified: bool,
}

impl KfoldArgs {
    fn settings(&self) -> KfoldSettings {
        KfoldSettings {
            k: self.folds,
            stratified: self.stratified,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    learner: LearnerArgs,
    /// Comma-separated: loo, lpo, tlpo, kfold-pooled, kfold-averaged.
    #[arg(long, default_value = "loo,lpo,tlpo")]
    estimators: String,
    #[command(flatten)]
    kfold: KfoldArgs,
    /// Write the tournament outcomes (i,j,outcome).
    #[arg(long)]
    tournament_csv: Option<PathBuf>,
    /// Write the tournament scores (unit,score,label).
    #[arg(long)]
    scores_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RocMode {
    /// Rank the input units by tournament score.
    Tlpo,
    /// Train on the input and score a held-out file.
    Test,
}

#[derive(Args)]
struct RocArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    learner: LearnerArgs,
    #[arg(long, value_enum, default_value_t = RocMode::Tlpo)]
    mode: RocMode,
    /// Held-out CSV for `--mode test`.
    #[arg(long, required_if_eq("mode", "test"))]
    test: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// 30 units, 10-50% positives, four designs, ridge and KNN, LOO/LPO/TLPO.
    PaperSynthetic,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum, conflicts_with_all = ["subsample", "m", "fractions", "design", "learners", "estimators"])]
    preset: Option<Preset>,
    /// Repeatedly subsample this CSV instead of generating data.
    #[arg(long)]
    subsample: Option<PathBuf>,
    #[arg(long, default_value = "label", requires = "subsample")]
    label_column: String,
    /// Units drawn per repetition in subsample mode.
    #[arg(long, default_value_t = 30, requires = "subsample")]
    take: usize,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Test-set size for the true AUC of signal cells.
    #[arg(long, default_value_t = 10_000)]
    n_test: usize,
    /// Training-set size of synthetic cells.
    #[arg(long, conflicts_with = "subsample")]
    m: Option<usize>,
    /// Comma-separated positive fractions.
    #[arg(long)]
    fractions: Option<String>,
    /// Design as `features:signal_features`; repeatable.
    #[arg(long, conflicts_with = "subsample")]
    design: Vec<String>,
    #[arg(long)]
    learners: Option<String>,
    #[arg(long)]
    estimators: Option<String>,
    #[command(flatten)]
    kfold: KfoldArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be >= 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Synth(a) => synth(a, cli.seed, out),
        Command::Eval(a) => eval(a, cli.seed, out),
        Command::Roc(a) => roc(a, cli.seed, out),
        Command::Experiment(a) => experiment(a, cli.seed, out),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(data: &DataArgs) -> Result<Dataset64> {
    Ok(Dataset64::load_csv(&data.input, &data.label_column)?)
}

fn synth(a: &SynthArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let spec = SynthSpec {
        mu: a.mu,
        ..SynthSpec::new(a.m, a.pos_fraction, a.d, a.signal).with_seed(seed)
    };
    let ds: Dataset64 = generate(&spec)?;
    let mut w = sink(out)?;
    ds.write_csv(&mut w, "label")?;
    w.flush()?;
    if let (Some(n), Some(path)) = (a.test_rows, &a.test_output) {
        let test: Dataset64 = generate_test_set(&spec, n)?;
        test.save_csv(path, "label")?;
    }
    Ok(())
}

/// Rejects values a strict JSON parser would not accept.
fn finite(x: f64, what: &str) -> Result<Value> {
    if !x.is_finite() {
        bail!("{what} is not finite ({x})");
    }
    Ok(json!(x))
}

fn eval(a: &EvalArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let ds = load(&a.data)?;
    let estimators = Estimator::parse_list(&a.estimators)?;
    let spec = a.learner.spec(seed)?;
    let learner = spec.build::<f64>()?;
    let kfold = a.kfold.settings();
    let wants_table = estimators.contains(&Estimator::Tlpo) || a.tournament_csv.is_some() || a.scores_csv.is_some();
    let table = if wants_table {
        Some(complete_pair_predictions(&ds, learner.as_ref(), seed)?)
    } else {
        None
    };

    let mut estimates = Map::new();
    let mut doc = Map::new();
    for &e in &estimators {
        let auc = match e {
            Estimator::Loo => loo_auc(&ds, learner.as_ref(), seed)?,
            Estimator::Lpo => match &table {
                Some(t) => t.lpo_auc(ds.labels())?,
                None => tlpo::lpo_auc(&ds, learner.as_ref(), seed)?,
            },
            Estimator::Tlpo => {
                let scores = tournament_scores(&build_tournament(table.as_ref().expect("table built for tlpo")));
                tlpo_auc(&scores, ds.labels())?
            }
            Estimator::KfoldPooled => kfold_pooled_auc(&ds, learner.as_ref(), kfold.k, seed, kfold.stratified)?,
            Estimator::KfoldAveraged => {
                let (auc, usable) = kfold_averaged_auc(&ds, learner.as_ref(), kfold.k, seed, kfold.stratified)?;
                doc.insert("kfold_usable_folds".into(), json!(usable));
                auc
            }
        };
        estimates.insert(e.name().into(), finite(auc, e.name())?);
    }

    if let Some(table) = &table {
        let graph = build_tournament(table);
        let scores = tournament_scores(&graph);
        let report = consistency(&graph);
        if estimators.contains(&Estimator::Tlpo) {
            let values: Vec<Value> = scores.values::<f64>().into_iter().map(|s| json!(s)).collect();
            doc.insert(
                "tlpo".into(),
                json!({
                    "xi": finite(report.xi, "xi")?,
                    "ties_broken": report.ties_broken,
                    "circular_triads": report.c,
                    "max_circular_triads": report.c_max,
                    "scores": values,
                }),
            );
        }
        if let Some(path) = &a.tournament_csv {
            graph.write_csv(File::create(path).with_context(|| format!("creating {}", path.display()))?)?;
        }
        if let Some(path) = &a.scores_csv {
            scores.write_csv(ds.labels(), File::create(path).with_context(|| format!("creating {}", path.display()))?)?;
        }
    }

    let (pos, neg) = ds.class_counts();
    doc.insert("input".into(), json!(a.data.input.display().to_string()));
    doc.insert("learner".into(), serde_json::to_value(&spec)?);
    doc.insert("seed".into(), json!(seed));
    doc.insert("units".into(), json!(ds.len()));
    doc.insert("positives".into(), json!(pos));
    doc.insert("negatives".into(), json!(neg));
    doc.insert("estimates".into(), Value::Object(estimates));

    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, &Value::Object(doc))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn roc(a: &RocArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let ds = load(&a.data)?;
    let learner = a.learner.spec(seed)?.build::<f64>()?;
    let sample = match a.mode {
        RocMode::Tlpo => {
            let table = complete_pair_predictions(&ds, learner.as_ref(), seed)?;
            let scores = tournament_scores(&build_tournament(&table));
            ScoredSample::new(scores.values(), ds.labels().to_vec())?
        }
        RocMode::Test => {
            let path = a.test.as_ref().context("--mode test needs --test")?;
            let test = Dataset64::load_csv(path, &a.data.label_column)?;
            if test.dim() != ds.dim() {
                bail!("test set has {} features, training set {}", test.dim(), ds.dim());
            }
            let model = learner.fit(&ds, mix_seed(seed, &[tag::FINAL_MODEL]))?;
            let scores = test.rows().map(|x| model.predict(x)).collect();
            ScoredSample::new(scores, test.labels().to_vec())?
        }
    };
    let curve = roc_curve(&sample)?;
    let mut w = sink(out)?;
    write_roc_csv(&curve, &mut w)?;
    w.flush()?;
    eprintln!("auc {}", curve.auc);
    Ok(())
}

#[derive(Serialize)]
struct SubsampleConfig<'a> {
    source: String,
    label_column: &'a str,
    take: usize,
    fractions: &'a [f64],
    plan: &'a CellPlan,
}

fn parse_fractions(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|f| f.trim().parse::<f64>().with_context(|| format!("bad fraction `{f}`")))
        .collect()
}

fn parse_design(s: &str) -> Result<(usize, usize)> {
    let (d, sig) = s.split_once(':').with_context(|| format!("design `{s}` is not `features:signal`"))?;
    Ok((d.trim().parse()?, sig.trim().parse()?))
}

fn experiment(a: &ExperimentArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let dir = out.context("experiment needs -o/--output DIR")?;
    let learners = match &a.learners {
        Some(list) => list.split(',').map(|l| LearnerSpec::parse(l, seed)).collect::<Result<Vec<_>, _>>()?,
        None => vec![LearnerSpec::parse("ridge", seed)?, LearnerSpec::parse("knn", seed)?],
    };
    let estimators = match &a.estimators {
        Some(list) => Estimator::parse_list(list)?,
        None => vec![Estimator::Loo, Estimator::Lpo, Estimator::Tlpo],
    };
    let fractions = match &a.fractions {
        Some(list) => parse_fractions(list)?,
        None => STANDARD_FRACTIONS.to_vec(),
    };
    let plan = CellPlan {
        learners,
        estimators,
        repetitions: a.reps,
        n_test: a.n_test,
        seed,
        kfold: a.kfold.settings(),
    };

    let outcome = if let Some(path) = &a.subsample {
        let data = Dataset64::load_csv(path, &a.label_column)?;
        let outcome = run_subsample(&data, a.take, &fractions, &plan)?;
        let config = SubsampleConfig {
            source: path.display().to_string(),
            label_column: &a.label_column,
            take: a.take,
            fractions: &fractions,
            plan: &plan,
        };
        write_outputs(dir, &config, seed, &outcome)?;
        outcome
    } else {
        let config = match a.preset {
            Some(Preset::PaperSynthetic) => ExperimentConfig::standard_synthetic(a.reps, a.n_test, seed),
            None => {
                let designs = if a.design.is_empty() {
                    STANDARD_DESIGNS.to_vec()
                } else {
                    a.design.iter().map(|d| parse_design(d)).collect::<Result<_>>()?
                };
                ExperimentConfig::grid(a.m.unwrap_or(30), &fractions, &designs, plan)
            }
        };
        let outcome = run_grid::<f64>(&config)?;
        write_outputs(dir, &config, seed, &outcome)?;
        outcome
    };
    summarize(&outcome, dir)
}

fn summarize(outcome: &GridOutcome, dir: &Path) -> Result<()> {
    for f in &outcome.failures {
        eprintln!(
            "cell {} m={} pos_fraction={} d={} failed: {}",
            f.cell.source, f.cell.m, f.cell.pos_fraction, f.cell.d, f.error
        );
    }
    eprintln!(
        "{} rows, {} failed cells, written to {}",
        outcome.reports.len(),
        outcome.failures.len(),
        fs::canonicalize(dir).unwrap_or_else(|_| dir.to_path_buf()).display()
    );
    if outcome.reports.is_empty() && !outcome.failures.is_empty() {
        bail!("every cell failed");
    }
    Ok(())
}
