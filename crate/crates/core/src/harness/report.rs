use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{EstimateReport, GridOutcome};
use crate::error::{Error, Result};

pub const REPORT_COLUMNS: [&str; 15] = [
    "source",
    "m",
    "pos_fraction",
    "d",
    "signal_features",
    "mu",
    "learner",
    "estimator",
    "mean_auc",
    "var_auc",
    "mean_delta",
    "var_delta",
    "mean_xi",
    "mean_ties_broken",
    "reps",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn check_finite(r: &EstimateReport) -> Result<()> {
    let values = [
        Some(r.mean_auc),
        Some(r.var_auc),
        Some(r.mean_delta),
        Some(r.var_delta),
        r.mean_xi,
        r.mean_ties_broken,
    ];
    if values.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "non-finite statistic for {} / {}",
            r.learner,
            r.estimator.name()
        )))
    }
}

/// One row per report, columns as in [`REPORT_COLUMNS`].
pub fn write_report_csv<W: Write>(reports: &[EstimateReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_COLUMNS)?;
    for r in reports {
        check_finite(r)?;
        let c = &r.cell;
        w.write_record([
            c.source.clone(),
            c.m.to_string(),
            c.pos_fraction.to_string(),
            c.d.to_string(),
            opt(c.signal_features),
            opt(c.mu),
            r.learner.clone(),
            r.estimator.name().to_string(),
            r.mean_auc.to_string(),
            r.var_auc.to_string(),
            r.mean_delta.to_string(),
            r.var_delta.to_string(),
            opt(r.mean_xi),
            opt(r.mean_ties_broken),
            r.reps.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Run metadata: the configuration as given, the master seed, the
/// conventions behind the statistics and a hash of the report bytes.
pub fn manifest<C: Serialize>(config: &C, seed: u64, outcome: &GridOutcome, report_csv: &[u8]) -> Result<Value> {
    let config = serde_json::to_value(config).map_err(|e| Error::Config(e.to_string()))?;
    Ok(json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "seed": seed,
        "seed_derivation": "repetition seed = mix(master seed, [cell key, repetition]); round seed = mix(repetition seed, sorted held-out units)",
        "variance": "population: sum of squared deviations divided by reps",
        "ground_truth": "0.5 for non-signal synthetic cells; WMW AUC of the final model on a test draw or on the units not subsampled otherwise",
        "rows": outcome.reports.len(),
        "failures": outcome.failures,
        "report_sha256": hex::encode(Sha256::digest(report_csv)),
    }))
}

/// Writes `report.csv` and `manifest.json` into `dir`, creating it.
pub fn write_outputs<C: Serialize>(dir: &Path, config: &C, seed: u64, outcome: &GridOutcome) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut csv_bytes = Vec::new();
    write_report_csv(&outcome.reports, &mut csv_bytes)?;
    let report_path = dir.join("report.csv");
    fs::write(&report_path, &csv_bytes).map_err(io(&report_path))?;
    let manifest = manifest(config, seed, outcome, &csv_bytes)?;
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    let manifest_path = dir.join("manifest.json");
    fs::write(&manifest_path, text + "\n").map_err(io(&manifest_path))?;
    Ok(())
}
