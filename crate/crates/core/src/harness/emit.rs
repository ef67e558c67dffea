//! CSV and JSON output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::RNG_ALGORITHM;

use super::catalog::ReproResult;
use super::experiment::{BoundValue, ExperimentResult, RateFitEntry, Verdict};

pub const TRAJECTORY_HEADER: [&str; 8] =
    ["experiment_id", "seed", "t", "f_value", "grad_norm", "stoch_grad_norm", "effective_stepsize", "x1"];

/// 17 significant digits in scientific notation; lossless for binary64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Per-seed trajectory rows, sorted by `(seed, t)`.
pub fn trajectory_csv(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    let mut trajs: Vec<_> = result.per_seed_trajectories.iter().flatten().collect();
    trajs.sort_by_key(|t| t.seed);
    for traj in trajs {
        for r in &traj.records {
            w.write_record([
                result.spec.experiment_id.clone(),
                traj.seed.to_string(),
                r.t.to_string(),
                format_float(r.f_value),
                format_float(r.grad_norm),
                format_float(r.stoch_grad_norm),
                format_float(r.effective_stepsize),
                format_float(r.x1()),
            ])
            .map_err(csv_err)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
}

/// One row per `(t, metric)` with a column per overlaid bound.
pub fn aggregate_csv(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let bounds: Vec<(&String, &BoundValue)> = result.bound_values.iter().collect();
    let mut header = vec!["t".to_string(), "metric".into(), "mean".into(), "stderr".into()];
    header.extend(bounds.iter().map(|(n, _)| format!("bound_{n}")));
    w.write_record(&header).map_err(csv_err)?;
    for t in 0..result.spec.horizon_t {
        for m in &result.spec.metrics {
            let stat = result.aggregates[m.as_str()][t as usize];
            let mut row = vec![t.to_string(), m.as_str().to_string(), format_float(stat.mean), format_float(stat.stderr)];
            row.extend(bounds.iter().map(|(_, b)| b.at(t).map(format_float).unwrap_or_default()));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
}

/// Path of the aggregate file written next to a trajectory CSV.
pub fn aggregate_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectories");
    path.with_file_name(format!("{stem}_aggregate.csv"))
}

/// Write the trajectory CSV at `path` and the aggregate CSV beside it.
pub fn emit_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    write_file(path, trajectory_csv(result)?.as_bytes())?;
    write_file(&aggregate_path(path), aggregate_csv(result)?.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    f.write_all(bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct Versions {
    sgdlab: &'static str,
    rng: &'static str,
    float_format: &'static str,
}

const VERSIONS: Versions = Versions { sgdlab: env!("CARGO_PKG_VERSION"), rng: RNG_ALGORITHM, float_format: "binary64" };

#[derive(Serialize)]
struct Summary<'a, S: Serialize, R: Serialize, B: Serialize> {
    spec: S,
    rate_fits: R,
    bound_values: B,
    verdicts: &'a BTreeMap<String, Verdict>,
    versions: Versions,
    wall_time: f64,
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn summary_json(result: &ExperimentResult) -> Result<String> {
    to_json(&Summary {
        spec: &result.spec,
        rate_fits: &result.rate_fits,
        bound_values: &result.bound_values,
        verdicts: &result.verdicts,
        versions: VERSIONS,
        wall_time: result.wall_time,
    })
}

pub fn emit_summary_json(result: &ExperimentResult, path: &Path) -> Result<()> {
    write_file(path, summary_json(result)?.as_bytes())
}

#[derive(Serialize)]
struct ReproSpec<'a> {
    name: &'a str,
    description: &'a str,
    expected: &'a str,
    arms: Vec<&'a str>,
}

/// Summary of a whole reproduction; `bound_values` is keyed by arm label
/// (for the sweep, `eta=…,l=…`).
pub fn repro_summary_json(result: &ReproResult) -> Result<String> {
    let r = &result.reproduction;
    let bound_values: BTreeMap<String, &BTreeMap<String, BoundValue>> = result
        .arms
        .iter()
        .filter(|a| !a.bound_values.is_empty())
        .map(|a| (a.spec.label.clone().unwrap_or_else(|| a.spec.experiment_id.clone()), &a.bound_values))
        .collect();
    let mut rate_fits: BTreeMap<String, RateFitEntry> =
        result.rate_fits.iter().map(|(k, v)| (k.clone(), RateFitEntry::Fit(*v))).collect();
    for a in &result.arms {
        let key = a.spec.label.clone().unwrap_or_else(|| a.spec.experiment_id.clone());
        for (m, f) in &a.rate_fits {
            rate_fits.insert(format!("{key}/{m}"), f.clone());
        }
    }
    to_json(&Summary {
        spec: ReproSpec {
            name: &r.name,
            description: &r.description,
            expected: &r.expected,
            arms: r.arms.iter().map(|a| a.experiment_id.as_str()).collect(),
        },
        rate_fits,
        bound_values,
        verdicts: &result.verdicts,
        versions: VERSIONS,
        wall_time: result.wall_time,
    })
}

/// Write every arm's CSV pair and summary plus `<name>_repro_summary.json` into `dir`.
pub fn emit_reproduction(result: &ReproResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for arm in &result.arms {
        written.extend(emit_experiment(arm, dir)?);
    }
    let p = dir.join(format!("{}_repro_summary.json", result.reproduction.name));
    write_file(&p, repro_summary_json(result)?.as_bytes())?;
    written.push(p);
    Ok(written)
}

/// `<id>.csv`, `<id>_aggregate.csv` and `<id>_summary.json` in `dir`.
pub fn emit_experiment(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let id = file_safe(&result.spec.experiment_id);
    let csv = dir.join(format!("{id}.csv"));
    emit_csv(result, &csv)?;
    let summary = dir.join(format!("{id}_summary.json"));
    emit_summary_json(result, &summary)?;
    Ok(vec![csv.clone(), aggregate_path(&csv), summary])
}

fn file_safe(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

/// Drop the trailing `wall_time` entry so summaries can be compared byte for byte.
pub fn strip_wall_time(summary: &str) -> &str {
    match summary.rfind("\"wall_time\"") {
        Some(i) => &summary[..i],
        None => summary,
    }
}
