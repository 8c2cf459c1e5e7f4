//! Result files.
//!
//! | file            | columns                                              |
//! |-----------------|------------------------------------------------------|
//! | `steps.csv`     | `episode,t,policy,action,success,nu_<metric>...`     |
//! | `selection.csv` | `policy,sensor,count`                                |
//! | `cdf.csv`       | `policy,statistic,error,cum_fraction`                |
//! | `summary.json`  | run metadata and per-(policy, statistic) mean/median |
//!
//! Sensors are 1-based, `success` is `0`/`1`. Reals are written in plain
//! decimal using the shortest representation that parses back to the same
//! `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{ErrorCdf, ExperimentConfig, ExperimentResults};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub scenario: String,
    pub seed: u64,
    pub episodes: usize,
    pub steps: usize,
    pub mc_samples: usize,
    pub n_sensors: usize,
    pub policies: Vec<String>,
    pub statistics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub policy: String,
    pub statistic: String,
    pub mean: f64,
    pub median: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub metadata: RunMetadata,
    pub results: Vec<SummaryEntry>,
}

impl Summary {
    pub fn new(config: &ExperimentConfig, results: &ExperimentResults) -> Self {
        Summary {
            metadata: RunMetadata {
                version: env!("CARGO_PKG_VERSION").to_string(),
                scenario: config.scenario.clone(),
                seed: config.seed,
                episodes: config.episodes,
                steps: config.steps_per_episode,
                mc_samples: config.mc_samples,
                n_sensors: results.n_sensors,
                policies: results.policies.clone(),
                statistics: results.metrics.clone(),
            },
            results: results
                .cdfs
                .iter()
                .map(|c| SummaryEntry {
                    policy: c.policy.clone(),
                    statistic: c.metric.clone(),
                    mean: c.mean(),
                    median: c.median(),
                    count: c.errors.len(),
                })
                .collect(),
        }
    }
}

pub fn steps_csv(results: &ExperimentResults) -> String {
    let mut s = String::from("episode,t,policy,action,success");
    for m in &results.metrics {
        write!(s, ",nu_{m}").unwrap();
    }
    s.push('\n');
    for log in &results.logs {
        for r in &log.records {
            write!(
                s,
                "{},{},{},{},{}",
                log.episode,
                r.t,
                log.policy,
                r.action,
                u8::from(r.success)
            )
            .unwrap();
            for e in &r.errors {
                write!(s, ",{e}").unwrap();
            }
            s.push('\n');
        }
    }
    s
}

pub fn selection_csv(results: &ExperimentResults) -> String {
    let mut s = String::from("policy,sensor,count\n");
    for (p, name) in results.policies.iter().enumerate() {
        for (i, c) in results.selection[p].iter().enumerate() {
            writeln!(s, "{name},{},{c}", i + 1).unwrap();
        }
    }
    s
}

pub fn cdf_csv(results: &ExperimentResults) -> String {
    let mut s = String::from("policy,statistic,error,cum_fraction\n");
    for cdf in &results.cdfs {
        for (e, f) in cdf.points() {
            writeln!(s, "{},{},{e},{f}", cdf.policy, cdf.metric).unwrap();
        }
    }
    s
}

/// Write all four result files into `dir`, creating it if needed.
pub fn write_outputs(config: &ExperimentConfig, results: &ExperimentResults, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let summary = serde_json::to_string_pretty(&Summary::new(config, results))? + "\n";
    write_atomic(&dir.join("steps.csv"), &steps_csv(results))?;
    write_atomic(&dir.join("selection.csv"), &selection_csv(results))?;
    write_atomic(&dir.join("cdf.csv"), &cdf_csv(results))?;
    write_atomic(&dir.join("summary.json"), &summary)?;
    Ok(())
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = PathBuf::from(path);
    tmp.set_extension("tmp");
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    fs::write(&tmp, contents).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

/// One parsed row of `steps.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub episode: usize,
    pub t: u64,
    pub policy: String,
    pub action: usize,
    pub success: bool,
    pub errors: Vec<f64>,
}

/// Parse `steps.csv`; returns the metric names and rows.
pub fn read_steps_csv(path: &Path) -> Result<(Vec<String>, Vec<StepRow>)> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let fixed = ["episode", "t", "policy", "action", "success"];
    if headers.len() < fixed.len() || headers.iter().zip(fixed).any(|(h, f)| h != f) {
        return Err(Error::Config(format!("unexpected steps.csv header: {headers:?}")));
    }
    let metrics: Vec<String> = headers
        .iter()
        .skip(fixed.len())
        .map(|h| {
            h.strip_prefix("nu_")
                .map(String::from)
                .ok_or_else(|| Error::Config(format!("unexpected column '{h}'")))
        })
        .collect::<Result<_>>()?;
    let bad = |what: &str| Error::Config(format!("malformed {what} in steps.csv"));
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(StepRow {
            episode: rec[0].parse().map_err(|_| bad("episode"))?,
            t: rec[1].parse().map_err(|_| bad("t"))?,
            policy: rec[2].to_string(),
            action: rec[3].parse().map_err(|_| bad("action"))?,
            success: match &rec[4] {
                "1" => true,
                "0" => false,
                _ => return Err(bad("success")),
            },
            errors: (fixed.len()..rec.len())
                .map(|i| rec[i].parse().map_err(|_| bad("error value")))
                .collect::<Result<_>>()?,
        });
    }
    Ok((metrics, rows))
}

/// Selection counts rebuilt from parsed rows, `counts[p][n - 1]`.
pub fn selection_from_rows(rows: &[StepRow], policies: &[String], n_sensors: usize) -> Vec<Vec<u64>> {
    let mut counts = vec![vec![0u64; n_sensors]; policies.len()];
    for r in rows {
        if let Some(p) = policies.iter().position(|q| q == &r.policy) {
            counts[p][r.action - 1] += 1;
        }
    }
    counts
}

/// CDFs rebuilt from parsed rows, policy-major.
pub fn cdfs_from_rows(rows: &[StepRow], policies: &[String], metrics: &[String]) -> Vec<ErrorCdf> {
    policies
        .iter()
        .flat_map(|p| {
            metrics.iter().enumerate().map(move |(m, name)| {
                let errors = rows.iter().filter(|r| &r.policy == p).map(|r| r.errors[m]).collect();
                ErrorCdf::from_errors(p.clone(), name.clone(), errors)
            })
        })
        .collect()
}

/// Policy × statistic table of mean realized errors; `*` marks the lowest
/// mean in each column.
pub fn compare_table(results: &ExperimentResults) -> String {
    let width = 14;
    let name_width = results.policies.iter().map(String::len).max().unwrap_or(6).max(6);
    let mut s = format!("{:<name_width$}", "policy");
    for m in &results.metrics {
        write!(s, " {:>width$}", format!("nu_{m}")).unwrap();
    }
    s.push('\n');
    let best: Vec<usize> = (0..results.metrics.len())
        .map(|m| {
            (0..results.policies.len())
                .min_by(|&a, &b| results.mean_error(a, m).total_cmp(&results.mean_error(b, m)))
                .unwrap_or(0)
        })
        .collect();
    for (p, name) in results.policies.iter().enumerate() {
        write!(s, "{name:<name_width$}").unwrap();
        for (m, &b) in best.iter().enumerate() {
            let mark = if p == b { "*" } else { " " };
            write!(s, " {:>w$.6}{mark}", results.mean_error(p, m), w = width - 1).unwrap();
        }
        s.push('\n');
    }
    s
}
