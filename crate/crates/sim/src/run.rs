//! Scenario execution and report files.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dcx_core::RngStream;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Config, Params, ScenarioSpec};
use crate::parallel::Parallel;
use crate::scenarios::{self, is_failure, Ctx, FunctionRow, Job};
use crate::table::Table;
use crate::SimError;

/// The JSON report written for each scenario.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario_id: String,
    pub seed: u64,
    pub params_echo: Value,
    pub verdict: String,
    pub per_function: Vec<FunctionRow>,
    pub mean_equality: Value,
    pub details: Value,
    pub runtime_seconds: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug)]
pub struct ScenarioResult {
    pub report: Report,
    pub table: Table,
    pub json_path: PathBuf,
    pub csv_path: PathBuf,
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub results: Vec<ScenarioResult>,
    /// `(scenario id, message)` for scenarios that failed to run.
    pub failures: Vec<(String, String)>,
}

impl RunSummary {
    /// 0 clean, 1 a VIOLATION (or failed oracle), 3 a scenario errored.
    pub fn exit_code(&self) -> i32 {
        if !self.failures.is_empty() {
            3
        } else if self.results.iter().any(|r| is_failure(&r.report.verdict)) {
            1
        } else {
            0
        }
    }
}

/// Stream id derived from the scenario id, so adding or reordering
/// scenarios in a config does not change any other scenario's numbers.
fn stream_id(id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn prepare(spec: &ScenarioSpec) -> Result<(Job, Value), SimError> {
    let scenario = scenarios::find(&spec.id).ok_or_else(|| {
        SimError::Config(format!(
            "`scenarios[{}].id`: unknown scenario `{}` (see `dcx-sim list`)",
            spec.index, spec.id
        ))
    })?;
    let mut params = Params::new(spec);
    let job = (scenario.prepare)(&mut params)?;
    Ok((job, params.finish()?))
}

fn execute(id: &str, job: Job, echo: Value, seed: u64, exec: &Parallel) -> Result<(Report, Table), SimError> {
    let ctx = Ctx {
        root: RngStream::new(seed, stream_id(id)),
        exec,
    };
    let start = Instant::now();
    let out = job(&ctx).map_err(|e| SimError::Runtime(format!("{id}: {e}")))?;
    let report = Report {
        scenario_id: id.to_string(),
        seed,
        params_echo: echo,
        verdict: out.verdict,
        per_function: out.per_function,
        mean_equality: out.mean_equality,
        details: out.details,
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((report, out.table))
}

/// Runs one scenario without touching the file system.
pub fn run_scenario(spec: &ScenarioSpec, seed: u64, exec: &Parallel) -> Result<(Report, Table), SimError> {
    let (job, echo) = prepare(spec)?;
    execute(&spec.id, job, echo, seed, exec)
}

fn write(path: &Path, contents: &str) -> Result<(), SimError> {
    std::fs::write(path, contents).map_err(|e| SimError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Validates every scenario, then runs them in order and writes reports.
/// Configuration problems abort before anything runs; a scenario that fails
/// at run time is recorded and the rest still run.
pub fn run_config(cfg: &Config, threads: Option<usize>) -> Result<RunSummary, SimError> {
    let jobs: Vec<(Job, Value)> = cfg.scenarios.iter().map(prepare).collect::<Result<_, _>>()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| {
        SimError::Config(format!("`output_dir`: cannot create {}: {e}", cfg.output_dir.display()))
    })?;
    let exec = Parallel::new(threads.or(cfg.threads)).map_err(|e| SimError::Runtime(e.to_string()))?;

    let mut seen = HashSet::new();
    let mut summary = RunSummary::default();
    for (spec, (job, echo)) in cfg.scenarios.iter().zip(jobs) {
        let stem = if seen.insert(spec.id.clone()) {
            spec.id.clone()
        } else {
            format!("{}-{}", spec.id, spec.index)
        };
        match execute(&spec.id, job, echo, cfg.seed, &exec) {
            Ok((report, table)) => {
                let json_path = cfg.output_dir.join(format!("{stem}.json"));
                let csv_path = cfg.output_dir.join(format!("{stem}.csv"));
                write(&json_path, &report.to_json())?;
                write(&csv_path, &table.to_csv_string())?;
                summary.results.push(ScenarioResult {
                    report,
                    table,
                    json_path,
                    csv_path,
                });
            }
            Err(e) => summary.failures.push((spec.id.clone(), e.to_string())),
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_ids_differ() {
        assert_ne!(stream_id("ripley-poisson"), stream_id("ripley-thomas"));
        assert_eq!(stream_id("a"), stream_id("a"));
    }

    #[test]
    fn unknown_scenario_is_a_config_error() {
        let cfg = Config::from_toml_str("seed = 1\noutput_dir = \"o\"\n[[scenarios]]\nid = \"nope\"\n").unwrap();
        let e = prepare(&cfg.scenarios[0]).err().unwrap();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("scenarios[0].id"), "{e}");
    }

    #[test]
    fn oracle_scenario_runs_in_memory() {
        let cfg = Config::from_toml_str(
            "seed = 3\noutput_dir = \"o\"\n[[scenarios]]\nid = \"oracle-poisson-scaling\"\na = 1.0\nc = 2.0\n",
        )
        .unwrap();
        let exec = Parallel::new(Some(1)).unwrap();
        let (r, t) = run_scenario(&cfg.scenarios[0], cfg.seed, &exec).unwrap();
        assert_eq!(r.verdict, "pass");
        assert_eq!(t.rows.len(), 1);
        assert!(r.details["max_violation"].as_f64().unwrap() <= 1e-9);
    }
}
