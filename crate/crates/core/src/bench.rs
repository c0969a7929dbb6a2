//! Grid runs with one CSV row per instance and a per-`k` summary.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::gen::{ManifestRow, SuiteEntry};
use crate::model::{parse_instance, WorkflowInstance};
use crate::solver::{solve, Outcome, SolveReport, SolverConfig};

pub const CSV_HEADER: &str = "label,output,cpu_seconds,users,patterns,n_w,n_useless";

/// Where a bench instance comes from.
#[derive(Clone, Debug)]
pub enum Source {
    File(PathBuf),
    Instance(WorkflowInstance),
}

#[derive(Clone, Debug)]
pub struct BenchJob {
    pub label: String,
    pub k: usize,
    pub source: Source,
}

impl BenchJob {
    pub fn from_manifest(row: &ManifestRow) -> Self {
        BenchJob {
            label: row.label.clone(),
            k: row.k,
            source: Source::File(row.path.clone()),
        }
    }

    pub fn from_suite(entry: SuiteEntry) -> Self {
        BenchJob {
            label: entry.label,
            k: entry.params.k,
            source: Source::Instance(entry.instance),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub label: String,
    pub k: usize,
    /// Solver report, or the reason the instance could not be run.
    pub result: Result<SolveReport, String>,
}

impl BenchRow {
    pub fn outcome(&self) -> Option<Outcome> {
        self.result.as_ref().ok().map(|r| r.outcome)
    }

    pub fn seconds(&self) -> f64 {
        self.result
            .as_ref()
            .map_or(0.0, |r| r.elapsed.as_secs_f64())
    }

    /// Unsat rows carry the `n: n_w→n_u` triple in the users column and
    /// fill `n_w`, `n_useless`; other rows leave those two empty.
    pub fn csv_line(&self) -> String {
        match &self.result {
            Err(_) => format!("{},error,,,,,", self.label),
            Ok(r) => {
                let (users, n_w, n_u) = if r.outcome == Outcome::Unsatisfiable {
                    (r.user_triple(), r.n_w.to_string(), r.n_useless.to_string())
                } else {
                    (r.users_processed.to_string(), String::new(), String::new())
                };
                format!(
                    "{},{},{:.3},{},{},{},{}",
                    self.label,
                    r.outcome,
                    r.elapsed.as_secs_f64(),
                    users,
                    r.patterns_generated,
                    n_w,
                    n_u
                )
            }
        }
    }
}

fn run_one(job: &BenchJob, cfg: &SolverConfig) -> BenchRow {
    let inst: Result<Cow<WorkflowInstance>, String> = match &job.source {
        Source::Instance(i) => Ok(Cow::Borrowed(i)),
        Source::File(path) => fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|t| parse_instance(&t).map_err(|e| e.to_string()))
            .map(Cow::Owned)
            .map_err(|e| format!("{}: {e}", path.display())),
    };
    let result = inst.and_then(|i| solve(&i, cfg).map_err(|e| e.to_string()));
    BenchRow {
        label: job.label.clone(),
        k: job.k,
        result,
    }
}

/// Runs every job; rows come back in job order whatever `threads` is.
pub fn run(jobs: &[BenchJob], cfg: &SolverConfig, threads: usize) -> Vec<BenchRow> {
    if threads <= 1 {
        return jobs.iter().map(|j| run_one(j, cfg)).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| jobs.par_iter().map(|j| run_one(j, cfg)).collect()),
        Err(_) => jobs.iter().map(|j| run_one(j, cfg)).collect(),
    }
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_line());
    }
    out
}

/// Instance counts and mean times per `k`, overall and by outcome.
pub fn summary(rows: &[BenchRow]) -> String {
    let mut by_k: BTreeMap<usize, Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        by_k.entry(r.k).or_default().push(r);
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4}  {:<16}{:>10}{:>14}",
        "k", "output", "instances", "mean_time_s"
    );
    for (k, rows) in by_k {
        let mut line = |name: &str, pick: &dyn Fn(&BenchRow) -> bool, always: bool| {
            let sel: Vec<f64> = rows
                .iter()
                .filter(|r| pick(r))
                .map(|r| r.seconds())
                .collect();
            if sel.is_empty() && !always {
                return;
            }
            let mean = if sel.is_empty() {
                0.0
            } else {
                sel.iter().sum::<f64>() / sel.len() as f64
            };
            let _ = writeln!(out, "{k:>4}  {name:<16}{:>10}{mean:>14.3}", sel.len());
        };
        line("all", &|_| true, true);
        line("sat", &|r| r.outcome() == Some(Outcome::Satisfiable), true);
        line(
            "unsat",
            &|r| r.outcome() == Some(Outcome::Unsatisfiable),
            true,
        );
        line(
            "budget_exceeded",
            &|r| r.outcome() == Some(Outcome::BudgetExceeded),
            false,
        );
        line("error", &|r| r.result.is_err(), false);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constraint, StepId, StepSet};
    use crate::testing::instance1;

    fn jobs() -> Vec<BenchJob> {
        let unsat = WorkflowInstance::new(
            2,
            vec![StepSet::full(2)],
            vec![Constraint::NotEquals(StepId(0), StepId(1))],
        )
        .unwrap();
        vec![
            BenchJob {
                label: "a".into(),
                k: 4,
                source: Source::Instance(instance1()),
            },
            BenchJob {
                label: "b".into(),
                k: 2,
                source: Source::Instance(unsat),
            },
            BenchJob {
                label: "c".into(),
                k: 2,
                source: Source::File("/nonexistent/x.wsp".into()),
            },
        ]
    }

    #[test]
    fn rows_and_columns() {
        let rows = run(&jobs(), &SolverConfig::default(), 1);
        let csv = to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("a,sat,"));
        assert!(lines[1].ends_with(",,"));
        let b: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(b[1], "unsat");
        assert_eq!(b[3], "1: 0→0");
        assert_eq!((b[4], b[5], b[6]), ("3", "0", "0"));
        assert_eq!(lines[3], "c,error,,,,,");
        let s = summary(&rows);
        assert!(s.contains("error"));
        assert!(!s.contains("budget_exceeded"));
    }

    #[test]
    fn parallel_matches_serial() {
        let strip = |rows: &[BenchRow]| -> Vec<String> {
            rows.iter()
                .map(|r| {
                    let mut f: Vec<String> = r.csv_line().split(',').map(String::from).collect();
                    if f.len() > 2 {
                        f[2].clear();
                    }
                    f.join(",")
                })
                .collect()
        };
        let cfg = SolverConfig::default();
        assert_eq!(strip(&run(&jobs(), &cfg, 1)), strip(&run(&jobs(), &cfg, 3)));
    }
}
