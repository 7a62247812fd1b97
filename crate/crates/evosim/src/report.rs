//! Run artifacts: trajectory CSV, event/evaluation/dispatch logs as JSONL,
//! and a JSON summary. Everything serializes in processing order with
//! derive-defined field order, so identical runs produce identical bytes.

use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::evaluation::{audit_log, FinalRule};
use crate::orchestrator::RunReport;
use crate::scaling::ObservationPoint;

/// Columns of the trajectory CSV, one row per sampled point.
#[derive(Serialize)]
struct TrajectoryRow {
    time: f64,
    best_test_by_val: Option<f64>,
    best_test_by_search: Option<f64>,
    best_test_oracle: Option<f64>,
    best_search: Option<f64>,
}

/// Trajectory as CSV with a header row; missing values render empty.
pub fn trajectory_csv(report: &RunReport) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for point in &report.trajectory {
        writer
            .serialize(TrajectoryRow {
                time: point.time,
                best_test_by_val: point.best_test_by_val,
                best_test_by_search: point.best_test_by_search,
                best_test_oracle: point.best_test_oracle,
                best_search: point.best_search,
            })
            .expect("plain rows serialize");
    }
    String::from_utf8(writer.into_inner().expect("vec sink")).expect("csv is utf-8")
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("log records serialize"));
        out.push('\n');
    }
    out
}

/// Processed events followed by budget-discarded ones, one JSON per line.
pub fn events_jsonl(report: &RunReport) -> String {
    jsonl(&report.events)
}

/// The full evaluation log, one JSON per line.
pub fn evaluations_jsonl(report: &RunReport) -> String {
    jsonl(&report.evaluations)
}

/// Every dispatched task with its worker, one JSON per line.
pub fn dispatches_jsonl(report: &RunReport) -> String {
    jsonl(&report.dispatches)
}

/// The population in insertion order, one JSON candidate per line.
pub fn population_jsonl(report: &RunReport) -> String {
    report.population.to_jsonl()
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a crate::orchestrator::RunConfig,
    completed_candidates: usize,
    discarded_in_flight: u32,
    final_selection: &'a crate::orchestrator::FinalSelection,
    final_test_by_val: Option<f64>,
    final_test_by_search: Option<f64>,
    final_test_oracle: Option<f64>,
    worker_counts: &'a [crate::worker::WorkerCounts],
    audit_findings: usize,
}

/// One-document JSON summary of a run: resolved config, outcome under each
/// selection rule, worker tallies, and the audit verdict.
pub fn summary_json(report: &RunReport) -> String {
    let summary = Summary {
        config: &report.config,
        completed_candidates: report.completed_candidates(),
        discarded_in_flight: report.discarded_in_flight,
        final_selection: &report.final_selection,
        final_test_by_val: report.test_score_under(FinalRule::ByVal),
        final_test_by_search: report.test_score_under(FinalRule::BySearch),
        final_test_oracle: report.test_score_under(FinalRule::OracleByTest),
        worker_counts: &report.counts,
        audit_findings: audit_log(&report.evaluations).len(),
    };
    let mut out = serde_json::to_string_pretty(&summary).expect("summary serializes");
    out.push('\n');
    out
}

/// Writes the full artifact set into `dir` (created if missing):
/// `summary.json`, `trajectory.csv`, `events.jsonl`, `evaluations.jsonl`,
/// `dispatches.jsonl`, `population.jsonl`.
pub fn write_artifacts(report: &RunReport, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let files = [
        ("summary.json", summary_json(report)),
        ("trajectory.csv", trajectory_csv(report)),
        ("events.jsonl", events_jsonl(report)),
        ("evaluations.jsonl", evaluations_jsonl(report)),
        ("dispatches.jsonl", dispatches_jsonl(report)),
        ("population.jsonl", population_jsonl(report)),
    ];
    for (name, contents) in files {
        let mut f = std::fs::File::create(dir.join(name))?;
        f.write_all(contents.as_bytes())?;
    }
    Ok(())
}

/// Writes scaling observations as CSV with columns n_agents, time,
/// performance.
pub fn observations_csv(points: &[ObservationPoint]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for p in points {
        writer.serialize(p).expect("points serialize");
    }
    String::from_utf8(writer.into_inner().expect("vec sink")).expect("csv is utf-8")
}

/// Reads scaling observations from CSV. Requires the three standard columns;
/// an optional trailing `seed` column is tolerated and ignored, so raw
/// per-seed exports load unchanged.
pub fn read_observations_csv(contents: &str) -> Result<Vec<ObservationPoint>, csv::Error> {
    #[derive(serde::Deserialize)]
    struct Row {
        n_agents: u32,
        time: f64,
        performance: f64,
        #[serde(default)]
        #[allow(dead_code)]
        seed: Option<u64>,
    }
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_reader(contents.as_bytes());
    let mut points = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row?;
        points.push(ObservationPoint {
            n_agents: row.n_agents,
            time: row.time,
            performance: row.performance,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orchestrator::{run, RunConfig};
    use crate::task::SyntheticTask;

    fn small_report() -> RunReport {
        let mut config = RunConfig::new(SyntheticTask::rugged_multimodal(3, 0), 5);
        config.budget = 6.0;
        config.checkpoints = vec![3.0];
        run(&config).unwrap()
    }

    #[test]
    fn trajectory_csv_has_headers_and_rows() {
        let report = small_report();
        let csv = trajectory_csv(&report);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "time,best_test_by_val,best_test_by_search,best_test_oracle,best_search"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), report.trajectory.len());
        // There is a row at the checkpoint and one at the budget.
        assert!(rows.iter().any(|r| r.starts_with("3.0,") || r.starts_with("3,")));
        assert!(rows.iter().any(|r| r.starts_with("6.0,") || r.starts_with("6,")));
    }

    #[test]
    fn jsonl_exports_parse_line_by_line() {
        let report = small_report();
        for contents in [
            events_jsonl(&report),
            evaluations_jsonl(&report),
            dispatches_jsonl(&report),
            population_jsonl(&report),
        ] {
            assert!(!contents.is_empty());
            for line in contents.lines() {
                let v: serde_json::Value = serde_json::from_str(line).unwrap();
                assert!(v.is_object());
            }
        }
    }

    #[test]
    fn summary_reports_scores_and_clean_audit() {
        let report = small_report();
        let summary = summary_json(&report);
        let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
        assert_eq!(v["audit_findings"], 0);
        assert_eq!(
            v["completed_candidates"].as_u64().unwrap() as usize,
            report.completed_candidates()
        );
        assert!(v["final_test_by_val"].is_number());
        assert!(v["config"]["n_workers"].is_number());
    }

    #[test]
    fn artifacts_write_to_disk() {
        let report = small_report();
        let dir = std::env::temp_dir().join(format!("evosim-report-test-{}", std::process::id()));
        write_artifacts(&report, &dir).unwrap();
        for name in [
            "summary.json",
            "trajectory.csv",
            "events.jsonl",
            "evaluations.jsonl",
            "dispatches.jsonl",
            "population.jsonl",
        ] {
            let path = dir.join(name);
            assert!(path.exists(), "{name} missing");
            assert!(std::fs::metadata(&path).unwrap().len() > 0, "{name} empty");
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn observation_csv_round_trips() {
        let points = vec![
            ObservationPoint {
                n_agents: 1,
                time: 3.0,
                performance: 41.25,
            },
            ObservationPoint {
                n_agents: 8,
                time: 72.0,
                performance: 93.5,
            },
        ];
        let csv = observations_csv(&points);
        assert!(csv.starts_with("n_agents,time,performance"));
        let back = read_observations_csv(&csv).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].n_agents, 8);
        assert_eq!(back[1].performance, 93.5);
    }

    #[test]
    fn observation_csv_tolerates_a_seed_column() {
        let contents = "n_agents,time,performance,seed\n4,12.0,88.0,7\n4,12.0,86.0,8\n";
        let points = read_observations_csv(contents).unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].n_agents, 4);
    }

    #[test]
    fn malformed_observation_csv_is_an_error() {
        assert!(read_observations_csv("bogus,columns\n1,2\n").is_err());
        assert!(read_observations_csv("n_agents,time,performance\nx,1.0,2.0\n").is_err());
    }
}
