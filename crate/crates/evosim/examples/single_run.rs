//! One full search run, end to end: configure a task, run the simulated
//! worker pool to the budget, and read the results back.
//!
//!     cargo run --example single_run

use evosim::evaluation::FinalRule;
use evosim::orchestrator::{run, RunConfig};
use evosim::task::SyntheticTask;

fn main() {
    let mut config = RunConfig::new(SyntheticTask::rugged_multimodal(6, 0), 0);
    config.checkpoints = vec![3.0, 6.0, 12.0, 24.0, 48.0, 72.0];

    let report = run(&config).expect("run");

    println!(
        "{} workers, budget {}, {} completed candidates ({} still in flight at the end)\n",
        config.n_workers,
        config.budget,
        report.completed_candidates(),
        report.discarded_in_flight
    );

    println!("{:>8} {:>14} {:>14} {:>14}", "time", "test(by val)", "test(oracle)", "search best");
    for &t in &config.checkpoints {
        let point = report
            .trajectory
            .iter()
            .take_while(|p| p.time <= t)
            .last()
            .expect("checkpoint");
        let cell = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.4}"));
        println!(
            "{t:>8} {:>14} {:>14} {:>14}",
            cell(point.best_test_by_val),
            cell(point.best_test_oracle),
            cell(point.best_search)
        );
    }

    println!("\nfinal test score by selection rule:");
    for (name, rule) in [
        ("validation pick", FinalRule::ByVal),
        ("search-signal pick", FinalRule::BySearch),
        ("oracle (test argmax)", FinalRule::OracleByTest),
    ] {
        println!(
            "  {name:<22} {:.4}",
            report.test_score_under(rule).expect("final score")
        );
    }

    println!("\nper-worker completions/failures:");
    for counts in &report.counts {
        println!(
            "  worker {:>2}: {:>3} completed, {:>2} failed",
            counts.worker.0, counts.completed, counts.failed
        );
    }
}
