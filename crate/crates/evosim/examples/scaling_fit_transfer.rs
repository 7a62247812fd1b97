//! The subagent/time scaling law: generate performance data from known
//! parameters, refit them blind, then transfer the law to a new task family
//! by refitting only the time and quality axes with the worker axis frozen.
//!
//!     cargo run --example scaling_fit_transfer

use evosim::scaling::{fit, holdout_rmse, predict, FrozenParams, ObservationPoint, ScalingParams};

fn observe(params: &ScalingParams, counts: &[u32], times: &[f64]) -> Vec<ObservationPoint> {
    counts
        .iter()
        .flat_map(|&n| {
            times.iter().map(move |&t| ObservationPoint {
                n_agents: n,
                time: t,
                performance: predict(params, f64::from(n), t).expect("predict"),
            })
        })
        .collect()
}

fn main() {
    let times = [1.0, 3.0, 6.0, 12.0, 24.0, 48.0, 72.0];

    // Round trip: can the fitter recover the parameters that generated the
    // data? (Noiseless, so the answer should be "exactly".)
    let truth = ScalingParams::reference();
    let grid = observe(&truth, &[1, 2, 4, 8], &times);
    let refit = fit(&grid, &FrozenParams::default()).expect("fit");
    println!("generator: alpha {:.3}, beta {:.3}, gamma {:.3}", truth.alpha, truth.beta, truth.gamma);
    println!(
        "refit:     alpha {:.3}, beta {:.3}, gamma {:.3}  (R² = {:.6})\n",
        refit.params.alpha, refit.params.beta, refit.params.gamma, refit.r_squared
    );

    // Transfer: a new task family obeys the same worker-count axis but its
    // own time/quality behavior. Fit alpha and gamma on one- and two-worker
    // data with beta frozen, then predict the held-out eight-worker curve.
    let transfer_truth = ScalingParams::new(2.673, truth.beta, 0.481).expect("params");
    let small = observe(&transfer_truth, &[1, 2], &times);
    let frozen = FrozenParams {
        beta: Some(truth.beta),
        ..FrozenParams::default()
    };
    let transferred = fit(&small, &frozen).expect("transfer fit");
    println!(
        "transfer fit on 1- and 2-worker data, beta frozen at {}:",
        truth.beta
    );
    println!(
        "  alpha {:.3} (truth 2.673), gamma {:.3} (truth 0.481)",
        transferred.params.alpha, transferred.params.gamma
    );

    let held_out = observe(&transfer_truth, &[8], &times);
    println!(
        "  held-out 8-worker RMSE: {:.6}\n",
        holdout_rmse(&transferred.params, &held_out)
    );

    println!("{:>6} {:>12} {:>12}", "t", "P(8,t) true", "P(8,t) fit");
    for &t in &times {
        println!(
            "{t:>6} {:>12.3} {:>12.3}",
            predict(&transfer_truth, 8.0, t).unwrap(),
            predict(&transferred.params, 8.0, t).unwrap()
        );
    }
}
