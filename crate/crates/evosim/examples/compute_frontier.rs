//! Compute-optimal allocation: given a budget C = N·t, how many workers
//! should share it? The law's optimum is N* = sqrt(gamma C / beta); this
//! prints the integer allocation and the performance frontier across
//! budgets, and verifies the stationary-point structure behind the closed
//! form.
//!
//!     cargo run --example compute_frontier

use evosim::scaling::{
    allocation_tradeoff, compute_frontier, optimal_allocation, verify_stationarity, ScalingParams,
};

fn main() {
    let params = ScalingParams::reference();
    let budgets = [8.0, 24.0, 72.0, 192.0, 576.0];

    println!(
        "law: alpha {:.3}, beta {:.3}, gamma {:.3}\n",
        params.alpha, params.beta, params.gamma
    );
    println!(
        "{:>8} {:>9} {:>9} {:>8} {:>12} {:>12}",
        "budget", "N (real)", "N (int)", "t", "P(frontier)", "P(rounded)"
    );
    for point in compute_frontier(&params, &budgets).expect("frontier") {
        let alloc = optimal_allocation(&params, point.budget).expect("allocation");
        println!(
            "{:>8} {:>9.2} {:>9} {:>8.2} {:>12.2} {:>12.2}",
            point.budget,
            alloc.n_real,
            point.n_agents,
            point.time,
            point.continuous_performance,
            point.performance
        );
    }

    // Doubling the budget four times multiplies the optimal worker count by
    // two each time: N* grows like sqrt(C).
    println!("\nsqrt growth of the optimal worker count:");
    for c in [50.0, 200.0, 800.0, 3200.0] {
        let alloc = optimal_allocation(&params, c).expect("allocation");
        println!("  C = {c:>6}: N* = {:.2}", alloc.n_real);
    }

    // The optimum equalizes f(z) = ((1+z)/z) ln(1+z) between the worker and
    // time axes; f is strictly increasing, so that point is unique.
    let grid: Vec<f64> = (0..1000)
        .map(|i| 10f64.powf(-6.0 + 12.0 * f64::from(i) / 999.0))
        .collect();
    let report = verify_stationarity(&grid);
    println!(
        "\nstationarity structure on {} log-spaced points: {}",
        grid.len(),
        if report.passed { "verified" } else { "FAILED" }
    );
    println!(
        "f(1) = {:.12} (2 ln 2 = {:.12})",
        allocation_tradeoff(1.0),
        2.0 * std::f64::consts::LN_2
    );
}
