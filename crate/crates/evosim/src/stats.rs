//! Small statistical helpers used across the crate: compensated summation,
//! summary statistics, and an exact rank-sum test for comparing experiment
//! arms at desk-scale sample sizes.

/// Kahan compensated summation. Selection probabilities are normalized with
/// this so they sum to 1 within 1e-12 even for populations in the
/// thousands.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for v in values {
        let y = v - compensation;
        let t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
    }
    sum
}

pub fn mean(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "mean of empty slice");
    kahan_sum(xs.iter().copied()) / xs.len() as f64
}

/// Sample standard deviation (n-1 denominator).
pub fn sample_std(xs: &[f64]) -> f64 {
    assert!(xs.len() >= 2, "sample std needs at least two points");
    let m = mean(xs);
    let ss = kahan_sum(xs.iter().map(|x| (x - m) * (x - m)));
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Standard error of the mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    sample_std(xs) / (xs.len() as f64).sqrt()
}

/// Mann-Whitney U statistic for `xs` against `ys`, using midranks for ties:
/// the number of (x, y) pairs with x > y, counting ties as half.
pub fn mann_whitney_u(xs: &[f64], ys: &[f64]) -> f64 {
    let mut u = 0.0;
    for &x in xs {
        for &y in ys {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Exact one-sided rank-sum p-value for the alternative "xs is
/// stochastically greater than ys": P(U >= observed) under the null that
/// all (n+m choose n) orderings are equally likely.
///
/// The null distribution is built by the standard counting recurrence
/// f(u; n, m) = f(u - m; n - 1, m) + f(u; n, m - 1): the largest value
/// either belongs to the first sample (beating all m of the second) or not.
/// Exact for continuous data; with midrank ties the observed U can be a
/// half-integer, which is compared against the integer support as-is.
pub fn rank_sum_p_greater(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(!xs.is_empty() && !ys.is_empty(), "rank-sum needs both samples");
    let u_obs = mann_whitney_u(xs, ys);
    let counts = build_u_counts(xs.len(), ys.len());
    let total: f64 = kahan_sum(counts.iter().copied());
    let tail = kahan_sum(
        counts
            .iter()
            .enumerate()
            .filter(|&(u, _)| u as f64 >= u_obs)
            .map(|(_, &c)| c),
    );
    tail / total
}

/// Number of orderings achieving each U value for sample sizes (n, m).
/// Index u ranges over 0..=n*m. Counts are exact in f64 for the desk-scale
/// sizes this crate compares (they stay far below 2^53).
fn build_u_counts(n: usize, m: usize) -> Vec<f64> {
    let mut prev_row: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    for _ in 0..=m {
        prev_row.push(vec![1.0]); // i = 0: a single ordering with U = 0
    }
    for i in 1..=n {
        let mut row: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        row.push(vec![1.0]); // j = 0
        for j in 1..=m {
            let mut counts = vec![0.0; i * j + 1];
            let with_x_largest = &prev_row[j]; // (i-1, j), shifted by j
            let with_y_largest = &row[j - 1]; // (i, j-1), unshifted
            for (u, c) in counts.iter_mut().enumerate() {
                let mut total = 0.0;
                if u >= j && u - j < with_x_largest.len() {
                    total += with_x_largest[u - j];
                }
                if u < with_y_largest.len() {
                    total += with_y_largest[u];
                }
                *c = total;
            }
            row.push(counts);
        }
        prev_row = row;
    }
    prev_row.pop().expect("m+1 entries")
}
