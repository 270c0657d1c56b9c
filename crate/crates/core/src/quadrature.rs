//! Cumulative quadrature on a uniform grid.
//!
//! Prefix `k` (samples `0..=k`) is integrated with composite Simpson when `k`
//! is even. Odd `k ≥ 3` closes the last three intervals with Simpson's 3/8
//! rule, and `k = 1` falls back to the trapezoid.

fn simpson_pair(h: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    h / 3.0 * (f0 + 4.0 * f1 + f2)
}

fn three_eighths(h: f64, f: &[f64]) -> f64 {
    3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3])
}

/// `I[k] ≈ ∫_{t_0}^{t_k} f dt` for every prefix of the samples.
pub fn cumulative_simpson(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut even = vec![0.0; n];
    for k in (2..n).step_by(2) {
        even[k] = even[k - 2] + simpson_pair(h, values[k - 2], values[k - 1], values[k]);
    }
    let mut out = vec![0.0; n];
    for k in 1..n {
        out[k] = if k % 2 == 0 {
            even[k]
        } else if k == 1 {
            0.5 * h * (values[0] + values[1])
        } else {
            even[k - 3] + three_eighths(h, &values[k - 3..=k])
        };
    }
    out
}

/// Total integral over all samples.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    cumulative_simpson(values, h).last().copied().unwrap_or(0.0)
}

/// Grid-halving error estimate for each prefix of [`cumulative_simpson`].
///
/// Even prefixes compare against the same rule on every other sample,
/// `|I_h − I_2h| / 15`, or `/ 3` when the coarse grid has a single interval
/// and the trapezoid is used. Odd prefixes take the larger estimate of their
/// even neighbours.
pub fn richardson_error(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut err = vec![0.0; n];
    if n < 3 {
        return err;
    }
    let fine = cumulative_simpson(values, h);
    let coarse_values: Vec<f64> = values.iter().step_by(2).copied().collect();
    let coarse = cumulative_simpson(&coarse_values, 2.0 * h);
    for k in (2..n).step_by(2) {
        let j = k / 2;
        let divisor = if j < 2 { 3.0 } else { 15.0 };
        err[k] = (fine[k] - coarse[j]).abs() / divisor;
    }
    for k in (1..n).step_by(2) {
        let left = err[k - 1];
        let right = if k + 1 < n { err[k + 1] } else { left };
        err[k] = if k == 1 { right } else { left.max(right) };
    }
    err
}
