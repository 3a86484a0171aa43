//! Computable performance bounds: instantaneous error-probability slack
//! terms and the accumulated-mistake bound.

use ndarray::Array1;

use crate::error::{Error, Result};

/// Slack between the reported minimax risk and the instantaneous error
/// probability: `|| |tau - tau_hat| - lambda ||_inf * ||mu||_1`, and zero
/// whenever `lambda` dominates `|tau - tau_hat|` componentwise.
pub fn alpha(
    tau_true: &Array1<f64>,
    tau_hat: &Array1<f64>,
    lambda: &Array1<f64>,
    mu: &Array1<f64>,
) -> f64 {
    let dominated = tau_true
        .iter()
        .zip(tau_hat.iter())
        .zip(lambda.iter())
        .all(|((t, th), l)| (t - th).abs() <= *l);
    if dominated {
        return 0.0;
    }
    let inf: f64 = tau_true
        .iter()
        .zip(tau_hat.iter())
        .zip(lambda.iter())
        .map(|((t, th), l)| ((t - th).abs() - l).abs())
        .fold(0.0, f64::max);
    let one: f64 = mu.iter().map(|v| v.abs()).sum();
    inf * one
}

/// Slack with respect to the optimal minimax rule:
/// `(||tau - tau_hat||_inf + ||lambda||_inf) * ||mu_inf - mu||_1` in
/// general, `2 ||lambda||_inf ||mu_inf||_1` when `lambda` dominates the
/// estimation error.
pub fn beta(
    tau_true: &Array1<f64>,
    tau_hat: &Array1<f64>,
    lambda: &Array1<f64>,
    mu: &Array1<f64>,
    mu_inf: &Array1<f64>,
) -> f64 {
    let lambda_inf = lambda.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let dominated = tau_true
        .iter()
        .zip(tau_hat.iter())
        .zip(lambda.iter())
        .all(|((t, th), l)| (t - th).abs() <= *l);
    if dominated {
        let one: f64 = mu_inf.iter().map(|v| v.abs()).sum();
        return 2.0 * lambda_inf * one;
    }
    let err_inf = tau_true
        .iter()
        .zip(tau_hat.iter())
        .map(|(t, th)| (t - th).abs())
        .fold(0.0, f64::max);
    let diff_one: f64 = mu_inf.iter().zip(mu.iter()).map(|(a, b)| (a - b).abs()).sum();
    (err_inf + lambda_inf) * diff_one
}

/// Accumulated-mistake bound: `sum R(U_t) + sqrt(2 T log(1/delta))`,
/// holding with probability at least `1 - delta`.
pub fn mistake_bound(r_values: &[f64], delta: f64) -> Result<f64> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let t = r_values.len() as f64;
    let total: f64 = r_values.iter().sum();
    Ok(total + (2.0 * t * (1.0 / delta).ln()).sqrt())
}

/// Per-step variant of [`mistake_bound`] (divided by the number of steps).
pub fn mistake_bound_per_step(r_values: &[f64], delta: f64) -> Result<f64> {
    let t = r_values.len().max(1) as f64;
    Ok(mistake_bound(r_values, delta)? / t)
}

/// Per-step telemetry of the bound computations.
#[derive(Debug, Clone)]
pub struct BoundRecord {
    pub t: usize,
    pub r_u: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub cumulative_bound: f64,
    pub delta: f64,
}
