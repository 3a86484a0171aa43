//! Accelerated subgradient learning of the classifier parameters.
//!
//! The minimax program is solved approximately at every step with a
//! Nesterov-extrapolated subgradient method, warm-started from the previous
//! solution. The nonsmooth term is the pointwise maximum of affine
//! functions; only a bounded set of recently active rows is kept between
//! steps, augmented each step with the rows generated by the latest
//! instance.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::feature_map::FeatureMap;

/// One affine row of the polyhedral approximation: value `f' mu - h`.
pub type Row = (Array1<f64>, f64);

/// Bounded store of the most recently active rows.
#[derive(Debug, Clone)]
pub struct SubgradientCache {
    rows: Vec<Row>,
    capacity: usize,
}

impl SubgradientCache {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "cache capacity must be positive");
        SubgradientCache { rows: Vec::new(), capacity }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Builds a cache holding the given rows (most recent last), keeping
    /// at most `capacity` of the latest ones.
    pub fn from_rows(mut rows: Vec<Row>, capacity: usize) -> Self {
        assert!(capacity > 0, "cache capacity must be positive");
        if rows.len() > capacity {
            rows.drain(..rows.len() - capacity);
        }
        SubgradientCache { rows, capacity }
    }

    /// Rebuilds the cache from the indices of rows used in iteration order:
    /// exact duplicates collapse to their most recent occurrence, and at
    /// most `capacity` rows are kept, most recent last.
    fn from_used(working: &[Row], used: &[usize], capacity: usize) -> Self {
        let mut kept: Vec<Row> = Vec::new();
        let mut seen = vec![false; working.len()];
        for &i in used.iter().rev() {
            if kept.len() == capacity {
                break;
            }
            if seen[i] {
                continue;
            }
            seen[i] = true;
            let row = &working[i];
            if !kept.iter().any(|(f, h)| *h == row.1 && *f == row.0) {
                kept.push(row.clone());
            }
        }
        kept.reverse();
        SubgradientCache { rows: kept, capacity }
    }
}

/// Evaluates `max_i (f_i' mu - h_i)` over the given rows and returns the
/// value together with the first index attaining it.
pub fn varphi_local(rows: &[Row], mu: &Array1<f64>) -> Result<(f64, usize)> {
    if rows.is_empty() {
        return Err(Error::EmptyRowSet);
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (idx, (f, h)) in rows.iter().enumerate() {
        let v = f.dot(mu) - h;
        if v > best {
            best = v;
            best_idx = idx;
        }
    }
    Ok((best, best_idx))
}

/// Objective `1 - tau' mu + varphi(mu) + lambda' |mu|` over the given rows.
pub fn objective(
    tau: &Array1<f64>,
    lambda: &Array1<f64>,
    rows: &[Row],
    mu: &Array1<f64>,
) -> Result<f64> {
    let (varphi, _) = varphi_local(rows, mu)?;
    let reg: f64 = lambda.iter().zip(mu.iter()).map(|(l, m)| l * m.abs()).sum();
    Ok(1.0 - tau.dot(mu) + varphi + reg)
}

fn step_size(l: usize) -> f64 {
    ((l + 1) as f64).powf(-1.5)
}

fn theta(l: usize) -> f64 {
    2.0 / (l + 1) as f64
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// One accelerated-subgradient iteration at index `l >= 1`. Returns the new
/// auxiliary and extrapolated iterates together with the row index used as
/// the subgradient of the polyhedral term.
pub fn asm_step(
    mu: &Array1<f64>,
    mu_bar: &Array1<f64>,
    tau: &Array1<f64>,
    lambda: &Array1<f64>,
    rows: &[Row],
    l: usize,
) -> Result<(Array1<f64>, Array1<f64>, usize)> {
    debug_assert!(l >= 1);
    let (_, used) = varphi_local(rows, mu)?;
    let f = &rows[used].0;
    let a = step_size(l);
    let mut mu_bar_next = mu.clone();
    for i in 0..mu.len() {
        mu_bar_next[i] += a * (tau[i] - f[i] - lambda[i] * sign(mu[i]));
    }
    let extr = theta(l + 1) * (1.0 / theta(l) - 1.0);
    let mut mu_next = mu_bar_next.clone();
    for i in 0..mu.len() {
        mu_next[i] += extr * (mu[i] - mu_bar[i]);
    }
    Ok((mu_bar_next, mu_next, used))
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    /// Number of accelerated-subgradient iterations per step.
    pub iterations: usize,
    /// Maximum number of cached rows carried to the next step.
    pub cache_capacity: usize,
    /// Optional cap on enumerated label-subset size (for many classes).
    pub max_subset_size: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { iterations: 2000, cache_capacity: 100, max_subset_size: None }
    }
}

/// Classifier parameters with the minimax risk and the row cache carried
/// between steps.
#[derive(Debug, Clone)]
pub struct ClassifierState {
    pub mu: Array1<f64>,
    /// Objective value at `mu` on the working rows of the latest step.
    pub minimax_risk: f64,
    pub cache: SubgradientCache,
    /// Best objective seen along the latest run of iterations (diagnostic).
    pub best_objective: f64,
    /// Number of working rows in the latest step.
    pub last_working_rows: usize,
}

impl ClassifierState {
    pub fn new(fm: &FeatureMap, cache_capacity: usize) -> Self {
        let uninformed = 1.0 - 1.0 / fm.n_classes() as f64;
        ClassifierState {
            mu: Array1::zeros(fm.dim()),
            minimax_risk: uninformed,
            cache: SubgradientCache::new(cache_capacity),
            best_objective: uninformed,
            last_working_rows: 0,
        }
    }
}

/// One optimization step: augments the cached rows with the subset rows of
/// the latest instance, runs `iterations` warm-started ASM iterations, and
/// trims the cache to the most recently used rows.
pub fn optimize(
    state: &mut ClassifierState,
    fm: &FeatureMap,
    psi_prev: &Array1<f64>,
    tau: &Array1<f64>,
    lambda: &Array1<f64>,
    cfg: &OptimizerConfig,
) -> Result<()> {
    let mut working: Vec<Row> = state.cache.rows().to_vec();
    working.extend(fm.subset_rows_from_psi(psi_prev, cfg.max_subset_size));
    state.last_working_rows = working.len();

    let mut mu = state.mu.clone();
    let mut mu_bar = state.mu.clone();
    let mut used_indices: Vec<usize> = Vec::with_capacity(cfg.iterations);
    let mut best = f64::INFINITY;
    for l in 1..=cfg.iterations {
        // one varphi evaluation serves both the subgradient row and the
        // objective value at the current iterate
        let (varphi, used) = varphi_local(&working, &mu)?;
        let reg: f64 = lambda.iter().zip(mu.iter()).map(|(lm, m)| lm * m.abs()).sum();
        let obj = 1.0 - tau.dot(&mu) + varphi + reg;
        if obj < best {
            best = obj;
        }
        used_indices.push(used);

        let f = &working[used].0;
        let a = step_size(l);
        let extr = theta(l + 1) * (1.0 / theta(l) - 1.0);
        for i in 0..mu.len() {
            let bar_next = mu[i] + a * (tau[i] - f[i] - lambda[i] * sign(mu[i]));
            let next = bar_next + extr * (mu[i] - mu_bar[i]);
            mu_bar[i] = bar_next;
            mu[i] = next;
        }
    }

    state.minimax_risk = objective(tau, lambda, &working, &mu)?;
    state.best_objective = best.min(state.minimax_risk);
    state.mu = mu;
    state.cache = SubgradientCache::from_used(&working, &used_indices, cfg.cache_capacity);
    Ok(())
}

/// Solves the uncertainty-free program (`lambda = 0`) over a fixed row set
/// with many iterations, starting from zero. Returns the parameter vector
/// and the corresponding minimax risk.
pub fn oracle_minimax(
    tau_true: &Array1<f64>,
    rows: &[Row],
    iterations: usize,
) -> Result<(Array1<f64>, f64)> {
    let zero_lambda = Array1::zeros(tau_true.len());
    let mut mu = Array1::zeros(tau_true.len());
    let mut mu_bar = mu.clone();
    for l in 1..=iterations {
        let (bar_next, next, _) = asm_step(&mu, &mu_bar, tau_true, &zero_lambda, rows, l)?;
        mu_bar = bar_next;
        mu = next;
    }
    let risk = objective(tau_true, &zero_lambda, rows, &mu)?;
    Ok((mu, risk))
}
