//! Tracking of the time-varying mean vector.
//!
//! Each component of the mean vector is the product of a label probability
//! and a conditional feature expectation. The label probabilities come from
//! a sliding window over the latest labels; the conditional expectations are
//! tracked per component with a kinematic state-space recursion whose state
//! stacks the expectation and its time derivatives up to a configurable
//! order. Observation and process noise variances are re-estimated online
//! from innovations with an exponential forgetting scheme.

use std::collections::VecDeque;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::feature_map::Label;

/// Kinematic state model of a scalar quantity and its derivatives.
#[derive(Debug, Clone, Copy)]
pub struct KinematicModel {
    /// Highest tracked derivative order; state dimension is `order + 1`.
    pub order: usize,
    /// Time increment between consecutive steps.
    pub delta: f64,
}

impl KinematicModel {
    pub fn new(order: usize, delta: f64) -> Self {
        assert!(delta > 0.0, "time increment must be positive");
        KinematicModel { order, delta }
    }

    /// State dimension `k + 1`.
    pub fn state_dim(&self) -> usize {
        self.order + 1
    }

    /// Unit upper-triangular transition matrix with `delta^s / s!` on the
    /// s-th upper diagonal.
    pub fn transition_matrix(&self) -> Array2<f64> {
        let n = self.state_dim();
        let mut h = Array2::eye(n);
        let mut coeff = 1.0;
        for s in 1..n {
            coeff *= self.delta / s as f64;
            for i in 0..n - s {
                h[[i, i + s]] = coeff;
            }
        }
        h
    }
}

impl Default for KinematicModel {
    fn default() -> Self {
        KinematicModel { order: 1, delta: 1.0 }
    }
}

/// Forgetting-factor scheme for the innovation-based noise estimator.
#[derive(Debug, Clone, Copy)]
pub struct NoiseConfig {
    /// Forgetting factor in (0, 1).
    pub rho: f64,
    /// Floor applied to the raw observation-variance estimate.
    pub eps_floor: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { rho: 0.3, eps_floor: 1e-8 }
    }
}

/// Initial values for a component tracker.
#[derive(Debug, Clone, Copy)]
pub struct TrackerInit {
    /// Initial MSE matrix is `sigma0 * I`.
    pub sigma0: f64,
    /// Initial process noise is `q0 * I`.
    pub q0: f64,
    /// Initial observation-noise variance.
    pub r2_0: f64,
}

impl Default for TrackerInit {
    fn default() -> Self {
        TrackerInit { sigma0: 1.0, q0: 0.01, r2_0: 1.0 }
    }
}

/// Per-component kinematic tracking state.
#[derive(Debug, Clone)]
pub struct ComponentTracker {
    /// State estimate: conditional expectation and derivatives.
    pub eta: Array1<f64>,
    /// MSE matrix of the state estimate.
    pub sigma: Array2<f64>,
    /// Process-noise covariance estimate.
    pub q: Array2<f64>,
    /// Observation-noise variance estimate.
    pub r2: f64,
    /// Label this component belongs to.
    pub label: Label,
}

impl ComponentTracker {
    pub fn new(order: usize, label: Label, init: &TrackerInit) -> Self {
        let n = order + 1;
        ComponentTracker {
            eta: Array1::zeros(n),
            sigma: Array2::eye(n) * init.sigma0,
            q: Array2::eye(n) * init.q0,
            r2: init.r2_0,
            label,
        }
    }

    /// Current estimate of the conditional expectation.
    pub fn gamma(&self) -> f64 {
        self.eta[0]
    }

    /// Leading MSE entry `e1' Sigma e1`.
    pub fn mse(&self) -> f64 {
        self.sigma[[0, 0]]
    }

    /// Gain vector `H Sigma e1 / (e1' Sigma e1 + r2)` for an observed step.
    pub fn gain(&self, h: &Array2<f64>) -> Result<Array1<f64>> {
        let s = self.mse() + self.r2;
        if s <= 0.0 {
            return Err(Error::DegenerateVariance { component: self.label });
        }
        Ok(h.dot(&self.sigma.column(0)) / s)
    }

    /// One recursion step. With an observation, applies the gain correction;
    /// without one, the state and MSE are propagated through the model only.
    pub fn update(&mut self, h: &Array2<f64>, observation: Option<f64>) -> Result<()> {
        match observation {
            None => {
                self.eta = h.dot(&self.eta);
                self.sigma = h.dot(&self.sigma).dot(&h.t()) + &self.q;
                self.symmetrize();
                Ok(())
            }
            Some(obs) => {
                let gain = self.gain(h)?;
                self.update_with_gain(h, &gain, obs);
                Ok(())
            }
        }
    }

    /// Recursion step with an externally supplied gain vector.
    pub fn update_with_gain(&mut self, h: &Array2<f64>, gain: &Array1<f64>, obs: f64) {
        let innovation = self.gamma() - obs;
        let h_sigma_e1 = h.dot(&self.sigma.column(0));
        self.eta = h.dot(&self.eta) - &(gain * innovation);
        let mut sigma = h.dot(&self.sigma).dot(&h.t()) + &self.q;
        // rank-one correction: gain * (e1' Sigma H')
        for i in 0..sigma.nrows() {
            for j in 0..sigma.ncols() {
                sigma[[i, j]] -= gain[i] * h_sigma_e1[j];
            }
        }
        self.sigma = sigma;
        self.symmetrize();
    }

    /// Innovation-based update of `r2` and `Q`, called on observation steps
    /// before the state update with the pre-update innovation
    /// `d = observed - gamma`.
    pub fn estimate_noise(
        &mut self,
        h: &Array2<f64>,
        innovation: f64,
        cfg: &NoiseConfig,
    ) -> Result<()> {
        let gain = self.gain(h)?;
        let rho = cfg.rho;
        let residual = (innovation * innovation - self.mse()).max(cfg.eps_floor);
        self.r2 = rho * self.r2 + (1.0 - rho) * residual;
        let scaled = &gain * innovation;
        for i in 0..self.q.nrows() {
            for j in 0..self.q.ncols() {
                self.q[[i, j]] =
                    rho * self.q[[i, j]] + (1.0 - rho) * scaled[i] * scaled[j];
            }
        }
        Ok(())
    }

    fn symmetrize(&mut self) {
        let n = self.sigma.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.sigma[[i, j]] + self.sigma[[j, i]]);
                self.sigma[[i, j]] = avg;
                self.sigma[[j, i]] = avg;
            }
        }
    }
}

/// Ring buffer of the latest labels used to estimate label probabilities.
#[derive(Debug, Clone)]
pub struct LabelWindow {
    capacity: usize,
    n_classes: usize,
    buffer: VecDeque<Label>,
}

impl LabelWindow {
    pub fn new(capacity: usize, n_classes: usize) -> Self {
        assert!(capacity > 0, "window length must be positive");
        LabelWindow { capacity, n_classes, buffer: VecDeque::with_capacity(capacity) }
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Pushes a label (evicting the oldest when full) and returns the
    /// updated probabilities. Before the window fills, the divisor is the
    /// current buffer length so the probabilities stay normalized.
    pub fn push(&mut self, y: Label) -> Vec<f64> {
        debug_assert!(y >= 1 && y <= self.n_classes);
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(y);
        self.probs()
    }

    pub fn probs(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.n_classes];
        for &y in &self.buffer {
            counts[y - 1] += 1;
        }
        let denom = self.buffer.len().max(1) as f64;
        counts.iter().map(|&c| c as f64 / denom).collect()
    }
}

/// Mean estimate and confidence vector defining the uncertainty set.
#[derive(Debug, Clone)]
pub struct UncertaintyModel {
    pub tau: Array1<f64>,
    pub lambda: Array1<f64>,
}

/// Combines label probabilities with per-component states into the mean
/// estimate and confidence vector.
pub fn assemble_tau_lambda(
    probs: &[f64],
    trackers: &[ComponentTracker],
    lambda_floor: f64,
) -> Result<UncertaintyModel> {
    let m = trackers.len();
    let mut tau = Array1::zeros(m);
    let mut lambda = Array1::zeros(m);
    for (i, tr) in trackers.iter().enumerate() {
        let p = probs[tr.label - 1];
        let gamma = tr.gamma();
        tau[i] = p * gamma;
        let inner = p * (gamma * gamma * (1.0 - p) + tr.mse());
        if inner < -1e-10 {
            return Err(Error::BrokenCovariance { value: inner });
        }
        lambda[i] = inner.max(0.0).sqrt().max(lambda_floor);
    }
    Ok(UncertaintyModel { tau, lambda })
}

/// Configuration for the whole-vector tracker.
#[derive(Debug, Clone, Copy)]
pub struct TrackerConfig {
    pub model: KinematicModel,
    pub noise: NoiseConfig,
    pub init: TrackerInit,
    /// Window length for label probabilities.
    pub window: usize,
    /// Optional floor on the confidence vector (0 keeps the plain formula).
    pub lambda_floor: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            model: KinematicModel::default(),
            noise: NoiseConfig::default(),
            init: TrackerInit::default(),
            window: 200,
            lambda_floor: 0.0,
        }
    }
}

/// Tracker for all `m` mean-vector components plus the label window.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    transition: Array2<f64>,
    window: LabelWindow,
    components: Vec<ComponentTracker>,
    feature_dim: usize,
}

impl Tracker {
    /// Builds `n_classes * feature_dim` component trackers laid out in
    /// label-major blocks, matching the feature-map component layout.
    pub fn new(n_classes: usize, feature_dim: usize, config: TrackerConfig) -> Self {
        let components = (0..n_classes * feature_dim)
            .map(|i| {
                ComponentTracker::new(config.model.order, i / feature_dim + 1, &config.init)
            })
            .collect();
        Tracker {
            transition: config.model.transition_matrix(),
            window: LabelWindow::new(config.window, n_classes),
            components,
            feature_dim,
            config,
        }
    }

    pub fn components(&self) -> &[ComponentTracker] {
        &self.components
    }

    pub fn label_probs(&self) -> Vec<f64> {
        self.window.probs()
    }

    fn observation(&self, i: usize, psi: &Array1<f64>, y: Label) -> Option<f64> {
        if self.components[i].label == y {
            Some(psi[i % self.feature_dim])
        } else {
            None
        }
    }

    /// One tracking step: pushes the revealed label, updates every
    /// component (with an observation only where the label matches), and
    /// assembles the uncertainty model.
    pub fn track_step(&mut self, psi: &Array1<f64>, y: Label) -> Result<UncertaintyModel> {
        let probs = self.window.push(y);
        for i in 0..self.components.len() {
            let obs = self.observation(i, psi, y);
            let tr = &mut self.components[i];
            if let Some(z) = obs {
                let innovation = z - tr.gamma();
                tr.estimate_noise(&self.transition, innovation, &self.config.noise)?;
                tr.update(&self.transition, Some(z))?;
            } else {
                tr.update(&self.transition, None)?;
            }
        }
        assemble_tau_lambda(&probs, &self.components, self.config.lambda_floor)
    }

    /// Scalar-rate ablation: every component shares one gain vector, the
    /// componentwise average of the per-component gains (zero for
    /// components whose label does not match).
    pub fn unidimensional_track_step(
        &mut self,
        psi: &Array1<f64>,
        y: Label,
    ) -> Result<UncertaintyModel> {
        let probs = self.window.push(y);
        let m = self.components.len();
        let dim = self.config.model.state_dim();
        // noise estimation first, as in the per-component path, so the
        // gains below see the refreshed variances
        for i in 0..m {
            if let Some(z) = self.observation(i, psi, y) {
                let tr = &mut self.components[i];
                let innovation = z - tr.gamma();
                tr.estimate_noise(&self.transition, innovation, &self.config.noise)?;
            }
        }
        let mut avg_gain = Array1::zeros(dim);
        for tr in &self.components {
            if tr.label == y {
                avg_gain += &tr.gain(&self.transition)?;
            }
        }
        avg_gain /= m as f64;
        for i in 0..m {
            let obs = self.observation(i, psi, y).unwrap_or(0.0);
            self.components[i].update_with_gain(&self.transition, &avg_gain, obs);
        }
        assemble_tau_lambda(&probs, &self.components, self.config.lambda_floor)
    }
}
