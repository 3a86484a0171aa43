//! Synthetic rotating-Gaussian drift stream with an analytic oracle for the
//! true mean vector and Monte-Carlo estimation of true error probabilities.
//!
//! Labels are fair coin flips over {1, 2}; the class-conditional instance
//! distributions are Gaussians whose means move along a circle of radius 4
//! with time-varying speed and direction.

use std::f64::consts::PI;

use ndarray::Array1;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::feature_map::{FeatureMap, InstanceMap, Label};

#[derive(Debug, Clone, Copy)]
pub struct SyntheticConfig {
    /// Angular rate of the drifting class means.
    pub omega: f64,
    /// Standard deviation of the additive Gaussian noise (variance 2 by
    /// default).
    pub noise_std: f64,
    /// Stream length.
    pub steps: usize,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn new(steps: usize, seed: u64) -> Self {
        SyntheticConfig { omega: 0.1, noise_std: 2f64.sqrt(), steps, seed }
    }
}

/// Angle of the class-`y` mean at time `t`.
fn mean_angle(omega: f64, t: usize, y: Label) -> f64 {
    PI * (((omega * t as f64).cos() - 3.0) / 2.0 + y as f64)
}

/// Noise-free class-conditional mean at time `t`.
pub fn class_mean(cfg: &SyntheticConfig, t: usize, y: Label) -> [f64; 2] {
    let angle = mean_angle(cfg.omega, t, y);
    [4.0 * angle.cos(), 4.0 * angle.sin()]
}

/// Draws the time-`t` instance-label pair.
pub fn synth_step<R: Rng>(cfg: &SyntheticConfig, t: usize, rng: &mut R) -> ([f64; 2], Label) {
    let y: Label = if rng.gen::<bool>() { 1 } else { 2 };
    let mean = class_mean(cfg, t, y);
    let noise = Normal::new(0.0, cfg.noise_std).unwrap();
    let x = [mean[0] + noise.sample(rng), mean[1] + noise.sample(rng)];
    (x, y)
}

/// Generates the full stream from the configured seed.
pub fn stream(cfg: &SyntheticConfig) -> Vec<([f64; 2], Label)> {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    (1..=cfg.steps).map(|t| synth_step(cfg, t, &mut rng)).collect()
}

/// Analytic mean vector of the feature mapping at time `t` for the linear
/// instance map: each label block equals half its class-conditional mean,
/// since labels are fair and the noise has mean zero.
pub fn true_tau(cfg: &SyntheticConfig, t: usize, fm: &FeatureMap) -> Result<Array1<f64>> {
    match fm.instance_map() {
        InstanceMap::Linear { dim: 2 } => {}
        _ => {
            return Err(Error::Unsupported(
                "analytic mean vector requires the 2-d linear instance map".into(),
            ))
        }
    }
    let mut tau = Array1::zeros(fm.dim());
    for y in 1..=2 {
        let mean = class_mean(cfg, t, y);
        tau[2 * (y - 1)] = 0.5 * mean[0];
        tau[2 * (y - 1) + 1] = 0.5 * mean[1];
    }
    Ok(tau)
}

/// Monte-Carlo estimate of the error probability at time `t` of a rule
/// reporting its miss probability `1 - h(y|x)` for a drawn pair.
pub fn true_error<R, F>(cfg: &SyntheticConfig, t: usize, mut miss_prob: F, trials: usize, rng: &mut R) -> f64
where
    R: Rng,
    F: FnMut(&[f64; 2], Label) -> f64,
{
    debug_assert!(trials >= 1);
    let mut total = 0.0;
    for _ in 0..trials {
        let (x, y) = synth_step(cfg, t, rng);
        total += miss_prob(&x, y);
    }
    total / trials as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg_noiseless() -> SyntheticConfig {
        // omega = 2*pi makes cos(omega * t) = 1 at every integer t
        SyntheticConfig { omega: 2.0 * PI, noise_std: 0.0, steps: 10, seed: 0 }
    }

    #[test]
    fn class_means_at_cos_one() {
        let cfg = cfg_noiseless();
        // cos(omega t) = 1: angle = pi * (-1 + y)
        let m1 = class_mean(&cfg, 1, 1);
        assert_abs_diff_eq!(m1[0], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m1[1], 0.0, epsilon = 1e-12);
        let m2 = class_mean(&cfg, 1, 2);
        assert_abs_diff_eq!(m2[0], -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m2[1], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn class_means_stay_on_radius_four_circle() {
        let cfg = SyntheticConfig::new(100, 1);
        for t in 1..=100 {
            for y in 1..=2 {
                let m = class_mean(&cfg, t, y);
                assert_abs_diff_eq!((m[0] * m[0] + m[1] * m[1]).sqrt(), 4.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn true_tau_at_cos_one() {
        let cfg = cfg_noiseless();
        let fm = FeatureMap::new(InstanceMap::linear(2), 2);
        let tau = true_tau(&cfg, 1, &fm).unwrap();
        assert_abs_diff_eq!(tau[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tau[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tau[2], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tau[3], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn true_tau_block_norms() {
        let cfg = SyntheticConfig::new(50, 3);
        let fm = FeatureMap::new(InstanceMap::linear(2), 2);
        for t in [1, 7, 33] {
            let tau = true_tau(&cfg, t, &fm).unwrap();
            for j in 0..2 {
                let norm = (tau[2 * j] * tau[2 * j] + tau[2 * j + 1] * tau[2 * j + 1]).sqrt();
                assert_abs_diff_eq!(norm, 2.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn true_tau_rejects_rff_map() {
        let cfg = SyntheticConfig::new(10, 0);
        let fm = FeatureMap::new(InstanceMap::rff(2, 4, 1.0, 0), 2);
        assert!(true_tau(&cfg, 1, &fm).is_err());
    }

    #[test]
    fn stream_is_seed_deterministic() {
        let cfg = SyntheticConfig::new(200, 42);
        let a = stream(&cfg);
        let b = stream(&cfg);
        assert_eq!(a.len(), 200);
        for (u, v) in a.iter().zip(&b) {
            assert_eq!(u.0, v.0);
            assert_eq!(u.1, v.1);
        }
    }

    #[test]
    fn labels_are_roughly_balanced() {
        let cfg = SyntheticConfig::new(10_000, 7);
        let s = stream(&cfg);
        let ones = s.iter().filter(|(_, y)| *y == 1).count() as f64;
        let frac = ones / s.len() as f64;
        assert!((frac - 0.5).abs() < 0.02, "frac = {frac}");
    }

    #[test]
    fn sample_mean_matches_analytic_mean() {
        let cfg = SyntheticConfig::new(1, 5);
        let t = 17;
        let trials = 20_000;
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let mut sums = [[0.0f64; 2]; 2];
        let mut counts = [0usize; 2];
        for _ in 0..trials {
            let (x, y) = synth_step(&cfg, t, &mut rng);
            sums[y - 1][0] += x[0];
            sums[y - 1][1] += x[1];
            counts[y - 1] += 1;
        }
        for y in 1..=2 {
            let mean = class_mean(&cfg, t, y);
            let n = counts[y - 1] as f64;
            let tol = 3.0 * cfg.noise_std / n.sqrt();
            assert!((sums[y - 1][0] / n - mean[0]).abs() < tol);
            assert!((sums[y - 1][1] / n - mean[1]).abs() < tol);
        }
    }

    #[test]
    fn true_error_of_constant_rule_is_half() {
        let cfg = SyntheticConfig::new(1, 11);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let err = true_error(&cfg, 3, |_, y| if y == 1 { 0.0 } else { 1.0 }, 10_000, &mut rng);
        assert!((err - 0.5).abs() < 0.02, "err = {err}");
    }

    #[test]
    fn true_error_monte_carlo_concentrates() {
        let cfg = SyntheticConfig::new(1, 11);
        let rule = |x: &[f64; 2], y: Label| {
            // plug-in rule from the known class means
            let d1 = (x[0] - class_mean(&cfg, 5, 1)[0]).powi(2)
                + (x[1] - class_mean(&cfg, 5, 1)[1]).powi(2);
            let d2 = (x[0] - class_mean(&cfg, 5, 2)[0]).powi(2)
                + (x[1] - class_mean(&cfg, 5, 2)[1]).powi(2);
            let pred = if d1 <= d2 { 1 } else { 2 };
            if pred == y {
                0.0
            } else {
                1.0
            }
        };
        let mut rng1 = ChaCha12Rng::seed_from_u64(1);
        let mut rng2 = ChaCha12Rng::seed_from_u64(2);
        let e1 = true_error(&cfg, 5, rule, 10_000, &mut rng1);
        let e2 = true_error(&cfg, 5, rule, 10_000, &mut rng2);
        assert!((e1 - e2).abs() < 0.02);
        assert!(e1 > 0.0 && e1 < 0.5);
    }
}
