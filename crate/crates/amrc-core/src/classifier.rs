//! Prediction rules: the randomized rule derived from the classifier
//! parameters and the deterministic argmax rule.

use ndarray::Array1;
use rand::Rng;

use crate::error::Result;
use crate::feature_map::{FeatureMap, Label};
use crate::optimizer::{varphi_local, Row, SubgradientCache};

/// Conditional label distribution produced by the randomized rule.
#[derive(Debug, Clone)]
pub struct PredictionDistribution {
    pub probs: Vec<f64>,
    /// Normalizer; zero means the uniform fallback was used.
    pub c_x: f64,
    pub varphi_value: f64,
}

/// Evaluates the randomized rule at `x`. The polyhedral term is maximized
/// over the cached rows augmented with the subset rows of the current
/// instance, so the rows relevant to `x` are always present.
pub fn predict_probs(
    fm: &FeatureMap,
    mu: &Array1<f64>,
    cache: &SubgradientCache,
    x: &[f64],
) -> Result<PredictionDistribution> {
    let psi = fm.psi(x)?;
    let mut rows: Vec<Row> = cache.rows().to_vec();
    rows.extend(fm.subset_rows_from_psi(&psi, None));
    let (varphi, _) = varphi_local(&rows, mu)?;
    let scores = fm.block_scores(&psi, mu);
    let numerators: Vec<f64> = scores.iter().map(|s| (s - varphi).max(0.0)).collect();
    let c_x: f64 = numerators.iter().sum();
    let probs = if c_x == 0.0 {
        vec![1.0 / fm.n_classes() as f64; fm.n_classes()]
    } else {
        numerators.iter().map(|n| n / c_x).collect()
    };
    Ok(PredictionDistribution { probs, c_x, varphi_value: varphi })
}

/// Deterministic rule: label with the largest score, lowest index on ties.
pub fn predict_deterministic(
    fm: &FeatureMap,
    mu: &Array1<f64>,
    x: &[f64],
) -> Result<Label> {
    let psi = fm.psi(x)?;
    let scores = fm.block_scores(&psi, mu);
    let mut best = 0;
    for (j, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = j;
        }
    }
    Ok(best + 1)
}

/// Draws a label from the prediction distribution.
pub fn sample_label<R: Rng>(dist: &PredictionDistribution, rng: &mut R) -> Label {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (j, p) in dist.probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return j + 1;
        }
    }
    dist.probs.len()
}
