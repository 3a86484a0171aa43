//! Adaptive minimax risk classification for streaming data under concept
//! drift.
//!
//! The library tracks the time-varying mean of a feature mapping with
//! per-component kinematic recursions, learns classifier parameters by
//! solving a minimax program with an accelerated subgradient method, and
//! reports computable performance bounds alongside the predictions. The
//! [`harness`] module drives the full prequential loop over CSV or
//! synthetic streams.

pub mod classifier;
pub mod datagen;
pub mod error;
pub mod feature_map;
pub mod guarantees;
pub mod harness;
pub mod optimizer;
pub mod tracker;

pub use classifier::{predict_deterministic, predict_probs, sample_label, PredictionDistribution};
pub use error::{Error, Result};
pub use feature_map::{FeatureMap, InstanceMap, Label};
pub use guarantees::{alpha, beta, mistake_bound, mistake_bound_per_step, BoundRecord};
pub use optimizer::{optimize, oracle_minimax, ClassifierState, OptimizerConfig, SubgradientCache};
pub use tracker::{Tracker, TrackerConfig, UncertaintyModel};
