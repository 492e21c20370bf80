//! Quantitative explanation-quality proxies and their test-set aggregation.
//!
//! Three consistency proxies compare explanations across samples (identity,
//! separability, stability); five perturbation proxies score one sample's
//! explanation against the model (selectivity, coherence, completeness,
//! congruency, acumen).

mod consistency;
mod evaluate;
mod perturbation;
mod report;
mod select;
mod spearman;

pub use consistency::{euclidean, identity_proxy, separability_proxy, stability_proxy};
pub use evaluate::evaluate_all;
pub use perturbation::{
    acumen_proxy, coherence_proxy, completeness_from, congruency_proxy, selectivity_proxy,
    CoherenceParts,
};
pub use report::{reports_to_json, write_reports_csv, write_reports_json};
pub use select::{select_important, ImportantFeatureSet};
pub use spearman::{average_ranks, spearman};

use serde::{Deserialize, Serialize};

/// Knobs shared by the proxy battery.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxyConfig {
    /// Elements removed per step in the selectivity curve.
    pub group_size: usize,
    /// Importance threshold as a multiple of the map's standard deviation.
    pub std_factor: f64,
    /// Hard cap on the important-feature set.
    pub cap: usize,
    /// Rank by absolute importance instead of raw values.
    pub abs_importance: bool,
}

impl Default for ProxyConfig {
    fn default() -> Self {
        ProxyConfig {
            group_size: 10,
            std_factor: 1.5,
            cap: 100,
            abs_importance: false,
        }
    }
}

/// Aggregated battery scores for one explainer configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProxyScores {
    pub identity: f64,
    pub separability: f64,
    pub stability: f64,
    pub selectivity: f64,
    pub coherence: f64,
    pub completeness: f64,
    pub congruency: f64,
    pub acumen: f64,
}

/// Per-proxy accounting of samples that could not contribute.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct SkipCounts {
    /// Samples whose explanation failed outright.
    pub failed_samples: usize,
    /// Coherence fell back to a fully zeroed window (empty important set).
    pub coherence_fully_zeroed: usize,
    /// Completeness skipped because the prediction error was zero.
    pub completeness_skipped: usize,
    /// Acumen undefined because the important set was empty.
    pub acumen_skipped: usize,
    /// Stability terms forced to zero by a zero-variance rank vector.
    pub stability_zero_variance: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxyReport {
    pub method: String,
    /// Surrogate perturbation operator, empty for gradient methods.
    pub perturbation: String,
    pub fingerprint: String,
    pub n_samples: usize,
    pub scores: ProxyScores,
    pub skips: SkipCounts,
}
