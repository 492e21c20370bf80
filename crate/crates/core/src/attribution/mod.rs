//! The explanation methods behind one common interface. Every explainer
//! turns a `(model, window)` pair into a channels-by-time importance map.

mod diagnostics;
mod export;
mod gradcam;
mod lime;
mod lrp;
mod saliency;
mod shap;
mod shapley;

pub use diagnostics::{IdentityExplainer, RandomMapExplainer};
pub use export::{write_map_csv, write_map_pgm};
pub use gradcam::{gradcam_components, gradcam_pre_relu, GradCam, GradCamComponents};
pub use lime::Lime;
pub use lrp::Lrp;
pub use saliency::Saliency;
pub use shap::KernelShap;
pub use shapley::{exact_shapley_oracle, shapley_kernel_weight, ShapKernelVariant};

use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{hash64, substream};
use crate::scalar::Scalar;
use crate::segperturb::{FeatureStats, PerturbMethod, SegmentPartition};
use crate::tsmodel::Model;

/// Per-element importances aligned with the explained window.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionMap<S: Scalar> {
    pub values: Array2<S>,
    pub method: String,
    /// Compact description of the configuration that produced the map.
    pub fingerprint: String,
    /// Intercept of the surrogate fit where one exists (the prediction on
    /// the fully perturbed window).
    pub baseline: Option<f64>,
}

impl<S: Scalar> AttributionMap<S> {
    pub fn new(values: Array2<S>, method: impl Into<String>, fingerprint: String) -> Self {
        AttributionMap {
            values,
            method: method.into(),
            fingerprint,
            baseline: None,
        }
    }

    pub fn assert_finite(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{} attribution map", self.method)));
        }
        Ok(())
    }
}

/// Identifies one explanation invocation. Stochastic explainers derive their
/// internal streams from it, so a repeated invocation with the same context
/// is bit-identical while a fresh invocation draws new randomness.
#[derive(Debug, Clone, Copy)]
pub struct ExplainCtx {
    pub master_seed: u64,
    pub sample_id: u64,
    pub invocation: u64,
}

impl ExplainCtx {
    pub fn new(master_seed: u64, sample_id: u64) -> Self {
        ExplainCtx {
            master_seed,
            sample_id,
            invocation: 0,
        }
    }

    pub fn with_invocation(mut self, invocation: u64) -> Self {
        self.invocation = invocation;
        self
    }

    pub fn rng(&self, tag: &str) -> ChaCha8Rng {
        substream(
            self.master_seed,
            &[hash64(tag.as_bytes()), self.sample_id, self.invocation],
        )
    }
}

pub trait Explainer<S: Scalar> {
    /// Short method id used in reports ("saliency", "lime", ...).
    fn name(&self) -> String;

    /// The surrogate perturbation operator, for methods that have one.
    fn perturbation(&self) -> Option<PerturbMethod> {
        None
    }

    fn fingerprint(&self) -> String;

    fn explain(&self, model: &Model<S>, x: &Array2<S>, ctx: &ExplainCtx)
        -> Result<AttributionMap<S>>;
}

/// How the surrogates carve the window into atomic features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SegmentationSpec {
    Uniform { window: usize },
    L2Optimal { per_channel: usize },
}

impl SegmentationSpec {
    pub fn build<S: Scalar>(&self, x: &Array2<S>) -> Result<SegmentPartition> {
        match *self {
            SegmentationSpec::Uniform { window } => SegmentPartition::uniform(x.dim(), window),
            SegmentationSpec::L2Optimal { per_channel } => {
                SegmentPartition::l2_optimal(x, per_channel)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SegmentationSpec::Uniform { window } => format!("uniform:{window}"),
            SegmentationSpec::L2Optimal { per_channel } => format!("l2:{per_channel}"),
        }
    }
}

/// Shared configuration of the LIME and Kernel SHAP surrogates.
#[derive(Debug, Clone)]
pub struct SurrogateConfig<S: Scalar> {
    pub segmentation: SegmentationSpec,
    pub perturbation: PerturbMethod,
    /// Number of coalitions in the neighborhood; when every coalition fits
    /// (2^segments <= neighborhood) the full set is enumerated instead of
    /// sampled.
    pub neighborhood: usize,
    /// Proximity kernel width in Hamming-fraction units (LIME only).
    pub kernel_width: f64,
    /// Ridge strength on the surrogate slopes (LIME only).
    pub ridge: f64,
    pub stats: FeatureStats<S>,
}

impl<S: Scalar> SurrogateConfig<S> {
    pub(crate) fn coalitions(
        &self,
        n_segments: usize,
        rng: &mut ChaCha8Rng,
    ) -> Vec<crate::segperturb::Coalition> {
        if n_segments < 26 && (1usize << n_segments) <= self.neighborhood {
            crate::segperturb::enumerate_coalitions(n_segments)
        } else {
            crate::segperturb::sample_coalitions(n_segments, self.neighborhood, rng)
        }
    }
}

/// Spread per-segment coefficients uniformly over the segments' elements.
pub(crate) fn broadcast_to_map<S: Scalar>(
    partition: &SegmentPartition,
    coefficients: &[S],
) -> Array2<S> {
    let mut values = Array2::<S>::zeros(partition.shape);
    for (seg, &coef) in partition.segments.iter().zip(coefficients) {
        for t in seg.start..seg.end {
            values[[seg.channel, t]] = coef;
        }
    }
    values
}
