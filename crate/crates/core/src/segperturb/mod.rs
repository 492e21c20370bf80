//! Segmentation of multivariate series into contiguous per-channel segments,
//! the perturbation operators, and coalition generation for the surrogate
//! explainers.

mod coalition;
mod perturb;
mod segmentation;

pub use coalition::{enumerate_coalitions, sample_coalitions, Coalition};
pub use perturb::{perturb, FeatureStats, PerturbMethod};
pub use segmentation::{l2_optimal_segmentation, segment_cost, uniform_segmentation};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Half-open slice `[start, end)` of one channel's time axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub channel: usize,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentationKind {
    Uniform,
    L2Optimal,
}

/// A decomposition of a channels-by-time window into contiguous per-channel
/// segments, ordered channel-major then by start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentPartition {
    pub segments: Vec<Segment>,
    pub kind: SegmentationKind,
    pub shape: (usize, usize),
}

impl SegmentPartition {
    /// Equal windows of size `m` on every channel; the trailing window may
    /// be shorter.
    pub fn uniform(shape: (usize, usize), m: usize) -> Result<Self> {
        let (f, t) = shape;
        let bounds = uniform_segmentation(t, m)?;
        let mut segments = Vec::with_capacity(f * bounds.len());
        for channel in 0..f {
            for &(start, end) in &bounds {
                segments.push(Segment {
                    channel,
                    start,
                    end,
                });
            }
        }
        Ok(SegmentPartition {
            segments,
            kind: SegmentationKind::Uniform,
            shape,
        })
    }

    /// Cost-optimal segmentation with `per_channel` segments on each
    /// channel, fitted independently per channel.
    pub fn l2_optimal<S: Scalar>(x: &Array2<S>, per_channel: usize) -> Result<Self> {
        let (f, _) = x.dim();
        let mut segments = Vec::with_capacity(f * per_channel);
        for channel in 0..f {
            let row: Vec<S> = x.row(channel).to_vec();
            let bounds = l2_optimal_segmentation(&row, per_channel)?;
            for (start, end) in bounds {
                segments.push(Segment {
                    channel,
                    start,
                    end,
                });
            }
        }
        Ok(SegmentPartition {
            segments,
            kind: SegmentationKind::L2Optimal,
            shape: x.dim(),
        })
    }

    pub fn n_segments(&self) -> usize {
        self.segments.len()
    }

    /// Verify contiguity, disjointness, and full coverage per channel.
    pub fn validate(&self) -> Result<()> {
        let (f, t) = self.shape;
        for channel in 0..f {
            let mut cursor = 0usize;
            for seg in self.segments.iter().filter(|s| s.channel == channel) {
                if seg.is_empty() {
                    return Err(Error::InvalidInput(format!(
                        "empty segment on channel {channel}"
                    )));
                }
                if seg.start != cursor {
                    return Err(Error::InvalidInput(format!(
                        "channel {channel} has a gap or overlap at {}",
                        seg.start
                    )));
                }
                cursor = seg.end;
            }
            if cursor != t {
                return Err(Error::InvalidInput(format!(
                    "channel {channel} covers only [0, {cursor}) of [0, {t})"
                )));
            }
        }
        Ok(())
    }
}
