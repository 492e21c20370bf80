//! The five segment perturbation operators.

use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{draw_normal, draw_uniform};
use crate::scalar::{lit, Scalar};

use super::{Coalition, SegmentPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMethod {
    Zero,
    One,
    Mean,
    UniformNoise,
    NormalNoise,
}

impl PerturbMethod {
    pub const ALL: [PerturbMethod; 5] = [
        PerturbMethod::Zero,
        PerturbMethod::One,
        PerturbMethod::Mean,
        PerturbMethod::UniformNoise,
        PerturbMethod::NormalNoise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PerturbMethod::Zero => "zero",
            PerturbMethod::One => "one",
            PerturbMethod::Mean => "mean",
            PerturbMethod::UniformNoise => "uniform_noise",
            PerturbMethod::NormalNoise => "normal_noise",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "zero" => Ok(PerturbMethod::Zero),
            "one" => Ok(PerturbMethod::One),
            "mean" => Ok(PerturbMethod::Mean),
            "uniform_noise" => Ok(PerturbMethod::UniformNoise),
            "normal_noise" => Ok(PerturbMethod::NormalNoise),
            other => Err(Error::Parse(format!("unknown perturbation '{other}'"))),
        }
    }
}

/// Per-feature statistics the noise operators draw from, computed once per
/// experiment over the evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct FeatureStats<S: Scalar> {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    #[serde(skip)]
    _marker: std::marker::PhantomData<S>,
}

impl<S: Scalar> FeatureStats<S> {
    pub fn from_windows(windows: &[Array2<S>]) -> Result<Self> {
        let f = windows
            .first()
            .ok_or_else(|| Error::InvalidInput("no windows".into()))?
            .nrows();
        let mut mean = vec![0.0f64; f];
        let mut count = vec![0usize; f];
        let mut min = vec![f64::INFINITY; f];
        let mut max = vec![f64::NEG_INFINITY; f];
        for w in windows {
            if w.nrows() != f {
                return Err(Error::InvalidInput("windows disagree on channels".into()));
            }
            for (fi, row) in w.rows().into_iter().enumerate() {
                for v in row {
                    let v = v.as_f64();
                    mean[fi] += v;
                    count[fi] += 1;
                    min[fi] = min[fi].min(v);
                    max[fi] = max[fi].max(v);
                }
            }
        }
        for fi in 0..f {
            mean[fi] /= count[fi] as f64;
        }
        let mut var = vec![0.0f64; f];
        for w in windows {
            for (fi, row) in w.rows().into_iter().enumerate() {
                for v in row {
                    let d = v.as_f64() - mean[fi];
                    var[fi] += d * d;
                }
            }
        }
        let std = var
            .iter()
            .zip(&count)
            .map(|(v, c)| (v / *c as f64).sqrt())
            .collect();
        Ok(FeatureStats {
            mean,
            std,
            min,
            max,
            _marker: std::marker::PhantomData,
        })
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }
}

/// Apply `method` to the segments flagged in the coalition mask; unflagged
/// segments pass through bit-exactly. Noise draws consume the supplied
/// stream in segment order, then time order within a segment.
pub fn perturb<S: Scalar>(
    x: &Array2<S>,
    partition: &SegmentPartition,
    mask: &Coalition,
    method: PerturbMethod,
    stats: &FeatureStats<S>,
    rng: &mut ChaCha8Rng,
) -> Result<Array2<S>> {
    if partition.shape != x.dim() {
        return Err(Error::InvalidInput(format!(
            "partition shape {:?} does not match window {:?}",
            partition.shape,
            x.dim()
        )));
    }
    if mask.len() != partition.n_segments() {
        return Err(Error::InvalidInput(format!(
            "mask has {} bits for {} segments",
            mask.len(),
            partition.n_segments()
        )));
    }
    if stats.n_features() != x.nrows() {
        return Err(Error::InvalidInput(
            "feature stats fitted on a different channel count".into(),
        ));
    }
    let mut out = x.clone();
    for (seg, &flagged) in partition.segments.iter().zip(mask.bits()) {
        if !flagged {
            continue;
        }
        match method {
            PerturbMethod::Zero => {
                for t in seg.start..seg.end {
                    out[[seg.channel, t]] = S::zero();
                }
            }
            PerturbMethod::One => {
                for t in seg.start..seg.end {
                    out[[seg.channel, t]] = S::one();
                }
            }
            PerturbMethod::Mean => {
                let mut sum = S::zero();
                for t in seg.start..seg.end {
                    sum = sum + x[[seg.channel, t]];
                }
                let mean = sum / lit::<S>(seg.len() as f64);
                for t in seg.start..seg.end {
                    out[[seg.channel, t]] = mean;
                }
            }
            PerturbMethod::UniformNoise => {
                let (lo, hi) = (stats.min[seg.channel], stats.max[seg.channel]);
                for t in seg.start..seg.end {
                    out[[seg.channel, t]] = draw_uniform(rng, lo, hi);
                }
            }
            PerturbMethod::NormalNoise => {
                let (mu, sd) = (stats.mean[seg.channel], stats.std[seg.channel]);
                for t in seg.start..seg.end {
                    let n: S = draw_normal(rng);
                    out[[seg.channel, t]] =
                        S::from_f64_lossy(mu) + S::from_f64_lossy(sd) * n;
                }
            }
        }
    }
    Ok(out)
}
