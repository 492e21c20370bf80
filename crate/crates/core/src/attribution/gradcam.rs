//! Gradient-weighted activation mapping for 1D conv layers, extended with a
//! time-profile term (weight `beta`) and a channel term (weight `sigma`).
//!
//! For the addressed layer with gradient matrix `G` (channels x time) and
//! activations `A`, each map's weight combines three averages of `G`: the
//! map's own mean (the classic pooling), the cross-channel column means (a
//! time profile, scaled by `beta`), and the per-channel row means (scaled by
//! `sigma`). The weighted activation sum is clamped at zero, linearly
//! interpolated along time to the input length, and broadcast over the
//! input channels. Conv feature maps carry no input-channel identity, so
//! when `sigma > 0` the broadcast rows are additionally modulated by the
//! per-input-channel means of the input gradient (the channel term
//! evaluated at layer zero, the input itself); this alignment choice is the
//! loosest part of the method and is pinned here deliberately.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::tsmodel::{feature_map_gradient, input_gradient, Model};

use super::{AttributionMap, ExplainCtx, Explainer};

#[derive(Debug, Clone)]
pub struct GradCamComponents<S: Scalar> {
    /// Classic pooled heat map at layer resolution.
    pub global: Array1<S>,
    /// Time-profile contribution at layer resolution.
    pub time: Array1<S>,
    /// Channel-mean contribution at layer resolution.
    pub channel: Array1<S>,
}

/// The three additive heat-map components of the addressed conv layer.
pub fn gradcam_components<S: Scalar>(
    model: &Model<S>,
    x: &Array2<S>,
    layer_index: usize,
) -> Result<GradCamComponents<S>> {
    let (a, g) = feature_map_gradient(model, x, layer_index)?;
    let (channels, t_len) = g.dim();
    let inv_t = S::one() / lit::<S>(t_len as f64);
    let inv_c = S::one() / lit::<S>(channels as f64);

    // per-map mean over time (classic pooling, also the channel term)
    let mut map_mean = Array1::<S>::zeros(channels);
    for k in 0..channels {
        let mut acc = S::zero();
        for t in 0..t_len {
            acc = acc + g[[k, t]];
        }
        map_mean[k] = acc * inv_t;
    }
    // cross-channel mean per time column
    let mut col_mean = Array1::<S>::zeros(t_len);
    for t in 0..t_len {
        let mut acc = S::zero();
        for k in 0..channels {
            acc = acc + g[[k, t]];
        }
        col_mean[t] = acc * inv_c;
    }

    let mut global = Array1::<S>::zeros(t_len);
    let mut time = Array1::<S>::zeros(t_len);
    let mut channel = Array1::<S>::zeros(t_len);
    for t in 0..t_len {
        let mut acc_g = S::zero();
        let mut acc_t = S::zero();
        let mut acc_c = S::zero();
        for k in 0..channels {
            let act = a[[k, t]];
            acc_g = acc_g + map_mean[k] * act;
            acc_t = acc_t + col_mean[t] * act;
            acc_c = acc_c + map_mean[k] * act;
        }
        global[t] = acc_g;
        time[t] = acc_t;
        channel[t] = acc_c;
    }
    Ok(GradCamComponents {
        global,
        time,
        channel,
    })
}

/// Composite heat map before the clamp, at layer resolution:
/// `global + beta * time + sigma * channel`.
pub fn gradcam_pre_relu<S: Scalar>(
    model: &Model<S>,
    x: &Array2<S>,
    layer_index: usize,
    beta: f64,
    sigma: f64,
) -> Result<Array1<S>> {
    let comps = gradcam_components(model, x, layer_index)?;
    let (b, s) = (lit::<S>(beta), lit::<S>(sigma));
    let mut out = Array1::<S>::zeros(comps.global.len());
    for t in 0..out.len() {
        out[t] = comps.global[t] + b * comps.time[t] + s * comps.channel[t];
    }
    Ok(out)
}

/// Linear interpolation of a heat profile onto `target` time positions.
/// The identity when lengths already agree.
pub fn interpolate_linear<S: Scalar>(src: &Array1<S>, target: usize) -> Array1<S> {
    let n = src.len();
    if n == target {
        return src.clone();
    }
    if n == 1 {
        return Array1::from_elem(target, src[0]);
    }
    let mut out = Array1::<S>::zeros(target);
    let scale = (n - 1) as f64 / (target.max(2) - 1) as f64;
    for t in 0..target {
        let pos = t as f64 * scale;
        let i0 = pos.floor() as usize;
        let i1 = (i0 + 1).min(n - 1);
        let frac = lit::<S>(pos - i0 as f64);
        out[t] = src[i0] * (S::one() - frac) + src[i1] * frac;
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct GradCam {
    pub layer_index: usize,
    pub beta: f64,
    pub sigma: f64,
}

impl GradCam {
    pub fn classic(layer_index: usize) -> Self {
        GradCam {
            layer_index,
            beta: 0.0,
            sigma: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("beta", self.beta), ("sigma", self.sigma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "{name} = {v} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

impl<S: Scalar> Explainer<S> for GradCam {
    fn name(&self) -> String {
        "gradcam".into()
    }

    fn fingerprint(&self) -> String {
        format!(
            "gradcam layer={} beta={} sigma={}",
            self.layer_index, self.beta, self.sigma
        )
    }

    fn explain(
        &self,
        model: &Model<S>,
        x: &Array2<S>,
        _ctx: &ExplainCtx,
    ) -> Result<AttributionMap<S>> {
        self.validate()?;
        let pre = gradcam_pre_relu(model, x, self.layer_index, self.beta, self.sigma)?;
        let clamped = pre.mapv(|v| if v > S::zero() { v } else { S::zero() });
        let (f, t) = x.dim();
        let profile = interpolate_linear(&clamped, t);

        let mut values = Array2::<S>::zeros((f, t));
        if self.sigma > 0.0 {
            // channel term at layer zero: per-input-channel gradient means
            let grad = input_gradient(model, x)?;
            let inv_t = S::one() / lit::<S>(t as f64);
            let s = lit::<S>(self.sigma);
            for fi in 0..f {
                let mut acc = S::zero();
                for ti in 0..t {
                    acc = acc + grad[[fi, ti]];
                }
                let weight = S::one() + s * (acc * inv_t);
                let weight = if weight > S::zero() { weight } else { S::zero() };
                for ti in 0..t {
                    values[[fi, ti]] = profile[ti] * weight;
                }
            }
        } else {
            for fi in 0..f {
                for ti in 0..t {
                    values[[fi, ti]] = profile[ti];
                }
            }
        }

        let map = AttributionMap::new(values, "gradcam", Explainer::<S>::fingerprint(self));
        map.assert_finite()?;
        Ok(map)
    }
}
