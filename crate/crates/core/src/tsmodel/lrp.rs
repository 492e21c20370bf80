//! Relevance propagation through the trace.
//!
//! Output relevance is initialized to the scalar prediction (regression
//! adaptation of the usual one-hot start) and redistributed layer by layer
//! proportionally to each connection's contribution `a_j * w_jk` over the
//! pre-activation sum. Biases are absorbed into the denominator only, so
//! conservation is exact only for bias-free networks.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::forward::forward;
use super::{LayerData, LayerSpec, Model};

/// Sign-preserving stabilizer: pushes the denominator away from zero.
fn stabilize<S: Scalar>(z: S, eps: S) -> S {
    if z >= S::zero() {
        z + eps
    } else {
        z - eps
    }
}

/// Propagate relevance from the prediction back to the input elements.
pub fn relevance_propagate<S: Scalar>(
    model: &Model<S>,
    x: &Array2<S>,
    epsilon: S,
) -> Result<Array2<S>> {
    if epsilon < S::zero() {
        return Err(Error::InvalidInput("epsilon must be >= 0".into()));
    }
    let (y, trace) = forward(model, x)?;
    let mut relevance = LayerData::Vector(Array1::from_elem(1, y));

    for idx in (0..model.layers.len()).rev() {
        let layer = &model.layers[idx];
        let trace_l = &trace.layers[idx];
        let layer_input: LayerData<S> = if idx == 0 {
            LayerData::Map(trace.input.clone())
        } else {
            trace.layers[idx - 1].post.clone()
        };

        relevance = match (layer, &relevance, &layer_input, &trace_l.pre) {
            (
                LayerSpec::Dense(d),
                LayerData::Vector(r_out),
                LayerData::Vector(v),
                LayerData::Vector(pre),
            ) => {
                let mut r_in = Array1::<S>::zeros(d.in_dim);
                for o in 0..d.out_dim {
                    let r = r_out[o];
                    if epsilon == S::zero() && pre[o] == S::zero() {
                        // A zero sum over nonzero contributions is a genuine
                        // cancellation the bare rule cannot divide through;
                        // a unit with no contributions at all just passes
                        // zero relevance on.
                        let cancelled = (0..d.in_dim)
                            .any(|i| v[i] * d.weights[[o, i]] != S::zero());
                        if cancelled || r != S::zero() {
                            return Err(Error::NumericalDegeneracy(format!(
                                "zero denominator at layer {idx}, unit {o} with epsilon = 0"
                            )));
                        }
                        continue;
                    }
                    if r == S::zero() {
                        continue;
                    }
                    let denom = stabilize(pre[o], epsilon);
                    for i in 0..d.in_dim {
                        let z = v[i] * d.weights[[o, i]];
                        if z != S::zero() {
                            r_in[i] = r_in[i] + z / denom * r;
                        }
                    }
                }
                LayerData::Vector(r_in)
            }
            (
                LayerSpec::Conv1d(c),
                LayerData::Map(r_out),
                LayerData::Map(xin),
                LayerData::Map(pre),
            ) => {
                let t_len = xin.ncols();
                let left = c.left_pad() as isize;
                let mut r_in = Array2::<S>::zeros((c.in_channels, t_len));
                for o in 0..c.out_channels {
                    for t in 0..t_len {
                        let r = r_out[[o, t]];
                        if epsilon == S::zero() && pre[[o, t]] == S::zero() {
                            let mut cancelled = false;
                            'scan: for i in 0..c.in_channels {
                                for j in 0..c.kernel_size {
                                    let src =
                                        t as isize - left + (j * c.dilation) as isize;
                                    if src >= 0
                                        && (src as usize) < t_len
                                        && xin[[i, src as usize]] * c.weights[[o, i, j]]
                                            != S::zero()
                                    {
                                        cancelled = true;
                                        break 'scan;
                                    }
                                }
                            }
                            if cancelled || r != S::zero() {
                                return Err(Error::NumericalDegeneracy(format!(
                                    "zero denominator at layer {idx}, channel {o}, t {t} with epsilon = 0"
                                )));
                            }
                            continue;
                        }
                        if r == S::zero() {
                            continue;
                        }
                        let denom = stabilize(pre[[o, t]], epsilon);
                        for i in 0..c.in_channels {
                            for j in 0..c.kernel_size {
                                let src = t as isize - left + (j * c.dilation) as isize;
                                if src >= 0 && (src as usize) < t_len {
                                    let src = src as usize;
                                    let z = xin[[i, src]] * c.weights[[o, i, j]];
                                    if z != S::zero() {
                                        r_in[[i, src]] = r_in[[i, src]] + z / denom * r;
                                    }
                                }
                            }
                        }
                    }
                }
                LayerData::Map(r_in)
            }
            (LayerSpec::Flatten, LayerData::Vector(r_out), LayerData::Map(m), _) => {
                let shaped = Array2::from_shape_vec(m.dim(), r_out.to_vec())
                    .expect("flatten relevance length matches upstream map");
                LayerData::Map(shaped)
            }
            _ => unreachable!("trace shapes were produced by the forward pass"),
        };
    }

    match relevance {
        LayerData::Map(m) => Ok(m),
        LayerData::Vector(_) => unreachable!("model input is a map"),
    }
}
