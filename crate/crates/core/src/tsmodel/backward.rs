//! Exact reverse-mode differentiation of the forward pass.

use ndarray::{Array1, Array2, Array3};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::forward::{forward, ForwardTrace};
use super::{LayerData, LayerSpec, Model};

#[derive(Debug, Clone)]
pub(super) enum LayerParamGrad<S: Scalar> {
    Conv { dw: Array3<S>, db: Array1<S> },
    Dense { dw: Array2<S>, db: Array1<S> },
    None,
}

pub(super) struct BackwardPass<S: Scalar> {
    /// Gradient of the output with respect to the model input.
    pub input_grad: Array2<S>,
    /// Gradient of the output with respect to each layer's post-activation.
    pub post_grads: Vec<LayerData<S>>,
    /// Weight/bias gradients, populated only when requested.
    pub param_grads: Option<Vec<LayerParamGrad<S>>>,
}

fn elementwise_act_grad<S: Scalar>(
    layer: &LayerSpec<S>,
    pre: &LayerData<S>,
    grad_post: &LayerData<S>,
) -> LayerData<S> {
    match (layer, pre, grad_post) {
        (LayerSpec::Conv1d(c), LayerData::Map(z), LayerData::Map(g)) => {
            let mut out = g.clone();
            out.zip_mut_with(z, |gv, &zv| *gv = *gv * c.activation.derivative(zv));
            LayerData::Map(out)
        }
        (LayerSpec::Dense(d), LayerData::Vector(z), LayerData::Vector(g)) => {
            let mut out = g.clone();
            out.zip_mut_with(z, |gv, &zv| *gv = *gv * d.activation.derivative(zv));
            LayerData::Vector(out)
        }
        (LayerSpec::Flatten, _, g) => g.clone(),
        _ => unreachable!("trace shapes were produced by the forward pass"),
    }
}

/// Walk the trace backwards, seeding the output gradient with `seed`.
pub(super) fn backprop<S: Scalar>(
    model: &Model<S>,
    trace: &ForwardTrace<S>,
    seed: S,
    with_params: bool,
) -> BackwardPass<S> {
    let n = model.layers.len();
    let mut post_grads: Vec<Option<LayerData<S>>> = vec![None; n];
    let mut param_grads: Vec<LayerParamGrad<S>> = Vec::new();
    if with_params {
        param_grads.resize(n, LayerParamGrad::None);
    }

    let mut grad_post = LayerData::Vector(Array1::from_elem(1, seed));
    for idx in (0..n).rev() {
        post_grads[idx] = Some(grad_post.clone());
        let layer = &model.layers[idx];
        let trace_l = &trace.layers[idx];
        let grad_pre = elementwise_act_grad(layer, &trace_l.pre, &grad_post);
        let layer_input: LayerData<S> = if idx == 0 {
            LayerData::Map(trace.input.clone())
        } else {
            trace.layers[idx - 1].post.clone()
        };

        grad_post = match (layer, &grad_pre, &layer_input) {
            (LayerSpec::Conv1d(c), LayerData::Map(gp), LayerData::Map(x)) => {
                let t_len = x.ncols();
                let left = c.left_pad() as isize;
                let mut gx = Array2::<S>::zeros((c.in_channels, t_len));
                let mut dw = with_params
                    .then(|| Array3::<S>::zeros((c.out_channels, c.in_channels, c.kernel_size)));
                let mut db = with_params.then(|| Array1::<S>::zeros(c.out_channels));
                for o in 0..c.out_channels {
                    for t in 0..t_len {
                        let g = gp[[o, t]];
                        if let Some(db) = db.as_mut() {
                            db[o] = db[o] + g;
                        }
                        if g == S::zero() && !with_params {
                            continue;
                        }
                        for i in 0..c.in_channels {
                            for j in 0..c.kernel_size {
                                let src = t as isize - left + (j * c.dilation) as isize;
                                if src >= 0 && (src as usize) < t_len {
                                    let src = src as usize;
                                    gx[[i, src]] = gx[[i, src]] + c.weights[[o, i, j]] * g;
                                    if let Some(dw) = dw.as_mut() {
                                        dw[[o, i, j]] = dw[[o, i, j]] + g * x[[i, src]];
                                    }
                                }
                            }
                        }
                    }
                }
                if let (Some(dw), Some(db)) = (dw, db) {
                    param_grads[idx] = LayerParamGrad::Conv { dw, db };
                }
                LayerData::Map(gx)
            }
            (LayerSpec::Dense(d), LayerData::Vector(gp), LayerData::Vector(v)) => {
                let mut gv = Array1::<S>::zeros(d.in_dim);
                let mut dw = with_params.then(|| Array2::<S>::zeros((d.out_dim, d.in_dim)));
                let mut db = with_params.then(|| Array1::<S>::zeros(d.out_dim));
                for o in 0..d.out_dim {
                    let g = gp[o];
                    if let Some(db) = db.as_mut() {
                        db[o] = g;
                    }
                    for i in 0..d.in_dim {
                        gv[i] = gv[i] + d.weights[[o, i]] * g;
                        if let Some(dw) = dw.as_mut() {
                            dw[[o, i]] = g * v[i];
                        }
                    }
                }
                if let (Some(dw), Some(db)) = (dw, db) {
                    param_grads[idx] = LayerParamGrad::Dense { dw, db };
                }
                LayerData::Vector(gv)
            }
            (LayerSpec::Flatten, LayerData::Vector(gp), LayerData::Map(m)) => {
                let shaped = Array2::from_shape_vec(m.dim(), gp.to_vec())
                    .expect("flatten gradient length matches upstream map");
                LayerData::Map(shaped)
            }
            _ => unreachable!("trace shapes were produced by the forward pass"),
        };
    }

    let input_grad = match grad_post {
        LayerData::Map(m) => m,
        LayerData::Vector(_) => unreachable!("model input is a map"),
    };
    BackwardPass {
        input_grad,
        post_grads: post_grads.into_iter().map(Option::unwrap).collect(),
        param_grads: with_params.then_some(param_grads),
    }
}

/// Gradient of the prediction with respect to every input element.
pub fn input_gradient<S: Scalar>(model: &Model<S>, x: &Array2<S>) -> Result<Array2<S>> {
    let (_, trace) = forward(model, x)?;
    Ok(backprop(model, &trace, S::one(), false).input_grad)
}

/// Feature map of a conv layer together with the gradient of the prediction
/// with respect to that map. Both are `(channels, time)` of the layer.
pub fn feature_map_gradient<S: Scalar>(
    model: &Model<S>,
    x: &Array2<S>,
    layer_index: usize,
) -> Result<(Array2<S>, Array2<S>)> {
    if layer_index >= model.layers.len() {
        return Err(Error::LayerOutOfRange {
            index: layer_index,
            len: model.layers.len(),
        });
    }
    if !matches!(model.layers[layer_index], LayerSpec::Conv1d(_)) {
        return Err(Error::NotConvLayer(layer_index));
    }
    let (_, trace) = forward(model, x)?;
    let pass = backprop(model, &trace, S::one(), false);
    let a = match &trace.layers[layer_index].post {
        LayerData::Map(m) => m.clone(),
        _ => unreachable!("conv layers produce maps"),
    };
    let g = match &pass.post_grads[layer_index] {
        LayerData::Map(m) => m.clone(),
        _ => unreachable!("conv layers produce maps"),
    };
    Ok((a, g))
}
