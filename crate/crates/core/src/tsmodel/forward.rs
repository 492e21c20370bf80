//! Forward pass with a full per-layer trace.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{ConvLayer, DenseLayer, LayerData, LayerSpec, Model};

/// Pre- and post-activation values of one layer.
#[derive(Debug, Clone)]
pub struct LayerTrace<S: Scalar> {
    pub pre: LayerData<S>,
    pub post: LayerData<S>,
}

/// Every intermediate feature map of one forward evaluation plus the scalar
/// prediction. Replaying the stored activations reproduces the output
/// bit-exactly because the trace holds the actual computed values.
#[derive(Debug, Clone)]
pub struct ForwardTrace<S: Scalar> {
    pub input: Array2<S>,
    pub layers: Vec<LayerTrace<S>>,
    pub output: S,
}

pub(super) fn conv_forward<S: Scalar>(c: &ConvLayer<S>, x: &Array2<S>) -> Array2<S> {
    let t_len = x.ncols();
    let left = c.left_pad() as isize;
    let mut pre = Array2::<S>::zeros((c.out_channels, t_len));
    for o in 0..c.out_channels {
        for t in 0..t_len {
            let mut acc = c.biases[o];
            for i in 0..c.in_channels {
                for j in 0..c.kernel_size {
                    let src = t as isize - left + (j * c.dilation) as isize;
                    if src >= 0 && (src as usize) < t_len {
                        acc = acc + c.weights[[o, i, j]] * x[[i, src as usize]];
                    }
                }
            }
            pre[[o, t]] = acc;
        }
    }
    pre
}

pub(super) fn dense_forward<S: Scalar>(d: &DenseLayer<S>, v: &Array1<S>) -> Array1<S> {
    let mut pre = Array1::<S>::zeros(d.out_dim);
    for o in 0..d.out_dim {
        let mut acc = d.biases[o];
        for i in 0..d.in_dim {
            acc = acc + d.weights[[o, i]] * v[i];
        }
        pre[o] = acc;
    }
    pre
}

pub(super) fn flatten<S: Scalar>(m: &Array2<S>) -> Array1<S> {
    Array1::from_iter(m.iter().copied())
}

fn apply_layer<S: Scalar>(
    layer: &LayerSpec<S>,
    index: usize,
    input: &LayerData<S>,
) -> Result<LayerTrace<S>> {
    match (layer, input) {
        (LayerSpec::Conv1d(c), LayerData::Map(x)) => {
            let pre = conv_forward(c, x);
            let post = pre.mapv(|z| c.activation.apply(z));
            Ok(LayerTrace {
                pre: LayerData::Map(pre),
                post: LayerData::Map(post),
            })
        }
        (LayerSpec::Dense(d), LayerData::Vector(v)) => {
            let pre = dense_forward(d, v);
            let post = pre.mapv(|z| d.activation.apply(z));
            Ok(LayerTrace {
                pre: LayerData::Vector(pre),
                post: LayerData::Vector(post),
            })
        }
        (LayerSpec::Flatten, LayerData::Map(m)) => {
            let v = flatten(m);
            Ok(LayerTrace {
                pre: LayerData::Vector(v.clone()),
                post: LayerData::Vector(v),
            })
        }
        (spec, data) => Err(Error::ShapeMismatch {
            layer: index,
            detail: format!("{} cannot consume {}", spec.kind(), data.shape_desc()),
        }),
    }
}

/// Evaluate the model on an input window (channels x time).
pub fn forward<S: Scalar>(model: &Model<S>, x: &Array2<S>) -> Result<(S, ForwardTrace<S>)> {
    let (f, t) = model.input_shape;
    if x.dim() != (f, t) {
        return Err(Error::InvalidInput(format!(
            "input is {:?}, model expects ({f}, {t})",
            x.dim()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("model input".into()));
    }
    let mut data = LayerData::Map(x.clone());
    let mut layers = Vec::with_capacity(model.layers.len());
    for (idx, layer) in model.layers.iter().enumerate() {
        let trace = apply_layer(layer, idx, &data)?;
        data = trace.post.clone();
        layers.push(trace);
    }
    let output = match &data {
        LayerData::Vector(v) if v.len() == 1 => v[0],
        other => {
            return Err(Error::InvalidModel(format!(
                "output is {}, expected a scalar",
                other.shape_desc()
            )))
        }
    };
    Ok((
        output,
        ForwardTrace {
            input: x.clone(),
            layers,
            output,
        },
    ))
}

/// Feed `data` in as the post-activation output of layer `layer_index` and
/// run the remaining layers. Used to replay the tail of a network from a
/// stored or perturbed feature map.
pub fn forward_from<S: Scalar>(
    model: &Model<S>,
    layer_index: usize,
    data: LayerData<S>,
) -> Result<S> {
    if layer_index >= model.layers.len() {
        return Err(Error::LayerOutOfRange {
            index: layer_index,
            len: model.layers.len(),
        });
    }
    let mut data = data;
    for (idx, layer) in model.layers.iter().enumerate().skip(layer_index + 1) {
        data = apply_layer(layer, idx, &data)?.post;
    }
    match data {
        LayerData::Vector(v) if v.len() == 1 => Ok(v[0]),
        other => Err(Error::InvalidModel(format!(
            "output is {}, expected a scalar",
            other.shape_desc()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsmodel::{dense, desk_model, Activation, LayerSpec, Model, ModelMetadata};
    use ndarray::array;

    fn single_dense_model() -> Model<f64> {
        // y = relu(1*x0 + 2*x1 + 1)
        let mut layer = match dense::<f64>(2, 1, Activation::Relu) {
            LayerSpec::Dense(d) => d,
            _ => unreachable!(),
        };
        layer.weights = array![[1.0, 2.0]];
        layer.biases = array![1.0];
        Model::new(
            (1, 2),
            vec![LayerSpec::Flatten, LayerSpec::Dense(layer)],
            ModelMetadata::default(),
        )
        .unwrap()
    }

    #[test]
    fn hand_evaluated_dense() {
        let model = single_dense_model();
        let (y, trace) = forward(&model, &array![[3.0, 4.0]]).unwrap();
        assert_eq!(y, 12.0);
        assert_eq!(trace.layers.len(), 2);
    }

    #[test]
    fn zero_network_propagates_zero() {
        let model = Model::new(
            (2, 4),
            vec![
                crate::tsmodel::conv1d::<f64>(2, 3, 3, 1, Activation::Tanh),
                LayerSpec::Flatten,
                dense(12, 1, Activation::Relu),
            ],
            ModelMetadata::default(),
        )
        .unwrap();
        let (y, _) = forward(&model, &Array2::zeros((2, 4))).unwrap();
        assert_eq!(y, 0.0);
    }

    #[test]
    fn rejects_bad_shape_and_nonfinite() {
        let model = single_dense_model();
        assert!(forward(&model, &array![[1.0], [2.0]]).is_err());
        assert!(forward(&model, &array![[f64::NAN, 1.0]]).is_err());
    }

    #[test]
    fn output_is_nonnegative() {
        let model = desk_model::<f64>(3, 12, 9);
        let x = Array2::from_shape_fn((3, 12), |(i, j)| ((i * 7 + j * 3) as f64).sin());
        let (y, _) = forward(&model, &x).unwrap();
        assert!(y >= 0.0);
    }

    #[test]
    fn replaying_the_trace_reproduces_the_output() {
        let model = desk_model::<f64>(3, 12, 4);
        let x = Array2::from_shape_fn((3, 12), |(i, j)| ((i + 2 * j) as f64 * 0.1).cos());
        let (y, trace) = forward(&model, &x).unwrap();
        for (idx, lt) in trace.layers.iter().enumerate() {
            let replayed = forward_from(&model, idx, lt.post.clone()).unwrap();
            assert_eq!(replayed, y, "replay from layer {idx} must be bit-exact");
        }
    }
}
