//! Minimal differentiable network engine: dilated 1D convolutions and dense
//! layers with exact reverse-mode gradients, relevance propagation, and a
//! small deterministic trainer.
//!
//! Convolutions use "same" zero padding along time with stride 1, so every
//! feature map spans all input time positions and heat maps align to the
//! input by pure time-axis interpolation.

mod backward;
mod forward;
mod io;
mod lrp;
mod train;

pub use backward::{feature_map_gradient, input_gradient};
pub use forward::{forward, forward_from, ForwardTrace, LayerTrace};
pub use io::{load_model, save_model};
pub use lrp::relevance_propagate;
pub use train::{train, TrainConfig, TrainOutcome};

use ndarray::{Array1, Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{draw_uniform, substream};
use crate::scalar::Scalar;

/// Negative slope of the leaky rectifier.
pub const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    LeakyRelu,
    Relu,
    Linear,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::LeakyRelu => "leaky_relu",
            Activation::Relu => "relu",
            Activation::Linear => "linear",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "tanh" => Ok(Activation::Tanh),
            "leaky_relu" => Ok(Activation::LeakyRelu),
            "relu" => Ok(Activation::Relu),
            "linear" => Ok(Activation::Linear),
            other => Err(Error::Parse(format!("unknown activation '{other}'"))),
        }
    }

    pub fn apply<S: Scalar>(self, z: S) -> S {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::LeakyRelu => {
                if z > S::zero() {
                    z
                } else {
                    S::from_f64_lossy(LEAKY_SLOPE) * z
                }
            }
            Activation::Relu => {
                if z > S::zero() {
                    z
                } else {
                    S::zero()
                }
            }
            Activation::Linear => z,
        }
    }

    /// Derivative with respect to the pre-activation.
    pub fn derivative<S: Scalar>(self, z: S) -> S {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                S::one() - t * t
            }
            Activation::LeakyRelu => {
                if z > S::zero() {
                    S::one()
                } else {
                    S::from_f64_lossy(LEAKY_SLOPE)
                }
            }
            Activation::Relu => {
                if z > S::zero() {
                    S::one()
                } else {
                    S::zero()
                }
            }
            Activation::Linear => S::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer<S: Scalar> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_size: usize,
    pub dilation: usize,
    pub activation: Activation,
    /// Shape `(out_channels, in_channels, kernel_size)`.
    pub weights: Array3<S>,
    pub biases: Array1<S>,
}

impl<S: Scalar> ConvLayer<S> {
    /// Left zero-padding that keeps the output length equal to the input.
    pub fn left_pad(&self) -> usize {
        (self.kernel_size - 1) * self.dilation / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<S: Scalar> {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    /// Shape `(out_dim, in_dim)`.
    pub weights: Array2<S>,
    pub biases: Array1<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec<S: Scalar> {
    Conv1d(ConvLayer<S>),
    Dense(DenseLayer<S>),
    Flatten,
}

impl<S: Scalar> LayerSpec<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Conv1d(_) => "conv1d",
            LayerSpec::Dense(_) => "dense",
            LayerSpec::Flatten => "flatten",
        }
    }

    pub fn parameter_count(&self) -> usize {
        match self {
            LayerSpec::Conv1d(c) => c.weights.len() + c.biases.len(),
            LayerSpec::Dense(d) => d.weights.len() + d.biases.len(),
            LayerSpec::Flatten => 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Reference to the normalization stats the model was trained with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<String>,
}

/// Intermediate value flowing between layers: a channels-by-time map or a
/// flat vector.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerData<S: Scalar> {
    Map(Array2<S>),
    Vector(Array1<S>),
}

impl<S: Scalar> LayerData<S> {
    pub fn shape_desc(&self) -> String {
        match self {
            LayerData::Map(m) => format!("map {}x{}", m.nrows(), m.ncols()),
            LayerData::Vector(v) => format!("vector {}", v.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ShapeState {
    Map { channels: usize, time: usize },
    Vector(usize),
}

#[derive(Debug, Clone)]
pub struct Model<S: Scalar> {
    pub layers: Vec<LayerSpec<S>>,
    /// `(channels, time)` of the expected input window.
    pub input_shape: (usize, usize),
    pub metadata: ModelMetadata,
}

impl<S: Scalar> Model<S> {
    pub fn new(
        input_shape: (usize, usize),
        layers: Vec<LayerSpec<S>>,
        metadata: ModelMetadata,
    ) -> Result<Self> {
        let model = Model {
            layers,
            input_shape,
            metadata,
        };
        model.validate()?;
        Ok(model)
    }

    /// Check every structural invariant; errors name the offending layer.
    pub fn validate(&self) -> Result<()> {
        let (f, t) = self.input_shape;
        if f == 0 || t == 0 {
            return Err(Error::InvalidModel("input shape must be nonzero".into()));
        }
        if self.layers.is_empty() {
            return Err(Error::InvalidModel("model has no layers".into()));
        }
        let mut state = ShapeState::Map {
            channels: f,
            time: t,
        };
        for (idx, layer) in self.layers.iter().enumerate() {
            state = match (layer, state) {
                (LayerSpec::Conv1d(c), ShapeState::Map { channels, time }) => {
                    if c.kernel_size == 0 {
                        return Err(Error::ShapeMismatch {
                            layer: idx,
                            detail: "kernel_size must be >= 1".into(),
                        });
                    }
                    if c.dilation == 0 {
                        return Err(Error::ShapeMismatch {
                            layer: idx,
                            detail: "dilation_rate must be >= 1".into(),
                        });
                    }
                    if channels != c.in_channels {
                        return Err(Error::ShapeMismatch {
                            layer: idx,
                            detail: format!(
                                "conv expects {} input channels, upstream provides {channels}",
                                c.in_channels
                            ),
                        });
                    }
                    let want = (c.out_channels, c.in_channels, c.kernel_size);
                    let got = c.weights.dim();
                    if got != want {
                        return Err(Error::ShapeMismatch {
                            layer: idx,
                            detail: format!(
                                "conv weights are {got:?}, declared sizes require {want:?}"
                            ),
                        });
                    }
                    if c.biases.len() != c.out_channels {
                        return Err(Error::ShapeMismatch {
                            layer: idx,
                            detail: format!(
                                "conv biases are {}, declared out_channels is {}",
                                c.biases.len(),
                                c.out_channels
                            ),
                        });
                    }
                    ShapeState::Map {
                        channels: c.out_channels,
                        time,
                    }
                }
                (LayerSpec::Conv1d(_), ShapeState::Vector(_)) => {
                    return Err(Error::ShapeMismatch {
                        layer: idx,
                        detail: "conv1d cannot follow a flattened vector".into(),
                    })
                }
                (LayerSpec::Dense(d), ShapeState::Vector(len)) => {
                    if len != d.in_dim {
                        return Err(Error::ShapeMismatch {
                            layer: idx,
                            detail: format!(
                                "dense expects {} inputs, upstream provides {len}",
                                d.in_dim
                            ),
                        });
                    }
                    if d.weights.dim() != (d.out_dim, d.in_dim) {
                        return Err(Error::ShapeMismatch {
                            layer: idx,
                            detail: format!(
                                "dense weights are {:?}, declared sizes require {:?}",
                                d.weights.dim(),
                                (d.out_dim, d.in_dim)
                            ),
                        });
                    }
                    if d.biases.len() != d.out_dim {
                        return Err(Error::ShapeMismatch {
                            layer: idx,
                            detail: format!(
                                "dense biases are {}, declared out_dim is {}",
                                d.biases.len(),
                                d.out_dim
                            ),
                        });
                    }
                    ShapeState::Vector(d.out_dim)
                }
                (LayerSpec::Dense(_), ShapeState::Map { .. }) => {
                    return Err(Error::ShapeMismatch {
                        layer: idx,
                        detail: "dense requires a flattened vector input".into(),
                    })
                }
                (LayerSpec::Flatten, ShapeState::Map { channels, time }) => {
                    ShapeState::Vector(channels * time)
                }
                (LayerSpec::Flatten, ShapeState::Vector(_)) => {
                    return Err(Error::ShapeMismatch {
                        layer: idx,
                        detail: "flatten applied to an already flat vector".into(),
                    })
                }
            };
        }
        if state != ShapeState::Vector(1) {
            return Err(Error::InvalidModel(
                "output must be a single scalar".into(),
            ));
        }
        match self.layers.last() {
            Some(LayerSpec::Dense(d)) if d.activation == Activation::Relu => Ok(()),
            _ => Err(Error::InvalidModel(
                "final layer must be dense with relu activation".into(),
            )),
        }
    }

    pub fn conv_layer_indices(&self) -> Vec<usize> {
        self.layers
            .iter()
            .enumerate()
            .filter_map(|(i, l)| matches!(l, LayerSpec::Conv1d(_)).then_some(i))
            .collect()
    }

    /// Total number of weight and bias elements, additive over layers.
    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(LayerSpec::parameter_count).sum()
    }

    /// Replace all weights with seeded uniform draws scaled by fan-in/out.
    pub fn randomize_weights(&mut self, seed: u64) {
        for (idx, layer) in self.layers.iter_mut().enumerate() {
            let mut rng = substream(seed, &[0x6d6f_64656c, idx as u64]);
            match layer {
                LayerSpec::Conv1d(c) => {
                    let fan_in = (c.in_channels * c.kernel_size) as f64;
                    let fan_out = (c.out_channels * c.kernel_size) as f64;
                    let a = (6.0 / (fan_in + fan_out)).sqrt();
                    for w in c.weights.iter_mut() {
                        *w = draw_uniform(&mut rng, -a, a);
                    }
                    for b in c.biases.iter_mut() {
                        *b = S::zero();
                    }
                }
                LayerSpec::Dense(d) => {
                    let a = (6.0 / (d.in_dim as f64 + d.out_dim as f64)).sqrt();
                    for w in d.weights.iter_mut() {
                        *w = draw_uniform(&mut rng, -a, a);
                    }
                    for b in d.biases.iter_mut() {
                        *b = S::zero();
                    }
                }
                LayerSpec::Flatten => {}
            }
        }
        self.metadata.seed = Some(seed);
    }

    /// Set every bias to zero (relevance conservation is exact only then).
    pub fn zero_biases(&mut self) {
        for layer in &mut self.layers {
            match layer {
                LayerSpec::Conv1d(c) => c.biases.fill(S::zero()),
                LayerSpec::Dense(d) => d.biases.fill(S::zero()),
                LayerSpec::Flatten => {}
            }
        }
    }
}

pub fn conv1d<S: Scalar>(
    in_channels: usize,
    out_channels: usize,
    kernel_size: usize,
    dilation: usize,
    activation: Activation,
) -> LayerSpec<S> {
    LayerSpec::Conv1d(ConvLayer {
        in_channels,
        out_channels,
        kernel_size,
        dilation,
        activation,
        weights: Array3::zeros((out_channels, in_channels, kernel_size)),
        biases: Array1::zeros(out_channels),
    })
}

pub fn dense<S: Scalar>(in_dim: usize, out_dim: usize, activation: Activation) -> LayerSpec<S> {
    LayerSpec::Dense(DenseLayer {
        in_dim,
        out_dim,
        activation,
        weights: Array2::zeros((out_dim, in_dim)),
        biases: Array1::zeros(out_dim),
    })
}

/// Desk-scale regression net: four dilated conv layers, two hidden dense
/// layers, relu output. Small enough for minute-scale experiment runs.
pub fn desk_model<S: Scalar>(f: usize, t: usize, seed: u64) -> Model<S> {
    let layers = vec![
        conv1d(f, 16, 5, 1, Activation::Tanh),
        conv1d(16, 16, 5, 2, Activation::Tanh),
        conv1d(16, 12, 3, 4, Activation::Tanh),
        conv1d(12, 8, 3, 8, Activation::Tanh),
        LayerSpec::Flatten,
        dense(8 * t, 48, Activation::LeakyRelu),
        dense(48, 24, Activation::LeakyRelu),
        dense(24, 1, Activation::Relu),
    ];
    let mut model = Model::new(
        (f, t),
        layers,
        ModelMetadata {
            name: "desk".into(),
            seed: Some(seed),
            normalization: None,
        },
    )
    .expect("desk model is structurally valid");
    model.randomize_weights(seed);
    model
}

/// Full-scale architecture family: four blocks of four tanh convolutions,
/// then dense 256 and 100 with leaky relu, relu output. Filter counts per
/// block are 95/58/40/32 with kernel 3 and dilation 2, which lands the
/// published total of 1,514,016 parameters at 20 channels and window 161.
/// Weights are zero-initialized; the builder exists for structure and
/// parameter accounting, not for inference.
pub fn paper_scale_model<S: Scalar>(f: usize, l_w: usize) -> Model<S> {
    let block_filters = [95usize, 58, 40, 32];
    let mut layers = Vec::new();
    let mut prev = f;
    for &filters in &block_filters {
        for _ in 0..4 {
            layers.push(conv1d(prev, filters, 3, 2, Activation::Tanh));
            prev = filters;
        }
    }
    layers.push(LayerSpec::Flatten);
    layers.push(dense(prev * l_w, 256, Activation::LeakyRelu));
    layers.push(dense(256, 100, Activation::LeakyRelu));
    layers.push(dense(100, 1, Activation::Relu));
    Model::new(
        (f, l_w),
        layers,
        ModelMetadata {
            name: "full-scale".into(),
            seed: None,
            normalization: None,
        },
    )
    .expect("full-scale model is structurally valid")
}
