//! Model file format: a single JSON object with the layer stack and flat
//! row-major weight arrays. Serialization uses shortest round-trip decimal
//! for floats, so saving and reloading reproduces predictions bit-exactly.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{Activation, ConvLayer, DenseLayer, LayerSpec, Model, ModelMetadata};

#[derive(Serialize, Deserialize)]
struct ModelFile<S> {
    input_shape: [usize; 2],
    layers: Vec<LayerFile<S>>,
    #[serde(default)]
    metadata: ModelMetadata,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum LayerFile<S> {
    Conv1d {
        #[serde(rename = "in")]
        in_channels: usize,
        #[serde(rename = "out")]
        out_channels: usize,
        k: usize,
        dilation: usize,
        activation: String,
        weights: Vec<S>,
        biases: Vec<S>,
    },
    Dense {
        #[serde(rename = "in")]
        in_dim: usize,
        #[serde(rename = "out")]
        out_dim: usize,
        activation: String,
        weights: Vec<S>,
        biases: Vec<S>,
    },
    Flatten,
}

fn to_file<S: Scalar>(model: &Model<S>) -> ModelFile<S> {
    let layers = model
        .layers
        .iter()
        .map(|layer| match layer {
            LayerSpec::Conv1d(c) => LayerFile::Conv1d {
                in_channels: c.in_channels,
                out_channels: c.out_channels,
                k: c.kernel_size,
                dilation: c.dilation,
                activation: c.activation.name().to_string(),
                weights: c.weights.iter().copied().collect(),
                biases: c.biases.to_vec(),
            },
            LayerSpec::Dense(d) => LayerFile::Dense {
                in_dim: d.in_dim,
                out_dim: d.out_dim,
                activation: d.activation.name().to_string(),
                weights: d.weights.iter().copied().collect(),
                biases: d.biases.to_vec(),
            },
            LayerSpec::Flatten => LayerFile::Flatten,
        })
        .collect();
    ModelFile {
        input_shape: [model.input_shape.0, model.input_shape.1],
        layers,
        metadata: model.metadata.clone(),
    }
}

fn from_file<S: Scalar>(file: ModelFile<S>) -> Result<Model<S>> {
    let mut layers = Vec::with_capacity(file.layers.len());
    for (idx, layer) in file.layers.into_iter().enumerate() {
        let built = match layer {
            LayerFile::Conv1d {
                in_channels,
                out_channels,
                k,
                dilation,
                activation,
                weights,
                biases,
            } => {
                let want = out_channels * in_channels * k;
                if weights.len() != want {
                    return Err(Error::ShapeMismatch {
                        layer: idx,
                        detail: format!(
                            "conv weights hold {} values, declared sizes require {want}",
                            weights.len()
                        ),
                    });
                }
                let weights = Array3::from_shape_vec((out_channels, in_channels, k), weights)
                    .map_err(|e| Error::ShapeMismatch {
                        layer: idx,
                        detail: e.to_string(),
                    })?;
                LayerSpec::Conv1d(ConvLayer {
                    in_channels,
                    out_channels,
                    kernel_size: k,
                    dilation,
                    activation: Activation::parse(&activation)?,
                    weights,
                    biases: Array1::from_vec(biases),
                })
            }
            LayerFile::Dense {
                in_dim,
                out_dim,
                activation,
                weights,
                biases,
            } => {
                let want = out_dim * in_dim;
                if weights.len() != want {
                    return Err(Error::ShapeMismatch {
                        layer: idx,
                        detail: format!(
                            "dense weights hold {} values, declared sizes require {want}",
                            weights.len()
                        ),
                    });
                }
                let weights = Array2::from_shape_vec((out_dim, in_dim), weights).map_err(|e| {
                    Error::ShapeMismatch {
                        layer: idx,
                        detail: e.to_string(),
                    }
                })?;
                LayerSpec::Dense(DenseLayer {
                    in_dim,
                    out_dim,
                    activation: Activation::parse(&activation)?,
                    weights,
                    biases: Array1::from_vec(biases),
                })
            }
            LayerFile::Flatten => LayerSpec::Flatten,
        };
        layers.push(built);
    }
    Model::new(
        (file.input_shape[0], file.input_shape[1]),
        layers,
        file.metadata,
    )
}

pub fn save_model<S: Scalar>(model: &Model<S>, path: &Path) -> Result<()> {
    let file = to_file(model);
    let json = serde_json::to_string_pretty(&file)?;
    fs::write(path, json)?;
    Ok(())
}

pub fn load_model<S: Scalar>(path: &Path) -> Result<Model<S>> {
    let text = fs::read_to_string(path)?;
    let file: ModelFile<S> = serde_json::from_str(&text)?;
    from_file(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsmodel::{desk_model, forward};
    use crate::rng::substream;
    use rand::Rng;

    #[test]
    fn round_trip_preserves_predictions() {
        let dir = std::env::temp_dir().join("tsexplain-model-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.json");

        let model = desk_model::<f64>(4, 16, 77);
        save_model(&model, &path).unwrap();
        let loaded = load_model::<f64>(&path).unwrap();

        let mut rng = substream(3, &[0]);
        for _ in 0..10 {
            let x = Array2::from_shape_fn((4, 16), |_| rng.gen_range(-2.0..2.0));
            let (y0, _) = forward(&model, &x).unwrap();
            let (y1, _) = forward(&loaded, &x).unwrap();
            assert_eq!(y0, y1, "predictions must round-trip bit-exactly");
        }
    }

    #[test]
    fn two_layer_file_parses() {
        let json = r#"{
            "input_shape": [1, 2],
            "layers": [
                {"kind": "flatten"},
                {"kind": "dense", "in": 2, "out": 1, "activation": "relu",
                 "weights": [1.0, 2.0], "biases": [0.5]}
            ],
            "metadata": {"name": "tiny"}
        }"#;
        let dir = std::env::temp_dir().join("tsexplain-model-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tiny.json");
        std::fs::write(&path, json).unwrap();
        let model = load_model::<f64>(&path).unwrap();
        assert_eq!(model.layers.len(), 2);
        assert_eq!(model.metadata.name, "tiny");
    }

    #[test]
    fn declared_out_channels_must_match_weight_rows() {
        let json = r#"{
            "input_shape": [3, 4],
            "layers": [
                {"kind": "conv1d", "in": 3, "out": 4, "k": 1, "dilation": 1,
                 "activation": "tanh",
                 "weights": [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
                 "biases": [0.0, 0.0, 0.0, 0.0]},
                {"kind": "flatten"},
                {"kind": "dense", "in": 16, "out": 1, "activation": "relu",
                 "weights": [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                             0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                 "biases": [0.0]}
            ]
        }"#;
        let dir = std::env::temp_dir().join("tsexplain-model-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        std::fs::write(&path, json).unwrap();
        match load_model::<f64>(&path) {
            Err(Error::ShapeMismatch { layer: 0, .. }) => {}
            other => panic!("expected shape mismatch at layer 0, got {other:?}"),
        }
    }
}
