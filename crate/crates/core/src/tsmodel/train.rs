//! Plain mini-batch SGD with momentum on the mean squared error.
//!
//! Deliberately the smallest trainer that fits the synthetic task: seeded
//! shuffling, fixed accumulation order, single-threaded, so two runs with
//! the same seed produce bit-identical weights.

use ndarray::Array2;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::rng::substream;

use super::backward::{backprop, LayerParamGrad};
use super::forward::forward;
use super::{LayerSpec, Model};

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 5e-3,
            momentum: 0.9,
            batch_size: 32,
            epochs: 20,
            seed: 0,
        }
    }
}

#[derive(Debug)]
pub struct TrainOutcome<S: Scalar> {
    pub model: Model<S>,
    /// Mean squared error per epoch, measured on the training set.
    pub loss_history: Vec<f64>,
}

struct Velocity<S: Scalar> {
    layers: Vec<LayerParamGrad<S>>,
}

impl<S: Scalar> Velocity<S> {
    fn zeros(model: &Model<S>) -> Self {
        let layers = model
            .layers
            .iter()
            .map(|l| match l {
                LayerSpec::Conv1d(c) => LayerParamGrad::Conv {
                    dw: ndarray::Array3::zeros(c.weights.dim()),
                    db: ndarray::Array1::zeros(c.biases.len()),
                },
                LayerSpec::Dense(d) => LayerParamGrad::Dense {
                    dw: Array2::zeros(d.weights.dim()),
                    db: ndarray::Array1::zeros(d.biases.len()),
                },
                LayerSpec::Flatten => LayerParamGrad::None,
            })
            .collect();
        Velocity { layers }
    }
}

/// Fit the model to `(window, label)` pairs. Zero epochs returns the model
/// unchanged; a non-finite loss aborts with a diagnostic.
pub fn train<S: Scalar>(
    model: Model<S>,
    data: &[(Array2<S>, S)],
    cfg: &TrainConfig,
) -> Result<TrainOutcome<S>> {
    if data.is_empty() {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidInput("batch_size must be >= 1".into()));
    }
    let mut model = model;
    let mut velocity = Velocity::zeros(&model);
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    let lr = lit::<S>(cfg.learning_rate);
    let mu = lit::<S>(cfg.momentum);
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 0..cfg.epochs {
        let mut rng = substream(cfg.seed, &[0x7472_61696e, epoch as u64]);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0f64;

        for batch in order.chunks(cfg.batch_size) {
            let scale = lit::<S>(2.0 / batch.len() as f64);
            let mut batch_grads: Option<Vec<LayerParamGrad<S>>> = None;
            for &i in batch {
                let (x, y) = &data[i];
                let (pred, trace) = forward(&model, x)?;
                let residual = pred - *y;
                epoch_loss += (residual * residual).as_f64();
                // d(mse)/d(pred) = 2 * (pred - y) / batch_len
                let seed = scale * residual;
                let pass = backprop(&model, &trace, seed, true);
                let grads = pass.param_grads.expect("requested parameter gradients");
                batch_grads = Some(match batch_grads {
                    None => grads,
                    Some(mut acc) => {
                        accumulate(&mut acc, &grads);
                        acc
                    }
                });
            }
            let grads = batch_grads.expect("batch is nonempty");
            apply_update(&mut model, &mut velocity, &grads, lr, mu);
        }

        let mse = epoch_loss / data.len() as f64;
        if !mse.is_finite() {
            return Err(Error::Diverged(format!(
                "loss became non-finite at epoch {epoch} (lr {})",
                cfg.learning_rate
            )));
        }
        loss_history.push(mse);
    }

    Ok(TrainOutcome {
        model,
        loss_history,
    })
}

fn accumulate<S: Scalar>(acc: &mut [LayerParamGrad<S>], add: &[LayerParamGrad<S>]) {
    for (a, b) in acc.iter_mut().zip(add) {
        match (a, b) {
            (
                LayerParamGrad::Conv { dw, db },
                LayerParamGrad::Conv {
                    dw: dw2,
                    db: db2,
                },
            ) => {
                dw.zip_mut_with(dw2, |x, &y| *x = *x + y);
                db.zip_mut_with(db2, |x, &y| *x = *x + y);
            }
            (
                LayerParamGrad::Dense { dw, db },
                LayerParamGrad::Dense {
                    dw: dw2,
                    db: db2,
                },
            ) => {
                dw.zip_mut_with(dw2, |x, &y| *x = *x + y);
                db.zip_mut_with(db2, |x, &y| *x = *x + y);
            }
            (LayerParamGrad::None, LayerParamGrad::None) => {}
            _ => unreachable!("gradient layout matches the model"),
        }
    }
}

fn apply_update<S: Scalar>(
    model: &mut Model<S>,
    velocity: &mut Velocity<S>,
    grads: &[LayerParamGrad<S>],
    lr: S,
    mu: S,
) {
    for ((layer, vel), grad) in model
        .layers
        .iter_mut()
        .zip(velocity.layers.iter_mut())
        .zip(grads)
    {
        match (layer, vel, grad) {
            (
                LayerSpec::Conv1d(c),
                LayerParamGrad::Conv { dw: vw, db: vb },
                LayerParamGrad::Conv { dw, db },
            ) => {
                vw.zip_mut_with(dw, |v, &g| *v = mu * *v - lr * g);
                vb.zip_mut_with(db, |v, &g| *v = mu * *v - lr * g);
                c.weights.zip_mut_with(vw, |w, &v| *w = *w + v);
                c.biases.zip_mut_with(vb, |b, &v| *b = *b + v);
            }
            (
                LayerSpec::Dense(d),
                LayerParamGrad::Dense { dw: vw, db: vb },
                LayerParamGrad::Dense { dw, db },
            ) => {
                vw.zip_mut_with(dw, |v, &g| *v = mu * *v - lr * g);
                vb.zip_mut_with(db, |v, &g| *v = mu * *v - lr * g);
                d.weights.zip_mut_with(vw, |w, &v| *w = *w + v);
                d.biases.zip_mut_with(vb, |b, &v| *b = *b + v);
            }
            (LayerSpec::Flatten, LayerParamGrad::None, LayerParamGrad::None) => {}
            _ => unreachable!("gradient layout matches the model"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsmodel::{dense, Activation, LayerSpec, Model, ModelMetadata};
    use ndarray::array;

    fn one_param_model(w0: f64) -> Model<f64> {
        let mut layer = match dense::<f64>(1, 1, Activation::Relu) {
            LayerSpec::Dense(d) => d,
            _ => unreachable!(),
        };
        layer.weights = array![[w0]];
        Model::new(
            (1, 1),
            vec![LayerSpec::Flatten, LayerSpec::Dense(layer)],
            ModelMetadata::default(),
        )
        .unwrap()
    }

    fn weight(model: &Model<f64>) -> f64 {
        match &model.layers[1] {
            LayerSpec::Dense(d) => d.weights[[0, 0]],
            _ => unreachable!(),
        }
    }

    #[test]
    fn fits_y_equals_two_x() {
        let data: Vec<(Array2<f64>, f64)> = (1..=8)
            .map(|i| (array![[i as f64 * 0.25]], i as f64 * 0.5))
            .collect();
        let cfg = TrainConfig {
            learning_rate: 0.1,
            momentum: 0.9,
            batch_size: 4,
            epochs: 200,
            seed: 1,
        };
        let out = train(one_param_model(0.1), &data, &cfg).unwrap();
        assert!(
            (weight(&out.model) - 2.0).abs() < 1e-3,
            "converged to {}",
            weight(&out.model)
        );
        assert!(out.loss_history.last().unwrap() < &1e-6);
    }

    #[test]
    fn zero_epochs_returns_model_unchanged() {
        let data = vec![(array![[1.0]], 2.0)];
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let out = train(one_param_model(0.37), &data, &cfg).unwrap();
        assert_eq!(weight(&out.model), 0.37);
        assert!(out.loss_history.is_empty());
    }

    #[test]
    fn same_seed_gives_bit_identical_weights() {
        let data: Vec<(Array2<f64>, f64)> = (0..16)
            .map(|i| (array![[(i as f64 - 8.0) * 0.1]], (i as f64) * 0.05 + 0.2))
            .collect();
        let cfg = TrainConfig {
            epochs: 15,
            batch_size: 4,
            seed: 42,
            ..TrainConfig::default()
        };
        let a = train(one_param_model(0.0), &data, &cfg).unwrap();
        let b = train(one_param_model(0.0), &data, &cfg).unwrap();
        assert_eq!(weight(&a.model).to_bits(), weight(&b.model).to_bits());
        assert_eq!(a.loss_history, b.loss_history);
    }

    #[test]
    fn divergence_is_reported() {
        // Two stacked weights explode quadratically under an oversized step
        // while their product keeps the relu output positive.
        let mut hidden = match dense::<f64>(1, 1, Activation::Linear) {
            LayerSpec::Dense(d) => d,
            _ => unreachable!(),
        };
        hidden.weights = array![[1.0]];
        let mut out = match dense::<f64>(1, 1, Activation::Relu) {
            LayerSpec::Dense(d) => d,
            _ => unreachable!(),
        };
        out.weights = array![[1.0]];
        out.biases = array![1.0];
        let model = Model::new(
            (1, 1),
            vec![
                LayerSpec::Flatten,
                LayerSpec::Dense(hidden),
                LayerSpec::Dense(out),
            ],
            ModelMetadata::default(),
        )
        .unwrap();
        let data = vec![(array![[10.0]], 0.0)];
        let cfg = TrainConfig {
            learning_rate: 1.0,
            epochs: 100,
            batch_size: 1,
            ..TrainConfig::default()
        };
        assert!(matches!(train(model, &data, &cfg), Err(Error::Diverged(_))));
    }
}
