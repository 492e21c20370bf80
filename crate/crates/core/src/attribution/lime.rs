//! Local linear surrogate over segment presence.
//!
//! Coalitions mark segments as perturbed; the surrogate regresses the model
//! predictions on the complementary presence indicators, weighted by an
//! exponential kernel over the Hamming fraction of perturbed segments, with
//! a ridge penalty on the slopes. Each segment's coefficient is spread
//! uniformly over its elements, so the map reads as the local contribution
//! of keeping that segment intact.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::segperturb::{perturb, PerturbMethod};
use crate::tsmodel::{forward, Model};

use super::{
    broadcast_to_map, AttributionMap, ExplainCtx, Explainer, SurrogateConfig,
};

#[derive(Debug, Clone)]
pub struct Lime<S: Scalar> {
    pub config: SurrogateConfig<S>,
}

impl<S: Scalar> Explainer<S> for Lime<S> {
    fn name(&self) -> String {
        "lime".into()
    }

    fn perturbation(&self) -> Option<PerturbMethod> {
        Some(self.config.perturbation)
    }

    fn fingerprint(&self) -> String {
        format!(
            "lime seg={} perturb={} n={} kappa={} ridge={:e}",
            self.config.segmentation.describe(),
            self.config.perturbation.name(),
            self.config.neighborhood,
            self.config.kernel_width,
            self.config.ridge,
        )
    }

    fn explain(
        &self,
        model: &Model<S>,
        x: &Array2<S>,
        ctx: &ExplainCtx,
    ) -> Result<AttributionMap<S>> {
        let cfg = &self.config;
        let partition = cfg.segmentation.build(x)?;
        let m = partition.n_segments();
        if cfg.neighborhood < m + 2 {
            return Err(Error::InvalidInput(format!(
                "neighborhood {} too small for {m} segments",
                cfg.neighborhood
            )));
        }
        let mut rng = ctx.rng("lime");
        let coalitions = cfg.coalitions(m, &mut rng);

        let rows = coalitions.len();
        let mut design = Array2::<S>::zeros((rows, m + 1));
        let mut targets = Vec::with_capacity(rows);
        let mut weights = Vec::with_capacity(rows);
        let inv_kappa_sq = 1.0 / (cfg.kernel_width * cfg.kernel_width);
        for (r, z) in coalitions.iter().enumerate() {
            let perturbed = perturb(x, &partition, z, cfg.perturbation, &cfg.stats, &mut rng)?;
            let (pred, _) = forward(model, &perturbed)?;
            targets.push(pred);
            let hamming = z.count_ones() as f64 / m as f64;
            weights.push(lit::<S>((-hamming * hamming * inv_kappa_sq).exp()));
            design[[r, 0]] = S::one();
            for (i, &bit) in z.bits().enumerate() {
                design[[r, i + 1]] = if bit { S::zero() } else { S::one() };
            }
        }

        let theta = crate::linalg::weighted_ridge_ls(
            &design,
            &targets,
            &weights,
            lit::<S>(cfg.ridge),
        )?;
        let values = broadcast_to_map(&partition, &theta[1..]);
        let mut map = AttributionMap::new(values, "lime", Explainer::<S>::fingerprint(self));
        map.baseline = Some(theta[0].as_f64());
        map.assert_finite()?;
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::SegmentationSpec;
    use crate::segperturb::FeatureStats;
    use crate::tsmodel::{dense, Activation, LayerSpec, Model, ModelMetadata};
    use ndarray::array;

    fn sum_model(n: usize, bias: f64) -> Model<f64> {
        let mut layer = match dense::<f64>(n, 1, Activation::Relu) {
            LayerSpec::Dense(d) => d,
            _ => unreachable!(),
        };
        layer.weights = ndarray::Array2::from_elem((1, n), 1.0);
        layer.biases = array![bias];
        Model::new(
            (1, n),
            vec![LayerSpec::Flatten, LayerSpec::Dense(layer)],
            ModelMetadata::default(),
        )
        .unwrap()
    }

    fn config(window: usize, x: &Array2<f64>, ridge: f64) -> SurrogateConfig<f64> {
        SurrogateConfig {
            segmentation: SegmentationSpec::Uniform { window },
            perturbation: PerturbMethod::Zero,
            neighborhood: 64,
            kernel_width: 0.25,
            ridge,
            stats: FeatureStats::from_windows(std::slice::from_ref(x)).unwrap(),
        }
    }

    #[test]
    fn additive_model_recovers_segment_sums() {
        // y = sum(x) with bias keeping relu active; two segments enumerate fully
        let x = array![[1.0, 2.0, 3.0, 4.0]];
        let model = sum_model(4, 20.0);
        let lime = Lime {
            config: config(2, &x, 0.0),
        };
        let map = lime.explain(&model, &x, &ExplainCtx::new(3, 0)).unwrap();
        // coefficients are the per-segment sums, broadcast over elements
        assert!((map.values[[0, 0]] - 3.0).abs() < 1e-8);
        assert!((map.values[[0, 1]] - 3.0).abs() < 1e-8);
        assert!((map.values[[0, 2]] - 7.0).abs() < 1e-8);
        assert!((map.values[[0, 3]] - 7.0).abs() < 1e-8);
    }

    #[test]
    fn constant_model_gives_zero_coefficients() {
        let x = array![[1.0, 2.0, 3.0, 4.0]];
        let mut model = sum_model(4, 5.0);
        if let LayerSpec::Dense(d) = &mut model.layers[1] {
            d.weights.fill(0.0);
        }
        let lime = Lime {
            config: config(2, &x, 1e-3),
        };
        let map = lime.explain(&model, &x, &ExplainCtx::new(3, 0)).unwrap();
        assert!(map.values.iter().all(|&v| v.abs() < 1e-12));
        assert!((map.baseline.unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn same_context_is_bit_identical_fresh_invocation_differs() {
        let x = Array2::from_shape_fn((2, 8), |(i, j)| (i as f64 + 1.0) * (j as f64 * 0.3).sin());
        let model = crate::tsmodel::desk_model::<f64>(2, 8, 11);
        let lime = Lime {
            config: SurrogateConfig {
                segmentation: SegmentationSpec::Uniform { window: 4 },
                perturbation: PerturbMethod::NormalNoise,
                neighborhood: 16,
                kernel_width: 0.25,
                ridge: 1e-3,
                stats: FeatureStats::from_windows(std::slice::from_ref(&x)).unwrap(),
            },
        };
        let ctx = ExplainCtx::new(5, 2);
        let a = lime.explain(&model, &x, &ctx).unwrap();
        let b = lime.explain(&model, &x, &ctx).unwrap();
        assert_eq!(a.values, b.values);
        let c = lime.explain(&model, &x, &ctx.with_invocation(1)).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn undersized_neighborhood_is_rejected() {
        let x = array![[1.0, 2.0, 3.0, 4.0]];
        let model = sum_model(4, 0.0);
        let mut cfg = config(1, &x, 0.0);
        cfg.neighborhood = 4; // 4 segments need at least 6
        let lime = Lime { config: cfg };
        assert!(lime.explain(&model, &x, &ExplainCtx::new(0, 0)).is_err());
    }
}
