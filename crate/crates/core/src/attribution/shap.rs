//! Kernel-weighted surrogate solving for per-segment Shapley values.
//!
//! The two infinite-weight coalitions never enter the regression; they are
//! imposed exactly: the intercept equals the fully-perturbed prediction and
//! intercept plus coefficients equals the prediction on the intact window.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::segperturb::{perturb, Coalition, PerturbMethod};
use crate::tsmodel::{forward, Model};

use super::shapley::{shapley_kernel_weight, ShapKernelVariant};
use super::{broadcast_to_map, AttributionMap, ExplainCtx, Explainer, SurrogateConfig};

#[derive(Debug, Clone)]
pub struct KernelShap<S: Scalar> {
    pub config: SurrogateConfig<S>,
    pub kernel: ShapKernelVariant,
}

impl<S: Scalar> Explainer<S> for KernelShap<S> {
    fn name(&self) -> String {
        "shap".into()
    }

    fn perturbation(&self) -> Option<PerturbMethod> {
        Some(self.config.perturbation)
    }

    fn fingerprint(&self) -> String {
        format!(
            "shap seg={} perturb={} n={} kernel={}",
            self.config.segmentation.describe(),
            self.config.perturbation.name(),
            self.config.neighborhood,
            self.kernel.name(),
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
        if m < 2 {
            return Err(Error::InvalidInput(
                "kernel surrogate needs at least 2 segments".into(),
            ));
        }
        if cfg.neighborhood < m + 2 {
            return Err(Error::InvalidInput(format!(
                "neighborhood {} too small for {m} segments",
                cfg.neighborhood
            )));
        }
        let mut rng = ctx.rng("shap");
        let coalitions = cfg.coalitions(m, &mut rng);

        let mut design_rows: Vec<Vec<S>> = Vec::new();
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut intact = None;
        let mut baseline = None;
        for z in &coalitions {
            let perturbed = perturb(x, &partition, z, cfg.perturbation, &cfg.stats, &mut rng)?;
            let (pred, _) = forward(model, &perturbed)?;
            let present = m - z.count_ones();
            if present == m {
                intact.get_or_insert(pred);
                continue;
            }
            if present == 0 {
                baseline.get_or_insert(pred);
                continue;
            }
            let mut row = Vec::with_capacity(m + 1);
            row.push(S::one());
            for &bit in z.bits() {
                row.push(if bit { S::zero() } else { S::one() });
            }
            design_rows.push(row);
            targets.push(pred);
            weights.push(S::from_f64_lossy(shapley_kernel_weight(
                m,
                present,
                self.kernel,
            )));
        }
        let intact = match intact {
            Some(v) => v,
            // the sampled set always contains the all-zeros mask first, so
            // this is unreachable, but stay defensive about future reuse
            None => forward(model, x)?.0,
        };
        let baseline = match baseline {
            Some(v) => v,
            None => {
                let full = Coalition::ones(m);
                let perturbed =
                    perturb(x, &partition, &full, cfg.perturbation, &cfg.stats, &mut rng)?;
                forward(model, &perturbed)?.0
            }
        };

        let rows = design_rows.len();
        if rows == 0 {
            return Err(Error::IllConditioned(
                "no interior coalitions in the neighborhood".into(),
            ));
        }
        let mut design = Array2::<S>::zeros((rows, m + 1));
        for (r, row) in design_rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                design[[r, c]] = v;
            }
        }
        // theta_0 = baseline ; theta_0 + sum(theta_i) = intact prediction
        let mut constraints = Array2::<S>::zeros((2, m + 1));
        constraints[[0, 0]] = S::one();
        for c in 0..=m {
            constraints[[1, c]] = S::one();
        }
        let rhs = vec![baseline, intact];
        let theta =
            crate::linalg::constrained_weighted_ls(&design, &targets, &weights, &constraints, &rhs)?;

        let values = broadcast_to_map(&partition, &theta[1..]);
        let mut map = AttributionMap::new(values, "shap", Explainer::<S>::fingerprint(self));
        map.baseline = Some(theta[0].as_f64());
        map.assert_finite()?;
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::{exact_shapley_oracle, SegmentationSpec};
    use crate::rng::substream;
    use crate::segperturb::FeatureStats;
    use crate::tsmodel::{dense, Activation, LayerSpec, Model, ModelMetadata};
    use ndarray::array;

    fn weighted_sum_model(w: &[f64], bias: f64) -> Model<f64> {
        let n = w.len();
        let mut layer = match dense::<f64>(n, 1, Activation::Relu) {
            LayerSpec::Dense(d) => d,
            _ => unreachable!(),
        };
        layer.weights = ndarray::Array2::from_shape_vec((1, n), w.to_vec()).unwrap();
        layer.biases = array![bias];
        Model::new(
            (1, n),
            vec![LayerSpec::Flatten, LayerSpec::Dense(layer)],
            ModelMetadata::default(),
        )
        .unwrap()
    }

    fn shap_for(x: &Array2<f64>, window: usize, neighborhood: usize) -> KernelShap<f64> {
        KernelShap {
            config: SurrogateConfig {
                segmentation: SegmentationSpec::Uniform { window },
                perturbation: PerturbMethod::Zero,
                neighborhood,
                kernel_width: 0.25,
                ridge: 0.0,
                stats: FeatureStats::from_windows(std::slice::from_ref(x)).unwrap(),
            },
            kernel: ShapKernelVariant::Standard,
        }
    }

    #[test]
    fn matches_exact_oracle_on_linear_model() {
        let x = array![[0.5, 1.5, -1.0, 2.0, 1.0, 0.25, -0.5, 3.0]];
        let model = weighted_sum_model(&[1.0, -2.0, 0.5, 1.5, -1.0, 2.0, 0.25, 0.75], 30.0);
        let shap = shap_for(&x, 2, 64); // 4 segments -> full enumeration
        let map = shap.explain(&model, &x, &ExplainCtx::new(9, 0)).unwrap();

        let partition = SegmentationSpec::Uniform { window: 2 }.build(&x).unwrap();
        let stats = FeatureStats::from_windows(std::slice::from_ref(&x)).unwrap();
        let mut rng = substream(0, &[]);
        let (phi, _) = exact_shapley_oracle(
            &model,
            &x,
            &partition,
            PerturbMethod::Zero,
            &stats,
            &mut rng,
        )
        .unwrap();
        for (seg, expected) in partition.segments.iter().zip(&phi) {
            let got = map.values[[seg.channel, seg.start]];
            assert!(
                (got - expected).abs() < 1e-6,
                "segment at {}: {got} vs {expected}",
                seg.start
            );
        }
    }

    #[test]
    fn efficiency_holds_to_solver_tolerance() {
        let x = array![[0.5, 1.5, -1.0, 2.0, 1.0, 0.25]];
        let model = weighted_sum_model(&[1.0, -2.0, 0.5, 1.5, -1.0, 2.0], 25.0);
        let shap = shap_for(&x, 2, 64);
        let map = shap.explain(&model, &x, &ExplainCtx::new(1, 0)).unwrap();
        let fx = crate::tsmodel::forward(&model, &x).unwrap().0;
        let phi_sum: f64 = {
            let partition = SegmentationSpec::Uniform { window: 2 }.build(&x).unwrap();
            partition
                .segments
                .iter()
                .map(|s| map.values[[s.channel, s.start]])
                .sum()
        };
        assert!((map.baseline.unwrap() + phi_sum - fx).abs() < 1e-8);
    }

    #[test]
    fn symmetric_segments_get_equal_values() {
        // two segments with identical content and identical weights
        let x = array![[1.0, 2.0, 1.0, 2.0]];
        let model = weighted_sum_model(&[0.5, 0.5, 0.5, 0.5], 12.0);
        let shap = shap_for(&x, 2, 16);
        let map = shap.explain(&model, &x, &ExplainCtx::new(2, 0)).unwrap();
        let a = map.values[[0, 0]];
        let b = map.values[[0, 2]];
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn single_segment_is_rejected() {
        let x = array![[1.0, 2.0]];
        let model = weighted_sum_model(&[1.0, 1.0], 5.0);
        let shap = shap_for(&x, 2, 8);
        assert!(shap.explain(&model, &x, &ExplainCtx::new(0, 0)).is_err());
    }
}
