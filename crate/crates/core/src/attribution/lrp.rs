//! Relevance propagation as an explainer.

use ndarray::Array2;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::tsmodel::{relevance_propagate, Model};

use super::{AttributionMap, ExplainCtx, Explainer};

#[derive(Debug, Clone, Copy)]
pub struct Lrp {
    pub epsilon: f64,
}

impl Default for Lrp {
    fn default() -> Self {
        Lrp { epsilon: 1e-9 }
    }
}

impl<S: Scalar> Explainer<S> for Lrp {
    fn name(&self) -> String {
        "lrp".into()
    }

    fn fingerprint(&self) -> String {
        format!("lrp eps={:e}", self.epsilon)
    }

    fn explain(
        &self,
        model: &Model<S>,
        x: &Array2<S>,
        _ctx: &ExplainCtx,
    ) -> Result<AttributionMap<S>> {
        let values = relevance_propagate(model, x, S::from_f64_lossy(self.epsilon))?;
        let map = AttributionMap::new(values, "lrp", Explainer::<S>::fingerprint(self));
        map.assert_finite()?;
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsmodel::desk_model;

    #[test]
    fn map_sums_to_prediction_on_bias_free_net() {
        // scan seeds for a net whose relu output is not clamped at zero
        let mut checked = 0;
        for seed in 0..20u64 {
            let mut model = desk_model::<f64>(4, 12, seed);
            model.zero_biases();
            let x = Array2::from_shape_fn((4, 12), |(i, j)| ((i * 5 + j) as f64 * 0.37).sin());
            let (y, _) = crate::tsmodel::forward(&model, &x).unwrap();
            if y <= 1e-6 {
                continue;
            }
            let map = Lrp { epsilon: 0.0 }
                .explain(&model, &x, &ExplainCtx::new(0, 0))
                .unwrap();
            let total: f64 = map.values.iter().sum();
            assert!(((total - y) / y).abs() < 1e-6, "seed {seed}");
            checked += 1;
        }
        assert!(checked >= 5, "only {checked} live nets in the scan");
    }
}
