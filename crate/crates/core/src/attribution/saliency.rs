//! Gradient of the prediction with respect to every input element, signed
//! values retained.

use ndarray::Array2;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::tsmodel::{input_gradient, Model};

use super::{AttributionMap, ExplainCtx, Explainer};

#[derive(Debug, Clone, Copy, Default)]
pub struct Saliency;

impl<S: Scalar> Explainer<S> for Saliency {
    fn name(&self) -> String {
        "saliency".into()
    }

    fn fingerprint(&self) -> String {
        "saliency".into()
    }

    fn explain(
        &self,
        model: &Model<S>,
        x: &Array2<S>,
        _ctx: &ExplainCtx,
    ) -> Result<AttributionMap<S>> {
        let values = input_gradient(model, x)?;
        let map = AttributionMap::new(values, "saliency", Explainer::<S>::fingerprint(self));
        map.assert_finite()?;
        Ok(map)
    }
}
