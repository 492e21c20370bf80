//! Degenerate explainers used to sanity-check the quality proxies: one that
//! echoes the window and one that emits seeded random maps.

use ndarray::Array2;

use crate::error::Result;
use crate::rng::draw_normal;
use crate::scalar::Scalar;
use crate::tsmodel::Model;

use super::{AttributionMap, ExplainCtx, Explainer};

/// `explanation(x) = x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityExplainer;

impl<S: Scalar> Explainer<S> for IdentityExplainer {
    fn name(&self) -> String {
        "identity_map".into()
    }

    fn fingerprint(&self) -> String {
        "identity_map".into()
    }

    fn explain(
        &self,
        _model: &Model<S>,
        x: &Array2<S>,
        _ctx: &ExplainCtx,
    ) -> Result<AttributionMap<S>> {
        Ok(AttributionMap::new(x.clone(), "identity_map", "identity_map".into()))
    }
}

/// Fresh standard-normal map per invocation; maximally uninformative.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomMapExplainer;

impl<S: Scalar> Explainer<S> for RandomMapExplainer {
    fn name(&self) -> String {
        "random_map".into()
    }

    fn fingerprint(&self) -> String {
        "random_map".into()
    }

    fn explain(
        &self,
        _model: &Model<S>,
        x: &Array2<S>,
        ctx: &ExplainCtx,
    ) -> Result<AttributionMap<S>> {
        let mut rng = ctx.rng("random_map");
        let values = Array2::from_shape_simple_fn(x.dim(), || draw_normal(&mut rng));
        Ok(AttributionMap::new(values, "random_map", "random_map".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_maps_differ_across_invocations_but_not_repeats() {
        let model = crate::tsmodel::desk_model::<f64>(2, 6, 1);
        let x = Array2::zeros((2, 6));
        let ctx = ExplainCtx::new(4, 7);
        let a = RandomMapExplainer.explain(&model, &x, &ctx).unwrap();
        let b = RandomMapExplainer.explain(&model, &x, &ctx).unwrap();
        let c = RandomMapExplainer
            .explain(&model, &x, &ctx.with_invocation(1))
            .unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
    }
}
