//! Shapley machinery shared by the kernel surrogate and its exact oracle.

use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::segperturb::{perturb, Coalition, FeatureStats, PerturbMethod, SegmentPartition};
use crate::tsmodel::{forward, Model};

/// Weighting kernel over coalition sizes. The standard kernel divides by
/// `|s| * (m - |s|)`; the literal variant drops the `|s|` factor. Only the
/// standard kernel reproduces exact Shapley values, so it is the default;
/// the literal variant is kept selectable for fidelity comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapKernelVariant {
    #[default]
    Standard,
    Literal,
}

impl ShapKernelVariant {
    pub fn name(self) -> &'static str {
        match self {
            ShapKernelVariant::Standard => "standard",
            ShapKernelVariant::Literal => "literal",
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Kernel weight for a coalition with `present` of `m` segments intact.
/// The endpoints (`present` 0 or m) carry infinite weight and are enforced
/// as equality constraints instead of entering the regression.
pub fn shapley_kernel_weight(m: usize, present: usize, variant: ShapKernelVariant) -> f64 {
    assert!(
        present >= 1 && present < m,
        "endpoint coalitions are handled as constraints"
    );
    let c = binomial(m, present);
    match variant {
        ShapKernelVariant::Standard => {
            (m - 1) as f64 / (c * present as f64 * (m - present) as f64)
        }
        ShapKernelVariant::Literal => (m - 1) as f64 / (c * (m - present) as f64),
    }
}

/// Exact per-segment Shapley values by enumerating all 2^m coalitions.
/// Returns `(phi, baseline)` where the baseline is the prediction on the
/// fully perturbed window. Noise draws, where the operator uses any, are
/// consumed in coalition code order from the supplied stream.
pub fn exact_shapley_oracle<S: Scalar>(
    model: &Model<S>,
    x: &Array2<S>,
    partition: &SegmentPartition,
    method: PerturbMethod,
    stats: &FeatureStats<S>,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<S>, S)> {
    let m = partition.n_segments();
    if m == 0 || m > 12 {
        return Err(Error::InvalidInput(format!(
            "exact enumeration supports 1..=12 segments, got {m}"
        )));
    }
    let total = 1usize << m;

    // value[code] = f(window with the segments ABSENT from code perturbed)
    let mut value = vec![S::zero(); total];
    for code in 0..total {
        let mask_bits: Vec<bool> = (0..m).map(|i| (code >> i) & 1 == 0).collect();
        let mask = Coalition::from_bits(mask_bits);
        let perturbed = perturb(x, partition, &mask, method, stats, rng)?;
        value[code] = forward(model, &perturbed)?.0;
    }

    let mut factorial = vec![1.0f64; m + 1];
    for i in 1..=m {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    let weight = |s: usize| factorial[s] * factorial[m - 1 - s] / factorial[m];

    let mut phi = vec![S::zero(); m];
    for (i, phi_i) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut acc = 0.0f64;
        for code in 0..total {
            if code & bit != 0 {
                continue;
            }
            let s = (code as u64).count_ones() as usize;
            acc += weight(s) * (value[code | bit].as_f64() - value[code].as_f64());
        }
        *phi_i = S::from_f64_lossy(acc);
    }
    Ok((phi, value[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::SegmentationSpec;
    use crate::rng::substream;
    use crate::tsmodel::{dense, Activation, LayerSpec, Model, ModelMetadata};
    use ndarray::array;

    #[test]
    fn kernel_values_at_m4() {
        // present = 1 of 4: literal 3 / (C(4,1) * 3) = 0.25
        assert_eq!(
            shapley_kernel_weight(4, 1, ShapKernelVariant::Literal),
            0.25
        );
        // standard adds the |s| factor: 3 / (4 * 1 * 3) = 0.25 here too
        assert_eq!(
            shapley_kernel_weight(4, 1, ShapKernelVariant::Standard),
            0.25
        );
        // the variants split at present = 2
        assert_eq!(
            shapley_kernel_weight(4, 2, ShapKernelVariant::Literal),
            0.25
        );
        assert_eq!(
            shapley_kernel_weight(4, 2, ShapKernelVariant::Standard),
            0.125
        );
    }

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

    #[test]
    fn single_segment_is_the_prediction_minus_baseline() {
        let x = array![[2.0, 3.0]];
        let model = weighted_sum_model(&[1.0, 1.0], 10.0);
        let partition = SegmentationSpec::Uniform { window: 2 }.build(&x).unwrap();
        let stats = FeatureStats::from_windows(std::slice::from_ref(&x)).unwrap();
        let mut rng = substream(0, &[]);
        let (phi, baseline) = exact_shapley_oracle(
            &model,
            &x,
            &partition,
            PerturbMethod::Zero,
            &stats,
            &mut rng,
        )
        .unwrap();
        assert_eq!(phi.len(), 1);
        // f(x) = 15, fully perturbed = 10
        assert!((baseline - 10.0).abs() < 1e-12);
        assert!((phi[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn additive_model_gets_per_segment_contributions_and_efficiency() {
        let x = array![[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]];
        let model = weighted_sum_model(&[1.0, 1.0, 0.5, 0.5, 2.0, 2.0], 40.0);
        let partition = SegmentationSpec::Uniform { window: 2 }.build(&x).unwrap();
        let stats = FeatureStats::from_windows(std::slice::from_ref(&x)).unwrap();
        let mut rng = substream(0, &[]);
        let (phi, baseline) = exact_shapley_oracle(
            &model,
            &x,
            &partition,
            PerturbMethod::Zero,
            &stats,
            &mut rng,
        )
        .unwrap();
        // additivity: each segment's value is its own weighted sum
        assert!((phi[0] - 3.0).abs() < 1e-9);
        assert!((phi[1] - 3.5).abs() < 1e-9);
        assert!((phi[2] - 22.0).abs() < 1e-9);
        // efficiency: sum + baseline = f(x)
        let fx = crate::tsmodel::forward(&model, &x).unwrap().0;
        let total: f64 = phi.iter().sum::<f64>() + baseline;
        assert!((total - fx).abs() < 1e-9);
    }

    #[test]
    fn too_many_segments_is_rejected() {
        let x = ndarray::Array2::<f64>::zeros((1, 13));
        let model = weighted_sum_model(&[0.0; 13], 1.0);
        let partition = SegmentationSpec::Uniform { window: 1 }.build(&x).unwrap();
        let stats = FeatureStats::from_windows(std::slice::from_ref(&x)).unwrap();
        let mut rng = substream(0, &[]);
        assert!(exact_shapley_oracle(
            &model,
            &x,
            &partition,
            PerturbMethod::Zero,
            &stats,
            &mut rng
        )
        .is_err());
    }
}
