//! Per-feature z-score normalization with a degenerate-feature guard.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::UnitHistory;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct NormalizationStats<S: Scalar> {
    pub mean: Vec<S>,
    /// Population standard deviation; forced to one where a feature is
    /// constant (see `degenerate`).
    pub std: Vec<S>,
    /// Features whose raw standard deviation was zero.
    pub degenerate: Vec<usize>,
}

/// Fit per-feature mean and population standard deviation over the full
/// histories of every unit.
pub fn zscore_fit<S: Scalar>(histories: &[UnitHistory<S>]) -> Result<NormalizationStats<S>> {
    let first = histories
        .first()
        .ok_or_else(|| Error::InvalidInput("no histories to fit".into()))?;
    let f = first.n_channels();
    let mut mean = vec![0.0f64; f];
    let mut count = vec![0usize; f];
    for h in histories {
        if h.n_channels() != f {
            return Err(Error::InvalidInput(
                "histories disagree on channel count".into(),
            ));
        }
        for (fi, row) in h.channels.rows().into_iter().enumerate() {
            for v in row {
                mean[fi] += v.as_f64();
                count[fi] += 1;
            }
        }
    }
    for fi in 0..f {
        mean[fi] /= count[fi] as f64;
    }
    let mut var = vec![0.0f64; f];
    for h in histories {
        for (fi, row) in h.channels.rows().into_iter().enumerate() {
            for v in row {
                let d = v.as_f64() - mean[fi];
                var[fi] += d * d;
            }
        }
    }
    let mut std = Vec::with_capacity(f);
    let mut degenerate = Vec::new();
    for fi in 0..f {
        let s = (var[fi] / count[fi] as f64).sqrt();
        if s == 0.0 {
            degenerate.push(fi);
            std.push(S::one());
        } else {
            std.push(S::from_f64_lossy(s));
        }
    }
    Ok(NormalizationStats {
        mean: mean.into_iter().map(S::from_f64_lossy).collect(),
        std,
        degenerate,
    })
}

/// Normalize the channels of every history in place.
pub fn zscore_apply<S: Scalar>(
    stats: &NormalizationStats<S>,
    histories: &mut [UnitHistory<S>],
) -> Result<()> {
    for h in histories.iter_mut() {
        if h.n_channels() != stats.mean.len() {
            return Err(Error::InvalidInput(
                "stats fitted on a different channel count".into(),
            ));
        }
        for (fi, mut row) in h.channels.rows_mut().into_iter().enumerate() {
            let (m, s) = (stats.mean[fi], stats.std[fi]);
            for v in row.iter_mut() {
                *v = (*v - m) / s;
            }
        }
    }
    Ok(())
}

/// Undo [`zscore_apply`].
pub fn zscore_invert<S: Scalar>(
    stats: &NormalizationStats<S>,
    histories: &mut [UnitHistory<S>],
) -> Result<()> {
    for h in histories.iter_mut() {
        if h.n_channels() != stats.mean.len() {
            return Err(Error::InvalidInput(
                "stats fitted on a different channel count".into(),
            ));
        }
        for (fi, mut row) in h.channels.rows_mut().into_iter().enumerate() {
            let (m, s) = (stats.mean[fi], stats.std[fi]);
            for v in row.iter_mut() {
                *v = *v * s + m;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn history(values: ndarray::Array2<f64>) -> UnitHistory<f64> {
        let steps = values.ncols();
        UnitHistory {
            unit_id: 0,
            channels: values,
            cycles: (0..steps).map(|t| t as f64).collect(),
            tul: (steps - 1) as f64,
        }
    }

    #[test]
    fn hand_computed_stats() {
        let h = history(array![[2.0, 4.0, 6.0]]);
        let stats = zscore_fit(std::slice::from_ref(&h)).unwrap();
        assert!((stats.mean[0] - 4.0).abs() < 1e-12);
        assert!((stats.std[0] - 1.632993161855452).abs() < 1e-9);

        let mut hs = [h];
        zscore_apply(&stats, &mut hs).unwrap();
        assert!((hs[0].channels[[0, 0]] + 1.224744871391589).abs() < 1e-9);
        assert!(hs[0].channels[[0, 1]].abs() < 1e-12);
        assert!((hs[0].channels[[0, 2]] - 1.224744871391589).abs() < 1e-9);
    }

    #[test]
    fn constant_feature_normalizes_to_zero_via_guard() {
        let h = history(array![[5.0, 5.0, 5.0]]);
        let stats = zscore_fit(std::slice::from_ref(&h)).unwrap();
        assert_eq!(stats.degenerate, vec![0]);
        assert_eq!(stats.std[0], 1.0);
        let mut hs = [h];
        zscore_apply(&stats, &mut hs).unwrap();
        assert!(hs[0].channels.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn apply_then_invert_round_trips() {
        let h = history(array![[2.0, -1.0, 0.5], [10.0, 20.0, 15.0]]);
        let original = h.channels.clone();
        let stats = zscore_fit(std::slice::from_ref(&h)).unwrap();
        let mut hs = [h];
        zscore_apply(&stats, &mut hs).unwrap();
        zscore_invert(&stats, &mut hs).unwrap();
        for (a, b) in hs[0].channels.iter().zip(original.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn applied_data_is_standardized() {
        let h = history(ndarray::Array2::from_shape_fn((3, 50), |(i, j)| {
            (i as f64 + 1.0) * (j as f64 * 0.3).sin() + i as f64
        }));
        let stats = zscore_fit(std::slice::from_ref(&h)).unwrap();
        let mut hs = [h];
        zscore_apply(&stats, &mut hs).unwrap();
        for row in hs[0].channels.rows() {
            let n = row.len() as f64;
            let mean: f64 = row.iter().sum::<f64>() / n;
            let var: f64 = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-10);
            assert!((var.sqrt() - 1.0).abs() < 1e-10);
        }
    }
}
