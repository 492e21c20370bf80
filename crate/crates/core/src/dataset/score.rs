//! Regression scoring: RMSE, the asymmetric exponential penalty used in
//! turbofan prognosis benchmarks, and their average.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Root mean squared error over `(label, prediction)` pairs.
pub fn rmse<S: Scalar>(pairs: &[(S, S)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("rmse over empty set".into()));
    }
    let sum: f64 = pairs
        .iter()
        .map(|(y, p)| {
            let d = y.as_f64() - p.as_f64();
            d * d
        })
        .sum();
    Ok((sum / pairs.len() as f64).sqrt())
}

/// Mean exponential penalty `exp(alpha * |y - yhat|) - 1` with
/// `alpha = 1/13` for under-prediction (`yhat < y`) and `1/10` otherwise,
/// so over-predicting remaining life costs more.
pub fn nasa_score<S: Scalar>(pairs: &[(S, S)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("nasa_score over empty set".into()));
    }
    let sum: f64 = pairs
        .iter()
        .map(|(y, p)| {
            let (y, p) = (y.as_f64(), p.as_f64());
            let alpha = if p < y { 1.0 / 13.0 } else { 1.0 / 10.0 };
            (alpha * (y - p).abs()).exp()
        })
        .sum();
    Ok(sum / pairs.len() as f64 - 1.0)
}

/// `0.5 * RMSE + 0.5 * penalty`.
pub fn combined_score<S: Scalar>(pairs: &[(S, S)]) -> Result<f64> {
    Ok(0.5 * rmse(pairs)? + 0.5 * nasa_score(pairs)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions_score_zero() {
        let pairs: Vec<(f64, f64)> = vec![(10.0, 10.0), (3.5, 3.5)];
        assert_eq!(rmse(&pairs).unwrap(), 0.0);
        assert_eq!(nasa_score(&pairs).unwrap(), 0.0);
        assert_eq!(combined_score(&pairs).unwrap(), 0.0);
    }

    #[test]
    fn over_prediction_branch() {
        // yhat >= y uses alpha = 1/10; |100 - 110| / 10 = 1
        let pairs: Vec<(f64, f64)> = vec![(100.0, 110.0)];
        let expected = 1.0f64.exp() - 1.0;
        assert!((nasa_score(&pairs).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn under_prediction_branch() {
        // yhat < y uses alpha = 1/13; |100 - 87| / 13 = 1
        let pairs: Vec<(f64, f64)> = vec![(100.0, 87.0)];
        let expected = 1.0f64.exp() - 1.0;
        assert!((nasa_score(&pairs).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn over_prediction_penalized_more_for_equal_error() {
        let over: Vec<(f64, f64)> = vec![(100.0, 112.0)];
        let under: Vec<(f64, f64)> = vec![(100.0, 88.0)];
        assert!(nasa_score(&over).unwrap() > nasa_score(&under).unwrap());
    }

    #[test]
    fn penalty_is_nonnegative_and_empty_rejected() {
        let pairs: Vec<(f64, f64)> = vec![(5.0, 9.0), (7.0, 2.0)];
        assert!(nasa_score(&pairs).unwrap() >= 0.0);
        assert!(rmse::<f64>(&[]).is_err());
        assert!(nasa_score::<f64>(&[]).is_err());
    }
}
