//! Sliding-window sample construction.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{Sample, UnitHistory};

/// Slide a window of length `l_w` through a unit's history. The window
/// ending at `t_end` covers steps `(t_end - l_w, t_end]`, which yields
/// exactly `steps - l_w` samples; the label is the remaining life in cycles
/// at the window end.
pub fn sliding_windows<S: Scalar>(
    history: &UnitHistory<S>,
    l_w: usize,
) -> Result<Vec<Sample<S>>> {
    let steps = history.steps();
    if l_w == 0 {
        return Err(Error::InvalidInput("window length must be >= 1".into()));
    }
    if l_w > steps {
        return Err(Error::InvalidInput(format!(
            "window length {l_w} exceeds unit {} history of {steps} steps",
            history.unit_id
        )));
    }
    let mut samples = Vec::with_capacity(steps - l_w);
    for t_end in l_w..steps {
        let x = history
            .channels
            .slice(ndarray::s![.., t_end + 1 - l_w..=t_end])
            .to_owned();
        let y = S::from_f64_lossy(history.tul - history.cycles[t_end]);
        samples.push(Sample {
            x,
            y,
            unit_id: history.unit_id,
            t_end,
        });
    }
    Ok(samples)
}
