//! Uniform and cost-optimal contiguous segmentation of one series.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Split `[0, t)` into ceil(t/m) windows of size `m`; the last one absorbs
/// the remainder.
pub fn uniform_segmentation(t: usize, m: usize) -> Result<Vec<(usize, usize)>> {
    if m == 0 || m > t {
        return Err(Error::InvalidInput(format!(
            "window size {m} out of range for length {t}"
        )));
    }
    let mut bounds = Vec::with_capacity(t.div_ceil(m));
    let mut start = 0;
    while start < t {
        let end = (start + m).min(t);
        bounds.push((start, end));
        start = end;
    }
    Ok(bounds)
}

/// Sum of squared deviations from the segment mean over `[i, j)`.
pub fn segment_cost<S: Scalar>(ts: &[S], i: usize, j: usize) -> Result<S> {
    if i >= j || j > ts.len() {
        return Err(Error::InvalidInput(format!(
            "segment [{i}, {j}) out of range for length {}",
            ts.len()
        )));
    }
    let len = lit::<S>((j - i) as f64);
    let mut sum = S::zero();
    for &v in &ts[i..j] {
        sum = sum + v;
    }
    let mean = sum / len;
    let mut cost = S::zero();
    for &v in &ts[i..j] {
        let d = v - mean;
        cost = cost + d * d;
    }
    Ok(cost)
}

/// Partition the series into `n_segments` contiguous pieces minimizing the
/// summed segment cost. Ties pick the lexicographically smallest boundary
/// vector. Decisions are made on a table of [`segment_cost`] values so the
/// reported optimum is bit-identical to an enumeration that sums the same
/// costs.
pub fn l2_optimal_segmentation<S: Scalar>(
    ts: &[S],
    n_segments: usize,
) -> Result<Vec<(usize, usize)>> {
    let t = ts.len();
    if n_segments == 0 || n_segments > t {
        return Err(Error::InvalidInput(format!(
            "segment count {n_segments} out of range for length {t}"
        )));
    }

    // cost[i][j] for [i, j), stored at [i][j - i - 1]
    let mut cost = vec![Vec::new(); t];
    for (i, row) in cost.iter_mut().enumerate() {
        row.reserve(t - i);
        for j in (i + 1)..=t {
            row.push(segment_cost(ts, i, j)?);
        }
    }
    let cost_of = |i: usize, j: usize| cost[i][j - i - 1];

    // best[s][j]: minimal cost splitting [0, j) into s+1 segments, with the
    // lexicographically smallest interior boundary vector on ties.
    let mut best_cost = vec![vec![S::infinity(); t + 1]; n_segments];
    let mut best_bounds: Vec<Vec<Option<Vec<usize>>>> = vec![vec![None; t + 1]; n_segments];
    for j in 1..=t {
        best_cost[0][j] = cost_of(0, j);
        best_bounds[0][j] = Some(Vec::new());
    }
    for s in 1..n_segments {
        for j in (s + 1)..=t {
            let mut chosen_cost = S::infinity();
            let mut chosen: Option<Vec<usize>> = None;
            for split in s..j {
                let prefix_cost = best_cost[s - 1][split];
                if !prefix_cost.is_finite() {
                    continue;
                }
                let total = prefix_cost + cost_of(split, j);
                let candidate_better = match &chosen {
                    None => total < chosen_cost || chosen_cost.is_infinite(),
                    Some(bounds) => {
                        if total < chosen_cost {
                            true
                        } else if total > chosen_cost {
                            false
                        } else {
                            let mut cand = best_bounds[s - 1][split]
                                .as_ref()
                                .expect("finite cost implies recorded bounds")
                                .clone();
                            cand.push(split);
                            cand < *bounds
                        }
                    }
                };
                if candidate_better {
                    let mut bounds = best_bounds[s - 1][split]
                        .as_ref()
                        .expect("finite cost implies recorded bounds")
                        .clone();
                    bounds.push(split);
                    chosen_cost = total;
                    chosen = Some(bounds);
                }
            }
            best_cost[s][j] = chosen_cost;
            best_bounds[s][j] = chosen;
        }
    }

    let interior = best_bounds[n_segments - 1][t]
        .take()
        .ok_or_else(|| Error::InvalidInput("no feasible segmentation".into()))?;
    let mut result = Vec::with_capacity(n_segments);
    let mut prev = 0;
    for b in interior {
        result.push((prev, b));
        prev = b;
    }
    result.push((prev, t));
    Ok(result)
}

/// Total cost of a boundary list, summed left to right.
pub fn total_cost<S: Scalar>(ts: &[S], bounds: &[(usize, usize)]) -> Result<S> {
    let mut acc = S::zero();
    for &(i, j) in bounds {
        acc = acc + segment_cost(ts, i, j)?;
    }
    Ok(acc)
}
