//! Important-feature selection: values strictly above 1.5 standard
//! deviations of the map, capped at 100 positions.

use crate::attribution::AttributionMap;
use crate::scalar::Scalar;

use super::ProxyConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ImportantFeatureSet {
    /// `(channel, time)` positions in descending importance; ties resolved
    /// lexicographically.
    pub positions: Vec<(usize, usize)>,
    pub threshold: f64,
}

impl ImportantFeatureSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

pub fn select_important<S: Scalar>(
    map: &AttributionMap<S>,
    cfg: &ProxyConfig,
) -> ImportantFeatureSet {
    let score = |v: S| {
        let v = v.as_f64();
        if cfg.abs_importance {
            v.abs()
        } else {
            v
        }
    };
    let n = map.values.len() as f64;
    let mean: f64 = map.values.iter().map(|&v| score(v)).sum::<f64>() / n;
    let var: f64 = map
        .values
        .iter()
        .map(|&v| {
            let d = score(v) - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    let threshold = cfg.std_factor * var.sqrt();

    let mut hits: Vec<((usize, usize), f64)> = map
        .values
        .indexed_iter()
        .filter_map(|((f, t), &v)| {
            let s = score(v);
            (s > threshold).then_some(((f, t), s))
        })
        .collect();
    hits.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("importance values are finite")
            .then(a.0.cmp(&b.0))
    });
    hits.truncate(cfg.cap);
    ImportantFeatureSet {
        positions: hits.into_iter().map(|(pos, _)| pos).collect(),
        threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn map_of(values: Array2<f64>) -> AttributionMap<f64> {
        AttributionMap::new(values, "test", "test".into())
    }

    #[test]
    fn constant_zero_map_selects_nothing() {
        let map = map_of(Array2::zeros((5, 20)));
        let set = select_important(&map, &ProxyConfig::default());
        assert!(set.is_empty());
    }

    #[test]
    fn single_spike_is_selected_alone() {
        let mut values = Array2::zeros((10, 10));
        values[[3, 7]] = 10.0;
        let set = select_important(&map_of(values), &ProxyConfig::default());
        assert_eq!(set.positions, vec![(3, 7)]);
        // spike of 10 among 100 values: std = sqrt(99)/10 * ... well below 10
        assert!(set.threshold < 10.0);
    }

    #[test]
    fn cap_and_lexicographic_tie_break() {
        // 200 equal spikes in a 20x20 map; only the first 100 in row-major
        // order survive the cap
        let mut values = Array2::zeros((20, 20));
        for idx in 0..200 {
            values[[idx / 20, idx % 20]] = 5.0;
        }
        let set = select_important(&map_of(values), &ProxyConfig::default());
        assert_eq!(set.len(), 100);
        assert_eq!(set.positions[0], (0, 0));
        assert_eq!(set.positions[99], (4, 19));
    }

    #[test]
    fn negative_spikes_need_the_abs_flag() {
        let mut values = Array2::zeros((4, 4));
        values[[2, 2]] = -50.0;
        let raw = select_important(&map_of(values.clone()), &ProxyConfig::default());
        assert!(raw.is_empty());
        let by_abs = select_important(
            &map_of(values),
            &ProxyConfig {
                abs_importance: true,
                ..ProxyConfig::default()
            },
        );
        assert_eq!(by_abs.positions, vec![(2, 2)]);
    }

    #[test]
    fn ordering_is_descending_then_lexicographic() {
        let mut values = Array2::zeros((3, 3));
        values[[0, 1]] = 4.0;
        values[[2, 0]] = 9.0;
        values[[1, 2]] = 4.0;
        let set = select_important(&map_of(values), &ProxyConfig::default());
        assert_eq!(set.positions, vec![(2, 0), (0, 1), (1, 2)]);
    }
}
