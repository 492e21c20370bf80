//! Binary masks over segments. A set bit marks a segment as perturbed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coalition(Vec<bool>);

impl Coalition {
    pub fn zeros(n: usize) -> Self {
        Coalition(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Coalition(vec![true; n])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Coalition(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> impl Iterator<Item = &bool> {
        self.0.iter()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    /// Number of perturbed segments.
    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

/// Draw `count` random masks over `n_segments` bits. The all-zeros mask (the
/// unperturbed reference) is always first; the rest are independent fair
/// coin flips per bit, duplicates allowed.
pub fn sample_coalitions(n_segments: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Coalition> {
    let mut out = Vec::with_capacity(count);
    out.push(Coalition::zeros(n_segments));
    for _ in 1..count {
        let bits: Vec<bool> = (0..n_segments).map(|_| rng.gen_bool(0.5)).collect();
        out.push(Coalition::from_bits(bits));
    }
    out
}

/// All 2^n masks in binary counting order; the all-zeros mask comes first.
pub fn enumerate_coalitions(n_segments: usize) -> Vec<Coalition> {
    assert!(n_segments < 26, "enumeration over 2^{n_segments} masks");
    let total = 1usize << n_segments;
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let bits: Vec<bool> = (0..n_segments).map(|b| (code >> b) & 1 == 1).collect();
        out.push(Coalition::from_bits(bits));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn single_draw_is_the_reference_mask() {
        let mut rng = substream(4, &[]);
        let cs = sample_coalitions(5, 1, &mut rng);
        assert_eq!(cs, vec![Coalition::zeros(5)]);
    }

    #[test]
    fn same_seed_same_coalitions() {
        let a = sample_coalitions(6, 40, &mut substream(8, &[3]));
        let b = sample_coalitions(6, 40, &mut substream(8, &[3]));
        assert_eq!(a, b);
    }

    #[test]
    fn bits_are_roughly_balanced() {
        let mut rng = substream(123, &[]);
        let cs = sample_coalitions(3, 1000, &mut rng);
        for bit in 0..3 {
            let freq =
                cs.iter().filter(|c| c.get(bit)).count() as f64 / cs.len() as f64;
            assert!((freq - 0.5).abs() < 0.05, "bit {bit} frequency {freq}");
        }
    }

    #[test]
    fn enumeration_is_complete_and_starts_at_zero() {
        let cs = enumerate_coalitions(3);
        assert_eq!(cs.len(), 8);
        assert_eq!(cs[0], Coalition::zeros(3));
        let unique: std::collections::BTreeSet<Vec<bool>> =
            cs.iter().map(|c| c.bits().copied().collect()).collect();
        assert_eq!(unique.len(), 8);
    }
}
