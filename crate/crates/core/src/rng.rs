//! Deterministic seeded random streams.
//!
//! All randomness in the crate flows through [`substream`], which derives an
//! independent ChaCha8 stream from a master seed plus a list of identifiers
//! (sample index, invocation number, purpose tag). Results are therefore a
//! pure function of the master seed regardless of scheduling or scalar type:
//! draws are always made in `f64` and converted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Scalar;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a byte string (for deriving stream ids from names).
pub fn hash64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(h)
}

/// Derive an independent seeded stream from `(master, ids...)`.
pub fn substream(master: u64, ids: &[u64]) -> ChaCha8Rng {
    let mut sid = splitmix64(master ^ 0xA076_1D64_78BD_642F);
    for &id in ids {
        sid = splitmix64(sid ^ id);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(sid);
    rng
}

/// Standard normal draw, made in f64 then converted.
pub fn draw_normal<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    let v: f64 = StandardNormal.sample(rng);
    S::from_f64_lossy(v)
}

/// Uniform draw from `[lo, hi]` (inclusive so degenerate ranges are fine).
pub fn draw_uniform<S: Scalar>(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> S {
    let v: f64 = rng.gen_range(lo..=hi);
    S::from_f64_lossy(v)
}
