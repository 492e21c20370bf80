//! Synthetic run-to-failure fleet: generation, z-score normalization,
//! sliding-window sample construction, labels, and the scoring functions.

mod generate;
mod io;
mod normalize;
mod score;
mod window;

pub use generate::{generate_fleet, FleetConfig};
pub use io::{
    read_fleet, read_samples_bin, write_fleet, write_samples_bin, FleetManifest,
};
pub use normalize::{zscore_apply, zscore_fit, zscore_invert, NormalizationStats};
pub use score::{combined_score, nasa_score, rmse};
pub use window::sliding_windows;

use ndarray::Array2;

use crate::scalar::Scalar;

/// Full life of one unit: `channels` is channels x steps, `cycles[t]` is the
/// cycle count elapsed at step `t`, and `tul` the total useful life in
/// cycles.
#[derive(Debug, Clone)]
pub struct UnitHistory<S: Scalar> {
    pub unit_id: usize,
    pub channels: Array2<S>,
    pub cycles: Vec<f64>,
    pub tul: f64,
}

impl<S: Scalar> UnitHistory<S> {
    pub fn steps(&self) -> usize {
        self.channels.ncols()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.nrows()
    }
}

/// One normalized window with its remaining-useful-life label and the
/// provenance needed to trace it back to the fleet.
#[derive(Debug, Clone)]
pub struct Sample<S: Scalar> {
    pub x: Array2<S>,
    pub y: S,
    pub unit_id: usize,
    pub t_end: usize,
}
