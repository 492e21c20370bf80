//! Attribution methods and explanation-quality proxies for time-series
//! regression models, together with the synthetic fleet generator, the
//! network engine, and the segmentation/perturbation machinery they need.
//!
//! The numeric core is generic over the scalar type (see [`Scalar`]); the
//! `*64` aliases below pin `f64`, which the experiment pipeline and the
//! file formats use.

pub mod attribution;
pub mod dataset;
pub mod error;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod segperturb;
pub mod tsmodel;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Channels-by-time matrix of the scalar type `S`.
pub type Mat<S> = ndarray::Array2<S>;

pub type Mat64 = Mat<f64>;
pub type Model64 = tsmodel::Model<f64>;
