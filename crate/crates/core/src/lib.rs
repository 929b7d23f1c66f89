//! Concentration bounds with explicit constants, and a Monte-Carlo harness
//! that checks each bound against a matching generative model.

pub mod bounds;
pub mod catalog;
pub mod dist;
pub mod error;
pub mod hdreg;
pub mod matrix;
pub mod maxima;
pub mod mc;
pub mod norms;
pub mod numeric;
pub mod quadform;
pub mod rng;

pub use bounds::{BoundFamily, Side, Statistic, TailBound};
pub use dist::DistributionSpec;
pub use error::{Error, Result};
pub use matrix::{DenseMatrix, MatrixNorms};
pub use mc::{CoverageReport, Experiment, ModelSpec};
pub use norms::{NormEstimate, OrliczSpec, TailClassParams};
pub use rng::RngStream;
