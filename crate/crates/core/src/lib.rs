pub mod coefficients;
pub mod covariance;
pub mod data;
pub mod error;
pub mod linalg;
pub mod variance;
pub mod resampling;
pub mod inference;
pub mod simulation;
pub mod cli;
