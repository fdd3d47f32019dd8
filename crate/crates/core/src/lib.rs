//! Numerical engine for multiple SLE(0) systems with marked points.
pub mod config;
pub mod conformal;
pub mod divisor;
pub mod error;
pub mod loewner;
pub mod output;
pub mod quad_diff;
pub mod sample;
pub mod scene;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
