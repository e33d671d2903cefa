//! Generalized tempered stable distribution: density, fitting and tail risk.

pub mod data;
pub mod error;
pub mod linalg;
pub mod mle;
pub mod model;
pub mod risk;
pub mod sampler;
pub mod special;
pub mod spectral;

pub use error::{GtsError, Result};
pub use model::{CumulantSet, GtsParams, MomentStats};
