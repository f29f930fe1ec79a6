pub mod analysis;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod model;
pub mod numerics;
pub mod spectral;
pub mod threshold;

pub use error::{Error, Result};
