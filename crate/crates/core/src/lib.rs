pub mod config;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod fill;
pub mod intertwiner;
pub mod sampling;
pub mod su2;

pub use error::{Error, Result};
