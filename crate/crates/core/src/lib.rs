pub mod analysis;
pub mod error;
pub mod estimate;
pub mod likelihood;
pub mod models;
pub mod quadrature;
pub mod simulate;
pub mod stable;

pub use error::{Error, Result};
