pub mod cli;
pub mod error;
pub mod functional;
pub mod morse;
pub mod singular;
pub mod solver;
pub mod surface;

pub use error::{Error, Result};
