//! Flat-torus geometry, periodic grids, spectral calculus and the Green
//! function of the Laplacian.

mod field;
mod green;
mod grid;
mod torus;

pub use field::Field;
pub use green::GreenFunction;
pub use grid::Grid;
pub use torus::{Point, Torus};
