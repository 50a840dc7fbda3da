//! Spatial discretisation: radial and Cartesian grids, quadrature,
//! differentiation, dilation and rearrangement.

mod cartesian;
mod field;
mod grid;
mod stencil;

pub use cartesian::{CartesianGrid, ComplexField2D};
pub use field::RadialField;
pub use grid::{RadialGrid, MIN_NODES};

pub(crate) use field::weighted_dot;
