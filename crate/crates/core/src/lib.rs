//! Finite element laboratory for the Stokes problem in Muckenhoupt-weighted
//! spaces on structured triangulations of rectangles.

pub mod analysis;
pub mod approximation;
pub mod assembly;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod weights;

pub use analysis::exact::{ExactSolution, StokesData};
pub use assembly::{assemble, RegularizedDelta, SaddleSystem};
pub use error::{Error, Result};
pub use fem::{DofMap, ElementPair};
pub use mesh::{Mesh, Pattern, Point, Rect, Star};
pub use quadrature::{Integrator, Quadrature, Singularity};
pub use solver::{infsup_beta, solve_saddle, SaddleSolver, Solution};
pub use weights::WeightSpec;
