//! Hybrid surface-integral / finite-element solver for 2D TM scattering.

mod error;
pub mod geometry;
pub mod material;
pub mod mesh;
pub mod oracle;
pub mod pde;
pub mod post;
pub mod sie;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
