//! Stability analysis and structure-preserving simulation of the vertically
//! falling, spinning relative equilibria of a submerged axisymmetric body
//! in the Kirchhoff added-mass approximation.

pub mod autodiff;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod model;
pub mod reduction;
pub mod normal_form;
pub mod stability;

pub use error::{Error, Result};
