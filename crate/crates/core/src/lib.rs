//! Forward and inverse scattering for the one-dimensional Helmholtz equation
//! `u'' + (k/c(x))^2 u = 0` with a compactly supported or exponentially decaying
//! perturbation of a unit background wave speed.

pub mod error;
pub mod halfplane;
pub mod interp;
pub mod jost;
pub mod ode;
pub mod oracle;
pub mod profile;
pub mod quad;
pub mod recover;
pub mod riccati;
pub mod scatter;

pub use error::{HelmError, OdeError, ProfileError, Result};
