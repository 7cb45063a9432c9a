//! Long-range dependent Gaussian random fields on hypersurfaces.
//!
//! Modules follow the data flow: Hermite calculus and covariance models at the
//! bottom, surfaces and field sampling in the middle, functionals, limit laws
//! and rate exponents on top.

pub mod covmodel;
pub mod error;
pub mod fieldsim;
pub mod functionals;
pub mod geometry;
pub mod hermite;
pub mod io;
pub mod limitlaw;
pub mod quad;
pub mod rates;
pub mod rng;
pub mod special;

pub mod cli;

pub use error::{Error, Result};
