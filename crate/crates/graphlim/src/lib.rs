//! A desk-scale laboratory for dense graph limits: exact homomorphism
//! density calculus, stepfunction graphons, W-random graph models,
//! cut-norm and weak regularity machinery, and connection-matrix
//! reflection-positivity tests.

pub mod cutnorm;
pub mod densities;
pub mod error;
pub mod graphons;
pub mod graphs;
pub mod io;
pub mod matrix;
pub mod numeric;
pub mod regularity;
pub mod rng;
pub mod sampling;

pub mod connection;

pub use error::{Error, Result};
