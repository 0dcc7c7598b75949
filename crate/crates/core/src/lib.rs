//! Spectra of dense random geometric graphs on the cube `[-1,1]^d` under the
//! L∞ metric, together with the integral operators they converge to.
//!
//! The crate samples point clouds, builds `W = D^{-1/2} A D^{-1/2}`, solves
//! its spectrum, discretizes the limiting kernel by Nyström quadrature, and
//! runs the seeded experiments exposed by the `rgg-spectra` binary.

pub mod cli;
pub mod concentration;
pub mod eigen;
pub mod error;
pub mod experiments;
pub mod export;
pub mod geometry;
pub mod graph;
pub mod kernel;
pub mod ordering;
pub mod quadrature;

pub use error::{Error, Result};
