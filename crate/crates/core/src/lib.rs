//! Eikonal statistical depth.
//!
//! The depth of a point is the cheapest φ(ρ)-weighted path to the edge of
//! the support (or to infinity), i.e. the viscosity solution of
//! |∇u| = φ(ρ) with zero boundary data. This crate solves it on regular
//! grids by fast marching and on sampled point clouds by graph schemes.

// `!(x > 0.0)` guards are deliberate: they reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod density;
pub mod error;
pub mod graph;
pub mod grid;
mod heap;
pub mod io;
mod maxima;
pub mod points;
pub mod quadrature;

pub use density::{apply_phi, DensityModel, Domain, GaussianMixture, GridDensity, PhiSpec, Support, TruncatedPowerLaw};
pub use error::{Error, Result};
pub use grid::{BoundaryCondition, DepthField, GridSpec, Polyline};
pub use points::PointCloud;
