//! Shared fixtures for the solver benchmarks.

use eikonal_depth::{DensityModel, GridSpec, PointCloud};

/// Unit-square grid with `n` nodes per side.
pub fn unit_square_grid(n: usize) -> GridSpec {
    GridSpec::covering(&[0.0, 0.0], &[1.0, 1.0], n).expect("valid grid")
}

/// Seeded uniform sample on the unit square.
pub fn unit_square_cloud(n: usize, seed: u64) -> PointCloud {
    DensityModel::uniform_box(vec![0.0, 0.0], vec![1.0, 1.0]).and_then(|m| m.sample(n, seed)).expect("uniform sample")
}
