use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::points::PointCloud;

/// Default direction count for the Tukey reference.
pub const TUKEY_DIRECTIONS: usize = 720;

/// Empirical halfspace depth in the plane, minimized over `m` equispaced
/// directions. Never below the exact depth; doubling `m` keeps the old
/// directions, so it can only lower the value.
pub fn tukey_depth_2d(points: &PointCloud, query: [f64; 2], m: usize) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("Tukey depth of an empty sample".into()));
    }
    if points.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: points.dim() });
    }
    if m < 16 {
        return Err(Error::InvalidParameter(format!("need at least 16 directions, got {m}")));
    }
    let n = points.len();
    let mut best = n;
    for k in 0..m {
        let (s, c) = (2.0 * PI * k as f64 / m as f64).sin_cos();
        let count = points.iter().filter(|y| (query[0] - y[0]) * c + (query[1] - y[1]) * s >= 0.0).count();
        best = best.min(count);
    }
    Ok(best as f64 / n as f64)
}
