//! Invariance, robustness and bound checks on computed depths, plus the
//! whitening transform and a brute-force Tukey reference.

mod checks;
pub mod reports;
mod scatter;
mod tukey;
mod warp;

pub use checks::{
    carve_channel, isometric_robustness_check_cloud, isometric_robustness_check_grid, lipschitz_constant,
    mode_separation_predicate, pushforward_density, stability_check, Carved,
};
pub use scatter::{fit_scatter, sample_covariance, whiten, ScatterTransform};
pub use tukey::{tukey_depth_2d, TUKEY_DIRECTIONS};
pub use warp::{WarpMap, PROBE_NODES};

use serde::Serialize;

/// Outcome of one property check: passes when `observed_margin ≤ tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub pass: bool,
    pub observed_margin: f64,
    pub tolerance: f64,
    pub details: String,
}

impl PropertyReport {
    pub fn new(name: impl Into<String>, observed_margin: f64, tolerance: f64, details: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: observed_margin <= tolerance,
            observed_margin,
            tolerance,
            details: details.into(),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
