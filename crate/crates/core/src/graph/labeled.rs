use super::{build_knn_graph, path_depth, pointcloud_eikonal, GraphDepth, KnnWeight, WeightedGraph};
use crate::error::{Error, Result};
use crate::points::PointCloud;

/// Solver for the labeled pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabeledScheme {
    Path,
    /// The difference scheme with an explicit bandwidth.
    Difference {
        h: f64,
    },
}

/// Depth of the `target` class inside a labeled cloud: a k-NN graph with
/// exponential weights over all points, unit density everywhere, and every
/// point of another label on the boundary.
pub fn labeled_depth(
    points: &PointCloud,
    labels: &[String],
    target: &str,
    k: usize,
    scheme: LabeledScheme,
) -> Result<(WeightedGraph, GraphDepth)> {
    if labels.len() != points.len() {
        return Err(Error::InvalidParameter(format!("{} labels for {} points", labels.len(), points.len())));
    }
    let mask: Vec<bool> = labels.iter().map(|l| l != target).collect();
    if mask.iter().all(|&b| b) {
        return Err(Error::InvalidParameter(format!("label '{target}' does not occur")));
    }
    if !mask.iter().any(|&b| b) {
        return Err(Error::InvalidParameter(format!("every point has label '{target}', so the boundary is empty")));
    }
    let mut graph = build_knn_graph(points, k, KnnWeight::MnistExp)?;
    graph.set_boundary_mask(mask)?;
    let depth = match scheme {
        LabeledScheme::Path => path_depth(&graph)?,
        LabeledScheme::Difference { h } => pointcloud_eikonal(&graph, h)?,
    };
    Ok((graph, depth))
}
