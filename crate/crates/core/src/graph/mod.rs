//! Eikonal depth on weighted graphs built from point clouds.
//!
//! Two solvers share one graph type: density-weighted shortest paths and
//! the kernel difference scheme ρᵢ² = Σⱼ h⁻² wᵢⱼ max(0, uᵢ − uⱼ)².

mod build;
mod labeled;
mod path;
mod scheme;

pub use build::{
    build_kernel_graph, build_knn_graph, kth_neighbor_distances, sigma_normalization, Kernel, KernelSpec, KnnWeight,
};
pub use labeled::{labeled_depth, LabeledScheme};
pub use path::path_depth;
pub use scheme::{pointcloud_eikonal, scheme_residual, scheme_update};

use crate::error::{Error, Result};
use crate::maxima::plateau_maxima;
use crate::points::PointCloud;

/// Margin used when comparing neighboring depths for mode detection.
pub const MAXIMA_MARGIN: f64 = 1e-9;

/// Undirected weighted graph with per-node density and a boundary set.
///
/// Adjacency is stored in both directions, sorted by neighbor index.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    positions: Option<PointCloud>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    density: Vec<f64>,
    boundary: Vec<bool>,
}

impl WeightedGraph {
    /// Builds a graph on `n` nodes from undirected edges.
    ///
    /// Each pair may appear in either orientation; repeated pairs keep the
    /// larger weight. Density defaults to 1 and the boundary to empty.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(Error::InvalidParameter("graph too large".into()));
        }
        let mut directed: Vec<(u32, u32, f64)> = Vec::with_capacity(2 * edges.len());
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!("edge ({i}, {j}) references a node outside 0..{n}")));
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self-loop at node {i}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("edge ({i}, {j}) has non-positive weight {w}")));
            }
            directed.push((i as u32, j as u32, w));
            directed.push((j as u32, i as u32, w));
        }
        directed.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(b.2.total_cmp(&a.2)));
        directed.dedup_by(|later, kept| later.0 == kept.0 && later.1 == kept.1);

        let mut offsets = vec![0usize; n + 1];
        for &(i, _, _) in &directed {
            offsets[i as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Ok(Self {
            positions: None,
            offsets,
            targets: directed.iter().map(|e| e.1).collect(),
            weights: directed.iter().map(|e| e.2).collect(),
            density: vec![1.0; n],
            boundary: vec![false; n],
        })
    }

    pub fn with_positions(mut self, positions: PointCloud) -> Result<Self> {
        if positions.len() != self.len() {
            return Err(Error::InvalidParameter(format!("{} positions for {} nodes", positions.len(), self.len())));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    pub fn positions(&self) -> Option<&PointCloud> {
        self.positions.as_ref()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.targets[r.clone()].iter().map(|&j| j as usize).zip(self.weights[r].iter().copied())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Each undirected edge once, as `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.len()).flat_map(move |i| self.neighbors(i).filter(move |&(j, _)| i < j).map(move |(j, w)| (i, j, w)))
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Nodes without any incident edge.
    pub fn isolated_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.degree(i) == 0).collect()
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn set_density(&mut self, rho: Vec<f64>) -> Result<()> {
        if rho.len() != self.len() {
            return Err(Error::InvalidParameter(format!("{} densities for {} nodes", rho.len(), self.len())));
        }
        self.density = rho;
        Ok(())
    }

    pub fn boundary(&self) -> &[bool] {
        &self.boundary
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.boundary[i]).collect()
    }

    pub fn set_boundary_mask(&mut self, mask: Vec<bool>) -> Result<()> {
        if mask.len() != self.len() {
            return Err(Error::InvalidParameter(format!("boundary mask of {} for {} nodes", mask.len(), self.len())));
        }
        self.boundary = mask;
        Ok(())
    }

    pub fn set_boundary(&mut self, nodes: &[usize]) -> Result<()> {
        let mut mask = vec![false; self.len()];
        for &i in nodes {
            if i >= self.len() {
                return Err(Error::InvalidParameter(format!("boundary node {i} out of range")));
            }
            mask[i] = true;
        }
        self.boundary = mask;
        Ok(())
    }

    /// Marks every node whose position satisfies `pred`.
    pub fn set_boundary_where<F: Fn(&[f64]) -> bool>(&mut self, pred: F) -> Result<usize> {
        let pts = self.positions.as_ref().ok_or_else(|| Error::InvalidParameter("graph has no positions".into()))?;
        let mask: Vec<bool> = pts.iter().map(&pred).collect();
        let count = mask.iter().filter(|&&b| b).count();
        self.boundary = mask;
        Ok(count)
    }

    pub(crate) fn check_solvable(&self) -> Result<()> {
        if !self.boundary.iter().any(|&b| b) {
            return Err(Error::EmptyBoundary);
        }
        if self.density.iter().any(|r| r.is_nan()) {
            return Err(Error::NaN("node density"));
        }
        if let Some(i) = self.density.iter().position(|&r| r < 0.0) {
            return Err(Error::InvalidParameter(format!("negative density {} at node {i}", self.density[i])));
        }
        Ok(())
    }
}

/// Per-node depth; unreachable nodes hold +∞.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDepth {
    pub values: Vec<f64>,
    pub reached: Vec<bool>,
}

impl GraphDepth {
    pub(crate) fn from_values(values: Vec<f64>) -> Self {
        let reached = values.iter().map(|v| v.is_finite()).collect();
        Self { values, reached }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest finite depth, or 0 if nothing was reached.
    pub fn max(&self) -> f64 {
        self.values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max)
    }

    /// Index of the largest finite depth; ties go to the lowest index.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if v.is_finite() && best.is_none_or(|b| v > self.values[b]) {
                best = Some(i);
            }
        }
        best
    }
}

/// Graph local maxima with plateaus merged, using [`MAXIMA_MARGIN`].
/// Boundary nodes are never reported: modes are interior, and an isolated
/// boundary node would otherwise count as its own maximum.
pub fn local_maxima(depth: &GraphDepth, graph: &WeightedGraph) -> Vec<usize> {
    local_maxima_with_margin(depth, graph, MAXIMA_MARGIN)
}

pub fn local_maxima_with_margin(depth: &GraphDepth, graph: &WeightedGraph, margin: f64) -> Vec<usize> {
    let mut maxima = plateau_maxima(&depth.values, margin, |i, out| {
        out.clear();
        out.extend(graph.neighbors(i).map(|(j, _)| j));
    });
    maxima.retain(|&i| !graph.boundary()[i]);
    maxima
}
