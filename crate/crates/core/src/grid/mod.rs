//! Regular-grid eikonal solver: monotone upwind updates ordered by fast
//! marching, plus interpolation, level sets and mode detection on the
//! resulting fields.

mod contour;
mod fmm;
mod solve;

pub use contour::{level_set, Polyline};
pub use fmm::{fast_marching, fast_marching_trace, local_update};
pub use solve::{node_speeds, solve_depth};

use crate::density::multilinear;
use crate::error::{Error, Result};
use crate::maxima::plateau_maxima;

/// Regular grid with uniform spacing. Nodes are stored row-major: the last
/// axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: f64,
}

impl GridSpec {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: f64) -> Result<Self> {
        if dims.is_empty() || dims.len() != origin.len() {
            return Err(Error::InvalidParameter("grid dims and origin must share a positive dimension".into()));
        }
        if dims.iter().any(|&n| n < 3) {
            return Err(Error::InvalidParameter("grid needs at least 3 nodes per axis".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid spacing must be positive, got {spacing}")));
        }
        Ok(Self { dims, origin, spacing })
    }

    /// Grid over `[lo, hi]` with `n` nodes along axis 0; the other axes use
    /// the same spacing and are rounded to the nearest node count.
    pub fn covering(lo: &[f64], hi: &[f64], n: usize) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || n < 3 {
            return Err(Error::InvalidParameter("bad grid covering request".into()));
        }
        let h = (hi[0] - lo[0]) / (n - 1) as f64;
        let dims = lo
            .iter()
            .zip(hi)
            .enumerate()
            .map(|(a, (l, u))| if a == 0 { n } else { (((u - l) / h).round() as usize + 1).max(3) })
            .collect();
        Self::new(dims, lo.to_vec(), h)
    }

    /// Grid with the given spacing whose extent covers `[lo, hi]`.
    pub fn with_spacing(lo: &[f64], hi: &[f64], h: f64) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidParameter("bad grid request".into()));
        }
        let dims = lo.iter().zip(hi).map(|(l, u)| (((u - l) / h - 1e-9).ceil() as usize + 1).max(3)).collect();
        Self::new(dims, lo.to_vec(), h)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn upper(&self) -> Vec<f64> {
        self.origin.iter().zip(&self.dims).map(|(o, n)| o + (n - 1) as f64 * self.spacing).collect()
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let d = self.dims.len();
        let mut s = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.dims[a + 1];
        }
        s
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.dims).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        let mut rem = idx;
        for a in (0..self.dims.len()).rev() {
            out[a] = rem % self.dims[a];
            rem /= self.dims[a];
        }
        out
    }

    pub fn position(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx).iter().zip(&self.origin).map(|(&i, o)| o + i as f64 * self.spacing).collect()
    }

    pub fn on_box_edge(&self, idx: usize) -> bool {
        self.multi_index(idx).iter().zip(&self.dims).any(|(&i, &n)| i == 0 || i + 1 == n)
    }

    /// All nodes in the 3^d − 1 neighborhood of `idx`.
    pub(crate) fn moore_neighbors(&self, idx: usize, out: &mut Vec<usize>) {
        out.clear();
        let d = self.dims.len();
        let m = self.multi_index(idx);
        let total = 3usize.pow(d as u32);
        'offsets: for code in 0..total {
            let mut c = code;
            let mut nb = 0usize;
            let mut is_self = true;
            for (&ma, &na) in m.iter().zip(&self.dims) {
                let off = (c % 3) as isize - 1;
                c /= 3;
                let v = ma as isize + off;
                if v < 0 || v >= na as isize {
                    continue 'offsets;
                }
                if off != 0 {
                    is_self = false;
                }
                nb = nb * na + v as usize;
            }
            if !is_self {
                out.push(nb);
            }
        }
    }
}

/// Dirichlet data for a grid solve.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    /// Nodes flagged `true` are fixed at zero.
    ZeroOnMask(Vec<bool>),
    /// Every node on the outer faces of the grid is fixed at zero.
    ZeroOnBoxEdge,
    /// Outer faces carry the axis-line supersolution of the density.
    /// Needs the density model, so only [`solve_depth`] accepts it.
    SupersolutionOnBoxEdge,
    /// Explicit `(node, value)` pairs.
    Prescribed(Vec<(usize, f64)>),
}

/// Depth values on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl DepthField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Multilinear interpolation of the field at `x`.
    pub fn depth_at(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.grid.dim() {
            return Err(Error::DimensionMismatch { expected: self.grid.dim(), got: x.len() });
        }
        let h = vec![self.grid.spacing; self.grid.dim()];
        multilinear(&self.grid.dims, &self.grid.origin, &h, &self.values, x).ok_or(Error::OutsideGrid)
    }

    /// Strict local maxima over the full 3^d − 1 neighborhood, with
    /// plateaus (values within `margin`) merged and reported once by their
    /// lowest node index.
    pub fn local_maxima(&self, margin: f64) -> Vec<usize> {
        let grid = &self.grid;
        plateau_maxima(&self.values, margin, |i, out| grid.moore_neighbors(i, out))
    }
}

/// Convenience wrapper for [`DepthField::depth_at`].
pub fn depth_at(field: &DepthField, x: &[f64]) -> Result<f64> {
    field.depth_at(x)
}
