use std::collections::BinaryHeap;

use super::{BoundaryCondition, DepthField, GridSpec};
use crate::error::{Error, Result};
use crate::heap::MinEntry as Entry;

/// Godunov upwind update for |∇u| = f on a grid of spacing `h`.
///
/// `neighbor_mins[a]` is the smallest accepted neighbor value along axis
/// `a` (`None` or `+∞` when that axis has none). Returns the root `u` of
/// Σ max(0, u − aᵢ)² = (h f)²; only axes with aᵢ < u contribute.
pub fn local_update(neighbor_mins: &[Option<f64>], f: f64, h: f64) -> Result<f64> {
    let mut a = [f64::INFINITY; 8];
    let mut buf = Vec::new();
    let slots: &mut [f64] = if neighbor_mins.len() <= a.len() {
        &mut a[..neighbor_mins.len()]
    } else {
        buf.resize(neighbor_mins.len(), f64::INFINITY);
        &mut buf
    };
    for (s, v) in slots.iter_mut().zip(neighbor_mins) {
        *s = v.unwrap_or(f64::INFINITY);
    }
    if f.is_nan() || slots.iter().any(|v| v.is_nan()) {
        return Err(Error::NaN("local update input"));
    }
    solve_upwind(slots, f, h).ok_or(Error::NoFiniteNeighbor)
}

/// Sorts `a` in place and solves the upwind quadratic; `None` when no
/// entry is finite.
pub(crate) fn solve_upwind(a: &mut [f64], f: f64, h: f64) -> Option<f64> {
    a.sort_unstable_by(|x, y| x.total_cmp(y));
    let m = a.iter().take_while(|v| v.is_finite()).count();
    if m == 0 {
        return None;
    }
    let r2 = (h * f) * (h * f);
    let base = a[0];
    // Sums of offsets b_i = a_i − a_0 keep the quadratic well conditioned.
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    let mut u = base;
    for k in 1..=m {
        let b = a[k - 1] - base;
        s1 += b;
        s2 += b * b;
        let kf = k as f64;
        let disc = (kf * r2 - (kf * s2 - s1 * s1)).max(0.0);
        u = base + (s1 + disc.sqrt()) / kf;
        if k == m || u <= a[k] {
            break;
        }
    }
    Some(u)
}

pub(crate) fn boundary_values(grid: &GridSpec, bc: &BoundaryCondition) -> Result<Vec<(usize, f64)>> {
    let fixed: Vec<(usize, f64)> = match bc {
        BoundaryCondition::ZeroOnMask(mask) => {
            if mask.len() != grid.len() {
                return Err(Error::InvalidParameter("boundary mask length differs from grid size".into()));
            }
            mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| (i, 0.0)).collect()
        }
        BoundaryCondition::ZeroOnBoxEdge => {
            (0..grid.len()).filter(|&i| grid.on_box_edge(i)).map(|i| (i, 0.0)).collect()
        }
        BoundaryCondition::SupersolutionOnBoxEdge => {
            return Err(Error::Unsupported("supersolution boundary data needs a density model; use solve_depth".into()))
        }
        BoundaryCondition::Prescribed(v) => {
            if v.iter().any(|&(i, x)| i >= grid.len() || !(x >= 0.0)) {
                return Err(Error::InvalidParameter(
                    "prescribed boundary values must be nonnegative grid nodes".into(),
                ));
            }
            v.clone()
        }
    };
    if fixed.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    Ok(fixed)
}

/// Fast marching for |∇u| = speed on `grid` with Dirichlet data `bc`.
pub fn fast_marching(grid: &GridSpec, speed: &[f64], bc: &BoundaryCondition) -> Result<DepthField> {
    let fixed = boundary_values(grid, bc)?;
    let (values, _) = march(grid, speed, &fixed)?;
    DepthField::new(grid.clone(), values)
}

/// Like [`fast_marching`], also returning node indices in acceptance order.
pub fn fast_marching_trace(grid: &GridSpec, speed: &[f64], bc: &BoundaryCondition) -> Result<(DepthField, Vec<usize>)> {
    let fixed = boundary_values(grid, bc)?;
    let (values, order) = march(grid, speed, &fixed)?;
    Ok((DepthField::new(grid.clone(), values)?, order))
}

pub(crate) fn march(grid: &GridSpec, speed: &[f64], fixed: &[(usize, f64)]) -> Result<(Vec<f64>, Vec<usize>)> {
    let n = grid.len();
    if speed.len() != n {
        return Err(Error::InvalidParameter(format!("speed has {} entries for {n} nodes", speed.len())));
    }
    if speed.iter().any(|s| s.is_nan()) {
        return Err(Error::NaN("speed"));
    }
    if speed.iter().any(|s| *s < 0.0) {
        return Err(Error::InvalidParameter("speed must be nonnegative".into()));
    }
    if fixed.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let d = grid.dim();
    let dims = grid.dims();
    let strides = grid.strides();
    let h = grid.spacing();

    let mut u = vec![f64::INFINITY; n];
    let mut accepted = vec![false; n];
    let mut frozen = vec![false; n];
    let mut heap = BinaryHeap::with_capacity(n / 4 + fixed.len());
    for &(i, v) in fixed {
        if v < u[i] {
            u[i] = v;
        }
        frozen[i] = true;
    }
    for &(i, _) in fixed {
        heap.push(Entry { value: u[i], node: i });
    }

    let mut order = Vec::with_capacity(n);
    let mut coord = vec![0usize; d];
    let mut mins = vec![f64::INFINITY; d];
    while let Some(Entry { value, node }) = heap.pop() {
        if accepted[node] || value > u[node] {
            continue;
        }
        accepted[node] = true;
        order.push(node);

        decode(node, dims, &mut coord);
        for a in 0..d {
            for step in [-1isize, 1] {
                let c = coord[a] as isize + step;
                if c < 0 || c >= dims[a] as isize {
                    continue;
                }
                let nb = if step < 0 { node - strides[a] } else { node + strides[a] };
                if accepted[nb] || frozen[nb] {
                    continue;
                }
                let cand = update_node(nb, dims, &strides, &u, &accepted, speed[nb], h, &mut mins);
                if cand < u[nb] {
                    u[nb] = cand;
                    heap.push(Entry { value: cand, node: nb });
                }
            }
        }
    }
    // Nodes never reached keep +∞ only if the grid is disconnected from the
    // boundary, which cannot happen on a box grid.
    debug_assert!(u.iter().all(|v| v.is_finite()));
    Ok((u, order))
}

fn decode(idx: usize, dims: &[usize], out: &mut [usize]) {
    let mut rem = idx;
    for a in (0..dims.len()).rev() {
        out[a] = rem % dims[a];
        rem /= dims[a];
    }
}

#[allow(clippy::too_many_arguments)]
fn update_node(
    node: usize,
    dims: &[usize],
    strides: &[usize],
    u: &[f64],
    accepted: &[bool],
    f: f64,
    h: f64,
    mins: &mut [f64],
) -> f64 {
    let mut rem = node;
    for a in (0..dims.len()).rev() {
        let c = rem % dims[a];
        rem /= dims[a];
        let mut m = f64::INFINITY;
        if c > 0 {
            let j = node - strides[a];
            if accepted[j] {
                m = m.min(u[j]);
            }
        }
        if c + 1 < dims[a] {
            let j = node + strides[a];
            if accepted[j] {
                m = m.min(u[j]);
            }
        }
        mins[a] = m;
    }
    solve_upwind(mins, f, h).unwrap_or(f64::INFINITY)
}
