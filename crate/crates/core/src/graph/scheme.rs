use std::collections::BinaryHeap;

use super::{GraphDepth, WeightedGraph};
use crate::error::{Error, Result};
use crate::heap::MinEntry;

const SWEEPS: usize = 5;
const SWEEP_TOL: f64 = 1e-12;

/// Solves Σⱼ cⱼ max(0, u − uⱼ)² = ρ² for u, given `(uⱼ, cⱼ)` pairs with
/// cⱼ > 0. Non-finite uⱼ are ignored; `None` if no uⱼ is finite.
///
/// The active set is a prefix of the neighbors sorted by value, so each
/// prefix is tried as a quadratic; bisection takes over if rounding leaves
/// no consistent prefix.
pub fn scheme_update(nbrs: &mut [(f64, f64)], rho: f64) -> Option<f64> {
    nbrs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let m = nbrs.iter().take_while(|p| p.0.is_finite()).count();
    if m == 0 {
        return None;
    }
    let r2 = rho * rho;
    let base = nbrs[0].0;
    let (mut s0, mut s1, mut s2) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..m {
        let (v, c) = nbrs[k];
        let b = v - base;
        s0 += c;
        s1 += c * b;
        s2 += c * b * b;
        let disc = s1 * s1 - s0 * (s2 - r2);
        if disc < 0.0 {
            break;
        }
        let t = (s1 + disc.sqrt()) / s0;
        if t + 1e-15 * t.abs().max(1.0) >= b && (k + 1 == m || base + t <= nbrs[k + 1].0) {
            return Some(base + t);
        }
    }
    Some(bisect(&nbrs[..m], r2))
}

fn residual(nbrs: &[(f64, f64)], u: f64, r2: f64) -> f64 {
    nbrs.iter().map(|&(v, c)| c * (u - v).max(0.0).powi(2)).sum::<f64>() - r2
}

fn bisect(nbrs: &[(f64, f64)], r2: f64) -> f64 {
    let (v0, c0) = nbrs[0];
    let mut lo = v0;
    let mut hi = v0 + (r2 / c0).sqrt();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(nbrs, mid, r2) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) * 1e-3 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Point-cloud difference scheme ρᵢ² = Σⱼ h⁻² wᵢⱼ max(0, uᵢ − uⱼ)².
///
/// Nodes are accepted in fast-marching order; each tentative value is kept
/// current with running sums over the accepted neighbors, so an acceptance
/// costs O(1) per incident edge. A few Gauss–Seidel sweeps over the full
/// neighborhoods then absorb any ordering defects, leaving every node's
/// equation satisfied against the final neighbor values.
pub fn pointcloud_eikonal(graph: &WeightedGraph, h: f64) -> Result<GraphDepth> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
    }
    graph.check_solvable()?;
    let n = graph.len();
    let rho = graph.density();
    let inv_h2 = 1.0 / (h * h);
    let boundary = graph.boundary();

    let mut u = vec![f64::INFINITY; n];
    let mut accepted = vec![false; n];
    // Running sums of cⱼ, cⱼbⱼ, cⱼbⱼ² with bⱼ = uⱼ − base over accepted neighbors.
    let mut base = vec![f64::NAN; n];
    let mut sums = vec![[0.0f64; 3]; n];
    let mut heap = BinaryHeap::new();
    for i in 0..n {
        if boundary[i] {
            u[i] = 0.0;
            heap.push(MinEntry { value: 0.0, node: i });
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut scratch = Vec::new();
    while let Some(MinEntry { value, node }) = heap.pop() {
        if accepted[node] || value > u[node] {
            continue;
        }
        accepted[node] = true;
        order.push(node);
        for (j, w) in graph.neighbors(node) {
            if accepted[j] || boundary[j] {
                continue;
            }
            let c = w * inv_h2;
            if base[j].is_nan() {
                base[j] = value;
            }
            let b = value - base[j];
            let s = &mut sums[j];
            s[0] += c;
            s[1] += c * b;
            s[2] += c * b * b;
            let r2 = rho[j] * rho[j];
            let disc = s[1] * s[1] - s[0] * (s[2] - r2);
            let mut cand = if disc >= 0.0 { base[j] + (s[1] + disc.sqrt()) / s[0] } else { f64::NAN };
            if !(cand >= value) {
                // The newest neighbor should not participate: recompute from scratch.
                scratch.clear();
                scratch.extend(graph.neighbors(j).filter(|&(k, _)| accepted[k]).map(|(k, w)| (u[k], w * inv_h2)));
                cand = scheme_update(&mut scratch, rho[j]).unwrap_or(f64::INFINITY);
            }
            if cand < u[j] {
                u[j] = cand;
                heap.push(MinEntry { value: cand, node: j });
            }
        }
    }

    for _ in 0..SWEEPS {
        let mut change = 0.0f64;
        for &i in &order {
            if boundary[i] {
                continue;
            }
            scratch.clear();
            scratch.extend(graph.neighbors(i).map(|(k, w)| (u[k], w * inv_h2)));
            if let Some(v) = scheme_update(&mut scratch, rho[i]) {
                change = change.max((v - u[i]).abs());
                u[i] = v;
            }
        }
        if change < SWEEP_TOL {
            break;
        }
    }
    Ok(GraphDepth::from_values(u))
}

/// Largest |g(uᵢ) − ρᵢ²| / max(1, ρᵢ²) over reached interior nodes.
pub fn scheme_residual(graph: &WeightedGraph, h: f64, depth: &GraphDepth) -> f64 {
    let inv_h2 = 1.0 / (h * h);
    let rho = graph.density();
    (0..graph.len())
        .filter(|&i| !graph.boundary()[i] && depth.reached[i])
        .map(|i| {
            let ui = depth.values[i];
            let g: f64 = graph
                .neighbors(i)
                .filter(|&(j, _)| depth.reached[j])
                .map(|(j, w)| w * inv_h2 * (ui - depth.values[j]).max(0.0).powi(2))
                .sum();
            (g - rho[i] * rho[i]).abs() / (rho[i] * rho[i]).max(1.0)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_examples() {
        assert_eq!(scheme_update(&mut [(0.0, 1.0)], 1.0), Some(1.0));
        let u = scheme_update(&mut [(0.0, 1.0), (0.0, 1.0)], 1.0).unwrap();
        assert!((u - 0.5f64.sqrt()).abs() < 1e-15);
        let u = scheme_update(&mut [(0.5, 1.0), (0.0, 1.0)], 1.0).unwrap();
        assert!((u - (1.0 + 7f64.sqrt()) / 4.0).abs() < 1e-15);
        assert_eq!(scheme_update(&mut [(f64::INFINITY, 1.0)], 1.0), None);
    }

    #[test]
    fn update_excludes_far_neighbors() {
        let u = scheme_update(&mut [(0.0, 4.0), (3.0, 1.0)], 1.0).unwrap();
        assert!((u - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bisection_solves_the_same_equation() {
        let nbrs = [(0.0, 1.0), (0.3, 2.0), (0.35, 0.5)];
        let u = bisect(&nbrs, 0.49);
        assert!(residual(&nbrs, u, 0.49).abs() < 1e-12);
        let mut copy = nbrs;
        assert!((scheme_update(&mut copy, 0.7).unwrap() - u).abs() < 1e-12);
    }

    #[test]
    fn chain_graph_is_exact() {
        // Unit weights and h = 1 on a path reduce the scheme to u_{i+1} = u_i + ρ.
        let edges: Vec<_> = (0..9).map(|i| (i, i + 1, 1.0)).collect();
        let mut g = WeightedGraph::from_edges(10, &edges).unwrap();
        g.set_density(vec![0.5; 10]).unwrap();
        g.set_boundary(&[0]).unwrap();
        let d = pointcloud_eikonal(&g, 1.0).unwrap();
        for (i, v) in d.values.iter().enumerate() {
            assert!((v - 0.5 * i as f64).abs() < 1e-14);
        }
        assert!(scheme_residual(&g, 1.0, &d) < 1e-12);
    }

    #[test]
    fn random_cloud_meets_residual_contract() {
        use crate::graph::{build_kernel_graph, Kernel, KernelSpec};
        let pts =
            crate::density::DensityModel::uniform_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap().sample(600, 11).unwrap();
        let h = 0.2;
        let spec = KernelSpec::new(Kernel::Gaussian4, h, 2).unwrap();
        let mut g = build_kernel_graph(&pts, &spec, 600).unwrap();
        g.set_boundary_where(|p| p.iter().any(|&x| x < h || x > 1.0 - h)).unwrap();
        let d = pointcloud_eikonal(&g, h).unwrap();
        assert!(d.reached.iter().all(|&r| r));
        assert!(scheme_residual(&g, h, &d) <= 1e-9);
    }
}
