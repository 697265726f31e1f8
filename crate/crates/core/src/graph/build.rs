use std::collections::HashMap;

use super::WeightedGraph;
use crate::density::{sphere_area, unit_ball_volume};
use crate::error::{Error, Result};
use crate::points::{dist2, PointCloud};
use crate::quadrature::integrate;

/// Radial kernel profile η, supported on [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Indicator,
    /// exp(−4t²) truncated at t = 1.
    Gaussian4,
}

impl Kernel {
    pub fn eval(self, t: f64) -> f64 {
        if !(0.0..1.0).contains(&t) {
            return 0.0;
        }
        match self {
            Kernel::Indicator => 1.0,
            Kernel::Gaussian4 => (-4.0 * t * t).exp(),
        }
    }
}

/// Constant σ with (σ/2)∫ η(|x|) x₁² dx = 1 over ℝ^d.
pub fn sigma_normalization(eta: Kernel, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParameter("kernel dimension must be positive".into()));
    }
    let second_moment = match eta {
        // ∫_{B₁} x₁² dx = V_d / (d + 2)
        Kernel::Indicator => unit_ball_volume(d) / (d + 2) as f64,
        // By symmetry ∫ η x₁² = (1/d)∫ η |x|² = (S_{d−1}/d)∫₀¹ η(r) r^{d+1} dr.
        Kernel::Gaussian4 => {
            let radial = integrate(|r| eta.eval(r) * r.powi(d as i32 + 1), 0.0, 1.0, 1e-14);
            sphere_area(d) / d as f64 * radial
        }
    };
    if !(second_moment.is_finite() && second_moment > 0.0) {
        return Err(Error::Degenerate("kernel second moment is not finite and positive".into()));
    }
    Ok(2.0 / second_moment)
}

/// Kernel shape, bandwidth and its normalization constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub eta: Kernel,
    pub h: f64,
    pub sigma: f64,
}

impl KernelSpec {
    pub fn new(eta: Kernel, h: f64, d: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")));
        }
        Ok(Self { eta, h, sigma: sigma_normalization(eta, d)? })
    }
}

/// Weights wᵢⱼ = σ n⁻¹ h⁻ᵈ η(|xᵢ − xⱼ|/h) on every pair inside the kernel support.
///
/// Isolated nodes are allowed; see [`WeightedGraph::isolated_nodes`].
pub fn build_kernel_graph(points: &PointCloud, kernel: &KernelSpec, n: usize) -> Result<WeightedGraph> {
    let d = points.dim();
    if d == 0 || n == 0 {
        return Err(Error::InvalidParameter("kernel graph needs points and a positive count".into()));
    }
    let h = kernel.h;
    let scale = kernel.sigma / (n as f64 * h.powi(d as i32));
    let mut edges = Vec::new();
    let mut add = |i: usize, j: usize| {
        let t = dist2(points.point(i), points.point(j)).sqrt() / h;
        let eta = kernel.eta.eval(t);
        if eta > 0.0 {
            edges.push((i, j, scale * eta));
        }
    };
    if d <= 3 {
        // Bucket points into cells of side h; neighbors lie in adjacent cells.
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let key = |p: &[f64]| p.iter().map(|x| (x / h).floor() as i64).collect::<Vec<_>>();
        for (i, p) in points.iter().enumerate() {
            cells.entry(key(p)).or_default().push(i);
        }
        let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
            .map(|code| (0..d).map(|a| (code / 3usize.pow(a as u32) % 3) as i64 - 1).collect())
            .collect();
        let mut probe = vec![0i64; d];
        for (i, p) in points.iter().enumerate() {
            let k = key(p);
            for off in &offsets {
                for a in 0..d {
                    probe[a] = k[a] + off[a];
                }
                if let Some(bucket) = cells.get(&probe) {
                    for &j in bucket {
                        if j > i {
                            add(i, j);
                        }
                    }
                }
            }
        }
    } else {
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                add(i, j);
            }
        }
    }
    WeightedGraph::from_edges(points.len(), &edges)?.with_positions(points.clone())
}

/// Edge weights for the k-nearest-neighbor graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnnWeight {
    /// exp(−4|xᵢ − xⱼ|² / d_k(xᵢ)²), measured from the source node.
    MnistExp,
    Unit,
}

/// Neighbors of one node with its k-th neighbor distance.
type KnnList = (Vec<(usize, f64)>, f64);

/// Directed k-NN lists: for each node its k nearest others (ties by index)
/// and its k-th neighbor distance.
fn knn_lists(points: &PointCloud, k: usize) -> Result<Vec<KnnList>> {
    let n = points.len();
    if k == 0 || n <= k {
        return Err(Error::InvalidParameter(format!("k-NN needs n > k ≥ 1, got n = {n}, k = {k}")));
    }
    let solve = |i: usize| -> (Vec<(usize, f64)>, f64) {
        let p = points.point(i);
        let mut cand: Vec<(f64, usize)> = (0..n).filter(|&j| j != i).map(|j| (dist2(p, points.point(j)), j)).collect();
        let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        cand.select_nth_unstable_by(k - 1, by);
        cand.truncate(k);
        cand.sort_unstable_by(by);
        let dk = cand[k - 1].0.sqrt();
        (cand.into_iter().map(|(d2, j)| (j, d2)).collect(), dk)
    };
    let threads = std::thread::available_parallelism().map_or(1, |t| t.get()).min(n.div_ceil(256)).max(1);
    let chunk = n.div_ceil(threads);
    let mut out = Vec::with_capacity(n);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| s.spawn(move || (t * chunk..((t + 1) * chunk).min(n)).map(solve).collect::<Vec<_>>()))
            .collect();
        for hnd in handles {
            out.extend(hnd.join().expect("k-NN worker panicked"));
        }
    });
    if let Some(i) = out.iter().position(|(_, dk)| *dk == 0.0) {
        return Err(Error::Degenerate(format!("node {i} has {k} duplicate neighbors, so d_k = 0")));
    }
    Ok(out)
}

/// Distance from each point to its k-th nearest neighbor.
pub fn kth_neighbor_distances(points: &PointCloud, k: usize) -> Result<Vec<f64>> {
    Ok(knn_lists(points, k)?.into_iter().map(|(_, dk)| dk).collect())
}

/// k-NN graph symmetrized by edge union; a pair found from both sides keeps
/// the larger of its two directed weights.
pub fn build_knn_graph(points: &PointCloud, k: usize, rule: KnnWeight) -> Result<WeightedGraph> {
    let lists = knn_lists(points, k)?;
    let mut edges = Vec::with_capacity(points.len() * k);
    for (i, (nbrs, dk)) in lists.iter().enumerate() {
        for &(j, d2) in nbrs {
            let w = match rule {
                KnnWeight::MnistExp => (-4.0 * d2 / (dk * dk)).exp(),
                KnnWeight::Unit => 1.0,
            };
            // Underflow at extreme ratios would make the weight zero; keep the edge.
            edges.push((i, j, w.max(f64::MIN_POSITIVE)));
        }
    }
    WeightedGraph::from_edges(points.len(), &edges)?.with_positions(points.clone())
}
