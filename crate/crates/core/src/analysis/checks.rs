use super::{PropertyReport, WarpMap};
use crate::density::{DensityModel, GaussianMixture, GridDensity, PhiSpec};
use crate::error::{Error, Result};
use crate::graph::GraphDepth;
use crate::grid::{solve_depth, BoundaryCondition, GridSpec};
use crate::points::PointCloud;

/// Density of the pushforward Φ#ρ sampled on `grid`:
/// ρ̃(y) = ρ(Φ⁻¹(y)) / det DΦ(Φ⁻¹(y)).
pub fn pushforward_density(model: &DensityModel, warp: &WarpMap, grid: &GridSpec) -> Result<DensityModel> {
    if model.dim() != grid.dim() || warp.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: model.dim() });
    }
    let mut bad = None;
    let values = (0..grid.len())
        .map(|i| {
            let x = warp.inverse(&grid.position(i));
            let det = warp.jacobian_det(&x);
            if !(det > 0.0) {
                bad = Some(det);
            }
            model.eval(&x).map(|r| r / det)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(det) = bad {
        return Err(Error::InvalidParameter(format!("warp is not invertible: Jacobian determinant {det}")));
    }
    let d = grid.dim();
    Ok(DensityModel::Grid(GridDensity::new(
        grid.dims().to_vec(),
        grid.origin().to_vec(),
        vec![grid.spacing(); d],
        values,
    )?))
}

/// Largest violation of (1 − ε)D ≤ D̃ ≤ (1 + ε)D over paired depths.
fn sandwich_violation(pairs: impl Iterator<Item = (f64, f64)>, eps: f64) -> f64 {
    pairs.map(|(d, dt)| (dt - (1.0 + eps) * d).max((1.0 - eps) * d - dt).max(0.0)).fold(0.0, f64::max)
}

/// Grid check of (1 − ε)D(x, ρ) ≤ D(Φ(x), Φ#ρ) ≤ (1 + ε)D(x, ρ) at `probes`,
/// with slack 3h. The warped density is built by change of variables on the
/// same grid, so no sampling noise enters.
pub fn isometric_robustness_check_grid(
    model: &DensityModel,
    warp: &WarpMap,
    phi: PhiSpec,
    grid: &GridSpec,
    bc: &BoundaryCondition,
    probes: &[Vec<f64>],
) -> Result<PropertyReport> {
    let before = solve_depth(model, phi, grid, bc)?;
    let warped = pushforward_density(model, warp, grid)?;
    let after = solve_depth(&warped, phi, grid, bc)?;
    let mut pairs = Vec::with_capacity(probes.len());
    for x in probes {
        pairs.push((before.depth_at(x)?, after.depth_at(&warp.apply(x))?));
    }
    let eps = warp.epsilon();
    let margin = sandwich_violation(pairs.into_iter(), eps);
    Ok(PropertyReport::new(
        "sandwich",
        margin,
        3.0 * grid.spacing(),
        format!("grid, epsilon = {eps}, {} probes, h = {}", probes.len(), grid.spacing()),
    ))
}

/// Cloud analogue of the sandwich: warps the sample itself and compares the
/// depths of corresponding nodes. This empirical variant goes beyond the
/// continuum statement, which concerns densities.
pub fn isometric_robustness_check_cloud<F>(
    points: &PointCloud,
    warp: &WarpMap,
    depth: F,
    slack: f64,
) -> Result<PropertyReport>
where
    F: Fn(&PointCloud) -> Result<GraphDepth>,
{
    let before = depth(points)?;
    let after = depth(&warp.apply_cloud(points))?;
    if before.reached != after.reached {
        return Err(Error::Degenerate("warp changed which nodes reach the boundary".into()));
    }
    let pairs = before.values.iter().zip(&after.values).filter(|(a, _)| a.is_finite()).map(|(&a, &b)| (a, b));
    let eps = warp.epsilon();
    Ok(PropertyReport::new(
        "sandwich",
        sandwich_violation(pairs, eps),
        slack,
        format!("empirical variant, epsilon = {eps}, {} nodes", points.len()),
    ))
}

/// A carved density and the mass the carving removed.
#[derive(Debug, Clone)]
pub struct Carved {
    pub density: GridDensity,
    pub removed_mass: f64,
}

fn segment_distance(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(p, q)| q - p).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 > 0.0 {
        (x.iter().zip(a).zip(&ab).map(|((xi, ai), d)| (xi - ai) * d).sum::<f64>() / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    x.iter().zip(a).zip(&ab).map(|((xi, ai), d)| (xi - ai - t * d).powi(2)).sum::<f64>().sqrt()
}

/// Sets the density to `floor` on nodes strictly within `width / 2` of the
/// polyline `path`.
pub fn carve_channel(density: &GridDensity, path: &[Vec<f64>], width: f64, floor: f64) -> Result<Carved> {
    let d = density.dims().len();
    if path.is_empty() || path.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidParameter("channel path needs vertices of the density's dimension".into()));
    }
    if !(width >= 0.0 && floor >= 0.0) {
        return Err(Error::InvalidParameter("channel width and floor must be nonnegative".into()));
    }
    let half = width / 2.0;
    let cell: f64 = density.spacing().iter().product();
    let mut out = density.clone();
    let mut removed = 0.0;
    let segments: Vec<(&[f64], &[f64])> = if path.len() == 1 {
        vec![(&path[0], &path[0])]
    } else {
        path.windows(2).map(|w| (w[0].as_slice(), w[1].as_slice())).collect()
    };
    for i in 0..out.values().len() {
        let x = density.node_position(i);
        if segments.iter().any(|(a, b)| segment_distance(&x, a, b) < half) {
            let v = &mut out.values_mut()[i];
            removed += (*v - floor) * cell;
            *v = floor;
        }
    }
    Ok(Carved { density: out, removed_mass: removed })
}

/// ℓ = diam(Ω)·C/(2c).
pub fn lipschitz_constant(diameter: f64, c: f64, big_c: f64) -> f64 {
    diameter * big_c / (2.0 * c)
}

/// Checks sup|u₁ − u₂| ≤ ℓ‖ρ₁ − ρ₂‖∞ + 3h for unnormalized depths on the
/// grid box with zero boundary data. Both densities must lie in [c, C] at
/// every node.
pub fn stability_check(
    model1: &DensityModel,
    model2: &DensityModel,
    grid: &GridSpec,
    c: f64,
    big_c: f64,
) -> Result<PropertyReport> {
    if !(c > 0.0 && big_c >= c) {
        return Err(Error::InvalidParameter("need 0 < c ≤ C".into()));
    }
    let mut sup = 0.0f64;
    for i in 0..grid.len() {
        let x = grid.position(i);
        let (a, b) = (model1.eval(&x)?, model2.eval(&x)?);
        for r in [a, b] {
            if r < c - 1e-9 || r > big_c + 1e-9 {
                return Err(Error::InvalidParameter(format!("density {r} outside [{c}, {big_c}] at {x:?}")));
            }
        }
        sup = sup.max((a - b).abs());
    }
    let phi = PhiSpec::unnormalized();
    let u1 = solve_depth(model1, phi, grid, &BoundaryCondition::ZeroOnBoxEdge)?;
    let u2 = solve_depth(model2, phi, grid, &BoundaryCondition::ZeroOnBoxEdge)?;
    let diff = u1.values().iter().zip(u2.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let diam = grid.origin().iter().zip(grid.upper()).map(|(l, u)| (u - l).powi(2)).sum::<f64>().sqrt();
    let ell = lipschitz_constant(diam, c, big_c);
    Ok(PropertyReport::new(
        "stability",
        diff,
        ell * sup + 3.0 * grid.spacing(),
        format!("l = {ell}, sup |rho1 - rho2| = {sup}"),
    ))
}

/// True iff every pair of component means is more than 4σ apart, for a
/// mixture with common covariance σ²I.
pub fn mode_separation_predicate(mixture: &GaussianMixture) -> Result<bool> {
    let sigma = mixture
        .common_isotropic_sigma()
        .ok_or_else(|| Error::InvalidModel("mode separation needs a common isotropic covariance".into()))?;
    let means = mixture.means();
    for i in 0..means.len() {
        for j in i + 1..means.len() {
            let d: f64 = means[i].iter().zip(&means[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if d <= 4.0 * sigma {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
