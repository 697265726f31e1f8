//! Densities, the cost transform φ(s) = s^α, closed-form reference depths
//! and sampling.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::points::{norm, PointCloud};
use crate::quadrature::integrate;

/// Absolute tolerance used by every quadrature in this module.
pub const QUAD_TOL: f64 = 1e-10;

/// Default z-padding of the cylinder surface, `z ∈ [-pad, 1 + pad]`.
pub const CYLINDER_PAD: f64 = 0.05;

/// The monotone cost transform φ(s) = s^α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiSpec {
    alpha: f64,
}

impl PhiSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("phi exponent must be positive, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    /// φ(s) = s.
    pub fn unnormalized() -> Self {
        Self { alpha: 1.0 }
    }

    /// φ(s) = s^(1/d), the scale-invariant choice.
    pub fn normalized(dim: usize) -> Self {
        assert!(dim > 0);
        Self { alpha: 1.0 / dim as f64 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn apply(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if self.alpha == 1.0 {
            s
        } else {
            s.powf(self.alpha)
        }
    }
}

/// Convenience wrapper matching [`PhiSpec::apply`].
pub fn apply_phi(phi: PhiSpec, s: f64) -> f64 {
    phi.apply(s)
}

/// Where a density is positive.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Bounded(Region),
    AllSpace,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    CylinderSurface { z_lo: f64, z_hi: f64 },
}

/// Computational domain of a grid solve.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    BoundedBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Box truncation of an all-space support.
    TruncatedAllSpace {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
}

impl Domain {
    pub fn bounds(&self) -> (&[f64], &[f64]) {
        match self {
            Domain::BoundedBox { lo, hi } | Domain::TruncatedAllSpace { lo, hi } => (lo, hi),
        }
    }

    fn check(lo: &[f64], hi: &[f64]) -> Result<()> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidParameter("domain corners must share a positive dimension".into()));
        }
        if lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidParameter("domain requires lo < hi componentwise".into()));
        }
        Ok(())
    }

    pub fn bounded(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::check(&lo, &hi)?;
        Ok(Domain::BoundedBox { lo, hi })
    }

    pub fn truncated(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::check(&lo, &hi)?;
        Ok(Domain::TruncatedAllSpace { lo, hi })
    }
}

/// Finite mixture of Gaussians with precomputed factorizations.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covs: Vec<DMatrix<f64>>,
    chol: Vec<DMatrix<f64>>,
    precision: Vec<DMatrix<f64>>,
    norm_const: Vec<f64>,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, covs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || means.len() != k || covs.len() != k {
            return Err(Error::InvalidModel("mixture needs matching nonempty weights, means and covs".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidModel("mixture weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("mixture weights sum to {total}, not 1")));
        }
        let d = means[0].len();
        if d == 0 {
            return Err(Error::InvalidModel("zero-dimensional mixture".into()));
        }
        let mut mats = Vec::with_capacity(k);
        let mut chol = Vec::with_capacity(k);
        let mut precision = Vec::with_capacity(k);
        let mut norm_const = Vec::with_capacity(k);
        for (m, c) in means.iter().zip(&covs) {
            if m.len() != d || c.len() != d || c.iter().any(|r| r.len() != d) {
                return Err(Error::InvalidModel("inconsistent mixture dimensions".into()));
            }
            let mat = DMatrix::from_fn(d, d, |i, j| c[i][j]);
            for i in 0..d {
                for j in 0..i {
                    if (mat[(i, j)] - mat[(j, i)]).abs() > 1e-12 * (1.0 + mat[(i, j)].abs()) {
                        return Err(Error::InvalidModel("covariance is not symmetric".into()));
                    }
                }
            }
            let ch = mat
                .clone()
                .cholesky()
                .ok_or_else(|| Error::InvalidModel("covariance is not positive definite".into()))?;
            let l = ch.l();
            let det: f64 = l.diagonal().iter().map(|v| v * v).product();
            norm_const.push(((2.0 * PI).powi(d as i32) * det).sqrt().recip());
            precision.push(ch.inverse());
            chol.push(l);
            mats.push(mat);
        }
        Ok(Self { weights, means, covs: mats, chol, precision, norm_const })
    }

    /// Mixture of isotropic components `σ² I` with equal weights.
    pub fn isotropic(means: Vec<Vec<f64>>, sigma: f64) -> Result<Self> {
        let k = means.len();
        let d = means.first().map_or(0, |m| m.len());
        let cov: Vec<Vec<f64>> =
            (0..d).map(|i| (0..d).map(|j| if i == j { sigma * sigma } else { 0.0 }).collect()).collect();
        Self::new(vec![1.0 / k as f64; k], means, vec![cov; k])
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn covariance(&self, k: usize) -> &DMatrix<f64> {
        &self.covs[k]
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    /// Returns σ if every component has covariance σ² I for a common σ.
    pub fn common_isotropic_sigma(&self) -> Option<f64> {
        let d = self.dim();
        let s2 = self.covs[0][(0, 0)];
        for c in &self.covs {
            for i in 0..d {
                for j in 0..d {
                    let want = if i == j { s2 } else { 0.0 };
                    if (c[(i, j)] - want).abs() > 1e-12 * s2.max(1.0) {
                        return None;
                    }
                }
            }
        }
        Some(s2.sqrt())
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut total = 0.0;
        for k in 0..self.components() {
            let diff = DVector::from_fn(d, |i, _| x[i] - self.means[k][i]);
            let q = (diff.transpose() * &self.precision[k] * &diff)[(0, 0)];
            total += self.weights[k] * self.norm_const[k] * (-0.5 * q).exp();
        }
        total
    }

    /// Per-axis box `mean ± reach·sd` covering every component.
    pub fn bounding_box(&self, reach: f64) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for (m, c) in self.means.iter().zip(&self.covs) {
            for i in 0..d {
                let sd = c[(i, i)].sqrt();
                lo[i] = lo[i].min(m[i] - reach * sd);
                hi[i] = hi[i].max(m[i] + reach * sd);
            }
        }
        (lo, hi)
    }
}

/// The radially symmetric |x|^(-d) profile truncated at ε and 1, with
/// a constant core on |x| ≤ ε chosen to keep the density continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPowerLaw {
    epsilon: f64,
    dim: usize,
    delta: f64,
}

impl TruncatedPowerLaw {
    pub fn new(epsilon: f64, dim: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) || dim == 0 {
            return Err(Error::InvalidModel("power law needs epsilon in (0,1) and dim >= 1".into()));
        }
        // Continuity at |x| = ε: (1-δ)/(L S) ε^-d = δ/(V ε^d), L = -ln ε.
        let v = unit_ball_volume(dim);
        let s = sphere_area(dim);
        let l = -epsilon.ln();
        let delta = v / (v + l * s);
        Ok(Self { epsilon, dim, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Probability mass of the core |x| ≤ ε.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eval_radius(&self, r: f64) -> f64 {
        let d = self.dim as i32;
        if r <= self.epsilon {
            self.delta / (unit_ball_volume(self.dim) * self.epsilon.powi(d))
        } else if r < 1.0 {
            (1.0 - self.delta) / (-self.epsilon.ln() * sphere_area(self.dim)) * r.powi(-d)
        } else {
            0.0
        }
    }
}

/// Density sampled on a regular grid and extended by multilinear
/// interpolation; zero outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    values: Vec<f64>,
    probability: bool,
}

impl GridDensity {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let d = dims.len();
        if d == 0 || origin.len() != d || spacing.len() != d {
            return Err(Error::InvalidModel("grid density header dimensions disagree".into()));
        }
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::InvalidModel("grid density needs at least 2 nodes per axis".into()));
        }
        if spacing.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidModel("grid spacing must be positive".into()));
        }
        let n: usize = dims.iter().product();
        if values.len() != n {
            return Err(Error::InvalidModel(format!("grid payload has {} values, expected {n}", values.len())));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::NaN("grid density values"));
        }
        if values.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidModel("grid density values must be nonnegative".into()));
        }
        Ok(Self { dims, origin, spacing, values, probability: false })
    }

    /// Samples `f` at every node of the grid.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>, f: F) -> Result<Self> {
        let n: usize = dims.iter().product();
        let mut values = Vec::with_capacity(n);
        let mut x = vec![0.0; dims.len()];
        for idx in 0..n {
            let mut rem = idx;
            for a in (0..dims.len()).rev() {
                x[a] = origin[a] + (rem % dims[a]) as f64 * spacing[a];
                rem /= dims[a];
            }
            values.push(f(&x));
        }
        Self::new(dims, origin, spacing, values)
    }

    /// Marks the field as a probability density, checking that its Riemann
    /// sum is within 5% of one.
    pub fn into_probability(mut self) -> Result<Self> {
        let mass = self.mass();
        if (mass - 1.0).abs() > 0.05 {
            return Err(Error::InvalidModel(format!("grid density flagged as probability has mass {mass}")));
        }
        self.probability = true;
        Ok(self)
    }

    pub fn is_probability(&self) -> bool {
        self.probability
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Riemann sum Σ values · Π h.
    pub fn mass(&self) -> f64 {
        let cell: f64 = self.spacing.iter().product();
        self.values.iter().sum::<f64>() * cell
    }

    pub fn upper(&self) -> Vec<f64> {
        (0..self.dims.len()).map(|a| self.origin[a] + (self.dims[a] - 1) as f64 * self.spacing[a]).collect()
    }

    pub fn node_position(&self, idx: usize) -> Vec<f64> {
        let d = self.dims.len();
        let mut x = vec![0.0; d];
        let mut rem = idx;
        for a in (0..d).rev() {
            x[a] = self.origin[a] + (rem % self.dims[a]) as f64 * self.spacing[a];
            rem /= self.dims[a];
        }
        x
    }

    fn eval(&self, x: &[f64]) -> f64 {
        multilinear(&self.dims, &self.origin, &self.spacing, &self.values, x).unwrap_or(0.0)
    }
}

/// Multilinear interpolation of row-major nodal `values`; `None` outside.
pub(crate) fn multilinear(dims: &[usize], origin: &[f64], spacing: &[f64], values: &[f64], x: &[f64]) -> Option<f64> {
    let d = dims.len();
    let mut base = vec![0usize; d];
    let mut frac = vec![0.0; d];
    for a in 0..d {
        let t = (x[a] - origin[a]) / spacing[a];
        let last = (dims[a] - 1) as f64;
        // Tolerate rounding at the hull faces.
        if !(t >= -1e-9 && t <= last + 1e-9) {
            return None;
        }
        let t = t.clamp(0.0, last);
        let i = (t.floor() as usize).min(dims[a] - 2);
        base[a] = i;
        frac[a] = t - i as f64;
    }
    let mut total = 0.0;
    for corner in 0..(1usize << d) {
        let mut weight = 1.0;
        let mut idx = 0usize;
        for a in 0..d {
            let bit = (corner >> a) & 1;
            weight *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            idx = idx * dims[a] + base[a] + bit;
        }
        if weight != 0.0 {
            total += weight * values[idx];
        }
    }
    Some(total)
}

/// A nonnegative density ρ.
#[derive(Debug, Clone)]
pub enum DensityModel {
    GaussianMixture(GaussianMixture),
    UniformBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    UniformBall {
        center: Vec<f64>,
        radius: f64,
    },
    TruncatedPowerLaw(TruncatedPowerLaw),
    /// ρ(θ, z) = 1 − 0.9 sin²(π/2 + πz/2 + 3θ) on the unit cylinder
    /// `(cos θ, sin θ, z)`, `z ∈ [-pad, 1 + pad]`.
    CylinderSurface {
        pad: f64,
    },
    Grid(GridDensity),
}

impl DensityModel {
    pub fn uniform_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Domain::check(&lo, &hi)?;
        Ok(DensityModel::UniformBox { lo, hi })
    }

    pub fn uniform_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !(radius > 0.0) {
            return Err(Error::InvalidModel("ball needs a center and positive radius".into()));
        }
        Ok(DensityModel::UniformBall { center, radius })
    }

    pub fn standard_gaussian(dim: usize) -> Self {
        let cov: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        DensityModel::GaussianMixture(
            GaussianMixture::new(vec![1.0], vec![vec![0.0; dim]], vec![cov]).expect("identity covariance"),
        )
    }

    pub fn cylinder() -> Self {
        DensityModel::CylinderSurface { pad: CYLINDER_PAD }
    }

    pub fn dim(&self) -> usize {
        match self {
            DensityModel::GaussianMixture(g) => g.dim(),
            DensityModel::UniformBox { lo, .. } => lo.len(),
            DensityModel::UniformBall { center, .. } => center.len(),
            DensityModel::TruncatedPowerLaw(p) => p.dim,
            DensityModel::CylinderSurface { .. } => 3,
            DensityModel::Grid(g) => g.dims.len(),
        }
    }

    pub fn support(&self) -> Support {
        match self {
            DensityModel::GaussianMixture(_) => Support::AllSpace,
            DensityModel::UniformBox { lo, hi } => Support::Bounded(Region::Box { lo: lo.clone(), hi: hi.clone() }),
            DensityModel::UniformBall { center, radius } => {
                Support::Bounded(Region::Ball { center: center.clone(), radius: *radius })
            }
            DensityModel::TruncatedPowerLaw(p) => {
                Support::Bounded(Region::Ball { center: vec![0.0; p.dim], radius: 1.0 })
            }
            DensityModel::CylinderSurface { pad } => {
                Support::Bounded(Region::CylinderSurface { z_lo: -pad, z_hi: 1.0 + pad })
            }
            DensityModel::Grid(g) => Support::Bounded(Region::Box { lo: g.origin.clone(), hi: g.upper() }),
        }
    }

    /// Default computational domain: the support's bounding box, or for
    /// all-space mixtures the box of means ± 5 standard deviations.
    pub fn default_domain(&self) -> Result<Domain> {
        match self {
            DensityModel::GaussianMixture(g) => {
                let (lo, hi) = g.bounding_box(5.0);
                Domain::truncated(lo, hi)
            }
            DensityModel::UniformBox { lo, hi } => Domain::bounded(lo.clone(), hi.clone()),
            DensityModel::UniformBall { center, radius } => Domain::bounded(
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            DensityModel::TruncatedPowerLaw(p) => Domain::bounded(vec![-1.0; p.dim], vec![1.0; p.dim]),
            DensityModel::CylinderSurface { pad } => Domain::bounded(vec![-1.0, -1.0, -pad], vec![1.0, 1.0, 1.0 + pad]),
            DensityModel::Grid(g) => Domain::bounded(g.origin.clone(), g.upper()),
        }
    }

    /// Evaluates ρ(x) ≥ 0.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            DensityModel::GaussianMixture(g) => g.eval(x),
            DensityModel::UniformBox { lo, hi } => {
                if x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| v >= a && v <= b) {
                    1.0 / lo.iter().zip(hi).map(|(a, b)| b - a).product::<f64>()
                } else {
                    0.0
                }
            }
            DensityModel::UniformBall { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                if r2 <= radius * radius {
                    let d = center.len();
                    1.0 / (unit_ball_volume(d) * radius.powi(d as i32))
                } else {
                    0.0
                }
            }
            DensityModel::TruncatedPowerLaw(p) => p.eval_radius(norm(x)),
            DensityModel::CylinderSurface { pad } => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                if (r - 1.0).abs() > 1e-6 || x[2] < -pad || x[2] > 1.0 + pad {
                    0.0
                } else {
                    cylinder_density(x[1].atan2(x[0]), x[2])
                }
            }
            DensityModel::Grid(g) => g.eval(x),
        }
    }

    /// Axis-0 interval outside of which ρ(·, x') vanishes, for quadrature.
    fn axis0_extent(&self, rest: &[f64]) -> (f64, f64) {
        match self {
            DensityModel::GaussianMixture(_) | DensityModel::CylinderSurface { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            DensityModel::UniformBox { lo, hi } => (lo[0], hi[0]),
            DensityModel::UniformBall { center, radius } => {
                let off: f64 = rest.iter().zip(&center[1..]).map(|(a, b)| (a - b) * (a - b)).sum();
                let half = (radius * radius - off).max(0.0).sqrt();
                (center[0] - half, center[0] + half)
            }
            DensityModel::TruncatedPowerLaw(_) => {
                let off: f64 = rest.iter().map(|a| a * a).sum();
                let half = (1.0 - off).max(0.0).sqrt();
                (-half, half)
            }
            DensityModel::Grid(g) => (g.origin[0], g.upper()[0]),
        }
    }

    /// Draws `n` IID points, deterministically for a fixed seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<PointCloud> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.dim();
        let mut out = PointCloud::new(d);
        match self {
            DensityModel::GaussianMixture(g) => {
                for _ in 0..n {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut k = g.components() - 1;
                    for (i, w) in g.weights.iter().enumerate() {
                        acc += w;
                        if u < acc {
                            k = i;
                            break;
                        }
                    }
                    let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                    let y = &g.chol[k] * z;
                    let p: Vec<f64> = (0..d).map(|i| g.means[k][i] + y[i]).collect();
                    out.push(&p);
                }
            }
            DensityModel::UniformBox { lo, hi } => {
                for _ in 0..n {
                    let p: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| a + rng.random::<f64>() * (b - a)).collect();
                    out.push(&p);
                }
            }
            DensityModel::UniformBall { center, radius } => {
                for _ in 0..n {
                    let dir = random_direction(&mut rng, d);
                    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
                    let p: Vec<f64> = center.iter().zip(&dir).map(|(c, u)| c + r * u).collect();
                    out.push(&p);
                }
            }
            DensityModel::TruncatedPowerLaw(pl) => {
                for _ in 0..n {
                    let dir = random_direction(&mut rng, d);
                    let r = if rng.random::<f64>() < pl.delta {
                        pl.epsilon * rng.random::<f64>().powf(1.0 / d as f64)
                    } else {
                        // radial law ∝ 1/r on (ε, 1)
                        pl.epsilon.powf(1.0 - rng.random::<f64>())
                    };
                    let p: Vec<f64> = dir.iter().map(|u| r * u).collect();
                    out.push(&p);
                }
            }
            DensityModel::CylinderSurface { pad } => {
                while out.len() < n {
                    let theta = rng.random::<f64>() * 2.0 * PI;
                    let z = -pad + rng.random::<f64>() * (1.0 + 2.0 * pad);
                    if rng.random::<f64>() < cylinder_density(theta, z) {
                        out.push(&[theta.cos(), theta.sin(), z]);
                    }
                }
            }
            DensityModel::Grid(g) => {
                let max = g.values.iter().cloned().fold(0.0, f64::max);
                if max <= 0.0 {
                    return Err(Error::Unsupported("cannot sample an identically zero grid density".into()));
                }
                let hi = g.upper();
                // Bounded number of proposals protects against near-empty grids.
                let mut proposals = 0usize;
                while out.len() < n {
                    proposals += 1;
                    if proposals > 1000 * n.max(1000) {
                        return Err(Error::Unsupported("rejection sampling of grid density did not converge".into()));
                    }
                    let p: Vec<f64> =
                        g.origin.iter().zip(&hi).map(|(a, b)| a + rng.random::<f64>() * (b - a)).collect();
                    if rng.random::<f64>() * max < g.eval(&p) {
                        out.push(&p);
                    }
                }
            }
        }
        Ok(out)
    }
}

fn random_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

/// Intrinsic cylinder density ρ(θ, z) = 1 − 0.9 sin²(π/2 + πz/2 + 3θ).
pub fn cylinder_density(theta: f64, z: f64) -> f64 {
    let s = (0.5 * PI + 0.5 * PI * z + 3.0 * theta).sin();
    1.0 - 0.9 * s * s
}

/// Volume of the unit ball in ℝ^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    (h * PI.ln() - ln_gamma(h + 1.0)).exp()
}

/// Surface area of the unit sphere S^(d-1) ⊂ ℝ^d.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * (h * PI.ln() - ln_gamma(h)).exp()
}

/// Quantile depth min(∫_{-∞}^x ρ, ∫_x^∞ ρ) of a one-dimensional model.
pub fn quantile_depth_1d(model: &DensityModel, x: f64) -> Result<f64> {
    if model.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: model.dim() });
    }
    Ok(axis_tails(model, &[x], |s| s).0)
}

/// Returns (min, left, right) tail integrals of `phi∘ρ` along axis 0 through `x`.
fn axis_tails<F: Fn(f64) -> f64>(model: &DensityModel, x: &[f64], phi: F) -> (f64, f64, f64) {
    let rest = &x[1..];
    let (lo, hi) = model.axis0_extent(rest);
    let line = std::cell::RefCell::new(x.to_vec());
    let f = |t: f64| {
        let mut p = line.borrow_mut();
        p[0] = t;
        phi(model.eval_unchecked(&p))
    };
    let x0 = x[0];
    let left = if x0 <= lo { 0.0 } else { integrate(f, lo, x0.min(hi), QUAD_TOL) };
    let right = if x0 >= hi { 0.0 } else { integrate(f, x0.max(lo), hi, QUAD_TOL) };
    (left.min(right), left, right)
}

/// The explicit supersolution v(x) = min(∫_{-∞}^{x₁} ρ(ξ, x') dξ, ∫_{x₁}^∞ ρ(ξ, x') dξ),
/// an upper bound on the unnormalized depth.
pub fn supersolution_bound(model: &DensityModel, x: &[f64]) -> Result<f64> {
    supersolution_bound_phi(model, PhiSpec::unnormalized(), x)
}

/// Axis-line supersolution for a general φ: the same construction applied to φ(ρ).
pub fn supersolution_bound_phi(model: &DensityModel, phi: PhiSpec, x: &[f64]) -> Result<f64> {
    let d = model.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    Ok(axis_tails(model, x, |s| phi.apply(s)).0)
}

/// Radial depth ∫_r^∞ φ(G(t)^d) dt, with G the standard 1-D Gaussian density.
pub fn gaussian_radial_depth(r: f64, d: usize, phi: PhiSpec) -> f64 {
    let c = (2.0 * PI).sqrt().recip();
    let g = |t: f64| {
        let gd = (c.ln() * d as f64 - 0.5 * d as f64 * t * t).exp();
        phi.apply(gd)
    };
    integrate(g, r.max(0.0), f64::INFINITY, QUAD_TOL)
}

/// Depth (1 − |x|) φ(Γ(d/2 + 1)/π^(d/2)) of the uniform law on the unit ball.
pub fn ball_uniform_depth(x: &[f64], d: usize, phi: PhiSpec) -> Result<f64> {
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let r = norm(x);
    if r > 1.0 {
        return Err(Error::InvalidParameter(format!("|x| = {r} lies outside the unit ball")));
    }
    let h = d as f64 / 2.0;
    let density = (ln_gamma(h + 1.0) - h * PI.ln()).exp();
    Ok((1.0 - r) * phi.apply(density))
}

/// Lower bound (−ln ε)^(1−1/d) / S_{d−1}^(1/d) on the normalized depth at
/// the origin of [`TruncatedPowerLaw`].
pub fn powerlaw_depth_lower_bound(epsilon: f64, d: usize) -> f64 {
    let l = (-epsilon.ln()).max(0.0);
    let df = d as f64;
    l.powf(1.0 - 1.0 / df) / sphere_area(d).powf(1.0 / df)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::normal_tail;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn phi_examples() {
        close(PhiSpec::new(1.0).unwrap().apply(0.3), 0.3, 1e-15);
        close(PhiSpec::new(0.5).unwrap().apply(0.25), 0.5, 1e-15);
        assert_eq!(PhiSpec::new(2.0).unwrap().apply(0.0), 0.0);
        assert!(PhiSpec::new(0.0).is_err());
        assert!(PhiSpec::new(-1.0).is_err());
        close(PhiSpec::normalized(2).alpha(), 0.5, 0.0);
    }

    #[test]
    fn eval_examples() {
        let b = DensityModel::uniform_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        close(b.eval(&[0.5, 0.5]).unwrap(), 1.0, 1e-15);
        let g = DensityModel::standard_gaussian(2);
        close(g.eval(&[0.0, 0.0]).unwrap(), 1.0 / (2.0 * PI), 1e-14);
        let c = DensityModel::cylinder();
        close(c.eval(&[1.0, 0.0, 0.0]).unwrap(), 0.1, 1e-14);
        close(cylinder_density(0.0, 0.0), 0.1, 1e-14);
        assert!(matches!(b.eval(&[0.5]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn mixture_validation() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(GaussianMixture::new(vec![0.5, 0.4], vec![vec![0.0; 2]; 2], vec![id.clone(); 2]).is_err());
        let bad = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(GaussianMixture::new(vec![1.0], vec![vec![0.0; 2]], vec![bad]).is_err());
        let asym = vec![vec![1.0, 0.1], vec![0.0, 1.0]];
        assert!(GaussianMixture::new(vec![1.0], vec![vec![0.0; 2]], vec![asym]).is_err());
    }

    #[test]
    fn mixture_integrates_to_one() {
        let g =
            GaussianMixture::new(vec![0.3, 0.7], vec![vec![0.0], vec![2.0]], vec![vec![vec![0.5]], vec![vec![2.0]]])
                .unwrap();
        let m = DensityModel::GaussianMixture(g);
        let total = integrate(|t| m.eval(&[t]).unwrap(), f64::NEG_INFINITY, f64::INFINITY, 1e-12);
        close(total, 1.0, 1e-9);
    }

    #[test]
    fn grid_density_interpolates_and_vanishes_outside() {
        let g = GridDensity::new(vec![2], vec![0.0], vec![1.0], vec![0.2, 0.4]).unwrap();
        let m = DensityModel::Grid(g);
        close(m.eval(&[0.5]).unwrap(), 0.3, 1e-15);
        assert_eq!(m.eval(&[1.5]).unwrap(), 0.0);
        assert!(GridDensity::new(vec![2], vec![0.0], vec![1.0], vec![-0.2, 0.4]).is_err());
    }

    #[test]
    fn grid_probability_flag_checks_mass() {
        let g = GridDensity::from_fn(vec![11, 11], vec![0.0, 0.0], vec![0.1, 0.1], |_| 1.0).unwrap();
        // Riemann sum 121 · 0.01 = 1.21
        assert!(g.clone().into_probability().is_err());
        let g = GridDensity::from_fn(vec![11, 11], vec![0.0, 0.0], vec![0.1, 0.1], |_| 1.0 / 1.21).unwrap();
        assert!(g.into_probability().unwrap().is_probability());
    }

    #[test]
    fn sample_examples() {
        let b = DensityModel::uniform_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(b.sample(0, 1).unwrap().is_empty());
        let s = b.sample(10_000, 3).unwrap();
        let m = s.mean();
        let tol = 3.0 / (10_000f64).sqrt();
        close(m[0], 0.5, tol);
        close(m[1], 0.5, tol);
        assert_eq!(s, b.sample(10_000, 3).unwrap());

        let g = DensityModel::GaussianMixture(GaussianMixture::isotropic(vec![vec![1.0, -2.0]], 1.0).unwrap());
        let m = g.sample(10_000, 11).unwrap().mean();
        close(m[0], 1.0, 0.05);
        close(m[1], -2.0, 0.05);

        let c = DensityModel::cylinder();
        let s = c.sample(4225, 5).unwrap();
        assert_eq!(s.len(), 4225);
        for p in s.iter() {
            close(p[0] * p[0] + p[1] * p[1], 1.0, 1e-9);
            assert!(p[2] >= -CYLINDER_PAD && p[2] <= 1.0 + CYLINDER_PAD);
        }
    }

    #[test]
    fn uniform_histogram_cells() {
        let n = 100_000usize;
        let b = DensityModel::uniform_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let s = b.sample(n, 42).unwrap();
        let mut counts = [0usize; 16];
        for p in s.iter() {
            let i = ((p[0] * 4.0) as usize).min(3);
            let j = ((p[1] * 4.0) as usize).min(3);
            counts[i * 4 + j] += 1;
        }
        let expect = n as f64 / 16.0;
        for c in counts {
            assert!((c as f64 - expect).abs() <= 5.0 * expect.sqrt(), "cell count {c}");
        }
    }

    #[test]
    fn quantile_depth_examples() {
        let g = DensityModel::standard_gaussian(1);
        close(quantile_depth_1d(&g, 0.0).unwrap(), 0.5, 1e-8);
        let u = DensityModel::uniform_box(vec![0.0], vec![1.0]).unwrap();
        close(quantile_depth_1d(&u, 0.25).unwrap(), 0.25, 1e-8);
        close(quantile_depth_1d(&g, 1.2816).unwrap(), 0.1, 1e-3);
        // oracle: tail of the standard normal
        close(quantile_depth_1d(&g, 1.2816).unwrap(), normal_tail(1.2816, 1e-12), 1e-8);
        assert!(quantile_depth_1d(&DensityModel::standard_gaussian(2), 0.0).is_err());
    }

    #[test]
    fn quantile_depth_bounded_by_half() {
        let g = DensityModel::GaussianMixture(
            GaussianMixture::new(vec![0.5, 0.5], vec![vec![-1.0], vec![3.0]], vec![vec![vec![1.0]]; 2]).unwrap(),
        );
        for i in -40..=40 {
            let x = i as f64 * 0.2;
            assert!(quantile_depth_1d(&g, x).unwrap() <= 0.5 + 1e-9);
        }
    }

    #[test]
    fn radial_gaussian_examples() {
        let phi = PhiSpec::new(0.5).unwrap();
        close(gaussian_radial_depth(0.0, 2, phi), 0.5, 1e-8);
        assert!(gaussian_radial_depth(50.0, 2, phi) <= 1e-12);
        close(gaussian_radial_depth(1.0, 2, phi), normal_tail(1.0, 1e-12), 1e-8);
        close(gaussian_radial_depth(1.0, 2, phi), 0.15866, 1e-5);
    }

    #[test]
    fn ball_depth_examples() {
        let one = PhiSpec::unnormalized();
        close(ball_uniform_depth(&[0.0, 0.0], 2, one).unwrap(), 1.0 / PI, 1e-14);
        close(ball_uniform_depth(&[1.0, 0.0], 2, one).unwrap(), 0.0, 1e-15);
        let v = ball_uniform_depth(&[0.0, 0.0, 0.0], 3, PhiSpec::normalized(3)).unwrap();
        // Γ(5/2) = 3√π/4
        let oracle = (0.75 * PI.sqrt() / PI.powf(1.5)).powf(1.0 / 3.0);
        close(v, oracle, 1e-13);
        close(v, 0.6204, 1e-4);
        assert!(ball_uniform_depth(&[1.1, 0.0], 2, one).is_err());
    }

    #[test]
    fn supersolution_examples() {
        let b = DensityModel::uniform_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        close(supersolution_bound(&b, &[0.5, 0.3]).unwrap(), 0.5, 1e-8);
        let g = DensityModel::standard_gaussian(2);
        let oracle = (2.0 * PI).recip() * (2.0 * PI).sqrt() / 2.0;
        close(supersolution_bound(&g, &[0.0, 0.0]).unwrap(), oracle, 1e-8);
        close(oracle, 0.19947, 1e-5);
        assert!(supersolution_bound(&g, &[-50.0, 0.0]).unwrap() <= 1e-12);
    }

    #[test]
    fn powerlaw_bound_examples() {
        close(powerlaw_depth_lower_bound((-4.0f64).exp(), 2), 2.0 / (2.0 * PI).sqrt(), 1e-12);
        close(powerlaw_depth_lower_bound(1.0, 2), 0.0, 0.0);
        close(powerlaw_depth_lower_bound((-1.0f64).exp(), 3), (4.0 * PI).powf(-1.0 / 3.0), 1e-12);
        close((4.0 * PI).powf(-1.0 / 3.0), 0.4301, 1e-4);
    }

    #[test]
    fn powerlaw_is_continuous_and_normalized() {
        for &(eps, d) in &[(0.1, 2usize), (0.01, 3), (0.5, 1)] {
            let p = TruncatedPowerLaw::new(eps, d).unwrap();
            // independent route: bisection on the continuity equation
            let v = unit_ball_volume(d);
            let s = sphere_area(d);
            let l = -f64::ln(eps);
            let gap = |delta: f64| (1.0 - delta) / (l * s) - delta / v;
            let (mut a, mut b) = (0.0, 1.0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if gap(m) > 0.0 {
                    a = m
                } else {
                    b = m
                }
            }
            close(p.delta(), 0.5 * (a + b), 1e-12);
            let inner = p.eval_radius(eps);
            let outer = p.eval_radius(eps * (1.0 + 1e-12));
            close(inner, outer, 1e-9 * inner);
            let mass = integrate(|r| p.eval_radius(r) * s * r.powi(d as i32 - 1), 0.0, eps, 1e-12)
                + integrate(|r| p.eval_radius(r) * s * r.powi(d as i32 - 1), eps, 1.0, 1e-12);
            close(mass, 1.0, 1e-9);
        }
    }

    #[test]
    fn sphere_constants() {
        close(sphere_area(2), 2.0 * PI, 1e-13);
        close(sphere_area(3), 4.0 * PI, 1e-13);
        close(unit_ball_volume(2), PI, 1e-13);
        close(unit_ball_volume(3), 4.0 * PI / 3.0, 1e-13);
    }
}
