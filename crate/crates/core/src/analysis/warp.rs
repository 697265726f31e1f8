use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::points::{norm, PointCloud};

/// Probe nodes per axis when estimating sup ‖DΦ − I‖.
pub const PROBE_NODES: usize = 101;

/// Bump profile g(t) = exp(1 − 1/(1 − t²)) on [0, 1), zero beyond; g(0) = 1.
fn bump(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

fn bump_slope(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        let q = 1.0 - t * t;
        -2.0 * t / (q * q) * bump(t)
    }
}

/// sup |g'| on [0, 1), by golden-section search on the unimodal |g'|.
fn max_bump_slope() -> f64 {
    let (mut a, mut b) = (0.3f64, 0.95f64);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if bump_slope(c).abs() > bump_slope(d).abs() {
            b = d;
        } else {
            a = c;
        }
    }
    bump_slope(0.5 * (a + b)).abs()
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Identity,
    /// Planar rotation by `angle` about `center`.
    Rotation {
        angle: f64,
        center: [f64; 2],
    },
    /// Φ(x) = x + A g(|x − p|/r) v.
    Bump {
        center: Vec<f64>,
        radius: f64,
        amplitude: f64,
        direction: Vec<f64>,
    },
}

/// Smooth invertible map Φ with a declared bound ε on ‖DΦ − I‖.
///
/// Rotations are rigid and declare ε = 0: depth is exactly invariant under
/// them, although ‖DΦ − I‖ itself is not small.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpMap {
    dim: usize,
    kind: Kind,
    epsilon: f64,
}

impl WarpMap {
    pub fn identity(dim: usize) -> Self {
        Self { dim, kind: Kind::Identity, epsilon: 0.0 }
    }

    pub fn rotation(angle: f64, center: [f64; 2]) -> Self {
        Self { dim: 2, kind: Kind::Rotation { angle, center }, epsilon: 0.0 }
    }

    /// Bump displacement of height `amplitude` along the unit vector
    /// `direction`, supported in the ball of `radius` around `center`.
    pub fn bump(center: Vec<f64>, radius: f64, amplitude: f64, direction: Vec<f64>) -> Result<Self> {
        let dim = center.len();
        if dim == 0 || direction.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: direction.len() });
        }
        if !(radius > 0.0 && amplitude >= 0.0) {
            return Err(Error::InvalidParameter("bump needs radius > 0 and amplitude ≥ 0".into()));
        }
        let len = norm(&direction);
        if !(len > 0.0) {
            return Err(Error::InvalidParameter("bump direction must be nonzero".into()));
        }
        let direction: Vec<f64> = direction.iter().map(|v| v / len).collect();
        let epsilon = amplitude * max_bump_slope() / radius;
        if epsilon >= 1.0 {
            return Err(Error::InvalidParameter(format!("bump with ‖DΦ − I‖ = {epsilon} ≥ 1 is not invertible")));
        }
        Ok(Self { dim, kind: Kind::Bump { center, radius, amplitude, direction }, epsilon })
    }

    /// Bump whose amplitude is chosen so that sup ‖DΦ − I‖ = `epsilon`.
    pub fn bump_with_epsilon(center: Vec<f64>, radius: f64, direction: Vec<f64>, epsilon: f64) -> Result<Self> {
        Self::bump(center, radius, epsilon * radius / max_bump_slope(), direction)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_rigid(&self) -> bool {
        !matches!(self.kind, Kind::Bump { .. })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Identity => x.to_vec(),
            Kind::Rotation { angle, center } => {
                let (s, c) = angle.sin_cos();
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                vec![center[0] + c * dx - s * dy, center[1] + s * dx + c * dy]
            }
            Kind::Bump { center, radius, amplitude, direction } => {
                let r: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                let g = amplitude * bump(r / radius);
                x.iter().zip(direction).map(|(a, v)| a + g * v).collect()
            }
        }
    }

    /// Φ⁻¹(y). Bumps are inverted by the fixed point x = y − A g(|x − p|/r) v,
    /// a contraction with constant ε < 1.
    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Identity => y.to_vec(),
            Kind::Rotation { angle, center } => Self::rotation(-angle, *center).apply(y),
            Kind::Bump { center, radius, amplitude, direction } => {
                let mut x = y.to_vec();
                for _ in 0..200 {
                    let r: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    let g = amplitude * bump(r / radius);
                    let next: Vec<f64> = y.iter().zip(direction).map(|(a, v)| a - g * v).collect();
                    let step = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    x = next;
                    if step <= 1e-15 * (1.0 + norm(&x)) {
                        break;
                    }
                }
                x
            }
        }
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        match &self.kind {
            Kind::Identity => DMatrix::identity(d, d),
            Kind::Rotation { angle, .. } => {
                let (s, c) = angle.sin_cos();
                DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
            }
            Kind::Bump { center, radius, amplitude, direction } => {
                let diff: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let r = norm(&diff);
                let mut j = DMatrix::identity(d, d);
                if r > 0.0 {
                    let k = amplitude * bump_slope(r / radius) / (radius * r);
                    for a in 0..d {
                        for b in 0..d {
                            j[(a, b)] += k * direction[a] * diff[b];
                        }
                    }
                }
                j
            }
        }
    }

    pub fn jacobian_det(&self, x: &[f64]) -> f64 {
        self.jacobian(x).determinant()
    }

    /// sup ‖DΦ − I‖₂ over a `PROBE_NODES`^d grid on the box `[lo, hi]`.
    pub fn estimate_deviation(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let d = self.dim;
        let total = PROBE_NODES.pow(d as u32);
        let mut x = vec![0.0; d];
        let mut best = 0.0f64;
        for code in 0..total {
            let mut c = code;
            for a in 0..d {
                let i = c % PROBE_NODES;
                c /= PROBE_NODES;
                x[a] = lo[a] + (hi[a] - lo[a]) * i as f64 / (PROBE_NODES - 1) as f64;
            }
            let dev = self.jacobian(&x) - DMatrix::identity(d, d);
            best = best.max(dev.singular_values().max());
        }
        best
    }

    /// Probe box covering the region where Φ differs from the identity.
    pub fn probe_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.kind {
            Kind::Bump { center, radius, .. } => {
                Some((center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect()))
            }
            _ => None,
        }
    }

    pub fn apply_cloud(&self, points: &PointCloud) -> PointCloud {
        points.map(self.dim, |p| self.apply(p))
    }
}
