use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::points::PointCloud;

/// Location and scatter of a sample, with the whitening map
/// x ↦ R^{-1/2}(x − θ) and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterTransform {
    location: DVector<f64>,
    scatter: DMatrix<f64>,
    inverse_sqrt: DMatrix<f64>,
    sqrt: DMatrix<f64>,
}

impl ScatterTransform {
    /// Builds the transform from an explicit location and SPD scatter matrix.
    pub fn from_parts(location: Vec<f64>, scatter: DMatrix<f64>) -> Result<Self> {
        let d = location.len();
        if scatter.nrows() != d || scatter.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: scatter.nrows() });
        }
        let sym = (&scatter + scatter.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        if eig.eigenvalues.iter().any(|&l| !(l > 1e-12 * top.max(f64::MIN_POSITIVE))) {
            return Err(Error::Degenerate("scatter matrix is singular".into()));
        }
        let v = &eig.eigenvectors;
        let spectral = |f: fn(f64) -> f64| {
            let diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
            let m = v * diag * v.transpose();
            (&m + m.transpose()) * 0.5
        };
        Ok(Self {
            location: DVector::from_vec(location),
            scatter: sym,
            inverse_sqrt: spectral(|l| 1.0 / l.sqrt()),
            sqrt: spectral(f64::sqrt),
        })
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    pub fn location(&self) -> &[f64] {
        self.location.as_slice()
    }

    pub fn scatter(&self) -> &DMatrix<f64> {
        &self.scatter
    }

    pub fn inverse_sqrt(&self) -> &DMatrix<f64> {
        &self.inverse_sqrt
    }

    pub fn whiten_point(&self, x: &[f64]) -> Vec<f64> {
        let y = &self.inverse_sqrt * (DVector::from_column_slice(x) - &self.location);
        y.as_slice().to_vec()
    }

    pub fn unwhiten_point(&self, y: &[f64]) -> Vec<f64> {
        let x = &self.sqrt * DVector::from_column_slice(y) + &self.location;
        x.as_slice().to_vec()
    }

    pub fn whiten(&self, points: &PointCloud) -> Result<PointCloud> {
        self.check(points)?;
        Ok(points.map(self.dim(), |p| self.whiten_point(p)))
    }

    pub fn unwhiten(&self, points: &PointCloud) -> Result<PointCloud> {
        self.check(points)?;
        Ok(points.map(self.dim(), |p| self.unwhiten_point(p)))
    }

    fn check(&self, points: &PointCloud) -> Result<()> {
        if !points.is_empty() && points.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: points.dim() });
        }
        Ok(())
    }
}

/// Sample covariance with the n − 1 denominator.
pub fn sample_covariance(points: &PointCloud) -> DMatrix<f64> {
    let d = points.dim();
    let mean = points.mean();
    let mut cov = DMatrix::zeros(d, d);
    for p in points.iter() {
        let c = DVector::from_iterator(d, p.iter().zip(&mean).map(|(a, m)| a - m));
        cov += &c * c.transpose();
    }
    cov / (points.len().saturating_sub(1).max(1)) as f64
}

/// Sample mean and covariance as location and scatter.
pub fn fit_scatter(points: &PointCloud) -> Result<ScatterTransform> {
    let d = points.dim();
    if points.len() <= d {
        return Err(Error::Degenerate(format!("need more than {d} points to fit a {d}-dimensional scatter")));
    }
    ScatterTransform::from_parts(points.mean(), sample_covariance(points))
}

pub fn whiten(transform: &ScatterTransform, points: &PointCloud) -> Result<PointCloud> {
    transform.whiten(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{DensityModel, GaussianMixture};

    fn sup_dist(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_closed_form() {
        let t =
            ScatterTransform::from_parts(vec![0.0, 0.0], DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0])))
                .unwrap();
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 1.0]));
        assert!(sup_dist(t.inverse_sqrt(), &expect) < 1e-12);
        let r = t.inverse_sqrt() * t.scatter() * t.inverse_sqrt();
        assert!(sup_dist(&r, &DMatrix::identity(2, 2)) < 1e-9);
    }

    #[test]
    fn location_maps_to_origin_and_round_trips() {
        let pts = PointCloud::from_rows(&[[1.0, 2.0], [3.0, -1.0], [0.5, 0.5], [2.0, 4.0]]);
        let t = fit_scatter(&pts).unwrap();
        assert!(t.whiten_point(t.location()).iter().all(|v| v.abs() < 1e-12));
        let back = t.unwhiten(&t.whiten(&pts).unwrap()).unwrap();
        for (a, b) in back.as_flat().iter().zip(pts.as_flat()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn correlated_sample_whitens_to_identity() {
        let cov = vec![vec![1.0, 0.8], vec![0.8, 1.0]];
        let m =
            DensityModel::GaussianMixture(GaussianMixture::new(vec![1.0], vec![vec![0.0, 0.0]], vec![cov]).unwrap());
        let pts = m.sample(10_000, 3).unwrap();
        let w = fit_scatter(&pts).unwrap().whiten(&pts).unwrap();
        assert!(sup_dist(&sample_covariance(&w), &DMatrix::identity(2, 2)) < 0.05);
    }

    #[test]
    fn singular_and_small_samples_fail() {
        let line = PointCloud::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]);
        assert!(fit_scatter(&line).is_err());
        assert!(fit_scatter(&PointCloud::from_rows(&[[0.0, 1.0], [1.0, 0.0]])).is_err());
    }
}
