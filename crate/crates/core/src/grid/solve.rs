use super::fmm::{boundary_values, march};
use super::{BoundaryCondition, DepthField, GridSpec};
use crate::density::{supersolution_bound_phi, DensityModel, PhiSpec};
use crate::error::{Error, Result};

/// Samples φ(ρ) at every grid node.
pub fn node_speeds(model: &DensityModel, phi: PhiSpec, grid: &GridSpec) -> Result<Vec<f64>> {
    if model.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: model.dim() });
    }
    Ok((0..grid.len()).map(|i| phi.apply(model.eval_unchecked(&grid.position(i)))).collect())
}

/// Depth of `model` under φ on `grid`: samples φ(ρ) at the nodes, resolves
/// the boundary data and runs fast marching.
pub fn solve_depth(model: &DensityModel, phi: PhiSpec, grid: &GridSpec, bc: &BoundaryCondition) -> Result<DepthField> {
    let speed = node_speeds(model, phi, grid)?;
    let fixed = match bc {
        BoundaryCondition::SupersolutionOnBoxEdge => (0..grid.len())
            .filter(|&i| grid.on_box_edge(i))
            .map(|i| supersolution_bound_phi(model, phi, &grid.position(i)).map(|v| (i, v)))
            .collect::<Result<Vec<_>>>()?,
        other => boundary_values(grid, other)?,
    };
    let (values, _) = march(grid, &speed, &fixed)?;
    DepthField::new(grid.clone(), values)
}
