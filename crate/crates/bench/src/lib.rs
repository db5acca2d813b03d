//! Shared fixtures for the criterion benchmarks.

use std::sync::Arc;

use parasol_core::evolution::Scheme;
use parasol_core::grid::{Field, LaplacianKind, SpatialGrid};
use parasol_core::nonlinearity::Nonlinearity;
use parasol_core::periodic::PeriodMap;
use parasol_core::spectral::SchrodingerOperator;

pub fn line_grid(points: usize) -> Arc<SpatialGrid> {
    SpatialGrid::with_laplacian(1, 16.0, points, LaplacianKind::Stencil).unwrap()
}

pub fn plane_grid(points_per_axis: usize) -> Arc<SpatialGrid> {
    SpatialGrid::with_laplacian(2, 16.0, points_per_axis, LaplacianKind::Stencil).unwrap()
}

pub fn bump(grid: &Arc<SpatialGrid>) -> Field {
    grid.field_from_fn(|x| {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        (-r2 / 8.0).exp()
    })
}

pub fn demo_problem(grid: &Arc<SpatialGrid>) -> Arc<Nonlinearity> {
    Arc::new(Nonlinearity::demo(grid, 1.0, 0.8, 2.0, grid.dim() as f64).unwrap())
}

pub fn demo_period_map(grid: &Arc<SpatialGrid>, steps_per_period: usize) -> PeriodMap {
    PeriodMap::new(&demo_problem(grid), 1.0, Scheme::Strang, steps_per_period).unwrap()
}

/// Singular-well operator with a handful of bound states.
pub fn well_operator(points: usize) -> SchrodingerOperator {
    let grid = line_grid(points);
    let v = grid.field_from_fn(|x| -1.0 + 6.0 / (1.0 + x[0].abs()).powi(2));
    SchrodingerOperator::new(v)
}
