//! Uniform Cartesian grids over `[-L, L]^2` with an exterior mask, and the
//! scalar fields living on them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Obstacle, Point};

/// Cell `k = iy * n + ix` has center `(-L + (ix + 1/2) h, -L + (iy + 1/2) h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    halfwidth: f64,
    n: usize,
    h: f64,
    exterior: Vec<bool>,
    periodic: bool,
    obstacle: Option<Obstacle>,
}

impl Grid2D {
    /// Grid with no obstacle; every cell is exterior.
    pub fn new(halfwidth: f64, n: usize) -> Result<Self> {
        if !(halfwidth > 0.0) || !halfwidth.is_finite() {
            return Err(invalid(
                "box_halfwidth",
                format!("{halfwidth} must be positive"),
            ));
        }
        if n < 2 {
            return Err(invalid("n_cells", format!("{n} must be at least 2")));
        }
        Ok(Self {
            halfwidth,
            n,
            h: 2.0 * halfwidth / n as f64,
            exterior: vec![true; n * n],
            periodic: false,
            obstacle: None,
        })
    }

    /// Grid whose mask excludes the cells with centers in `obstacle`.
    pub fn with_obstacle(halfwidth: f64, n: usize, obstacle: &Obstacle) -> Result<Self> {
        let mut grid = Self::new(halfwidth, n)?;
        let inside = obstacle.rasterize(&grid)?;
        if !inside.iter().any(|&b| b) {
            return Err(invalid(
                "obstacle",
                "obstacle covers no cell center at this resolution",
            ));
        }
        if inside.iter().all(|&b| b) {
            return Err(invalid("obstacle", "obstacle covers every cell"));
        }
        grid.exterior = inside.iter().map(|&b| !b).collect();
        grid.obstacle = Some(obstacle.clone());
        Ok(grid)
    }

    /// Obstacle-free torus used to test translation and symmetry; no far-field tail.
    pub fn periodic(halfwidth: f64, n: usize) -> Result<Self> {
        let mut grid = Self::new(halfwidth, n)?;
        grid.periodic = true;
        Ok(grid)
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn obstacle(&self) -> Option<&Obstacle> {
        self.obstacle.as_ref()
    }

    pub fn cell_count(&self) -> usize {
        self.n * self.n
    }

    pub fn exterior_mask(&self) -> &[bool] {
        &self.exterior
    }

    pub fn is_exterior(&self, k: usize) -> bool {
        self.exterior[k]
    }

    pub fn exterior_count(&self) -> usize {
        self.exterior.iter().filter(|&&b| b).count()
    }

    pub fn exterior_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.cell_count()).filter(move |&k| self.exterior[k])
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.n, k / self.n)
    }

    pub fn center(&self, k: usize) -> Point {
        let (ix, iy) = self.coords(k);
        [
            -self.halfwidth + (ix as f64 + 0.5) * self.h,
            -self.halfwidth + (iy as f64 + 0.5) * self.h,
        ]
    }

    /// Distance from the center of cell `k` to the nearest box face.
    pub fn face_distance(&self, k: usize) -> f64 {
        let (ix, iy) = self.coords(k);
        let m = ix.min(iy).min(self.n - 1 - ix).min(self.n - 1 - iy);
        (m as f64 + 0.5) * self.h
    }
}

/// Scalar density on a grid. `values` has one entry per cell; entries at
/// obstacle cells are kept at zero and never read.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid2D>,
    values: Vec<f64>,
    farfield: f64,
}

impl Field {
    pub fn new(grid: Arc<Grid2D>, mut values: Vec<f64>, farfield: f64) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::DimensionMismatch {
                expected: grid.cell_count(),
                got: values.len(),
            });
        }
        if !farfield.is_finite() {
            return Err(invalid("farfield", "must be finite"));
        }
        for (k, v) in values.iter_mut().enumerate() {
            if !grid.is_exterior(k) {
                *v = 0.0;
            } else if !v.is_finite() {
                return Err(Error::NonFinite { cell: k });
            }
        }
        Ok(Self {
            grid,
            values,
            farfield,
        })
    }

    pub fn constant(grid: Arc<Grid2D>, value: f64, farfield: f64) -> Result<Self> {
        let values = vec![value; grid.cell_count()];
        Self::new(grid, values, farfield)
    }

    /// Field sampled from `f` at exterior cell centers.
    pub fn from_fn(grid: Arc<Grid2D>, farfield: f64, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = (0..grid.cell_count())
            .map(|k| {
                if grid.is_exterior(k) {
                    f(grid.center(k))
                } else {
                    0.0
                }
            })
            .collect();
        Self::new(grid, values, farfield)
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn farfield(&self) -> f64 {
        self.farfield
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Replaces the values, keeping grid and farfield.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.farfield)
    }

    /// `(min, max)` over exterior cells.
    pub fn exterior_range(&self) -> (f64, f64) {
        self.grid
            .exterior_cells()
            .map(|k| self.values[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_centers() {
        let g = Grid2D::new(2.0, 40).unwrap();
        assert!((g.h() * 40.0 - 4.0).abs() < 1e-12);
        let c = g.center(0);
        assert!((c[0] + 1.95).abs() < 1e-12 && (c[1] + 1.95).abs() < 1e-12);
        assert_eq!(g.coords(g.index(3, 7)), (3, 7));
        assert!((g.face_distance(0) - 0.05).abs() < 1e-12);
        assert!((g.face_distance(g.index(20, 20)) - 19.5 * 0.1).abs() < 1e-12);
    }

    #[test]
    fn obstacle_mask() {
        let disk = Obstacle::disk([0.0, 0.0], 1.0).unwrap();
        let g = Grid2D::with_obstacle(2.0, 40, &disk).unwrap();
        assert!(g.exterior_count() > 0 && g.exterior_count() < g.cell_count());
        assert!(!g.is_exterior(g.index(20, 20)));
        let tiny = Obstacle::disk([0.0, 0.0], 0.0).unwrap();
        assert!(Grid2D::with_obstacle(2.0, 40, &tiny).is_err());
    }

    #[test]
    fn field_zeroes_obstacle_cells() {
        let disk = Obstacle::disk([0.0, 0.0], 1.0).unwrap();
        let g = Arc::new(Grid2D::with_obstacle(2.0, 40, &disk).unwrap());
        let f = Field::constant(g.clone(), 0.7, 1.0).unwrap();
        assert_eq!(f.get(g.index(20, 20)), 0.0);
        assert_eq!(f.exterior_range(), (0.7, 0.7));
        assert!(Field::new(g, vec![0.0; 3], 0.0).is_err());
    }
}
