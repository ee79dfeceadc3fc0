//! Discrete regional nonlocal operator
//! `L u(x_i) = h^2 sum_{j exterior, j != i} K(x_i - x_j)(u_j - u_i) + tail_i (u_inf - u_i)`
//! on masked 2-D grids, and the singular principal-value form in 1-D.

mod brute;
mod fast;
mod singular1d;
mod weights;

pub use brute::apply_bruteforce;
pub use fast::{apply_fast, FastPlan};
pub use singular1d::{apply_singular_1d, SampledProfile, SingularStencil};
pub use weights::{operator_weights_nonneg, WeightReport};

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::kernel::{KernelFamily, KernelSpec};

/// Refuses kernels the 2-D grid operator cannot evaluate.
pub(crate) fn check_grid_kernel(kernel: &KernelSpec) -> Result<()> {
    if kernel.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: kernel.dim(),
        });
    }
    if kernel.family() == KernelFamily::SingularFractional {
        return Err(Error::UnsupportedKernel(
            "the singular law is not admitted on 2-D grids; use a regularized kernel".into(),
        ));
    }
    Ok(())
}

/// Interaction weights `h^2 K(h |(dx, dy)|)` indexed by cell offset.
///
/// Offsets range over `(-n, n)` per axis on bounded grids; periodic grids use
/// minimum-image distances. The zero offset carries weight 0.
#[derive(Debug, Clone)]
pub(crate) struct OffsetWeights {
    n: usize,
    span: usize,
    table: Vec<f64>,
}

impl OffsetWeights {
    pub(crate) fn new(grid: &Grid2D, kernel: &KernelSpec) -> Result<Self> {
        check_grid_kernel(kernel)?;
        let n = grid.n();
        let h = grid.h();
        let span = 2 * n - 1;
        let mut table = vec![0.0; span * span];
        for oy in 0..span {
            for ox in 0..span {
                let (dx, dy) = (ox as i64 - (n as i64 - 1), oy as i64 - (n as i64 - 1));
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (dx, dy) = if grid.is_periodic() {
                    let wrap = |d: i64| d.abs().min(n as i64 - d.abs());
                    (wrap(dx), wrap(dy))
                } else {
                    (dx, dy)
                };
                let r = h * ((dx * dx + dy * dy) as f64).sqrt();
                table[oy * span + ox] = h * h * kernel.eval_radius(r)?;
            }
        }
        Ok(Self { n, span, table })
    }

    /// Weight between cells with offset `(dx, dy)`, each in `(-n, n)`.
    #[inline]
    pub(crate) fn get(&self, dx: i64, dy: i64) -> f64 {
        let o = self.n as i64 - 1;
        self.table[(dy + o) as usize * self.span + (dx + o) as usize]
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.table
    }

    pub(crate) fn offset_radius(&self, idx: usize, h: f64) -> f64 {
        let o = self.n as i64 - 1;
        let dx = (idx % self.span) as i64 - o;
        let dy = (idx / self.span) as i64 - o;
        h * ((dx * dx + dy * dy) as f64).sqrt()
    }
}

/// Per-cell far-field weight: kernel mass beyond the nearest box face.
/// Zero on periodic grids and at obstacle cells.
pub(crate) fn tail_weights(grid: &Grid2D, kernel: &KernelSpec) -> Result<Vec<f64>> {
    if grid.is_periodic() {
        return Ok(vec![0.0; grid.cell_count()]);
    }
    // Face distances take at most n/2 distinct values.
    let n = grid.n();
    let mut by_layer = Vec::with_capacity(n.div_ceil(2));
    for m in 0..n.div_ceil(2) {
        by_layer.push(kernel.tail_mass((m as f64 + 0.5) * grid.h())?);
    }
    Ok((0..grid.cell_count())
        .map(|k| {
            if !grid.is_exterior(k) {
                return 0.0;
            }
            let (ix, iy) = grid.coords(k);
            by_layer[ix.min(iy).min(n - 1 - ix).min(n - 1 - iy)]
        })
        .collect())
}
