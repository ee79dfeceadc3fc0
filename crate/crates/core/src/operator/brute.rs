use rayon::prelude::*;

use super::{tail_weights, OffsetWeights};
use crate::error::Result;
use crate::grid::Field;
use crate::kernel::KernelSpec;

/// Direct O(N^2) double sum. Obstacle cells of the result are zero.
pub fn apply_bruteforce(field: &Field, kernel: &KernelSpec) -> Result<Vec<f64>> {
    let grid = field.grid();
    let weights = OffsetWeights::new(grid, kernel)?;
    let tails = tail_weights(grid, kernel)?;
    Ok(direct_sum(field, &weights, &tails))
}

pub(crate) fn direct_sum(field: &Field, weights: &OffsetWeights, tails: &[f64]) -> Vec<f64> {
    let grid = field.grid();
    let u = field.values();
    let far = field.farfield();
    let n = grid.n();
    let exterior: Vec<usize> = grid.exterior_cells().collect();
    (0..grid.cell_count())
        .into_par_iter()
        .map(|i| {
            if !grid.is_exterior(i) {
                return 0.0;
            }
            let (ix, iy) = (i % n, i / n);
            let ui = u[i];
            let mut acc = 0.0;
            for &j in &exterior {
                if j == i {
                    continue;
                }
                let dx = (j % n) as i64 - ix as i64;
                let dy = (j / n) as i64 - iy as i64;
                acc += weights.get(dx, dy) * (u[j] - ui);
            }
            acc + tails[i] * (far - ui)
        })
        .collect()
}
