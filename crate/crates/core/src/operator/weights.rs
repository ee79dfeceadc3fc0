use serde::Serialize;

use super::{tail_weights, OffsetWeights};
use crate::error::Result;
use crate::grid::Grid2D;
use crate::kernel::KernelSpec;

/// Sign scan of the discrete interaction weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightReport {
    pub nonneg: bool,
    pub min_weight: f64,
    pub max_weight: f64,
    pub min_tail: f64,
    pub max_tail: f64,
    /// Radius of the most negative weight, if any weight is negative.
    pub offending_radius: Option<f64>,
}

/// Checks `h^2 K(x_i - x_j) >= 0` for every grid offset and every far-field weight.
pub fn operator_weights_nonneg(grid: &Grid2D, kernel: &KernelSpec) -> Result<WeightReport> {
    let weights = OffsetWeights::new(grid, kernel)?;
    let h = grid.h();
    let mut min_weight = f64::INFINITY;
    let mut max_weight = f64::NEG_INFINITY;
    let mut offending: Option<(f64, f64)> = None;
    let zero_offset = weights.values().len() / 2;
    for (idx, &w) in weights.values().iter().enumerate() {
        if idx == zero_offset {
            continue;
        }
        min_weight = min_weight.min(w);
        max_weight = max_weight.max(w);
        if w < 0.0 && offending.is_none_or(|(_, worst)| w < worst) {
            offending = Some((weights.offset_radius(idx, h), w));
        }
    }
    // Table nodes that no grid offset lands on still count.
    if let Some(table) = kernel.table() {
        for (&r, &v) in table.radii().iter().zip(table.values()) {
            let w = v * kernel.c_norm() * h * h;
            if w < 0.0 && offending.is_none_or(|(_, worst)| w < worst) {
                offending = Some((r, w));
                min_weight = min_weight.min(w);
            }
        }
    }
    let tails = tail_weights(grid, kernel)?;
    let (mut min_tail, mut max_tail) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in grid.exterior_cells() {
        min_tail = min_tail.min(tails[k]);
        max_tail = max_tail.max(tails[k]);
    }
    Ok(WeightReport {
        nonneg: offending.is_none() && min_tail >= 0.0,
        min_weight,
        max_weight,
        min_tail,
        max_tail,
        offending_radius: offending.map(|(r, _)| r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{make_kernel, KernelFamily, RadialTable};

    #[test]
    fn fractional_weights_are_positive() {
        let grid = Grid2D::new(4.0, 16).unwrap();
        let k = make_kernel(KernelFamily::RegularizedFractional, 0.25, 2, 0.01, 1.0).unwrap();
        let report = operator_weights_nonneg(&grid, &k).unwrap();
        assert!(report.nonneg, "{report:?}");
        assert!(report.min_weight > 0.0 && report.max_weight >= report.min_weight);
    }

    #[test]
    fn negative_table_entry_is_reported() {
        let grid = Grid2D::new(2.0, 8).unwrap();
        let table = RadialTable::new(vec![0.0, 0.5, 1.0, 1.5], vec![1.0, 0.5, -0.2, 0.0]).unwrap();
        let k = KernelSpec::radial_table(2, table, 1.0).unwrap();
        let report = operator_weights_nonneg(&grid, &k).unwrap();
        assert!(!report.nonneg);
        let r = report.offending_radius.unwrap();
        assert!(r > 0.5 && r < 1.5, "{r}");
    }
}
