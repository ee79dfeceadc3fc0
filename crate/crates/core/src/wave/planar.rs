//! Planar data `phi(x . e - r)` built from a front, tested as a subsolution of
//! the exterior problem on the half-space beyond the obstacle.
//!
//! The whole-plane operator of planar data reduces to a one-dimensional
//! integral against the projected kernel `J`. The cut-out obstacle adds
//! `int_K K(x - y) (phi(x) - phi(y)) dy`, which is nonnegative because the
//! obstacle lies behind the half-space and the profile is nondecreasing.

use serde::Serialize;

use super::WaveProfile;
use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use crate::grid::Grid2D;
use crate::kernel::KernelSpec;
use crate::quadrature;
use crate::reaction::BistableSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarReport {
    /// Minimum of `L phi + f(phi)` over exterior cells in the half-space.
    pub min_value: f64,
    /// Same minimum with the obstacle term dropped.
    pub min_without_obstacle: f64,
    pub argmin_cell: Option<usize>,
    pub argmin_point: Option<Point>,
    /// `c * min phi'` over the checked cells.
    pub lower_bound: f64,
    pub cells_checked: usize,
    /// Half-space `x . e > offset`.
    pub offset: f64,
}

impl PlanarReport {
    pub fn is_subsolution(&self) -> bool {
        self.min_value > 0.0
    }
}

/// `omega[m] = int hat_m(t) J(t) dt` on the profile spacing, plus the mass
/// beyond the last full hat.
struct ProjectedWeights {
    omega: Vec<f64>,
    beyond: f64,
}

fn projected_weights(kernel: &KernelSpec, h: f64, count: usize) -> Result<ProjectedWeights> {
    let mut j_half = Vec::with_capacity(2 * count + 3);
    for k in 0..=2 * count + 2 {
        j_half.push(kernel.projected_eval(0.5 * k as f64 * h)?);
    }
    let mut omega = vec![0.0; count + 1];
    for (m, w) in omega.iter_mut().enumerate().skip(1) {
        *w = h / 3.0 * (j_half[2 * m - 1] + j_half[2 * m] + j_half[2 * m + 1]);
    }
    // Ramp on [count h, (count+1) h] and everything past it.
    let a = count as f64 * h;
    let ramp = h / 6.0 * (2.0 * j_half[2 * count + 1] + j_half[2 * count + 2]);
    let j = |t: f64| kernel.projected_eval(t).unwrap_or(0.0);
    let far = quadrature::integrate_to_infinity(j, a + h, 1e-15, 1e-12);
    Ok(ProjectedWeights {
        omega,
        beyond: ramp + far,
    })
}

/// Whole-line operator at every node, data extended by the limits.
fn free_space(profile: &WaveProfile, weights: &ProjectedWeights) -> Vec<f64> {
    use rayon::prelude::*;
    let phi = &profile.phi;
    let n = phi.len();
    let at = |j: i64| -> f64 {
        if j < 0 {
            0.0
        } else if j as usize >= n {
            1.0
        } else {
            phi[j as usize]
        }
    };
    (0..n)
        .into_par_iter()
        .map(|k| {
            let centre = phi[k];
            let mut acc = 0.0;
            for (m, w) in weights.omega.iter().enumerate().skip(1) {
                acc += w * (at(k as i64 + m as i64) + at(k as i64 - m as i64) - 2.0 * centre);
            }
            acc + weights.beyond * (1.0 - 2.0 * centre)
        })
        .collect()
}

/// Evaluates `L phi_(e,r) + f(phi_(e,r))` at the exterior cells of `grid`
/// lying in the half-space beyond the obstacle in direction `e`.
pub fn planar_subsolution_check(
    profile: &WaveProfile,
    e: Point,
    r: f64,
    grid: &Grid2D,
    kernel: &KernelSpec,
    reaction: &BistableSpec,
) -> Result<PlanarReport> {
    let len = e[0].hypot(e[1]);
    if !(len > 0.0) || !len.is_finite() {
        return Err(invalid("direction", "must be a nonzero vector"));
    }
    let e = [e[0] / len, e[1] / len];
    if !profile.monotone {
        return Err(Error::Hypothesis("front profile is not monotone".into()));
    }
    if kernel.dim() != 2 {
        return Err(Error::UnsupportedKernel(
            "planar check needs a planar kernel".into(),
        ));
    }
    let offset = match grid.obstacle() {
        Some(ob) if !ob.declared_convex() => {
            return Err(Error::Hypothesis("obstacle is not convex".into()));
        }
        Some(ob) => ob.support(e),
        None => f64::NEG_INFINITY,
    };

    let h = profile.h;
    let weights = projected_weights(kernel, h, profile.len())?;
    let fs = free_space(profile, &weights);
    let node_slope: Vec<f64> = (0..profile.len()).map(|k| profile.slope(k)).collect();
    let interp = |table: &[f64], z: f64| -> f64 {
        let t = (z - profile.start) / h;
        let k = (t.floor() as usize).min(table.len() - 2);
        let w = t - k as f64;
        table[k] * (1.0 - w) + table[k + 1] * w
    };

    let hh = grid.h() * grid.h();
    let inside: Vec<(Point, f64)> = (0..grid.cell_count())
        .filter(|&k| !grid.is_exterior(k))
        .map(|k| {
            let y = grid.center(k);
            (y, profile.eval_with_limits(y[0] * e[0] + y[1] * e[1] - r))
        })
        .collect();

    let mut report = PlanarReport {
        min_value: f64::INFINITY,
        min_without_obstacle: f64::INFINITY,
        argmin_cell: None,
        argmin_point: None,
        lower_bound: f64::INFINITY,
        cells_checked: 0,
        offset,
    };
    let mut min_slope = f64::INFINITY;
    for k in grid.exterior_cells() {
        let x = grid.center(k);
        let along = x[0] * e[0] + x[1] * e[1];
        if along <= offset {
            continue;
        }
        let z = along - r;
        if z < profile.start || z > profile.end() {
            return Err(invalid(
                "r",
                format!("cell at z = {z:.3} falls outside the profile grid"),
            ));
        }
        let phi = profile.eval_with_limits(z);
        let mut correction = 0.0;
        for &(y, phi_y) in &inside {
            correction += kernel.eval_radius((x[0] - y[0]).hypot(x[1] - y[1]))? * (phi - phi_y);
        }
        correction *= hh;
        let free = interp(&fs, z) + reaction.eval_f(phi);
        let value = free + correction;
        report.cells_checked += 1;
        report.min_without_obstacle = report.min_without_obstacle.min(free);
        min_slope = min_slope.min(interp(&node_slope, z));
        if value < report.min_value {
            report.min_value = value;
            report.argmin_cell = Some(k);
            report.argmin_point = Some(x);
        }
    }
    if report.cells_checked == 0 {
        return Err(invalid(
            "direction",
            "no exterior cell lies in the half-space",
        ));
    }
    report.lower_bound = profile.speed_c * min_slope;
    Ok(report)
}
