//! Numerical checks of the Liouville property outside a convex obstacle:
//! long-time runs that must end at `u = 1`, the sliding family
//! `phi(x . e - r)` against a steady state, and discrete weak and strong
//! comparison principles on half-spaces.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::evolution::{simulate, Evolver, SimConfig};
use crate::geometry::{HalfSpace, Obstacle, Point};
use crate::grid::{Field, Grid2D};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::operator::operator_weights_nonneg;
use crate::reaction::{check_conditions, BistableSpec};
use crate::wave::{solve_front_with, WaveOptions, WaveProfile};

/// Ordering slack for the sliding family.
pub const TOL_SLIDE: f64 = 1e-9;
/// Allowed violation of `v <= u` in the weak comparison test.
pub const TOL_ORDER: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", content = "r")]
pub enum SlideOutcome {
    /// The ordering already holds at the left end of the scan.
    BelowGrid,
    /// Infimum of the admissible translations in the scanned range.
    Found(f64),
    /// The ordering fails even at the right end of the scan.
    AboveGrid,
}

fn unit(e: Point) -> Result<Point> {
    let len = e[0].hypot(e[1]);
    if !(len > 0.0) || !len.is_finite() {
        return Err(invalid("direction", "must be a nonzero vector"));
    }
    Ok([e[0] / len, e[1] / len])
}

fn projections(u: &Field, e: Point) -> Vec<(f64, f64)> {
    let grid = u.grid();
    grid.exterior_cells()
        .map(|k| {
            let x = grid.center(k);
            (x[0] * e[0] + x[1] * e[1], u.get(k))
        })
        .collect()
}

fn ordered(cells: &[(f64, f64)], profile: &WaveProfile, r: f64, tol: f64) -> bool {
    cells
        .iter()
        .all(|&(along, value)| profile.eval(along - r) <= value + tol)
}

/// Smallest `r` in `[-3L, 3L]` with `phi(x . e - r) <= u(x) + tol` at every
/// exterior cell, by bisection to `1e-9`.
pub fn sliding_r_star(
    u: &Field,
    profile: &WaveProfile,
    e: Point,
    tol: f64,
) -> Result<SlideOutcome> {
    let e = unit(e)?;
    if !profile.monotone {
        return Err(Error::Hypothesis("front profile is not monotone".into()));
    }
    let cells = projections(u, e);
    let reach = 3.0 * u.grid().halfwidth();
    let (mut lo, mut hi) = (-reach, reach);
    if ordered(&cells, profile, lo, tol) {
        return Ok(SlideOutcome::BelowGrid);
    }
    if !ordered(&cells, profile, hi, tol) {
        return Ok(SlideOutcome::AboveGrid);
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if ordered(&cells, profile, mid, tol) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(SlideOutcome::Found(hi))
}

/// An explicit `r0` with `phi(x . e - r0) <= u` everywhere: the front is
/// pushed right until its largest value on the grid drops below `min u`.
pub fn claim_r0_exists(u: &Field, profile: &WaveProfile, e: Point) -> Result<f64> {
    let e = unit(e)?;
    let cells = projections(u, e);
    let floor = cells.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    if !(floor > 0.0) {
        return Err(Error::Hypothesis(format!(
            "field minimum {floor} is not positive"
        )));
    }
    let top = cells.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    let step = u.grid().h();
    let reach = 3.0 * u.grid().halfwidth();
    let mut r = -reach;
    let mut stride = step;
    let mut tries = 0usize;
    while profile.eval(top - r) > floor {
        r += stride;
        tries += 1;
        // Past the box, speed up through the algebraic tail.
        if r > reach {
            stride *= 2.0;
        }
        if tries > 1_000_000 || !r.is_finite() {
            return Err(Error::NoConvergence(
                "no admissible translation found".into(),
            ));
        }
    }
    if !ordered(&cells, profile, r, 0.0) {
        return Err(Error::NoConvergence(
            "ordering check failed at the returned r0".into(),
        ));
    }
    Ok(r)
}

/// Options of [`discrete_weak_max_test`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakMaxOptions {
    pub halfwidth: f64,
    pub n_cells: usize,
    pub instances: usize,
    pub seed: u64,
    /// Relaxation stops once the residual on the half-space is below this.
    pub steady_tol: f64,
    pub max_steps: usize,
}

impl Default for WeakMaxOptions {
    fn default() -> Self {
        Self {
            halfwidth: 4.0,
            n_cells: 32,
            instances: 20,
            seed: 7,
            steady_tol: 1e-13,
            max_steps: 400_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceReport {
    pub halfspace_normal: Point,
    pub halfspace_offset: f64,
    /// `min (u - v)` over exterior cells.
    pub min_gap: f64,
    pub argmin: Point,
    pub min_u_in_h: f64,
    pub residual_u: f64,
    pub residual_v: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakMaxReport {
    pub c0: f64,
    pub c1: f64,
    pub instances: Vec<InstanceReport>,
    pub passed: usize,
    /// Corrupted instances whose violation was detected.
    pub controls: Vec<InstanceReport>,
    pub controls_detected: usize,
    pub pass: bool,
}

/// Evolves the cells of `active` until `|L w + f(w)| <= tol` there; the rest
/// stay frozen. Returns the state and its residual.
fn relax(
    evolver: &Evolver,
    mut field: Field,
    active: &[bool],
    tol: f64,
    max_steps: usize,
) -> Result<(Field, f64)> {
    let dt = evolver.stable_dt();
    let mut residual = f64::INFINITY;
    for _ in 0..=max_steps {
        let rate = evolver.rate(&field)?;
        residual = active
            .iter()
            .zip(&rate)
            .filter(|(a, _)| **a)
            .fold(0.0f64, |m, (_, r)| m.max(r.abs()));
        if residual <= tol {
            break;
        }
        let mut values = field.values().to_vec();
        for (k, v) in values.iter_mut().enumerate() {
            if active[k] {
                *v += dt * rate[k];
            }
        }
        field = field.with_values(values)?;
    }
    Ok((field, residual))
}

struct Instance {
    halfspace: HalfSpace,
    active: Vec<bool>,
    u: Field,
    v: Field,
}

fn draw_instance(
    grid: &Arc<Grid2D>,
    obstacle: &Obstacle,
    c0: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Instance> {
    let cells: Vec<usize> = grid.exterior_cells().collect();
    let halfspace = loop {
        let k = cells[rng.gen_range(0..cells.len())];
        let x0 = grid.center(k);
        let hs = obstacle.separating_halfspace(x0)?;
        // Keep half-spaces with cells on both sides.
        let inside = cells
            .iter()
            .filter(|&&j| hs.contains(grid.center(j)))
            .count();
        if inside > 0 && inside < cells.len() {
            break hs;
        }
    };
    let n = grid.cell_count();
    let active: Vec<bool> = (0..n)
        .map(|k| grid.is_exterior(k) && halfspace.contains(grid.center(k)))
        .collect();
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    for k in grid.exterior_cells() {
        if active[k] {
            u[k] = 1.0;
            v[k] = rng.gen::<f64>();
        } else {
            // Outside data for u stays in the well, short of 1 so that the
            // negative control can exceed it.
            u[k] = 1.0 - c0 + 0.9 * c0 * rng.gen::<f64>();
            v[k] = u[k] * rng.gen::<f64>();
        }
    }
    let v_far = 1.0 - c0 * rng.gen::<f64>();
    Ok(Instance {
        halfspace,
        active,
        u: Field::new(grid.clone(), u, 1.0)?,
        v: Field::new(grid.clone(), v, v_far)?,
    })
}

fn judge(grid: &Grid2D, inst: &Instance, u: &Field, v: &Field, res: (f64, f64)) -> InstanceReport {
    let mut min_gap = f64::INFINITY;
    let mut argmin = [f64::NAN; 2];
    let mut min_u = f64::INFINITY;
    for k in grid.exterior_cells() {
        let gap = u.get(k) - v.get(k);
        if gap < min_gap {
            min_gap = gap;
            argmin = grid.center(k);
        }
        if inst.active[k] {
            min_u = min_u.min(u.get(k));
        }
    }
    InstanceReport {
        halfspace_normal: inst.halfspace.e,
        halfspace_offset: inst.halfspace.offset,
        min_gap,
        argmin,
        min_u_in_h: min_u,
        residual_u: res.0,
        residual_v: res.1,
        pass: min_gap >= -TOL_ORDER,
    }
}

/// Random half-space instances of the weak comparison principle: a
/// supersolution `u >= 1 - c0` and a subsolution `v` on `H`, ordered outside
/// `H`, must stay ordered inside. Each instance is paired with a negative
/// control whose outside data violate the ordering.
pub fn discrete_weak_max_test(
    kernel: &KernelSpec,
    obstacle: &Obstacle,
    reaction: &BistableSpec,
    opts: &WeakMaxOptions,
) -> Result<WeakMaxReport> {
    let grid = Arc::new(Grid2D::with_obstacle(
        opts.halfwidth,
        opts.n_cells,
        obstacle,
    )?);
    let weights = operator_weights_nonneg(&grid, kernel)?;
    if !weights.nonneg {
        return Err(Error::NegativeWeight {
            radius: weights.offending_radius.unwrap_or(f64::NAN),
            weight: weights.min_weight.min(weights.min_tail),
        });
    }
    let well = reaction
        .well_constants()
        .ok_or_else(|| Error::Hypothesis("f' is not negative near 1".into()))?;
    let evolver = Evolver::new(grid.clone(), kernel, reaction)?;

    let outcomes: Vec<Result<(InstanceReport, InstanceReport)>> = (0..opts.instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(i as u64));
            let inst = draw_instance(&grid, obstacle, well.c0, &mut rng)?;
            let (u, ru) = relax(
                &evolver,
                inst.u.clone(),
                &inst.active,
                opts.steady_tol,
                opts.max_steps,
            )?;
            let (v, rv) = relax(
                &evolver,
                inst.v.clone(),
                &inst.active,
                opts.steady_tol,
                opts.max_steps,
            )?;
            let report = judge(&grid, &inst, &u, &v, (ru, rv));

            // Negative control: lift v above u on a patch outside H.
            let outside: Vec<usize> = grid.exterior_cells().filter(|&k| !inst.active[k]).collect();
            let seed_cell = grid.center(outside[rng.gen_range(0..outside.len())]);
            let radius = 2.0 * grid.h();
            let mut corrupted = inst.v.values().to_vec();
            for &k in &outside {
                let x = grid.center(k);
                if (x[0] - seed_cell[0]).hypot(x[1] - seed_cell[1]) <= radius {
                    corrupted[k] = (inst.u.get(k) + 0.05 * well.c0).min(1.0);
                }
            }
            let bad = inst.v.with_values(corrupted)?;
            let (bad, rb) = relax(&evolver, bad, &inst.active, opts.steady_tol, opts.max_steps)?;
            let control = judge(&grid, &inst, &u, &bad, (ru, rb));
            Ok((report, control))
        })
        .collect();

    let mut instances = Vec::with_capacity(opts.instances);
    let mut controls = Vec::with_capacity(opts.instances);
    for outcome in outcomes {
        let (a, b) = outcome?;
        instances.push(a);
        controls.push(b);
    }
    let passed = instances.iter().filter(|r| r.pass).count();
    let controls_detected = controls.iter().filter(|r| !r.pass).count();
    Ok(WeakMaxReport {
        c0: well.c0,
        c1: well.c1,
        pass: passed == instances.len() && controls_detected == controls.len(),
        instances,
        passed,
        controls,
        controls_detected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StrongMaxVerdict {
    /// `u - v` vanishes on the whole connected set.
    IdenticallyEqual,
    /// `v` is a strict subsolution at the touching cell, so no supersolution
    /// can touch it there.
    TouchingForbidden,
    /// Touching without equality, and `v` is not strict at the touching cell.
    TouchingWithoutEquality,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongMaxReport {
    pub touching_cell: usize,
    pub touching_point: Point,
    pub touching_gap: f64,
    pub component_cells: usize,
    /// `max |u - v|` over the connected set.
    pub max_gap_on_component: f64,
    pub residual_u: f64,
    pub residual_v: f64,
    /// `L (u - v)` at the touching cell; nonnegative whenever `v <= u`.
    pub operator_gap: f64,
    pub verdict: StrongMaxVerdict,
}

/// Touching analysis for `v <= u` on the closed half-space.
pub fn discrete_strong_max_probe(
    u: &Field,
    v: &Field,
    halfspace: &HalfSpace,
    kernel: &KernelSpec,
    reaction: &BistableSpec,
) -> Result<StrongMaxReport> {
    let grid = u.grid().clone();
    if **v.grid() != *grid {
        return Err(Error::DimensionMismatch {
            expected: grid.cell_count(),
            got: v.grid().cell_count(),
        });
    }
    let mut worst = f64::INFINITY;
    for k in grid.exterior_cells() {
        worst = worst.min(u.get(k) - v.get(k));
    }
    if worst < -TOL_ORDER {
        return Err(Error::Hypothesis(format!("v exceeds u by {:.3e}", -worst)));
    }
    let region: Vec<bool> = (0..grid.cell_count())
        .map(|k| grid.is_exterior(k) && halfspace.contains_closed(grid.center(k)))
        .collect();
    let (touch, gap) = (0..grid.cell_count())
        .filter(|&k| region[k])
        .map(|k| (k, u.get(k) - v.get(k)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| invalid("halfspace", "contains no exterior cell"))?;
    if gap > 1e-10 {
        return Err(Error::Hypothesis(format!(
            "no touching point: min(u - v) = {gap:.3e}"
        )));
    }

    let component = connected_component(&grid, kernel, &region, touch)?;
    let max_gap = component
        .iter()
        .map(|&k| (u.get(k) - v.get(k)).abs())
        .fold(0.0, f64::max);

    let evolver = Evolver::new(grid.clone(), kernel, reaction)?;
    let ru = evolver.rate(u)?[touch];
    let rv = evolver.rate(v)?[touch];
    let operator_gap = (ru - reaction.eval_f(u.get(touch))) - (rv - reaction.eval_f(v.get(touch)));
    let verdict = if max_gap <= 1e-9 {
        StrongMaxVerdict::IdenticallyEqual
    } else if rv > 0.0 {
        StrongMaxVerdict::TouchingForbidden
    } else {
        StrongMaxVerdict::TouchingWithoutEquality
    };
    Ok(StrongMaxReport {
        touching_cell: touch,
        touching_point: grid.center(touch),
        touching_gap: gap,
        component_cells: component.len(),
        max_gap_on_component: max_gap,
        residual_u: ru,
        residual_v: rv,
        operator_gap,
        verdict,
    })
}

/// Cells of `region` reachable from `start` through positive weights.
fn connected_component(
    grid: &Grid2D,
    kernel: &KernelSpec,
    region: &[bool],
    start: usize,
) -> Result<Vec<usize>> {
    let h = grid.h();
    let n = grid.n() as i64;
    // Positive weight reach in cells; compactly supported kernels only.
    let support = match kernel.table() {
        Some(t) => t.support_radius().min(kernel.cutoff_radius()),
        None => kernel.cutoff_radius(),
    };
    if !support.is_finite() || support >= 2.0 * grid.halfwidth() * std::f64::consts::SQRT_2 {
        return Ok((0..grid.cell_count()).filter(|&k| region[k]).collect());
    }
    let reach = (support / h).ceil() as i64;
    let mut offsets = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            if (dx, dy) == (0, 0) {
                continue;
            }
            let r = h * ((dx * dx + dy * dy) as f64).sqrt();
            if kernel.eval_radius(r)? > 0.0 {
                offsets.push((dx, dy));
            }
        }
    }
    let mut seen = vec![false; grid.cell_count()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut out = Vec::new();
    while let Some(k) = queue.pop_front() {
        out.push(k);
        let (ix, iy) = grid.coords(k);
        for &(dx, dy) in &offsets {
            let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
            if jx < 0 || jy < 0 || jx >= n || jy >= n {
                continue;
            }
            let j = grid.index(jx as usize, jy as usize);
            if region[j] && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    Ok(out)
}

/// Options of [`check_liouville`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiouvilleOptions {
    /// Run on non-convex obstacles anyway; the report is then non-certifying.
    pub allow_nonconvex: bool,
    pub directions: Vec<Point>,
    pub wave: WaveOptions,
    pub weak_max: WeakMaxOptions,
}

impl Default for LiouvilleOptions {
    fn default() -> Self {
        Self {
            allow_nonconvex: false,
            directions: vec![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            wave: WaveOptions::default(),
            weak_max: WeakMaxOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlideResult {
    pub direction: Point,
    pub outcome: SlideOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiouvilleReport {
    pub steady_min: f64,
    pub steady_time: Option<f64>,
    pub final_residual: f64,
    pub gamma_observed: f64,
    pub tol_one: f64,
    pub steady_is_one: bool,
    /// `BelowGrid` only if every direction slides off the scan.
    pub r_star_estimate: Option<SlideOutcome>,
    pub sliding: Vec<SlideResult>,
    pub front_speed: Option<f64>,
    pub maxprinciple_pass: bool,
    pub convexity_certified: bool,
    pub certifying: bool,
    pub pass: bool,
}

/// Runs the configured problem to steady state and checks that it is `1`,
/// then exercises the sliding family and the comparison principles.
pub fn check_liouville(
    config: &SimConfig,
    tol_one: f64,
    opts: &LiouvilleOptions,
) -> Result<LiouvilleReport> {
    if !(tol_one > 0.0 && tol_one < 1.0) {
        return Err(invalid("tol_one", "must lie in (0, 1)"));
    }
    let obstacle = config
        .obstacle
        .as_ref()
        .ok_or_else(|| Error::Hypothesis("an obstacle is required".into()))?;
    let convexity_certified = obstacle.declared_convex() && obstacle.is_convex();
    if !convexity_certified && !opts.allow_nonconvex {
        return Err(Error::Hypothesis("obstacle is not convex".into()));
    }
    let conditions = check_conditions(&config.reaction);
    if !conditions.pass {
        return Err(Error::Hypothesis(format!(
            "reaction fails the bistable conditions: {conditions:?}"
        )));
    }
    if config.farfield != 1.0 {
        return Err(Error::Hypothesis("far-field value must be 1".into()));
    }

    let run = simulate(config)?;
    if run.steady_time.is_none() {
        return Err(Error::NoConvergence(format!(
            "no steady state by t = {} (residual {:.3e})",
            config.t_end, run.final_residual
        )));
    }
    let steady = &run.final_field;
    let steady_min = steady.exterior_range().0;
    let gamma_observed = run.gamma_observed().min(steady_min);
    let steady_is_one = steady_min >= 1.0 - tol_one;

    // Sliding needs a front of the projected one-dimensional operator.
    let kernel = &config.kernel;
    let mut sliding = Vec::new();
    let mut front_speed = None;
    if kernel.family() != KernelFamily::RadialTable && kernel.is_fractional() {
        let wave = WaveOptions {
            c_norm: kernel.projected_constant()?,
            ..opts.wave.clone()
        };
        let profile = solve_front_with(&config.reaction, kernel.s(), &wave)?;
        front_speed = Some(profile.speed_c);
        for &e in &opts.directions {
            let outcome = sliding_r_star(steady, &profile, e, TOL_SLIDE)?;
            sliding.push(SlideResult {
                direction: unit(e)?,
                outcome,
            });
        }
    }
    let r_star_estimate = if sliding.is_empty() {
        None
    } else if sliding.iter().all(|s| s.outcome == SlideOutcome::BelowGrid) {
        Some(SlideOutcome::BelowGrid)
    } else {
        sliding
            .iter()
            .map(|s| s.outcome)
            .find(|o| *o != SlideOutcome::BelowGrid)
    };

    // The comparison test runs on a small box that still holds the obstacle.
    let (lo, hi) = obstacle.bounding_box();
    let extent = lo
        .iter()
        .chain(hi.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let weak_opts = WeakMaxOptions {
        halfwidth: opts.weak_max.halfwidth.max(2.0 * extent),
        ..opts.weak_max.clone()
    };
    // A non-convex shape (exploratory runs only) is tested against
    // half-spaces clear of its hull.
    let comparison_obstacle = if convexity_certified {
        obstacle.clone()
    } else {
        obstacle.hull()?
    };
    let maxprinciple_pass =
        discrete_weak_max_test(kernel, &comparison_obstacle, &config.reaction, &weak_opts)?.pass;

    let slide_ok = matches!(r_star_estimate, Some(SlideOutcome::BelowGrid));
    let pass = steady_is_one && gamma_observed > 0.0 && slide_ok && maxprinciple_pass;
    Ok(LiouvilleReport {
        steady_min,
        steady_time: run.steady_time,
        final_residual: run.final_residual,
        gamma_observed,
        tol_one,
        steady_is_one,
        r_star_estimate,
        sliding,
        front_speed,
        maxprinciple_pass,
        convexity_certified,
        certifying: convexity_certified,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::make_kernel;
    use crate::reaction::cubic_bistable;
    use crate::wave::WaveOptions;

    fn front() -> WaveProfile {
        let f = cubic_bistable(0.2).unwrap();
        let opts = WaveOptions {
            halfwidth: 30.0,
            h: 0.05,
            coarse_h: 0.1,
            ..WaveOptions::default()
        };
        solve_front_with(&f, 0.5, &opts).unwrap()
    }

    #[test]
    fn sliding_on_constant_one_is_below_grid() {
        let w = front();
        let g = Arc::new(Grid2D::new(5.0, 20).unwrap());
        let u = Field::constant(g, 1.0, 1.0).unwrap();
        assert_eq!(
            sliding_r_star(&u, &w, [1.0, 0.0], TOL_SLIDE).unwrap(),
            SlideOutcome::BelowGrid
        );
        assert_eq!(claim_r0_exists(&u, &w, [0.0, 1.0]).unwrap(), -15.0);
    }

    #[test]
    fn sliding_recovers_the_translation() {
        let w = front();
        let g = Arc::new(Grid2D::new(5.0, 40).unwrap());
        let u = Field::from_fn(g.clone(), 1.0, |x| w.eval(x[0] - 2.0)).unwrap();
        match sliding_r_star(&u, &w, [1.0, 0.0], TOL_SLIDE).unwrap() {
            SlideOutcome::Found(r) => assert!((r - 2.0).abs() <= g.h(), "{r}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn r0_orders_the_front_below() {
        let w = front();
        let g = Arc::new(Grid2D::new(5.0, 20).unwrap());
        let u = Field::from_fn(g.clone(), 1.0, |x| 0.3 + 0.05 * x[0].sin()).unwrap();
        let r0 = claim_r0_exists(&u, &w, [1.0, 0.0]).unwrap();
        for k in g.exterior_cells() {
            assert!(w.eval(g.center(k)[0] - r0) <= u.get(k));
        }
        let zero = Field::constant(g, 0.0, 1.0).unwrap();
        assert!(claim_r0_exists(&zero, &w, [1.0, 0.0]).is_err());
    }

    #[test]
    fn strong_probe_reports_equality_and_missing_touch() {
        let disk = Obstacle::disk([0.0, 0.0], 1.0).unwrap();
        let g = Arc::new(Grid2D::with_obstacle(3.0, 24, &disk).unwrap());
        let k = make_kernel(KernelFamily::RegularizedFractional, 0.5, 2, 0.01, 1.0).unwrap();
        let f = cubic_bistable(0.1).unwrap();
        let hs = disk.separating_halfspace([2.0, 0.0]).unwrap();
        let u = Field::constant(g.clone(), 0.7, 0.7).unwrap();
        let rep = discrete_strong_max_probe(&u, &u, &hs, &k, &f).unwrap();
        assert_eq!(rep.verdict, StrongMaxVerdict::IdenticallyEqual);
        let lower = Field::constant(g, 0.6, 0.7).unwrap();
        assert!(matches!(
            discrete_strong_max_probe(&u, &lower, &hs, &k, &f),
            Err(Error::Hypothesis(_))
        ));
        assert!(discrete_strong_max_probe(&lower, &u, &hs, &k, &f).is_err());
    }
}
