//! Forward-Euler integration of `u_t = L u + f(u)` on masked grids.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Obstacle;
use crate::grid::{Field, Grid2D};
use crate::kernel::KernelSpec;
use crate::operator::{operator_weights_nonneg, FastPlan};
use crate::reaction::BistableSpec;

/// Fraction of the positivity bound used for the time step.
pub const SAFETY: f64 = 0.9;

/// Explicit step for which one update maps `[0, 1]` fields into `[0, 1]`.
pub fn stable_dt(grid: &Arc<Grid2D>, kernel: &KernelSpec, reaction_lip: f64) -> Result<f64> {
    let plan = FastPlan::new(grid.clone(), kernel)?;
    stable_dt_for_plan(&plan, reaction_lip)
}

pub fn stable_dt_for_plan(plan: &FastPlan, reaction_lip: f64) -> Result<f64> {
    if !(reaction_lip >= 0.0) {
        return Err(invalid("lip_bound", "must be nonnegative"));
    }
    let report = operator_weights_nonneg(plan.grid(), plan.kernel())?;
    if !report.nonneg {
        return Err(Error::NegativeWeight {
            radius: report.offending_radius.unwrap_or(f64::NAN),
            weight: report.min_weight.min(report.min_tail),
        });
    }
    let lambda = plan.lambda_max();
    if !(lambda + reaction_lip > 0.0) {
        return Err(invalid("kernel", "operator has no weight"));
    }
    Ok(SAFETY / (lambda + reaction_lip))
}

/// Operator plan plus nonlinearity; reused across steps.
#[derive(Debug, Clone)]
pub struct Evolver {
    plan: FastPlan,
    reaction: BistableSpec,
    dt_bound: f64,
}

impl Evolver {
    pub fn new(grid: Arc<Grid2D>, kernel: &KernelSpec, reaction: &BistableSpec) -> Result<Self> {
        let plan = FastPlan::new(grid, kernel)?;
        Self::from_plan(plan, reaction)
    }

    pub fn from_plan(plan: FastPlan, reaction: &BistableSpec) -> Result<Self> {
        let dt_bound = stable_dt_for_plan(&plan, reaction.lip_bound())?;
        Ok(Self {
            plan,
            reaction: reaction.clone(),
            dt_bound,
        })
    }

    pub fn plan(&self) -> &FastPlan {
        &self.plan
    }

    pub fn reaction(&self) -> &BistableSpec {
        &self.reaction
    }

    pub fn stable_dt(&self) -> f64 {
        self.dt_bound
    }

    /// `L u + f(u)` at every cell (zero at obstacle cells).
    pub fn rate(&self, field: &Field) -> Result<Vec<f64>> {
        let mut rate = self.plan.apply(field)?;
        for k in field.grid().exterior_cells() {
            rate[k] += self.reaction.eval_f(field.get(k));
        }
        Ok(rate)
    }

    /// Max-norm of `L u + f(u)` over exterior cells.
    pub fn residual(&self, field: &Field) -> Result<f64> {
        Ok(max_abs(&self.rate(field)?))
    }

    /// One forward-Euler step; refuses `dt` above the stable bound and reports
    /// non-finite or out-of-range values instead of clipping them.
    pub fn step(&self, field: &Field, dt: f64) -> Result<Field> {
        Ok(self.step_with_rate(field, dt)?.0)
    }

    /// Step and the rate it used (whose max-norm is the pre-step residual).
    pub fn step_with_rate(&self, field: &Field, dt: f64) -> Result<(Field, Vec<f64>)> {
        if !(dt > 0.0) || dt > self.dt_bound * (1.0 + 1e-12) {
            return Err(Error::UnstableStep {
                dt,
                bound: self.dt_bound,
            });
        }
        let rate = self.rate(field)?;
        let grid = field.grid();
        let mut next = field.values().to_vec();
        for k in grid.exterior_cells() {
            let v = next[k] + dt * rate[k];
            if !v.is_finite() {
                return Err(Error::NonFinite { cell: k });
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvariantViolated { cell: k, value: v });
            }
            next[k] = v;
        }
        Ok((field.with_values(next)?, rate))
    }
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Single step with a freshly built plan.
pub fn step(field: &Field, kernel: &KernelSpec, reaction: &BistableSpec, dt: f64) -> Result<Field> {
    Evolver::new(field.grid().clone(), kernel, reaction)?.step(field, dt)
}

/// `max_i |L u + f(u)|` with a freshly built plan.
pub fn residual(field: &Field, kernel: &KernelSpec, reaction: &BistableSpec) -> Result<f64> {
    Evolver::new(field.grid().clone(), kernel, reaction)?.residual(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeStep {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    /// `u = 1` where `x . direction < offset`, else 0.
    HeavisideHalfPlane {
        direction: [f64; 2],
        offset: f64,
    },
    Constant(f64),
    /// One value per grid cell, row-major from the lowest row.
    Custom(Vec<f64>),
}

impl InitialCondition {
    pub fn build(&self, grid: &Arc<Grid2D>, farfield: f64) -> Result<Field> {
        let field = match self {
            Self::HeavisideHalfPlane { direction, offset } => {
                let d = direction;
                let norm = d[0].hypot(d[1]);
                if !(norm > 0.0) {
                    return Err(invalid("direction", "must be nonzero"));
                }
                Field::from_fn(grid.clone(), farfield, |x| {
                    if (x[0] * d[0] + x[1] * d[1]) / norm < *offset {
                        1.0
                    } else {
                        0.0
                    }
                })?
            }
            Self::Constant(c) => Field::constant(grid.clone(), *c, farfield)?,
            Self::Custom(values) => Field::new(grid.clone(), values.clone(), farfield)?,
        };
        let (lo, hi) = field.exterior_range();
        if lo < 0.0 || hi > 1.0 {
            return Err(invalid("initial", "initial values must lie in [0, 1]"));
        }
        Ok(field)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub box_halfwidth: f64,
    pub n_cells: usize,
    pub farfield: f64,
    pub obstacle: Option<Obstacle>,
    pub kernel: KernelSpec,
    pub reaction: BistableSpec,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub dt: TimeStep,
    pub steady_tol: f64,
    pub initial: InitialCondition,
}

/// Snapshot times of the reference invasion run.
pub const DEFAULT_SNAPSHOTS: [f64; 8] = [0.0, 40.0, 80.0, 120.0, 160.0, 200.0, 240.0, 280.0];
pub const DEFAULT_STEADY_TOL: f64 = 1e-6;

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(invalid("t_end", "must be positive"));
        }
        if self.snapshot_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("snapshot_times", "must be strictly increasing"));
        }
        if self
            .snapshot_times
            .iter()
            .any(|&t| !(0.0..=self.t_end).contains(&t))
        {
            return Err(invalid("snapshot_times", "must lie in [0, t_end]"));
        }
        if !(self.steady_tol > 0.0) {
            return Err(invalid("steady_tol", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.farfield) {
            return Err(invalid("farfield", "must lie in [0, 1]"));
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(invalid("dt", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Arc<Grid2D>> {
        let grid = match &self.obstacle {
            Some(o) => Grid2D::with_obstacle(self.box_halfwidth, self.n_cells, o)?,
            None => Grid2D::new(self.box_halfwidth, self.n_cells)?,
        };
        Ok(Arc::new(grid))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// Time of the recorded state; equals the requested time after steady exit.
    pub time: f64,
    pub requested: f64,
    pub field: Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub time: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub history: Vec<HistoryEntry>,
    pub final_field: Field,
    pub final_time: f64,
    pub final_residual: f64,
    pub steps: usize,
    pub dt: f64,
    /// First time the residual dropped below the tolerance.
    pub steady_time: Option<f64>,
}

impl Trajectory {
    /// Smallest exterior minimum over accepted states with `t > 0`
    /// (the initial state if no step was taken).
    pub fn gamma_observed(&self) -> f64 {
        let later = self
            .history
            .iter()
            .filter(|e| e.time > 0.0)
            .map(|e| e.min)
            .fold(f64::INFINITY, f64::min);
        if later.is_finite() {
            later
        } else {
            self.history.first().map_or(f64::NAN, |e| e.min)
        }
    }

    /// Whether the min history is nondecreasing from the first time it exceeds `level`.
    pub fn min_nondecreasing_above(&self, level: f64) -> bool {
        let start = self.history.iter().position(|e| e.min > level);
        match start {
            None => true,
            Some(i) => self.history[i..].windows(2).all(|w| w[1].min >= w[0].min),
        }
    }
}

/// Integrates to `t_end` or until the residual drops below `steady_tol`.
pub fn simulate(config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    let grid = config.build_grid()?;
    let evolver = Evolver::new(grid.clone(), &config.kernel, &config.reaction)?;
    let initial = config.initial.build(&grid, config.farfield)?;
    simulate_from(&evolver, initial, config)
}

/// As [`simulate`], starting from a prepared evolver and field.
pub fn simulate_from(evolver: &Evolver, initial: Field, config: &SimConfig) -> Result<Trajectory> {
    let dt = match config.dt {
        TimeStep::Auto => evolver.stable_dt(),
        TimeStep::Fixed(dt) => {
            if dt > evolver.stable_dt() * (1.0 + 1e-12) {
                return Err(Error::UnstableStep {
                    dt,
                    bound: evolver.stable_dt(),
                });
            }
            dt
        }
    };
    let total_steps = (config.t_end / dt - 1e-9).ceil().max(1.0) as usize;
    // Each requested time maps to the nearest completed step.
    let targets: Vec<usize> = config
        .snapshot_times
        .iter()
        .map(|&t| ((t / dt).round() as usize).min(total_steps))
        .collect();
    let time_of = |k: usize| {
        if k == total_steps {
            config.t_end
        } else {
            k as f64 * dt
        }
    };

    let mut field = initial;
    let mut snapshots = Vec::with_capacity(targets.len());
    let mut next_snapshot = 0;
    let (lo, hi) = field.exterior_range();
    let mut history = vec![HistoryEntry {
        time: 0.0,
        min: lo,
        max: hi,
    }];
    let mut steady_time = None;
    let mut residual;
    let mut k = 0;
    loop {
        while next_snapshot < targets.len() && targets[next_snapshot] == k {
            snapshots.push(Snapshot {
                time: time_of(k),
                requested: config.snapshot_times[next_snapshot],
                field: field.clone(),
            });
            next_snapshot += 1;
        }
        let rate = evolver.rate(&field)?;
        residual = max_abs(&rate);
        if residual < config.steady_tol {
            steady_time = Some(time_of(k));
            break;
        }
        if k == total_steps {
            break;
        }
        let h = time_of(k + 1) - time_of(k);
        let (next, _) = evolver.step_with_rate(&field, h)?;
        field = next;
        k += 1;
        let (lo, hi) = field.exterior_range();
        history.push(HistoryEntry {
            time: time_of(k),
            min: lo,
            max: hi,
        });
    }
    // After a steady exit the remaining snapshots repeat the final state.
    for &requested in &config.snapshot_times[next_snapshot..] {
        snapshots.push(Snapshot {
            time: requested,
            requested,
            field: field.clone(),
        });
    }
    Ok(Trajectory {
        snapshots,
        history,
        final_time: time_of(k),
        final_field: field,
        final_residual: residual,
        steps: k,
        dt,
        steady_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{make_kernel, KernelFamily};
    use crate::reaction::cubic_bistable;

    fn setup(n: usize) -> (Arc<Grid2D>, KernelSpec, BistableSpec) {
        let disk = Obstacle::disk([0.0, 0.0], 1.0).unwrap();
        let grid = Arc::new(Grid2D::with_obstacle(5.0, n, &disk).unwrap());
        let k = make_kernel(KernelFamily::RegularizedFractional, 0.5, 2, 0.01, 1.0).unwrap();
        (grid, k, cubic_bistable(0.1).unwrap())
    }

    #[test]
    fn dt_scales_inversely_with_c_norm() {
        let (grid, k, _) = setup(24);
        let a = stable_dt(&grid, &k, 0.0).unwrap();
        let b = stable_dt(&grid, &k.clone().with_c_norm(2.0).unwrap(), 0.0).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        let plan = FastPlan::new(grid, &k).unwrap();
        assert!((a - 0.9 / plan.lambda_max()).abs() < 1e-15);
    }

    #[test]
    fn fixed_points() {
        let (grid, k, f) = setup(16);
        let ev = Evolver::new(grid.clone(), &k, &f).unwrap();
        let dt = ev.stable_dt();
        for (c, far) in [(1.0, 1.0), (0.0, 0.0), (0.1, 0.1)] {
            let u = Field::constant(grid.clone(), c, far).unwrap();
            assert_eq!(ev.residual(&u).unwrap(), 0.0);
            assert_eq!(ev.step(&u, dt).unwrap(), u);
        }
    }

    #[test]
    fn perturbation_above_theta_grows() {
        // Periodic grid: no far-field leak, so only the reaction changes the mass.
        let (_, k, f) = setup(16);
        let grid = Arc::new(Grid2D::periodic(5.0, 16).unwrap());
        let ev = Evolver::new(grid.clone(), &k, &f).unwrap();
        let mut u = Field::constant(grid.clone(), 0.1, 0.1).unwrap();
        let probe = grid.index(2, 2);
        let mut values = u.values().to_vec();
        values[probe] += 1e-3;
        u = u.with_values(values).unwrap();
        let mut excess = 1e-3;
        for _ in 0..3 {
            u = ev.step(&u, ev.stable_dt()).unwrap();
            let now: f64 = grid.exterior_cells().map(|c| u.get(c) - 0.1).sum();
            assert!(now > excess);
            excess = now;
        }
    }

    #[test]
    fn unstable_step_is_refused() {
        let (grid, k, f) = setup(16);
        let ev = Evolver::new(grid.clone(), &k, &f).unwrap();
        let u = Field::constant(grid, 0.5, 0.5).unwrap();
        assert!(matches!(
            ev.step(&u, 2.0 * ev.stable_dt()),
            Err(Error::UnstableStep { .. })
        ));
    }

    #[test]
    fn constant_one_is_steady_at_once() {
        let (_, k, f) = setup(16);
        let config = SimConfig {
            box_halfwidth: 5.0,
            n_cells: 16,
            farfield: 1.0,
            obstacle: Some(Obstacle::disk([0.0, 0.0], 1.0).unwrap()),
            kernel: k,
            reaction: f,
            t_end: 10.0,
            snapshot_times: vec![0.0, 5.0, 10.0],
            dt: TimeStep::Auto,
            steady_tol: 1e-6,
            initial: InitialCondition::Constant(1.0),
        };
        let traj = simulate(&config).unwrap();
        assert_eq!(traj.steps, 0);
        assert_eq!(traj.steady_time, Some(0.0));
        assert_eq!(traj.snapshots.len(), 3);
        assert_eq!(traj.final_residual, 0.0);
    }

    #[test]
    fn snapshot_past_end_is_rejected() {
        let (_, k, f) = setup(16);
        let config = SimConfig {
            box_halfwidth: 5.0,
            n_cells: 16,
            farfield: 0.0,
            obstacle: None,
            kernel: k,
            reaction: f,
            t_end: 10.0,
            snapshot_times: vec![0.0, 20.0],
            dt: TimeStep::Auto,
            steady_tol: 1e-6,
            initial: InitialCondition::Constant(0.0),
        };
        assert!(simulate(&config).is_err());
    }
}
