//! Small-scale self checks: oracle equivalence, invariant region, weight signs
//! and comparison. Everything is seeded and sized at most 32 x 32, so the table
//! is reproducible byte for byte and runs in seconds.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::evolution::SAFETY;
use crate::geometry::Obstacle;
use crate::grid::{Field, Grid2D};
use crate::kernel::{make_kernel, KernelFamily, KernelSpec, RadialTable};
use crate::liouville::{discrete_weak_max_test, WeakMaxOptions};
use crate::operator::{apply_bruteforce, operator_weights_nonneg, FastPlan};
use crate::reaction::{cubic_bistable, BistableSpec};

/// Deliberate defects for checking that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Negates the operator.
    FlipOperatorSign,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn all_pass(&self) -> bool {
        self.suites.iter().all(|s| s.pass)
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<22} {:<6} detail", "suite", "result");
        for s in &self.suites {
            let verdict = if s.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{:<22} {:<6} {}", s.name, verdict, s.detail);
        }
        out
    }
}

/// Operator under test, possibly mutated.
struct Op {
    plan: FastPlan,
    mutation: Mutation,
}

impl Op {
    fn new(grid: Arc<Grid2D>, kernel: &KernelSpec, mutation: Mutation) -> Result<Self> {
        Ok(Self {
            plan: FastPlan::new(grid, kernel)?,
            mutation,
        })
    }

    fn apply(&self, field: &Field) -> Result<Vec<f64>> {
        let mut out = self.plan.apply(field)?;
        if self.mutation == Mutation::FlipOperatorSign {
            out.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(out)
    }

    fn dt(&self, reaction: &BistableSpec) -> f64 {
        SAFETY / (self.plan.lambda_max() + reaction.lip_bound())
    }

    /// Unclipped forward-Euler values.
    fn euler(&self, field: &Field, reaction: &BistableSpec, dt: f64) -> Result<Vec<f64>> {
        let rate = self.apply(field)?;
        let mut next = field.values().to_vec();
        for k in field.grid().exterior_cells() {
            next[k] += dt * (rate[k] + reaction.eval_f(next[k]));
        }
        Ok(next)
    }
}

fn kernel(s: f64) -> Result<KernelSpec> {
    make_kernel(KernelFamily::RegularizedFractional, s, 2, 0.01, 1.0)
}

fn tent_kernel() -> Result<KernelSpec> {
    let radii: Vec<f64> = (0..=40).map(|i| 0.05 * i as f64).collect();
    let values = radii.iter().map(|r| 1.0 - r / 2.0).collect();
    KernelSpec::radial_table(2, RadialTable::new(radii, values)?, 1.0)?.normalized_to_unit_mass()
}

fn random_field(grid: &Arc<Grid2D>, rng: &mut ChaCha8Rng) -> Result<Field> {
    let values = (0..grid.cell_count()).map(|_| rng.gen::<f64>()).collect();
    let far = rng.gen::<f64>();
    Field::new(grid.clone(), values, far)
}

fn oracle_suite(mutation: Mutation) -> Result<SuiteResult> {
    let obstacle = Obstacle::disk([0.3, -0.2], 0.7)?;
    let grid = Arc::new(Grid2D::with_obstacle(4.0, 32, &obstacle)?);
    let k = kernel(0.5)?;
    let op = Op::new(grid.clone(), &k, mutation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let f = random_field(&grid, &mut rng)?;
        let fast = op.apply(&f)?;
        let brute = apply_bruteforce(&f, &k)?;
        let scale = brute.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dev = fast
            .iter()
            .zip(&brute)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(dev / scale);
    }
    Ok(SuiteResult {
        name: "oracle-equivalence",
        pass: worst <= 1e-10,
        detail: format!("5 fields on 32x32, max rel dev {worst:.2e}"),
    })
}

fn invariant_suite(mutation: Mutation) -> Result<SuiteResult> {
    let obstacle = Obstacle::disk([0.0, 0.0], 1.0)?;
    let grid = Arc::new(Grid2D::with_obstacle(4.0, 24, &obstacle)?);
    let reaction = cubic_bistable(0.1)?;
    let op = Op::new(grid.clone(), &kernel(0.5)?, mutation)?;
    let dt = op.dt(&reaction);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..3 {
        let mut f = random_field(&grid, &mut rng)?;
        for _ in 0..200 {
            let next = op.euler(&f, &reaction, dt)?;
            for k in grid.exterior_cells() {
                lo = lo.min(next[k]);
                hi = hi.max(next[k]);
            }
            if !(lo >= 0.0 && hi <= 1.0) {
                break;
            }
            f = f.with_values(next)?;
        }
    }
    Ok(SuiteResult {
        name: "invariant-region",
        pass: lo >= 0.0 && hi <= 1.0,
        detail: format!("3 x 200 steps, range [{lo:.6}, {hi:.6}]"),
    })
}

fn weights_suite() -> Result<SuiteResult> {
    let obstacle = Obstacle::disk([0.0, 0.0], 1.0)?;
    let grid = Grid2D::with_obstacle(4.0, 32, &obstacle)?;
    let mut pass = true;
    let mut min = f64::INFINITY;
    for k in [kernel(0.25)?, kernel(0.5)?, kernel(0.75)?, tent_kernel()?] {
        let report = operator_weights_nonneg(&grid, &k)?;
        pass &= report.nonneg;
        min = min.min(report.min_weight.min(report.min_tail));
    }
    Ok(SuiteResult {
        name: "weight-nonnegativity",
        pass,
        detail: format!("4 kernels, min weight {min:.3e}"),
    })
}

fn comparison_suite(mutation: Mutation) -> Result<SuiteResult> {
    let obstacle = Obstacle::disk([0.0, 0.0], 1.0)?;
    let grid = Arc::new(Grid2D::with_obstacle(4.0, 24, &obstacle)?);
    let reaction = cubic_bistable(0.1)?;
    let op = Op::new(grid.clone(), &kernel(0.5)?, mutation)?;
    let dt = op.dt(&reaction);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    // Ordered pairs stay ordered under the explicit flow.
    let mut min_gap = f64::INFINITY;
    for _ in 0..3 {
        let upper: Vec<f64> = (0..grid.cell_count()).map(|_| rng.gen::<f64>()).collect();
        let lower = upper.iter().map(|u| u * rng.gen::<f64>()).collect();
        let far = rng.gen::<f64>();
        let mut u = Field::new(grid.clone(), upper, far)?;
        let mut v = Field::new(grid.clone(), lower, far * rng.gen::<f64>())?;
        for _ in 0..100 {
            u = u.with_values(op.euler(&u, &reaction, dt)?)?;
            v = v.with_values(op.euler(&v, &reaction, dt)?)?;
            for k in grid.exterior_cells() {
                min_gap = min_gap.min(u.get(k) - v.get(k));
            }
        }
    }
    let opts = WeakMaxOptions {
        n_cells: 16,
        instances: 5,
        ..WeakMaxOptions::default()
    };
    let weak = discrete_weak_max_test(&kernel(0.5)?, &obstacle, &reaction, &opts)?;
    let ordered = min_gap >= 0.0;
    Ok(SuiteResult {
        name: "comparison-principle",
        pass: ordered && weak.pass,
        detail: format!(
            "flow gap {min_gap:.3e}, weak max {}/{} with {}/{} controls",
            weak.passed,
            weak.instances.len(),
            weak.controls_detected,
            weak.controls.len()
        ),
    })
}

/// Runs every suite on the unmodified operator.
pub fn run_selftest() -> Result<SelftestReport> {
    run_selftest_with(Mutation::None)
}

pub fn run_selftest_with(mutation: Mutation) -> Result<SelftestReport> {
    Ok(SelftestReport {
        suites: vec![
            oracle_suite(mutation)?,
            invariant_suite(mutation)?,
            weights_suite()?,
            comparison_suite(mutation)?,
        ],
    })
}
