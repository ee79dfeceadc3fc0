use std::sync::Arc;

use obstacle_liouville::evolution::{InitialCondition, SimConfig, TimeStep};
use obstacle_liouville::geometry::{Obstacle, RasterMask};
use obstacle_liouville::grid::{Field, Grid2D};
use obstacle_liouville::kernel::{make_kernel, KernelFamily, KernelSpec};
use obstacle_liouville::liouville::{
    check_liouville, claim_r0_exists, discrete_strong_max_probe, sliding_r_star, LiouvilleOptions,
    SlideOutcome, StrongMaxVerdict, TOL_SLIDE,
};
use obstacle_liouville::reaction::cubic_bistable;
use obstacle_liouville::wave::{solve_front_with, WaveOptions, WaveProfile};
use obstacle_liouville::Error;
use proptest::prelude::*;

fn kernel() -> KernelSpec {
    make_kernel(KernelFamily::RegularizedFractional, 0.5, 2, 0.01, 1.0).unwrap()
}

fn quick(theta: f64, phase_shift: i64) -> WaveProfile {
    let opts = WaveOptions {
        halfwidth: 20.0,
        h: 0.05,
        phase_shift,
        ..WaveOptions::default()
    };
    solve_front_with(&cubic_bistable(theta).unwrap(), 0.5, &opts).unwrap()
}

#[test]
fn speed_sign_follows_the_integral() {
    let mut speeds = Vec::new();
    for theta in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let p = quick(theta, 0);
        assert!(p.monotone && p.residual_norm <= 1e-6);
        let integral = (1.0 - 2.0 * theta) / 12.0;
        if integral.abs() > 1e-12 {
            assert_eq!(p.speed_c.signum(), integral.signum(), "theta {theta}");
        } else {
            assert!(p.speed_c.abs() <= 1e-4);
        }
        speeds.push(p.speed_c);
    }
    assert!((speeds[0] + speeds[4]).abs() <= 1e-3);
    assert!((speeds[1] + speeds[3]).abs() <= 1e-3);
}

#[test]
fn pinning_node_barely_moves_the_front() {
    // The window truncates the tails, so moving the front inside it shifts
    // the speed slightly; the residual stays at solver precision.
    let solve = |shift: i64| {
        let opts = WaveOptions {
            halfwidth: 40.0,
            h: 0.05,
            phase_shift: shift,
            ..WaveOptions::default()
        };
        solve_front_with(&cubic_bistable(0.3).unwrap(), 0.75, &opts).unwrap()
    };
    let base = solve(0);
    for shift in [-20, 7, 30] {
        let moved = solve(shift);
        assert!((moved.speed_c - base.speed_c).abs() <= 1e-3 * base.speed_c.abs());
        assert!((moved.residual_norm - base.residual_norm).abs() <= 1e-8);
        assert!(moved.monotone);
    }
}

#[test]
fn profile_nodes_are_nondecreasing() {
    let p = quick(0.15, 0);
    assert!(p.phi.windows(2).all(|w| w[1] >= w[0]));
}

fn plane_field(grid: &Arc<Grid2D>, profile: &WaveProfile, e: [f64; 2], r: f64, lift: f64) -> Field {
    Field::from_fn(grid.clone(), 1.0, |x| {
        (profile.eval(x[0] * e[0] + x[1] * e[1] - r) + lift).min(1.0)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn raising_u_never_raises_r_star(r in -6.0f64..6.0, lift in 0.0f64..0.3, tilt in 0.0f64..1.0) {
        let profile = quick(0.2, 0);
        let grid = Arc::new(Grid2D::new(8.0, 24).unwrap());
        let e = [1.0, tilt];
        let low = plane_field(&grid, &profile, e, r, 0.0);
        let high = plane_field(&grid, &profile, e, r, lift);
        let value = |o: SlideOutcome| match o {
            SlideOutcome::BelowGrid => f64::NEG_INFINITY,
            SlideOutcome::Found(v) => v,
            SlideOutcome::AboveGrid => f64::INFINITY,
        };
        let a = value(sliding_r_star(&low, &profile, e, TOL_SLIDE).unwrap());
        let b = value(sliding_r_star(&high, &profile, e, TOL_SLIDE).unwrap());
        prop_assert!(b <= a);
    }

    #[test]
    fn r0_orders_the_front(min in 0.05f64..0.9) {
        let profile = quick(0.2, 0);
        let grid = Arc::new(Grid2D::new(6.0, 20).unwrap());
        let u = Field::from_fn(grid, 1.0, |x| min + (1.0 - min) * 0.5 * (1.0 + (x[0] * 0.7).sin())).unwrap();
        let r0 = claim_r0_exists(&u, &profile, [0.0, 1.0]).unwrap();
        let g = u.grid();
        for k in g.exterior_cells() {
            prop_assert!(profile.eval(g.center(k)[1] - r0) <= u.get(k));
        }
    }
}

#[test]
fn r0_needs_a_positive_floor() {
    let profile = quick(0.2, 0);
    let grid = Arc::new(Grid2D::new(6.0, 20).unwrap());
    let u = Field::from_fn(grid, 1.0, |x| if x[0] < 0.0 { 0.0 } else { 1.0 }).unwrap();
    assert!(claim_r0_exists(&u, &profile, [1.0, 0.0]).is_err());
}

#[test]
fn planar_touching_is_forbidden() {
    let k = kernel();
    let reaction = cubic_bistable(0.1).unwrap();
    let opts = WaveOptions {
        c_norm: k.projected_constant().unwrap(),
        ..WaveOptions::default()
    };
    let profile = solve_front_with(&reaction, 0.5, &opts).unwrap();
    let disk = Obstacle::disk([-4.0, 0.0], 1.0).unwrap();
    let grid = Arc::new(Grid2D::with_obstacle(8.0, 64, &disk).unwrap());
    let e = [1.0, 0.0];
    let hs = disk.separating_halfspace([-2.5, 0.0]).unwrap();
    let v = Field::from_fn(grid.clone(), 1.0, |x| profile.eval(x[0] - 2.0)).unwrap();
    // Touch at the cell nearest (2, 0), strictly above elsewhere.
    let touch = grid
        .exterior_cells()
        .min_by(|&a, &b| {
            let d = |k: usize| {
                let c = grid.center(k);
                (c[0] - 2.0).hypot(c[1])
            };
            d(a).total_cmp(&d(b))
        })
        .unwrap();
    let t = grid.center(touch);
    let u = Field::from_fn(grid.clone(), 1.0, |x| {
        let d2 = (x[0] - t[0]).powi(2) + (x[1] - t[1]).powi(2);
        let phi = profile.eval(x[0] * e[0] - 2.0);
        phi + (1.0 - phi) * (1.0 - (-d2).exp())
    })
    .unwrap();
    let report = discrete_strong_max_probe(&u, &v, &hs, &k, &reaction).unwrap();
    assert_eq!(report.touching_cell, touch);
    assert_eq!(
        report.verdict,
        StrongMaxVerdict::TouchingForbidden,
        "{report:?}"
    );
    assert!(report.residual_v > 0.0);
}

fn small_config(obstacle: Obstacle) -> SimConfig {
    SimConfig {
        box_halfwidth: 6.0,
        n_cells: 32,
        farfield: 1.0,
        obstacle: Some(obstacle),
        kernel: kernel(),
        reaction: cubic_bistable(0.1).unwrap(),
        t_end: 200.0,
        snapshot_times: vec![0.0],
        dt: TimeStep::Auto,
        steady_tol: 1e-7,
        initial: InitialCondition::HeavisideHalfPlane {
            direction: [1.0, 0.0],
            offset: -2.0,
        },
    }
}

fn c_shape() -> Obstacle {
    let n = 32;
    let mut cells = vec![false; n * n];
    for iy in 10..22 {
        for ix in 10..22 {
            cells[iy * n + ix] = !(ix >= 14 && (14..18).contains(&iy));
        }
    }
    Obstacle::raster(RasterMask::new(6.0, n, cells).unwrap())
}

#[test]
fn certified_run_holds_all_three_pillars() {
    let opts = LiouvilleOptions::default();
    let report = check_liouville(
        &small_config(Obstacle::disk([0.0, 0.0], 1.0).unwrap()),
        0.05,
        &opts,
    )
    .unwrap();
    assert!(report.pass, "{report:?}");
    assert!(report.steady_is_one && report.maxprinciple_pass && report.certifying);
    assert_eq!(report.r_star_estimate, Some(SlideOutcome::BelowGrid));
    assert!(report.gamma_observed > 0.0 && report.gamma_observed <= report.steady_min);
    assert!((0.0..=1.0).contains(&report.steady_min));
}

#[test]
fn constant_one_passes_trivially() {
    let mut config = small_config(Obstacle::disk([0.0, 0.0], 1.0).unwrap());
    config.initial = InitialCondition::Constant(1.0);
    let report = check_liouville(&config, 0.05, &LiouvilleOptions::default()).unwrap();
    assert!(report.pass);
    assert_eq!(report.steady_min, 1.0);
}

#[test]
fn c_shape_is_refused_unless_overridden() {
    let config = small_config(c_shape());
    assert!(matches!(
        check_liouville(&config, 0.05, &LiouvilleOptions::default()),
        Err(Error::Hypothesis(_))
    ));
    let opts = LiouvilleOptions {
        allow_nonconvex: true,
        ..LiouvilleOptions::default()
    };
    let report = check_liouville(&config, 0.05, &opts).unwrap();
    assert!(!report.certifying && !report.convexity_certified);
    assert!(report.pass, "{report:?}");
}
