//! Travelling fronts `-c phi' + (-Δ)^s-type diffusion + f(phi) = 0` in one
//! dimension, with `phi(-inf) = 0`, `phi(+inf) = 1` and `phi(0) = 1/2`.
//!
//! The solve has two stages. A co-moving evolution on a coarse grid adjusts
//! the frame speed until the level set `phi = 1/2` stops drifting. Its profile
//! then seeds a damped Newton iteration on the fine grid, with GMRES and a
//! banded preconditioner bordered by the speed unknown.

mod linalg;
mod planar;

pub use planar::{planar_subsolution_check, PlanarReport};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::operator::{SampledProfile, SingularStencil};
use crate::reaction::{check_conditions, BistableSpec};

use linalg::{gmres, norm, Banded};

/// Knobs for [`solve_front_with`]. The defaults suit `s` in `[0.25, 0.75]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveOptions {
    /// Nodes cover `[-halfwidth, halfwidth]`.
    pub halfwidth: f64,
    pub h: f64,
    /// Constant in front of the singular integral.
    pub c_norm: f64,
    /// Required max residual over interior nodes.
    pub tol: f64,
    /// Newton stops once the full residual drops below this.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// The level `1/2` is pinned at node `mid + phase_shift`.
    pub phase_shift: i64,
    /// Width of the `tanh` initial guess of the co-moving stage.
    pub initial_width: f64,
    /// Spacing of the co-moving stage; at least `h`.
    pub coarse_h: f64,
    /// Stop the co-moving stage once the speed estimate moves less than this
    /// per unit time.
    pub coarse_tol: f64,
    pub coarse_t_max: f64,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            halfwidth: 40.0,
            h: 0.02,
            c_norm: 1.0,
            tol: 1e-6,
            newton_tol: 1e-10,
            max_newton: 40,
            phase_shift: 0,
            initial_width: 2.0,
            coarse_h: 0.08,
            coarse_tol: 1e-8,
            coarse_t_max: 1500.0,
        }
    }
}

/// A computed front on the nodes `start + k h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveProfile {
    pub s: f64,
    pub c_norm: f64,
    pub speed_c: f64,
    pub start: f64,
    pub h: f64,
    pub phi: Vec<f64>,
    /// Max residual over interior nodes, recomputed by direct summation.
    pub residual_norm: f64,
    pub monotone: bool,
    /// Whether `phi(-Z) <= 0.01` and `phi(Z) >= 0.99`.
    pub limits_ok: bool,
    pub newton_iterations: usize,
    pub coarse_time: f64,
}

impl WaveProfile {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn node(&self, k: usize) -> f64 {
        self.start + k as f64 * self.h
    }

    pub fn end(&self) -> f64 {
        self.node(self.phi.len() - 1)
    }

    fn interpolate(&self, z: f64) -> f64 {
        let t = (z - self.start) / self.h;
        let k = (t.floor() as usize).min(self.phi.len() - 2);
        let w = t - k as f64;
        self.phi[k] * (1.0 - w) + self.phi[k + 1] * w
    }

    /// Piecewise linear inside the grid; beyond it the values decay
    /// algebraically towards the limits, `|z|^(-2s)`, so `0 < phi < 1`.
    pub fn eval(&self, z: f64) -> f64 {
        let (lo, hi) = (self.start, self.end());
        let p = 2.0 * self.s;
        if z < lo {
            let anchor = lo.abs().max(self.h);
            return self.phi[0] * (anchor / (anchor + lo - z)).powf(p);
        }
        if z > hi {
            let anchor = hi.abs().max(self.h);
            let gap = 1.0 - self.phi[self.phi.len() - 1];
            return 1.0 - gap * (anchor / (anchor + z - hi)).powf(p);
        }
        self.interpolate(z)
    }

    /// Piecewise linear inside the grid, the limits `0` and `1` outside, as
    /// in the equation the profile solves.
    pub fn eval_with_limits(&self, z: f64) -> f64 {
        if z < self.start {
            0.0
        } else if z > self.end() {
            1.0
        } else {
            self.interpolate(z)
        }
    }

    /// Centered difference quotient at node `k`, limits past the ends.
    pub fn slope(&self, k: usize) -> f64 {
        let up = self.phi.get(k + 1).copied().unwrap_or(1.0);
        let down = if k == 0 { 0.0 } else { self.phi[k - 1] };
        (up - down) / (2.0 * self.h)
    }

    pub fn sampled(&self) -> SampledProfile {
        SampledProfile {
            start: self.start,
            h: self.h,
            values: self.phi.clone(),
            left: 0.0,
            right: 1.0,
        }
    }
}

fn node_count(halfwidth: f64, h: f64) -> Result<usize> {
    if !(halfwidth > 0.0) || !(h > 0.0) || !halfwidth.is_finite() {
        return Err(invalid(
            "wave grid",
            "halfwidth and spacing must be positive",
        ));
    }
    let cells = (halfwidth / h).round() as usize;
    if cells < 4 || ((cells as f64) * h - halfwidth).abs() > 1e-9 * halfwidth {
        return Err(invalid(
            "wave grid",
            "halfwidth must be a multiple of the spacing",
        ));
    }
    Ok(2 * cells + 1)
}

fn check_bistable(reaction: &BistableSpec) -> Result<()> {
    let r = check_conditions(reaction);
    let shape = r.roots_ok
        && r.negative_below_theta
        && r.positive_above_theta
        && r.fprime_zero_negative
        && r.fprime_theta_positive
        && r.fprime_one_negative;
    if shape {
        Ok(())
    } else {
        Err(Error::Hypothesis(format!(
            "reaction is not bistable: {r:?}"
        )))
    }
}

/// Centered difference with the limits past the ends, except at the two
/// end nodes, which difference upwind against the speed. The boundary layer
/// there is too thin for the centered quotient to stay monotone.
fn advective_slope(phi: &[f64], h: f64, left: f64, right: f64, speed: f64) -> Vec<f64> {
    let n = phi.len();
    (0..n)
        .map(|i| {
            let up = if i + 1 < n { phi[i + 1] } else { right };
            let down = if i > 0 { phi[i - 1] } else { left };
            if i > 0 && i + 1 < n {
                (up - down) / (2.0 * h)
            } else if speed >= 0.0 {
                (phi[i] - down) / h
            } else {
                (up - phi[i]) / h
            }
        })
        .collect()
}

/// Max residual of the front equation over interior nodes, by direct
/// summation of the singular integral.
pub fn front_residual(
    profile: &SampledProfile,
    speed: f64,
    s: f64,
    c_norm: f64,
    reaction: &BistableSpec,
) -> Result<f64> {
    let n = profile.values.len();
    let stencil = SingularStencil::new(n, profile.h, s, c_norm)?;
    let phi = &profile.values;
    let (left, right) = (profile.left, profile.right);
    let slope = advective_slope(phi, profile.h, left, right, speed);
    let worst = (1..n - 1)
        .into_par_iter()
        .map(|i| {
            let r = -speed * slope[i]
                + stencil.apply_node(phi, left, right, i)
                + reaction.eval_f(phi[i]);
            r.abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// Front with the default options and the given grid.
pub fn solve_front(reaction: &BistableSpec, s: f64, halfwidth: f64, h: f64) -> Result<WaveProfile> {
    let opts = WaveOptions {
        halfwidth,
        h,
        ..WaveOptions::default()
    };
    solve_front_with(reaction, s, &opts)
}

pub fn solve_front_with(
    reaction: &BistableSpec,
    s: f64,
    opts: &WaveOptions,
) -> Result<WaveProfile> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", format!("{s} is outside (0,1)")));
    }
    if !(opts.c_norm > 0.0) {
        return Err(invalid("c_norm", "must be positive"));
    }
    check_bistable(reaction)?;
    let n = node_count(opts.halfwidth, opts.h)?;
    let mid = n / 2;
    let pin = mid as i64 + opts.phase_shift;
    if pin < 2 || pin as usize >= n - 2 {
        return Err(invalid(
            "phase_shift",
            "pinned node must lie inside the grid",
        ));
    }
    let pin = pin as usize;
    let z_pin = opts.phase_shift as f64 * opts.h;

    let coarse_h = opts.coarse_h.max(opts.h);
    let coarse = co_moving(reaction, s, opts, coarse_h)?;
    let mut phi: Vec<f64> = (0..n)
        .map(|k| {
            let z = -opts.halfwidth + k as f64 * opts.h;
            coarse.eval_with_limits(z - z_pin + coarse.level)
        })
        .collect();
    phi[pin] = 0.5;
    let (phi, speed, iterations) = newton(reaction, s, opts, phi, coarse.speed, pin)?;

    let sampled = SampledProfile {
        start: -opts.halfwidth,
        h: opts.h,
        values: phi,
        left: 0.0,
        right: 1.0,
    };
    let residual_norm = front_residual(&sampled, speed, s, opts.c_norm, reaction)?;
    if residual_norm > opts.tol {
        return Err(Error::NoConvergence(format!(
            "front residual {residual_norm:.3e} above {:.1e}",
            opts.tol
        )));
    }
    let phi = sampled.values;
    let monotone = phi.windows(2).all(|w| w[1] >= w[0]);
    if !monotone {
        return Err(Error::NoConvergence("front profile is not monotone".into()));
    }
    let limits_ok = phi[0] <= 0.01 && phi[n - 1] >= 0.99;
    Ok(WaveProfile {
        s,
        c_norm: opts.c_norm,
        speed_c: speed,
        start: -opts.halfwidth,
        h: opts.h,
        phi,
        residual_norm,
        monotone,
        limits_ok,
        newton_iterations: iterations,
        coarse_time: coarse.time,
    })
}

struct Coarse {
    profile: WaveProfile,
    speed: f64,
    level: f64,
    time: f64,
}

impl Coarse {
    fn eval_with_limits(&self, z: f64) -> f64 {
        self.profile.eval_with_limits(z)
    }
}

/// Position of the level `1/2`, by linear interpolation.
fn level_position(phi: &[f64], start: f64, h: f64) -> f64 {
    let k = phi.partition_point(|&v| v < 0.5);
    if k == 0 {
        return start;
    }
    if k == phi.len() {
        return start + (phi.len() - 1) as f64 * h;
    }
    let (a, b) = (phi[k - 1], phi[k]);
    start + (k as f64 - 1.0 + (0.5 - a) / (b - a)) * h
}

/// Explicit evolution in a frame whose speed tracks the level set.
fn co_moving(reaction: &BistableSpec, s: f64, opts: &WaveOptions, h: f64) -> Result<Coarse> {
    let halfwidth = (opts.halfwidth / h).round() * h;
    let n = node_count(halfwidth, h)?;
    let start = -halfwidth;
    let stencil = SingularStencil::new(n, h, s, opts.c_norm)?.with_transform();
    let width = opts.initial_width.max(h);
    let mut phi: Vec<f64> = (0..n)
        .map(|k| 0.5 * (1.0 + ((start + k as f64 * h) / width).tanh()))
        .collect();
    let decay = -stencil.diagonal();
    let lip = reaction.lip_bound();
    let window = 1.0;
    // Gain pulling the level set back to the origin, per unit time.
    let pull = 0.2;
    let mut speed: f64 = 0.0;
    let mut estimate_prev = f64::NAN;
    let mut level_prev = level_position(&phi, start, h);
    let mut time = 0.0;
    let mut next = vec![0.0; n];
    while time < opts.coarse_t_max {
        let bound = 0.9 / (decay + speed.abs() / h + lip);
        let steps = (window / bound).ceil().max(1.0);
        let dt = window / steps;
        for _ in 0..steps as usize {
            let diffusion = stencil.apply(&phi, 0.0, 1.0);
            for i in 0..n {
                let transport = if speed >= 0.0 {
                    let down = if i > 0 { phi[i - 1] } else { 0.0 };
                    (phi[i] - down) / h
                } else {
                    let up = if i + 1 < n { phi[i + 1] } else { 1.0 };
                    (up - phi[i]) / h
                };
                let rate = -speed * transport + diffusion[i] + reaction.eval_f(phi[i]);
                next[i] = phi[i] + dt * rate;
            }
            std::mem::swap(&mut phi, &mut next);
        }
        if let Some(k) = phi.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { cell: k });
        }
        time += window;
        let level = level_position(&phi, start, h);
        let drift = (level - level_prev) / window;
        let estimate = speed - drift;
        let settled = (estimate - estimate_prev).abs() < opts.coarse_tol * window
            && level.abs() < h
            && drift.abs() < opts.coarse_tol;
        speed = estimate - pull * level;
        level_prev = level;
        estimate_prev = estimate;
        if settled {
            break;
        }
    }
    let level = level_position(&phi, start, h);
    Ok(Coarse {
        profile: WaveProfile {
            s,
            c_norm: opts.c_norm,
            speed_c: estimate_prev,
            start,
            h,
            phi,
            residual_norm: f64::NAN,
            monotone: false,
            limits_ok: false,
            newton_iterations: 0,
            coarse_time: time,
        },
        speed: estimate_prev,
        level,
        time,
    })
}

/// Half bandwidth of the preconditioner.
const BAND: usize = 24;

/// Damped Newton on `(phi, c)` with the pin `phi[pin] = 1/2`.
fn newton(
    reaction: &BistableSpec,
    s: f64,
    opts: &WaveOptions,
    mut phi: Vec<f64>,
    mut speed: f64,
    pin: usize,
) -> Result<(Vec<f64>, f64, usize)> {
    let n = phi.len();
    let h = opts.h;
    let stencil = SingularStencil::new(n, h, s, opts.c_norm)?.with_transform();
    let residual = |phi: &[f64], speed: f64| -> Vec<f64> {
        let diffusion = stencil.apply(phi, 0.0, 1.0);
        let slope = advective_slope(phi, h, 0.0, 1.0, speed);
        let mut r: Vec<f64> = (0..n)
            .map(|i| -speed * slope[i] + diffusion[i] + reaction.eval_f(phi[i]))
            .collect();
        r.push(phi[pin] - 0.5);
        r
    };
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut r = residual(&phi, speed);
    let mut iterations = 0;
    while max_abs(&r) > opts.newton_tol {
        if iterations >= opts.max_newton {
            return Err(Error::NoConvergence(format!(
                "Newton stalled at residual {:.3e}",
                max_abs(&r)
            )));
        }
        iterations += 1;
        let fprime: Vec<f64> = phi.iter().map(|&v| reaction.eval_f_prime(v)).collect();
        let slope = advective_slope(&phi, h, 0.0, 1.0, speed);

        let bw = BAND.min(n - 1);
        let mut band = Banded::zeros(n, bw);
        let diag = stencil.diagonal();
        let advect = speed / (2.0 * h);
        for i in 0..n {
            band.set(i, i, diag + fprime[i]);
            let interior = i > 0 && i + 1 < n;
            for m in 1..=bw {
                let off = stencil.off_diagonal(m);
                let near = m == 1 && interior;
                if i + m < n {
                    band.set(i, i + m, off - if near { advect } else { 0.0 });
                }
                if i >= m {
                    band.set(i, i - m, off + if near { advect } else { 0.0 });
                }
            }
        }
        // Upwind rows at the ends.
        let upwind = speed / h;
        for i in [0, n - 1] {
            if speed >= 0.0 {
                band.set(i, i, diag + fprime[i] - upwind);
                if i > 0 {
                    band.set(i, i - 1, stencil.off_diagonal(1) + upwind);
                }
            } else {
                band.set(i, i, diag + fprime[i] + upwind);
                if i + 1 < n {
                    band.set(i, i + 1, stencil.off_diagonal(1) - upwind);
                }
            }
        }
        if !band.factor() {
            return Err(Error::NoConvergence("singular preconditioner".into()));
        }
        let mut border: Vec<f64> = slope.iter().map(|v| -v).collect();
        band.solve(&mut border);

        let jacobian = |v: &[f64]| -> Vec<f64> {
            let (dphi, dc) = (&v[..n], v[n]);
            let diffusion = stencil.apply(dphi, 0.0, 0.0);
            let dslope = advective_slope(dphi, h, 0.0, 0.0, speed);
            let mut out: Vec<f64> = (0..n)
                .map(|i| -speed * dslope[i] - dc * slope[i] + diffusion[i] + fprime[i] * dphi[i])
                .collect();
            out.push(dphi[pin]);
            out
        };
        let precond = |v: &[f64]| -> Vec<f64> {
            let mut x = v[..n].to_vec();
            band.solve(&mut x);
            let dc = (x[pin] - v[n]) / border[pin];
            for (xi, zi) in x.iter_mut().zip(&border) {
                *xi -= dc * zi;
            }
            x.push(dc);
            x
        };
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let (step, stats) = gmres(jacobian, precond, &rhs, 1e-11, 60, 600);
        if !(stats.relative_residual < 0.5) {
            return Err(Error::NoConvergence(format!(
                "linear solve stalled after {} iterations (relative residual {:.2e})",
                stats.iterations, stats.relative_residual
            )));
        }

        let r_norm = norm(&r);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = phi.iter().zip(&step).map(|(p, d)| p + lambda * d).collect();
            let trial_speed = speed + lambda * step[n];
            let trial_r = residual(&trial, trial_speed);
            if norm(&trial_r) <= (1.0 - 1e-4 * lambda) * r_norm || lambda < 1e-3 {
                phi = trial;
                speed = trial_speed;
                r = trial_r;
                break;
            }
            lambda *= 0.5;
        }
    }
    Ok((phi, speed, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reaction::cubic_bistable;

    fn quick() -> WaveOptions {
        WaveOptions {
            halfwidth: 20.0,
            h: 0.05,
            coarse_h: 0.1,
            ..WaveOptions::default()
        }
    }

    #[test]
    fn front_solves_and_pins_level() {
        let f = cubic_bistable(0.2).unwrap();
        let w = solve_front_with(&f, 0.5, &quick()).unwrap();
        assert!(w.residual_norm <= 1e-6);
        assert!(w.speed_c > 0.0);
        assert!(w.monotone);
        assert!((w.phi[w.len() / 2] - 0.5).abs() < 1e-12);
        assert!((w.eval(0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tail_extension_stays_inside_unit_interval() {
        let f = cubic_bistable(0.3).unwrap();
        let w = solve_front_with(&f, 0.5, &quick()).unwrap();
        for z in [-1e6, -100.0, -20.0, 20.0, 100.0, 1e6] {
            let v = w.eval(z);
            assert!(v > 0.0 && v < 1.0, "{z}: {v}");
        }
        assert!(w.eval(-1e3) < w.eval(-30.0));
        assert_eq!(w.eval_with_limits(25.0), 1.0);
    }

    #[test]
    fn rejects_monostable_reaction() {
        let f = cubic_bistable(0.2).unwrap();
        assert!(solve_front_with(&f, 1.2, &quick()).is_err());
        let bad = crate::reaction::BistableSpec::tabulated(
            crate::reaction::ReactionTable::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.1, 0.0], None)
                .unwrap(),
        );
        if let Ok(spec) = bad {
            assert!(solve_front_with(&spec, 0.5, &quick()).is_err());
        }
    }
}
