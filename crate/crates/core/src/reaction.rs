//! Bistable nonlinearities `f` with zeros `0 < theta < 1`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::simpson;

const SIGN_SAMPLES: usize = 10_000;
const SIMPSON_PANELS: usize = 10_000;

/// Tabulated `f` with derivatives, interpolated by cubic Hermite splines and
/// extended linearly past the table ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionTable {
    points: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl ReactionTable {
    /// `slopes` may be omitted; they are then estimated by finite differences.
    pub fn new(points: Vec<f64>, values: Vec<f64>, slopes: Option<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n < 3 || values.len() != n {
            return Err(invalid("reaction table", "need at least three (s, f) rows"));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid(
                "reaction table",
                "s column must be strictly increasing",
            ));
        }
        if !points.iter().chain(&values).all(|v| v.is_finite()) {
            return Err(invalid("reaction table", "entries must be finite"));
        }
        if points[0] > 0.0 || points[n - 1] < 1.0 {
            return Err(invalid("reaction table", "samples must cover [0, 1]"));
        }
        let slopes = match slopes {
            Some(d) if d.len() == n && d.iter().all(|v| v.is_finite()) => d,
            Some(_) => return Err(invalid("reaction table", "derivative column is malformed")),
            None => finite_difference_slopes(&points, &values),
        };
        Ok(Self {
            points,
            values,
            slopes,
        })
    }

    fn eval(&self, s: f64) -> (f64, f64) {
        let p = &self.points;
        let last = p.len() - 1;
        if s <= p[0] {
            return (self.values[0] + self.slopes[0] * (s - p[0]), self.slopes[0]);
        }
        if s >= p[last] {
            return (
                self.values[last] + self.slopes[last] * (s - p[last]),
                self.slopes[last],
            );
        }
        let k = p.partition_point(|&x| x <= s).min(last) - 1;
        let h = p[k + 1] - p[k];
        let t = (s - p[k]) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let deriv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (value, deriv)
    }
}

fn finite_difference_slopes(p: &[f64], v: &[f64]) -> Vec<f64> {
    let n = p.len();
    (0..n)
        .map(|k| {
            if k == 0 {
                (v[1] - v[0]) / (p[1] - p[0])
            } else if k == n - 1 {
                (v[n - 1] - v[n - 2]) / (p[n - 1] - p[n - 2])
            } else {
                // Derivative of the parabola through three neighbors.
                let (h0, h1) = (p[k] - p[k - 1], p[k + 1] - p[k]);
                let d0 = (v[k] - v[k - 1]) / h0;
                let d1 = (v[k + 1] - v[k]) / h1;
                (h1 * d0 + h0 * d1) / (h0 + h1)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReactionKind {
    Cubic,
    Tabulated(ReactionTable),
}

/// A bistable nonlinearity and its Lipschitz bound on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BistableSpec {
    kind: ReactionKind,
    theta: f64,
    lip_bound: f64,
}

/// `f(s) = s (s - theta)(1 - s)`.
pub fn cubic_bistable(theta: f64) -> Result<BistableSpec> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(invalid("theta", format!("{theta} is outside (0,1)")));
    }
    let fp = |s: f64| -3.0 * s * s + 2.0 * (1.0 + theta) * s - theta;
    let vertex = (1.0 + theta) / 3.0;
    let lip_bound = [fp(0.0), fp(1.0), fp(vertex)]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(BistableSpec {
        kind: ReactionKind::Cubic,
        theta,
        lip_bound,
    })
}

impl BistableSpec {
    /// Tabulated nonlinearity; `theta` is located as the sign change in `(0, 1)`.
    pub fn tabulated(table: ReactionTable) -> Result<Self> {
        let probe = Self {
            kind: ReactionKind::Tabulated(table),
            theta: f64::NAN,
            lip_bound: 0.0,
        };
        let theta = probe
            .interior_zero()
            .ok_or_else(|| invalid("reaction table", "no sign change inside (0, 1)"))?;
        let mut lip: f64 = 0.0;
        for k in 0..=SIGN_SAMPLES {
            lip = lip.max(probe.eval_f_prime(k as f64 / SIGN_SAMPLES as f64).abs());
        }
        if let ReactionKind::Tabulated(t) = &probe.kind {
            for (p, d) in t.points.iter().zip(&t.slopes) {
                if (0.0..=1.0).contains(p) {
                    lip = lip.max(d.abs());
                }
            }
        }
        Ok(Self {
            theta,
            lip_bound: lip * (1.0 + 1e-9),
            ..probe
        })
    }

    /// Bisection on the first sign change of `f` in `(0, 1)`.
    fn interior_zero(&self) -> Option<f64> {
        let m = 1000;
        let mut prev = (1e-9, self.eval_f(1e-9));
        for k in 1..m {
            let s = k as f64 / m as f64;
            let v = self.eval_f(s);
            if v == 0.0 {
                return Some(s);
            }
            if prev.1 < 0.0 && v > 0.0 {
                let (mut lo, mut hi) = (prev.0, s);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.eval_f(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
            prev = (s, v);
        }
        None
    }

    pub fn kind(&self) -> &ReactionKind {
        &self.kind
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lip_bound(&self) -> f64 {
        self.lip_bound
    }

    pub fn eval_f(&self, s: f64) -> f64 {
        match &self.kind {
            ReactionKind::Cubic => s * (s - self.theta) * (1.0 - s),
            ReactionKind::Tabulated(t) => t.eval(s).0,
        }
    }

    pub fn eval_f_prime(&self, s: f64) -> f64 {
        match &self.kind {
            ReactionKind::Cubic => -3.0 * s * s + 2.0 * (1.0 + self.theta) * s - self.theta,
            ReactionKind::Tabulated(t) => t.eval(s).1,
        }
    }

    /// The same nonlinearity after `u -> 1 - u`: `g(s) = -f(1 - s)`.
    pub fn reflected(&self) -> Result<Self> {
        match &self.kind {
            ReactionKind::Cubic => cubic_bistable(1.0 - self.theta),
            ReactionKind::Tabulated(t) => {
                let n = t.points.len();
                let points = (0..n).rev().map(|k| 1.0 - t.points[k]).collect();
                let values = (0..n).rev().map(|k| -t.values[k]).collect();
                let slopes = (0..n).rev().map(|k| t.slopes[k]).collect();
                Self::tabulated(ReactionTable::new(points, values, Some(slopes))?)
            }
        }
    }

    /// Constants with `f' <= -c1` on `[1 - c0, 1.5]`, if such exist.
    pub fn well_constants(&self) -> Option<WellConstants> {
        let samples = 4000;
        let upper = 1.5;
        // Walk down from 1 while f' stays negative, then keep half of that margin.
        let mut reach = 0.0;
        for k in 1..=samples {
            let s = 1.0 - 0.5 * k as f64 / samples as f64;
            if self.eval_f_prime(s) >= 0.0 {
                break;
            }
            reach = 1.0 - s;
        }
        if self.eval_f_prime(1.0) >= 0.0 || reach <= 0.0 {
            return None;
        }
        let c0 = 0.5 * reach;
        let mut worst = f64::NEG_INFINITY;
        for k in 0..=samples {
            let s = 1.0 - c0 + (upper - 1.0 + c0) * k as f64 / samples as f64;
            worst = worst.max(self.eval_f_prime(s));
        }
        (worst < 0.0).then_some(WellConstants {
            c0,
            c1: -worst,
            checked_up_to: upper,
        })
    }
}

/// Free-function form of [`BistableSpec::eval_f`].
pub fn eval_f(spec: &BistableSpec, s: f64) -> f64 {
    spec.eval_f(s)
}

/// Free-function form of [`BistableSpec::eval_f_prime`].
pub fn eval_f_prime(spec: &BistableSpec, s: f64) -> f64 {
    spec.eval_f_prime(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WellConstants {
    pub c0: f64,
    pub c1: f64,
    pub checked_up_to: f64,
}

/// Clause-by-clause certification of the bistable structure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub theta: f64,
    pub roots_ok: bool,
    pub negative_below_theta: bool,
    pub positive_above_theta: bool,
    pub fprime_zero: f64,
    pub fprime_theta: f64,
    pub fprime_one: f64,
    pub fprime_zero_negative: bool,
    pub fprime_theta_positive: bool,
    pub fprime_one_negative: bool,
    pub integral: f64,
    pub integral_positive: bool,
    pub pass: bool,
}

pub fn check_conditions(spec: &BistableSpec) -> ConditionReport {
    let theta = spec.theta;
    let roots_ok = [0.0, theta, 1.0]
        .iter()
        .all(|&s| spec.eval_f(s).abs() <= 1e-12);
    let m = SIGN_SAMPLES as f64;
    let negative_below_theta =
        (0..SIGN_SAMPLES).all(|k| spec.eval_f(theta * (k as f64 + 0.5) / m) < 0.0);
    let positive_above_theta =
        (0..SIGN_SAMPLES).all(|k| spec.eval_f(theta + (1.0 - theta) * (k as f64 + 0.5) / m) > 0.0);
    let fprime_zero = spec.eval_f_prime(0.0);
    let fprime_theta = spec.eval_f_prime(theta);
    let fprime_one = spec.eval_f_prime(1.0);
    let integral = simpson(|s| spec.eval_f(s), 0.0, 1.0, SIMPSON_PANELS);
    let integral_positive = integral > 1e-10;
    let pass = roots_ok
        && negative_below_theta
        && positive_above_theta
        && fprime_zero < 0.0
        && fprime_theta > 0.0
        && fprime_one < 0.0
        && integral_positive;
    ConditionReport {
        theta,
        roots_ok,
        negative_below_theta,
        positive_above_theta,
        fprime_zero,
        fprime_theta,
        fprime_one,
        fprime_zero_negative: fprime_zero < 0.0,
        fprime_theta_positive: fprime_theta > 0.0,
        fprime_one_negative: fprime_one < 0.0,
        integral,
        integral_positive,
        pass,
    }
}
