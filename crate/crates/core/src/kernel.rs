//! Radial interaction kernels.
//!
//! Three laws are supported:
//! * `SingularFractional`: `c / |z|^(n+2s)`,
//! * `RegularizedFractional`: `c / (delta + |z|^(n+2s))`, bounded at the origin,
//! * `RadialTable`: a piecewise-linear radial profile with compact support,
//!   for integrable unit-mass kernels.
//!
//! A kernel may be truncated at `cutoff_radius`; it vanishes beyond that
//! radius and `tail_mass` accounts for the truncation.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quadrature;

/// Which kernel law a [`KernelSpec`] follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    SingularFractional,
    RegularizedFractional,
    RadialTable,
}

/// Piecewise-linear radial profile `r -> value`.
///
/// Below the first radius the first value is held; beyond the last radius
/// (the support radius) the profile is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTable {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl RadialTable {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(invalid(
                "table",
                "radius and value columns differ in length",
            ));
        }
        if radii.len() < 2 {
            return Err(invalid("table", "need at least two rows"));
        }
        if radii[0] < 0.0 || !radii.iter().all(|r| r.is_finite()) {
            return Err(invalid("table", "radii must be finite and nonnegative"));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("table", "radii must be strictly increasing"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(invalid("table", "values must be finite"));
        }
        Ok(Self { radii, values })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_radius(&self) -> f64 {
        *self.radii.last().expect("validated non-empty")
    }

    pub fn eval(&self, r: f64) -> f64 {
        let radii = &self.radii;
        if r <= radii[0] {
            return self.values[0];
        }
        if r > self.support_radius() {
            return 0.0;
        }
        let k = radii.partition_point(|&x| x < r);
        let (r0, r1) = (radii[k - 1], radii[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (r - r0) / (r1 - r0)
    }

    /// Exact `int_a^b value(r) r^(n-1) dr` for the piecewise-linear profile.
    fn moment(&self, dim: usize, a: f64, b: f64) -> f64 {
        let n = dim as i32;
        let seg = |r0: f64, r1: f64, alpha: f64, beta: f64| {
            alpha * (r1.powi(n) - r0.powi(n)) / n as f64
                + beta * (r1.powi(n + 1) - r0.powi(n + 1)) / (n + 1) as f64
        };
        let mut acc = 0.0;
        let first = self.radii[0];
        if a < first {
            acc += seg(a, first.min(b), self.values[0], 0.0);
        }
        for k in 1..self.radii.len() {
            let (r0, r1) = (self.radii[k - 1], self.radii[k]);
            let lo = r0.max(a);
            let hi = r1.min(b);
            if hi <= lo {
                continue;
            }
            let beta = (self.values[k] - self.values[k - 1]) / (r1 - r0);
            let alpha = self.values[k - 1] - beta * r0;
            acc += seg(lo, hi, alpha, beta);
        }
        acc
    }
}

/// A validated radial kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    family: KernelFamily,
    s: f64,
    dim: usize,
    delta: f64,
    c_norm: f64,
    cutoff_radius: f64,
    table: Option<RadialTable>,
}

/// Surface area of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}

/// The classical normalization `C_{n,s}` of the fractional Laplacian.
///
/// Kernels default to `c_norm = 1`; this constant is available for callers
/// who want the operator to match the Fourier symbol `|xi|^(2s)`.
pub fn standard_fractional_constant(n: usize, s: f64) -> f64 {
    4f64.powf(s) * gamma(n as f64 / 2.0 + s) / (PI.powf(n as f64 / 2.0) * gamma(-s).abs())
}

/// Build a fractional kernel (singular or regularized).
pub fn make_kernel(
    family: KernelFamily,
    s: f64,
    dim: usize,
    delta: f64,
    c_norm: f64,
) -> Result<KernelSpec> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", format!("{s} is outside (0,1)")));
    }
    if dim == 0 {
        return Err(invalid("dim", "must be at least 1"));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(invalid(
            "delta",
            format!("{delta} must be finite and nonnegative"),
        ));
    }
    if !(c_norm > 0.0) || !c_norm.is_finite() {
        return Err(invalid("c_norm", format!("{c_norm} must be positive")));
    }
    match family {
        KernelFamily::SingularFractional if delta != 0.0 => {
            return Err(invalid("delta", "singular kernel requires delta = 0"))
        }
        KernelFamily::RegularizedFractional if delta == 0.0 => {
            return Err(invalid("delta", "regularized kernel requires delta > 0"))
        }
        KernelFamily::RadialTable => {
            return Err(invalid(
                "family",
                "radial tables are built with KernelSpec::radial_table",
            ))
        }
        _ => {}
    }
    Ok(KernelSpec {
        family,
        s,
        dim,
        delta,
        c_norm,
        cutoff_radius: f64::INFINITY,
        table: None,
    })
}

impl KernelSpec {
    /// Build a tabulated radial kernel `c_norm * table(|z|)`.
    pub fn radial_table(dim: usize, table: RadialTable, c_norm: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        if !(c_norm > 0.0) || !c_norm.is_finite() {
            return Err(invalid("c_norm", format!("{c_norm} must be positive")));
        }
        Ok(Self {
            family: KernelFamily::RadialTable,
            s: f64::NAN,
            dim,
            delta: 0.0,
            c_norm,
            cutoff_radius: f64::INFINITY,
            table: Some(table),
        })
    }

    /// Rescale a tabulated kernel so that its total mass over `R^n` is one.
    pub fn normalized_to_unit_mass(mut self) -> Result<Self> {
        let mass = self.total_mass()?;
        if !(mass > 0.0) {
            return Err(invalid("table", "kernel has no positive mass"));
        }
        self.c_norm /= mass;
        Ok(self)
    }

    /// Truncate the kernel at `radius`.
    pub fn with_cutoff(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid(
                "cutoff_radius",
                format!("{radius} must be positive"),
            ));
        }
        self.cutoff_radius = radius;
        Ok(self)
    }

    /// Same law with a different normalization constant.
    pub fn with_c_norm(mut self, c_norm: f64) -> Result<Self> {
        if !(c_norm > 0.0) || !c_norm.is_finite() {
            return Err(invalid("c_norm", format!("{c_norm} must be positive")));
        }
        self.c_norm = c_norm;
        Ok(self)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn c_norm(&self) -> f64 {
        self.c_norm
    }
    pub fn cutoff_radius(&self) -> f64 {
        self.cutoff_radius
    }
    pub fn table(&self) -> Option<&RadialTable> {
        self.table.as_ref()
    }

    pub fn is_fractional(&self) -> bool {
        self.family != KernelFamily::RadialTable
    }

    /// Kernel value as a function of the radius `r = |z|`.
    pub fn eval_radius(&self, r: f64) -> Result<f64> {
        if r >= self.cutoff_radius {
            return Ok(0.0);
        }
        match self.family {
            KernelFamily::SingularFractional => {
                if r == 0.0 {
                    return Err(Error::SingularAtOrigin);
                }
                Ok(self.c_norm / r.powf(self.dim as f64 + 2.0 * self.s))
            }
            KernelFamily::RegularizedFractional => {
                Ok(self.c_norm / (self.delta + r.powf(self.dim as f64 + 2.0 * self.s)))
            }
            KernelFamily::RadialTable => {
                Ok(self.c_norm * self.table.as_ref().expect("table kernel").eval(r))
            }
        }
    }

    /// `int_{a<|y|<b} kernel(y) dy` for a regular integrand (no origin singularity
    /// unless `a > 0`).
    fn shell_mass(&self, a: f64, b: f64) -> f64 {
        let n = self.dim;
        let area = sphere_area(n);
        let b = b.min(self.cutoff_radius);
        if b <= a {
            return 0.0;
        }
        match self.family {
            KernelFamily::RadialTable => {
                area * self.c_norm * self.table.as_ref().expect("table kernel").moment(n, a, b)
            }
            KernelFamily::SingularFractional => {
                let two_s = 2.0 * self.s;
                let upper = if b.is_finite() { b.powf(-two_s) } else { 0.0 };
                area * self.c_norm * (a.powf(-two_s) - upper) / two_s
            }
            KernelFamily::RegularizedFractional => {
                let tail_a = self.regularized_tail(a);
                let tail_b = if b.is_finite() {
                    self.regularized_tail(b)
                } else {
                    0.0
                };
                area * self.c_norm * (tail_a - tail_b)
            }
        }
    }

    /// `int_R^inf r^(n-1) / (delta + r^p) dr` with `p = n + 2s`.
    fn regularized_tail(&self, radius: f64) -> f64 {
        let n = self.dim as f64;
        let p = n + 2.0 * self.s;
        let delta = self.delta;
        let series = |r: f64| {
            // r^(n-1)/(delta + r^p) = sum_k (-delta)^k r^(n-1-p(k+1)), valid for delta < r^p.
            let ratio = -delta / r.powf(p);
            let base = r.powf(n - p);
            let mut coeff = 1.0;
            let mut acc = 0.0;
            for k in 0..200 {
                let expo = p * (k as f64 + 1.0) - n;
                let term = coeff * base / expo;
                acc += term;
                if term.abs() <= 1e-18 * acc.abs() {
                    break;
                }
                coeff *= ratio;
            }
            acc
        };
        let switch = (2.0 * delta).powf(1.0 / p);
        if radius >= switch {
            series(radius)
        } else {
            let f = |r: f64| r.powf(n - 1.0) / (delta + r.powf(p));
            quadrature::integrate(f, radius, switch, 1e-15, 1e-13) + series(switch)
        }
    }

    /// Mass of the kernel outside the ball of radius `radius`.
    pub fn tail_mass(&self, radius: f64) -> Result<f64> {
        if !(radius > 0.0) {
            return Err(invalid("R", format!("{radius} must be positive")));
        }
        Ok(self.shell_mass(radius, f64::INFINITY))
    }

    /// Total mass over `R^n`; infinite for the singular law.
    pub fn total_mass(&self) -> Result<f64> {
        match self.family {
            KernelFamily::SingularFractional => Err(Error::SingularAtOrigin),
            KernelFamily::RegularizedFractional => {
                let n = self.dim as f64;
                let p = n + 2.0 * self.s;
                let f = |r: f64| r.powf(n - 1.0) / (self.delta + r.powf(p));
                let cut = self.cutoff_radius;
                let near = quadrature::integrate(f, 0.0, 1.0f64.min(cut), 1e-15, 1e-13);
                Ok(
                    near * sphere_area(self.dim) * self.c_norm
                        + self.shell_mass(1.0, f64::INFINITY),
                )
            }
            KernelFamily::RadialTable => Ok(self.shell_mass(0.0, f64::INFINITY)),
        }
    }

    /// Constant `c1` such that the kernel integrated over the hyperplane
    /// orthogonal to a direction behaves like `c1 / |t|^(1+2s)` (exact for the
    /// singular law, asymptotic for the regularized one).
    pub fn projected_constant(&self) -> Result<f64> {
        if !self.is_fractional() {
            return Err(Error::UnsupportedKernel(
                "projection constant is defined for fractional kernels".into(),
            ));
        }
        let n = self.dim as f64;
        let s = self.s;
        Ok(self.c_norm * PI.powf((n - 1.0) / 2.0) * gamma(0.5 + s) / gamma((n + 2.0 * s) / 2.0))
    }

    /// `J(t) = int_{R^(n-1)} kernel(t, tau) dtau`, the one-dimensional marginal.
    pub fn projected_eval(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        if self.dim == 1 {
            return self.eval_radius(t);
        }
        if self.family == KernelFamily::SingularFractional {
            if t == 0.0 {
                return Err(Error::SingularAtOrigin);
            }
            return Ok(self.projected_constant()? * t.powf(-1.0 - 2.0 * self.s));
        }
        if self.family == KernelFamily::RegularizedFractional {
            if let Some(v) = self.projected_series(t) {
                return Ok(v);
            }
        }
        let m = self.dim - 1;
        let area = sphere_area(m);
        let integrand = |rho: f64| {
            let r = (t * t + rho * rho).sqrt();
            self.eval_radius(r).unwrap_or(0.0) * rho.powi(m as i32 - 1)
        };
        let reach = if self.family == KernelFamily::RadialTable {
            let support = self.table.as_ref().expect("table kernel").support_radius();
            if t >= support {
                return Ok(0.0);
            }
            (support * support - t * t).sqrt()
        } else {
            f64::INFINITY
        };
        let scale = t.max(self.delta.powf(1.0 / (self.dim as f64 + 2.0 * self.s)));
        let value = if reach.is_finite() {
            quadrature::integrate(integrand, 0.0, reach, 1e-16, 1e-11)
        } else {
            quadrature::integrate(integrand, 0.0, scale, 1e-16, 1e-12)
                + quadrature::integrate_to_infinity(integrand, scale, 1e-16, 1e-12)
        };
        Ok(area * value)
    }
}

impl KernelSpec {
    /// Termwise projection of `c r^-p sum_k (-delta r^-p)^k`, used once
    /// `delta / t^p <= 1/4`; `None` closer to the origin or with a cutoff.
    fn projected_series(&self, t: f64) -> Option<f64> {
        let n = self.dim as f64;
        let p = n + 2.0 * self.s;
        let ratio = self.delta / t.powf(p);
        if ratio > 0.25 || self.cutoff_radius.is_finite() {
            return None;
        }
        let lead = PI.powf((n - 1.0) / 2.0) * t.powf(n - 1.0);
        let mut acc = 0.0;
        let mut power = 1.0;
        for k in 0..60 {
            let q = p * (k as f64 + 1.0);
            let term = power * gamma((q - n + 1.0) / 2.0) / gamma(q / 2.0) * t.powf(-q);
            acc += term;
            if term.abs() <= 1e-17 * acc.abs() {
                break;
            }
            power *= -self.delta;
        }
        Some(self.c_norm * lead * acc)
    }
}

/// Evaluate the kernel at the displacement vector `z`.
pub fn kernel_eval(spec: &KernelSpec, z: &[f64]) -> Result<f64> {
    if z.len() != spec.dim {
        return Err(Error::DimensionMismatch {
            expected: spec.dim,
            got: z.len(),
        });
    }
    let r = z.iter().map(|c| c * c).sum::<f64>().sqrt();
    spec.eval_radius(r)
}

/// Mass of the kernel outside the ball of radius `radius`.
pub fn tail_mass(spec: &KernelSpec, radius: f64) -> Result<f64> {
    spec.tail_mass(radius)
}
