//! One-dimensional fractional Laplacian
//! `c * int_0^inf (phi(x+z) + phi(x-z) - 2 phi(x)) / z^(1+2s) dz`
//! for data on a uniform grid, extended by constant limits beyond it.
//!
//! The integrand is written as `G(z) z^(1-2s)` with `G(z) = D(z) / z^2`. `G` is
//! smooth and even, so it is interpolated piecewise linearly between the
//! nodes `z = mh` and the hat functions are integrated exactly against
//! `z^(1-2s)`. `G(0)` is the second derivative (fourth-order stencil). Past the
//! grid the second difference is constant and its integral is closed form.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};

/// Samples `values[k] = phi(start + k h)` with the limits `phi(-inf)`, `phi(+inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    pub start: f64,
    pub h: f64,
    pub values: Vec<f64>,
    pub left: f64,
    pub right: f64,
}

impl SampledProfile {
    pub fn node(&self, k: usize) -> f64 {
        self.start + k as f64 * self.h
    }
}

/// Quadrature weights for one grid size, reusable across nodes and profiles.
#[derive(Clone)]
pub struct SingularStencil {
    n: usize,
    h: f64,
    c_norm: f64,
    /// Weight of `G(0)`.
    w0: f64,
    /// `b[m] = W_m / (m h)^2` for `m = 1..=n`; `b[0] = 0`.
    b: Vec<f64>,
    /// `suffix[m] = sum_{k >= m} b[k]`, with `suffix[n + 1] = 0`.
    suffix: Vec<f64>,
    /// Closed-form weight of the constant second difference beyond `z = n h`.
    tail: f64,
    conv: Option<ToeplitzFft>,
}

#[derive(Clone)]
struct ToeplitzFft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    b_hat: Vec<Complex<f64>>,
}

impl std::fmt::Debug for SingularStencil {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SingularStencil")
            .field("n", &self.n)
            .field("h", &self.h)
            .field("c_norm", &self.c_norm)
            .finish_non_exhaustive()
    }
}

/// Second antiderivative of `z^p` is `z^(p+2) / ((p+1)(p+2))`; the full hat
/// weight is its centered second difference divided by `h`.
fn hat_weight(m: usize, p: f64, h: f64) -> f64 {
    let a = p + 2.0;
    let scale = h.powf(p + 1.0) / ((p + 1.0) * (p + 2.0));
    let mf = m as f64;
    if m < 24 {
        let lo = if m == 1 { 0.0 } else { (mf - 1.0).powf(a) };
        return scale * ((mf + 1.0).powf(a) - 2.0 * mf.powf(a) + lo);
    }
    // (m+1)^a - 2 m^a + (m-1)^a = 2 sum_k binom(a, 2k) m^(a-2k), k >= 1.
    let mut acc = 0.0;
    let mut binom = 1.0;
    let mut j = 0.0;
    let inv_m2 = 1.0 / (mf * mf);
    let mut power = mf.powf(a);
    for _ in 0..8 {
        binom *= (a - j) / (j + 1.0);
        binom *= (a - j - 1.0) / (j + 2.0);
        j += 2.0;
        power *= inv_m2;
        acc += binom * power;
    }
    scale * 2.0 * acc
}

impl SingularStencil {
    pub fn new(n_nodes: usize, h: f64, s: f64, c_norm: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid("s", format!("{s} is outside (0,1)")));
        }
        if n_nodes < 5 {
            return Err(invalid("nodes", "at least five nodes are required"));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid("h", "spacing must be positive"));
        }
        if !(c_norm > 0.0) {
            return Err(invalid("c_norm", "must be positive"));
        }
        let n = n_nodes;
        let p = 1.0 - 2.0 * s;
        let w0 = h.powf(p + 1.0) / ((p + 1.0) * (p + 2.0));
        let mut b = vec![0.0; n + 1];
        for (m, bm) in b.iter_mut().enumerate().take(n).skip(1) {
            let r = m as f64 * h;
            *bm = hat_weight(m, p, h) / (r * r);
        }
        // Half hat on [(n-1)h, nh].
        let lo = (n - 1) as f64 * h;
        let hi = n as f64 * h;
        let half = ((hi.powf(p + 2.0) - lo.powf(p + 2.0)) / (p + 2.0)
            - lo * (hi.powf(p + 1.0) - lo.powf(p + 1.0)) / (p + 1.0))
            / h;
        b[n] = half / (hi * hi);
        let mut suffix = vec![0.0; n + 2];
        for m in (1..=n).rev() {
            suffix[m] = suffix[m + 1] + b[m];
        }
        let tail = hi.powf(-2.0 * s) / (2.0 * s);
        Ok(Self {
            n,
            h,
            c_norm,
            w0,
            b,
            suffix,
            tail,
            conv: None,
        })
    }

    /// Same stencil with the transform tables for [`SingularStencil::apply`].
    pub fn with_transform(mut self) -> Self {
        let n = self.n;
        let len = (3 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut b_hat = vec![Complex::new(0.0, 0.0); len];
        for m in 1..n {
            b_hat[m].re = self.b[m];
            b_hat[len - m].re = self.b[m];
        }
        forward.process(&mut b_hat);
        self.conv = Some(ToeplitzFft {
            len,
            forward,
            inverse,
            b_hat,
        });
        self
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn c_norm(&self) -> f64 {
        self.c_norm
    }

    /// Diagonal entry of the linear map `phi -> L phi` (limits held fixed).
    pub fn diagonal(&self) -> f64 {
        self.c_norm
            * (-30.0 * self.w0 / (12.0 * self.h * self.h) - 2.0 * self.suffix[1] - 2.0 * self.tail)
    }

    /// Coefficient of `phi_j` in `L phi_i` for `|i - j| = m >= 1`, ignoring
    /// the boundary clipping of the near-field stencil.
    pub fn off_diagonal(&self, m: usize) -> f64 {
        let local = match m {
            1 => 16.0,
            2 => -1.0,
            _ => 0.0,
        } * self.w0
            / (12.0 * self.h * self.h);
        self.c_norm * (local + if m <= self.n { self.b[m] } else { 0.0 })
    }

    fn extended(values: &[f64], left: f64, right: f64, j: i64) -> f64 {
        if j < 0 {
            left
        } else if j as usize >= values.len() {
            right
        } else {
            values[j as usize]
        }
    }

    fn second_derivative(&self, values: &[f64], left: f64, right: f64, i: usize) -> f64 {
        let e = |d: i64| Self::extended(values, left, right, i as i64 + d);
        (-e(2) + 16.0 * e(1) - 30.0 * e(0) + 16.0 * e(-1) - e(-2)) / (12.0 * self.h * self.h)
    }

    /// Operator at node `i` by direct O(n) summation.
    pub fn apply_node(&self, values: &[f64], left: f64, right: f64, i: usize) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let phi = values[i];
        let mut acc = self.w0 * self.second_derivative(values, left, right, i);
        for m in 1..=self.n {
            let plus = Self::extended(values, left, right, (i + m) as i64);
            let minus = Self::extended(values, left, right, i as i64 - m as i64);
            acc += self.b[m] * (plus + minus - 2.0 * phi);
        }
        acc += self.tail * (left + right - 2.0 * phi);
        self.c_norm * acc
    }

    /// Operator at every node; uses the transform when available.
    pub fn apply(&self, values: &[f64], left: f64, right: f64) -> Vec<f64> {
        let n = self.n;
        assert_eq!(values.len(), n, "profile length does not match stencil");
        let Some(conv) = &self.conv else {
            return (0..n)
                .map(|i| self.apply_node(values, left, right, i))
                .collect();
        };
        let mut buf = vec![Complex::new(0.0, 0.0); conv.len];
        for (b, &v) in buf.iter_mut().zip(values) {
            b.re = v;
        }
        conv.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&conv.b_hat) {
            *b *= k;
        }
        conv.inverse.process(&mut buf);
        let scale = 1.0 / conv.len as f64;
        let total = self.suffix[1];
        (0..n)
            .map(|i| {
                let phi = values[i];
                let inner = buf[i].re * scale;
                // Neighbors past the ends take the limit values.
                let spill = left * self.suffix[i + 1] + right * self.suffix[n - i];
                let acc = self.w0 * self.second_derivative(values, left, right, i) + inner + spill
                    - 2.0 * total * phi
                    + self.tail * (left + right - 2.0 * phi);
                self.c_norm * acc
            })
            .collect()
    }
}

/// Fractional Laplacian of `profile` at node `node`, scaled by `c_norm`.
pub fn apply_singular_1d(
    profile: &SampledProfile,
    s: f64,
    c_norm: f64,
    node: usize,
) -> Result<f64> {
    let stencil = SingularStencil::new(profile.values.len(), profile.h, s, c_norm)?;
    if node >= profile.values.len() {
        return Err(invalid("node", "index outside the profile"));
    }
    Ok(stencil.apply_node(&profile.values, profile.left, profile.right, node))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;

    fn logistic(z: f64) -> f64 {
        1.0 / (1.0 + (-z).exp())
    }

    fn sampled(f: impl Fn(f64) -> f64, z: f64, h: f64, left: f64, right: f64) -> SampledProfile {
        let n = (2.0 * z / h).round() as usize + 1;
        SampledProfile {
            start: -z,
            h,
            values: (0..n).map(|k| f(-z + k as f64 * h)).collect(),
            left,
            right,
        }
    }

    #[test]
    fn constants_vanish() {
        let p = SampledProfile {
            start: 0.0,
            h: 0.1,
            values: vec![0.5; 11],
            left: 0.5,
            right: 0.5,
        };
        for k in 0..11 {
            assert_eq!(apply_singular_1d(&p, 0.3, 1.0, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn affine_data_vanishes_at_center() {
        let p = sampled(|z| z, 5.0, 0.05, -5.0, 5.0);
        let mid = p.values.len() / 2;
        assert!(apply_singular_1d(&p, 0.5, 1.0, mid).unwrap().abs() < 1e-8);
    }

    #[test]
    fn logistic_against_adaptive_quadrature() {
        let p = sampled(logistic, 40.0, 0.01, 0.0, 1.0);
        let mid = p.values.len() / 2;
        let value = apply_singular_1d(&p, 0.5, 1.0, mid).unwrap();
        let x = 0.0;
        let integrand = |z: f64| {
            if z == 0.0 {
                return 0.0;
            }
            (logistic(x + z) + logistic(x - z) - 2.0 * logistic(x)) / (z * z)
        };
        let oracle = quadrature::integrate(integrand, 0.0, 60.0, 1e-14, 1e-13)
            + quadrature::integrate_to_infinity(integrand, 60.0, 1e-14, 1e-13);
        assert!((value - oracle).abs() < 1e-5, "{value} vs {oracle}");
    }

    #[test]
    fn transform_matches_direct() {
        for s in [0.2, 0.5, 0.8] {
            let p = sampled(|z| logistic(z + 0.3 * z.sin()), 10.0, 0.05, 0.0, 1.0);
            let direct = SingularStencil::new(p.values.len(), p.h, s, 1.3).unwrap();
            let fast = direct.clone().with_transform();
            let a = direct.apply(&p.values, 0.0, 1.0);
            let b = fast.apply(&p.values, 0.0, 1.0);
            let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-11 * scale, "s={s}");
            }
        }
    }

    #[test]
    fn series_hat_weights_match_direct_formula() {
        for p in [-0.6, 0.0, 0.5] {
            let a = p + 2.0;
            for m in [24usize, 50, 400] {
                let mf = m as f64;
                let direct = ((mf + 1.0).powf(a) - 2.0 * mf.powf(a) + (mf - 1.0).powf(a))
                    / ((p + 1.0) * (p + 2.0));
                let series = hat_weight(m, p, 1.0);
                assert!(
                    (direct - series).abs() <= 1e-9 * direct.abs(),
                    "p={p} m={m}"
                );
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let p = SampledProfile {
            start: 0.0,
            h: 0.1,
            values: vec![0.0; 4],
            left: 0.0,
            right: 0.0,
        };
        assert!(apply_singular_1d(&p, 0.5, 1.0, 0).is_err());
        let p = SampledProfile {
            values: vec![0.0; 8],
            ..p
        };
        assert!(apply_singular_1d(&p, 1.0, 1.0, 0).is_err());
    }
}
