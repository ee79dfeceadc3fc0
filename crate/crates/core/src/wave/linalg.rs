//! Banded LU without pivoting and restarted GMRES, sized for the front solve.

/// Square banded matrix with `bw` sub- and super-diagonals, factored in place.
#[derive(Debug, Clone)]
pub(crate) struct Banded {
    n: usize,
    bw: usize,
    /// Row `i` stores columns `i - bw ..= i + bw`.
    data: Vec<f64>,
    factored: bool,
}

impl Banded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (2 * bw + 1)],
            factored: false,
        }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i.abs_diff(j) <= self.bw);
        let k = self.slot(i, j);
        self.data[k] = v;
    }

    /// Doolittle factorization. Safe for the diagonally dominant systems it is
    /// used on; returns `false` on a vanishing pivot.
    pub fn factor(&mut self) -> bool {
        let (n, bw) = (self.n, self.bw);
        for k in 0..n {
            let pivot = self.data[self.slot(k, k)];
            if pivot == 0.0 || !pivot.is_finite() {
                return false;
            }
            let last = (k + bw).min(n - 1);
            for i in k + 1..=last {
                let ik = self.slot(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=last {
                    let kj = self.data[self.slot(k, j)];
                    let ij = self.slot(i, j);
                    self.data[ij] -= l * kj;
                }
            }
        }
        self.factored = true;
        true
    }

    pub fn solve(&self, rhs: &mut [f64]) {
        assert!(self.factored);
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let mut acc = rhs[i];
            for j in i.saturating_sub(bw)..i {
                acc -= self.data[self.slot(i, j)] * rhs[j];
            }
            rhs[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for j in i + 1..=(i + bw).min(n - 1) {
                acc -= self.data[self.slot(i, j)] * rhs[j];
            }
            rhs[i] = acc / self.data[self.slot(i, i)];
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of a GMRES solve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GmresStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Right-preconditioned restarted GMRES for `A x = b` from `x = 0`.
pub(crate) fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    rel_tol: f64,
    restart: usize,
    max_iter: usize,
) -> (Vec<f64>, GmresStats) {
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return (
            x,
            GmresStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        );
    }
    let mut total = 0;
    let mut rel = 1.0;
    while total < max_iter {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / b_norm;
        if rel <= rel_tol {
            break;
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut zs: Vec<Vec<f64>> = Vec::new();
        let mut hess: Vec<Vec<f64>> = Vec::new();
        let (mut cs, mut sn): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
        let mut g = vec![beta];
        for j in 0..restart {
            let z = precond(&basis[j]);
            let mut w = apply(&z);
            zs.push(z);
            let mut col = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                col[i] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let wn = norm(&w);
            col[j + 1] = wn;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let rho = col[j].hypot(col[j + 1]);
            let (c, s) = if rho == 0.0 {
                (1.0, 0.0)
            } else {
                (col[j] / rho, col[j + 1] / rho)
            };
            cs.push(c);
            sn.push(s);
            col[j] = rho;
            col[j + 1] = 0.0;
            g.push(-s * g[j]);
            g[j] *= c;
            hess.push(col);
            total += 1;
            rel = g[j + 1].abs() / b_norm;
            if rel <= rel_tol || wn == 0.0 || total >= max_iter {
                break;
            }
            basis.push(w.into_iter().map(|v| v / wn).collect());
        }
        // Back substitution on the triangular factor.
        let m = hess.len();
        let mut y = vec![0.0; m];
        for i in (0..m).rev() {
            let mut acc = g[i];
            for k in i + 1..m {
                acc -= hess[k][i] * y[k];
            }
            y[i] = acc / hess[i][i];
        }
        for (yk, z) in y.iter().zip(&zs) {
            for (xi, zi) in x.iter_mut().zip(z) {
                *xi += yk * zi;
            }
        }
        if rel <= rel_tol {
            break;
        }
    }
    (
        x,
        GmresStats {
            iterations: total,
            relative_residual: rel,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band_apply(n: usize) -> impl Fn(&[f64]) -> Vec<f64> {
        move |x: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let mut v = 4.0 * x[i];
                    if i > 0 {
                        v -= x[i - 1];
                    }
                    if i + 1 < n {
                        v -= 1.5 * x[i + 1];
                    }
                    if i + 2 < n {
                        v += 0.25 * x[i + 2];
                    }
                    v
                })
                .collect()
        }
    }

    fn band_matrix(n: usize) -> Banded {
        let mut m = Banded::zeros(n, 2);
        for i in 0..n {
            m.set(i, i, 4.0);
            if i > 0 {
                m.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                m.set(i, i + 1, -1.5);
            }
            if i + 2 < n {
                m.set(i, i + 2, 0.25);
            }
        }
        m
    }

    #[test]
    fn banded_lu_solves() {
        let mut m = band_matrix(30);
        assert!(m.factor());
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = band_apply(30)(&x);
        m.solve(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).abs() < 1e-13);
        }
    }

    #[test]
    fn gmres_converges_with_and_without_preconditioner() {
        let apply = band_apply(50);
        let x: Vec<f64> = (0..50).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let b = apply(&x);
        let (sol, stats) = gmres(&apply, |v| v.to_vec(), &b, 1e-12, 20, 500);
        assert!(stats.relative_residual <= 1e-12);
        for (a, e) in sol.iter().zip(&x) {
            assert!((a - e).abs() < 1e-10);
        }
        let mut m = band_matrix(50);
        m.factor();
        let pre = |v: &[f64]| {
            let mut out = v.to_vec();
            m.solve(&mut out);
            out
        };
        let (_, stats) = gmres(&apply, pre, &b, 1e-12, 20, 500);
        assert!(stats.iterations <= 2, "{stats:?}");
    }
}
