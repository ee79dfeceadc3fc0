use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{tail_weights, OffsetWeights};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};
use crate::kernel::KernelSpec;

#[derive(Clone)]
enum Backend {
    /// Zero-padded linear convolution on a `2n x 2n` torus.
    Fft {
        m: usize,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
        kernel_hat: Vec<Complex<f64>>,
    },
    /// Offset-ordered direct sum on periodic grids. Summation order depends
    /// only on offsets, so translating the input translates the output bit for bit.
    PeriodicDirect { weights: Vec<f64> },
}

/// Precomputed transform data for one grid and kernel.
#[derive(Clone)]
pub struct FastPlan {
    grid: Arc<Grid2D>,
    kernel: KernelSpec,
    backend: Backend,
    exterior_weight: Vec<f64>,
    tail: Vec<f64>,
}

impl std::fmt::Debug for FastPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FastPlan")
            .field("n", &self.grid.n())
            .field("kernel", &self.kernel)
            .finish_non_exhaustive()
    }
}

impl FastPlan {
    pub fn new(grid: Arc<Grid2D>, kernel: &KernelSpec) -> Result<Self> {
        let weights = OffsetWeights::new(&grid, kernel)?;
        let tail = tail_weights(&grid, kernel)?;
        let n = grid.n();
        let backend = if grid.is_periodic() {
            let mut table = vec![0.0; n * n];
            for dy in 0..n {
                for dx in 0..n {
                    table[dy * n + dx] = weights.get(dx as i64, dy as i64);
                }
            }
            Backend::PeriodicDirect { weights: table }
        } else {
            let m = 2 * n;
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(m);
            let inverse = planner.plan_fft_inverse(m);
            let mut kernel_hat = vec![Complex::new(0.0, 0.0); m * m];
            let reach = n as i64 - 1;
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    let ix = dx.rem_euclid(m as i64) as usize;
                    let iy = dy.rem_euclid(m as i64) as usize;
                    kernel_hat[iy * m + ix] = Complex::new(weights.get(dx, dy), 0.0);
                }
            }
            fft2(&mut kernel_hat, m, &forward);
            Backend::Fft {
                m,
                forward,
                inverse,
                kernel_hat,
            }
        };
        let mut plan = Self {
            grid,
            kernel: kernel.clone(),
            backend,
            exterior_weight: Vec::new(),
            tail,
        };
        let mask: Vec<f64> = plan
            .grid
            .exterior_mask()
            .iter()
            .map(|&e| if e { 1.0 } else { 0.0 })
            .collect();
        let mut w = plan.convolve(&mask);
        for (k, wk) in w.iter_mut().enumerate() {
            if !plan.grid.is_exterior(k) {
                *wk = 0.0;
            }
        }
        plan.exterior_weight = w;
        Ok(plan)
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    /// `sum_{j exterior, j != i} h^2 K(x_i - x_j)` per cell.
    pub fn exterior_weight(&self) -> &[f64] {
        &self.exterior_weight
    }

    /// Far-field weight per cell.
    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    /// Largest diagonal magnitude `max_i (W_i + tail_i)` over exterior cells.
    pub fn lambda_max(&self) -> f64 {
        self.grid
            .exterior_cells()
            .map(|k| self.exterior_weight[k] + self.tail[k])
            .fold(0.0, f64::max)
    }

    fn matches(&self, field: &Field) -> bool {
        Arc::ptr_eq(&self.grid, field.grid()) || *self.grid == **field.grid()
    }

    /// `sum_j w(i - j) x_j` over all cells (obstacle entries of `x` must be 0).
    fn convolve(&self, x: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        match &self.backend {
            Backend::Fft {
                m,
                forward,
                inverse,
                kernel_hat,
            } => {
                let m = *m;
                let mut buf = vec![Complex::new(0.0, 0.0); m * m];
                for iy in 0..n {
                    for ix in 0..n {
                        buf[iy * m + ix].re = x[iy * n + ix];
                    }
                }
                fft2(&mut buf, m, forward);
                buf.par_iter_mut()
                    .zip(kernel_hat.par_iter())
                    .for_each(|(b, k)| *b *= k);
                fft2(&mut buf, m, inverse);
                let scale = 1.0 / (m * m) as f64;
                let mut out = vec![0.0; n * n];
                for iy in 0..n {
                    for ix in 0..n {
                        out[iy * n + ix] = buf[iy * m + ix].re * scale;
                    }
                }
                out
            }
            Backend::PeriodicDirect { weights } => (0..n * n)
                .into_par_iter()
                .map(|i| {
                    let (ix, iy) = (i % n, i / n);
                    let mut acc = 0.0;
                    for dy in 0..n {
                        let row = ((iy + dy) % n) * n;
                        for dx in 0..n {
                            acc += weights[dy * n + dx] * x[row + (ix + dx) % n];
                        }
                    }
                    acc
                })
                .collect(),
        }
    }

    /// Operator applied to `field`; obstacle cells of the result are zero.
    pub fn apply(&self, field: &Field) -> Result<Vec<f64>> {
        if !self.matches(field) {
            return Err(Error::PlanMismatch);
        }
        let far = field.farfield();
        let grid = &self.grid;
        // Work with v = u - u_inf so constants equal to the farfield map to exact zeros.
        let v: Vec<f64> = (0..grid.cell_count())
            .map(|k| {
                if grid.is_exterior(k) {
                    field.get(k) - far
                } else {
                    0.0
                }
            })
            .collect();
        let conv = self.convolve(&v);
        Ok((0..grid.cell_count())
            .map(|k| {
                if grid.is_exterior(k) {
                    conv[k] - v[k] * self.exterior_weight[k] - self.tail[k] * v[k]
                } else {
                    0.0
                }
            })
            .collect())
    }
}

/// Fast evaluation through `plan`; errors if the plan was built for another
/// grid or kernel.
pub fn apply_fast(field: &Field, kernel: &KernelSpec, plan: &FastPlan) -> Result<Vec<f64>> {
    if *kernel != plan.kernel {
        return Err(Error::PlanMismatch);
    }
    plan.apply(field)
}

/// In-place 2-D transform of an `m x m` row-major array.
fn fft2(data: &mut [Complex<f64>], m: usize, fft: &Arc<dyn Fft<f64>>) {
    let scratch_len = fft.get_inplace_scratch_len();
    let rows = |data: &mut [Complex<f64>]| {
        data.par_chunks_mut(m).for_each_init(
            || vec![Complex::new(0.0, 0.0); scratch_len],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    };
    rows(data);
    transpose(data, m);
    rows(data);
    transpose(data, m);
}

fn transpose(data: &mut [Complex<f64>], m: usize) {
    for i in 0..m {
        for j in i + 1..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Obstacle;
    use crate::kernel::{make_kernel, KernelFamily};
    use crate::operator::apply_bruteforce;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kernel() -> KernelSpec {
        make_kernel(KernelFamily::RegularizedFractional, 0.5, 2, 0.01, 1.0).unwrap()
    }

    fn max_rel(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        a.iter()
            .zip(b)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
            / scale
    }

    #[test]
    fn matches_bruteforce_with_obstacle() {
        let disk = Obstacle::disk([0.0, 0.0], 0.3).unwrap();
        let grid = Arc::new(Grid2D::with_obstacle(2.0, 16, &disk).unwrap());
        let kern = kernel();
        let plan = FastPlan::new(grid.clone(), &kern).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values = (0..grid.cell_count()).map(|_| rng.gen::<f64>()).collect();
        let f = Field::new(grid, values, 0.4).unwrap();
        let fast = apply_fast(&f, &kern, &plan).unwrap();
        let brute = apply_bruteforce(&f, &kern).unwrap();
        assert!(max_rel(&fast, &brute) < 1e-12);
    }

    #[test]
    fn periodic_backend_matches_bruteforce() {
        let grid = Arc::new(Grid2D::periodic(2.0, 8).unwrap());
        let kern = kernel();
        let plan = FastPlan::new(grid.clone(), &kern).unwrap();
        let f = Field::from_fn(grid, 0.0, |x| (x[0] * 1.3).sin() * x[1].cos()).unwrap();
        let fast = plan.apply(&f).unwrap();
        let brute = apply_bruteforce(&f, &kern).unwrap();
        assert!(max_rel(&fast, &brute) < 1e-13);
    }

    #[test]
    fn mismatched_plan_is_refused() {
        let kern = kernel();
        let plan = FastPlan::new(Arc::new(Grid2D::new(2.0, 8).unwrap()), &kern).unwrap();
        let other = Field::constant(Arc::new(Grid2D::new(2.0, 10).unwrap()), 0.0, 0.0).unwrap();
        assert!(matches!(plan.apply(&other), Err(Error::PlanMismatch)));
        let k2 = kern.with_c_norm(2.0).unwrap();
        let f = Field::constant(plan.grid().clone(), 0.0, 0.0).unwrap();
        assert!(matches!(
            apply_fast(&f, &k2, &plan),
            Err(Error::PlanMismatch)
        ));
    }
}
