//! Small quadrature toolbox: adaptive Gauss-Kronrod (7/15) on finite and
//! semi-infinite intervals, and composite Simpson.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        // Gauss nodes are the odd-indexed Kronrod abscissae.
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the total
/// estimate is below `max(abs_tol, rel_tol * |I|)` or `max_intervals` is hit.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    integrate_with_limit(&f, a, b, abs_tol, rel_tol, 2000)
}

fn integrate_with_limit<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) && parts.len() < max_intervals {
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, pv, pe) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // Re-sum to shed the drift accumulated by incremental updates.
    parts.iter().map(|p| p.2).sum()
}

/// Integral of `f` over `[a, +inf)`.
///
/// Uses `x = b e^y` (with `b = a` for `a > 0`) so algebraic decay becomes
/// exponential decay, then maps `y = t / (1 - t)` onto `[0, 1)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    let (head, base) = if a > 0.0 {
        (0.0, a)
    } else {
        (
            integrate_with_limit(&f, a, 1.0, abs_tol, rel_tol, 2000),
            1.0,
        )
    };
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - t;
        let y = t / one_minus;
        let x = base * y.exp();
        let v = f(x) * x / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    head + integrate_with_limit(&g, 0.0, 1.0, abs_tol, rel_tol, 4000)
}

/// Composite Simpson rule with `panels` (rounded up to even) sub-intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2) + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
