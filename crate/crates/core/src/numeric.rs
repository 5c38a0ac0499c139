//! Small numerical kernels shared across modules: deterministic pairwise
//! reductions, the Lanczos gamma function, Gauss–Legendre nodes and a few
//! cancellation-free power-law helpers.

use std::ops::Add;

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (cascade) sum of `term(i)` for `i in 0..len`.
///
/// The split points depend only on `len`, so the result is bit-identical
/// regardless of how callers parallelise around it.
pub fn pairwise_sum_by<T, F>(len: usize, zero: T, term: &F) -> T
where
    T: Copy + Add<Output = T>,
    F: Fn(usize) -> T,
{
    fn rec<T, F>(lo: usize, hi: usize, zero: T, term: &F) -> T
    where
        T: Copy + Add<Output = T>,
        F: Fn(usize) -> T,
    {
        if hi - lo <= PAIRWISE_BLOCK {
            let mut acc = zero;
            for i in lo..hi {
                acc = acc + term(i);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, zero, term) + rec(mid, hi, zero, term)
        }
    }
    rec(0, len, zero, term)
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(values.len(), 0.0, &|i| values[i])
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation (g = 7, 9 terms), with the
/// reflection formula below 1/2. Returns NaN at the poles.
pub fn gamma(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Eight-point Gauss–Legendre rule on `[-1, 1]` as (node, weight) pairs.
pub const GAUSS_LEGENDRE_8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

/// `sin(x) / x`, with a series branch for `|x| < 1e-4`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `(k + 1)^e - k^e` for integer `k ≥ 0` without catastrophic cancellation.
pub fn unit_step_power_difference(k: usize, e: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let kf = k as f64;
    kf.powf(e) * (e * (1.0 / kf).ln_1p()).exp_m1()
}

/// Exact mean of `ξ^μ` (μ > -1) over the cell `[kΔξ, (k+1)Δξ]`.
pub fn power_law_cell_average(k: usize, dxi: f64, mu: f64) -> f64 {
    let e = mu + 1.0;
    dxi.powf(mu) * unit_step_power_difference(k, e) / e
}

/// Least-squares solution of a small dense system via normal equations and
/// Gaussian elimination with partial pivoting. Returns `None` when singular.
pub fn least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = rows.first()?.len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (row, &y) in rows.iter().zip(rhs) {
        for i in 0..m {
            for j in 0..m {
                a[i][j] += row[i] * row[j];
            }
            a[i][m] += row[i] * y;
        }
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=m {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Some((0..m).map(|i| a[i][m] / a[i][i]).collect())
}
