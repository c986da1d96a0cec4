//! Small numerical kernels: Gaussian tail, quadrature, one- and two-dimensional
//! maximizers, and a dense symmetric solver for tiny least-squares problems.

use alloc::vec;
use alloc::vec::Vec;
// Unused whenever another crate in the build links std, which brings the
// inherent f64 methods into scope.
#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

/// Beyond this magnitude the Gaussian tail is clamped to 0 or 1.
const Q_CLAMP: f64 = 38.0;

/// Gaussian tail probability `Q(x) = P{Z > x}`.
pub fn q_function(x: f64) -> f64 {
    if x > Q_CLAMP {
        0.0
    } else if x < -Q_CLAMP {
        1.0
    } else {
        0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Expectation of `g(Z)` for a standard normal `Z`, by quadrature on `[-12, 12]`
/// split at the origin and at `±1` so that kinks at those points are resolved.
pub fn gaussian_expectation<F: Fn(f64) -> f64>(g: F, tol: f64) -> f64 {
    let h = |z: f64| g(z) * normal_pdf(z);
    let cuts = [-12.0, -1.0, 0.0, 1.0, 12.0];
    cuts.windows(2)
        .map(|w| integrate(h, w[0], w[1], tol / 4.0))
        .sum()
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // Endpoints are candidates too: the bracket may have collapsed onto one.
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [a, b] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Nelder–Mead maximization in two dimensions. `f` may return `-inf` to mark
/// infeasible points. Returns the best vertex and its value.
pub fn nelder_mead_max(
    f: impl Fn([f64; 2]) -> f64,
    start: [f64; 2],
    step: [f64; 2],
    iterations: usize,
) -> ([f64; 2], f64) {
    let mut simplex = [
        start,
        [start[0] + step[0], start[1]],
        [start[0], start[1] + step[1]],
    ];
    let mut values = simplex.map(&f);
    for _ in 0..iterations {
        // order best (largest) first
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap_or(core::cmp::Ordering::Equal));
        simplex = idx.map(|i| simplex[i]);
        values = idx.map(|i| values[i]);

        let spread = (simplex[0][0] - simplex[2][0]).abs() + (simplex[0][1] - simplex[2][1]).abs();
        if spread < 1e-10 {
            break;
        }
        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr > values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe > fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr > values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = along(0.5);
            let fcon = f(contracted);
            if fcon > values[2] {
                simplex[2] = contracted;
                values[2] = fcon;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        0.5 * (simplex[0][0] + simplex[i][0]),
                        0.5 * (simplex[0][1] + simplex[i][1]),
                    ];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if values[i] > values[best] {
            best = i;
        }
    }
    (simplex[best], values[best])
}

/// Solves `A x = b` for a small symmetric positive semidefinite `A` (row-major,
/// `dim × dim`) by Gaussian elimination with partial pivoting. Returns `None`
/// when the system is numerically singular.
pub fn solve_dense(a: &[f64], b: &[f64], dim: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    for col in 0..dim {
        let pivot = (col..dim).max_by(|&i, &j| {
            m[i * dim + col]
                .abs()
                .partial_cmp(&m[j * dim + col].abs())
                .unwrap_or(core::cmp::Ordering::Equal)
        })?;
        if m[pivot * dim + col].abs() <= 1e-12 * scale {
            return None;
        }
        if pivot != col {
            for k in 0..dim {
                m.swap(pivot * dim + k, col * dim + k);
            }
            x.swap(pivot, col);
        }
        let p = m[col * dim + col];
        for row in col + 1..dim {
            let factor = m[row * dim + col] / p;
            if factor != 0.0 {
                for k in col..dim {
                    m[row * dim + k] -= factor * m[col * dim + k];
                }
                x[row] -= factor * x[col];
            }
        }
    }
    let mut out = vec![0.0; dim];
    for row in (0..dim).rev() {
        let tail: f64 = (row + 1..dim).map(|k| m[row * dim + k] * out[k]).sum();
        out[row] = (x[row] - tail) / m[row * dim + row];
    }
    Some(out)
}

/// Inner product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn q_function_reference_values() {
        assert_abs_diff_eq!(q_function(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(q_function(1.0), 0.158_655_253_931_457, epsilon = 1e-12);
        assert_abs_diff_eq!(q_function(-1.0), 0.841_344_746_068_543, epsilon = 1e-12);
        assert_eq!(q_function(50.0), 0.0);
        assert_eq!(q_function(-50.0), 1.0);
    }

    #[test]
    fn gaussian_moments() {
        assert_abs_diff_eq!(gaussian_expectation(|_| 1.0, 1e-12), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gaussian_expectation(|z| z * z, 1e-12), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gaussian_expectation(|z| z.powi(4), 1e-12), 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(gaussian_expectation(|z| z.powi(6), 1e-12), 15.0, epsilon = 1e-8);
    }

    #[test]
    fn golden_section_finds_interior_and_boundary_maxima() {
        let (x, v) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        let (x, _) = golden_section_max(|x| x, 0.0, 1.0, 1e-10);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn nelder_mead_quadratic() {
        let (p, v) = nelder_mead_max(
            |[x, y]| -(x - 1.0).powi(2) - 2.0 * (y + 0.5).powi(2),
            [0.0, 0.0],
            [0.1, 0.1],
            500,
        );
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(p[1], -0.5, epsilon = 1e-4);
        assert!(v <= 0.0 && v > -1e-8);
    }

    #[test]
    fn dense_solver() {
        let a = [4.0, 1.0, 1.0, 3.0];
        let x = solve_dense(&a, &[1.0, 2.0], 2).unwrap();
        assert_abs_diff_eq!(4.0 * x[0] + x[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[0] + 3.0 * x[1], 2.0, epsilon = 1e-12);
        assert!(solve_dense(&[1.0, 1.0, 1.0, 1.0], &[1.0, 1.0], 2).is_none());
    }
}
