//! Small numerical helpers: polynomial roots, 3×3 spectra and ODE steppers.

use nalgebra::{DMatrix, Matrix3, Vector3};

/// Real roots of `Σ c_k x^k` (coefficients in ascending order).
///
/// Leading coefficients below `tol` relative to the largest are dropped, so
/// a "cubic" with a vanishing top coefficient is solved as a quadratic.
pub fn real_roots(coeffs: &[f64], tol: f64) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].abs() <= tol * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let mut m = DMatrix::<f64>::zeros(deg, deg);
    for k in 0..deg {
        m[(0, k)] = -coeffs[deg - 1 - k] / lead;
        if k + 1 < deg {
            m[(k + 1, k)] = 1.0;
        }
    }
    let mut roots: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * (1.0 + z.re.abs()))
        .map(|z| polish(coeffs, z.re))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
    roots
}

fn polish(coeffs: &[f64], mut x: f64) -> f64 {
    for _ in 0..3 {
        let (mut p, mut dp) = (0.0, 0.0);
        for &c in coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        if dp == 0.0 {
            break;
        }
        let next = x - p / dp;
        if !next.is_finite() {
            break;
        }
        x = next;
    }
    x
}

/// Evaluates `Σ c_k x^k`.
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Eigenvalues of a real 3×3 matrix as `(re, im)` pairs.
pub fn eigenvalues3(j: &[[f64; 3]; 3]) -> [(f64, f64); 3] {
    let m = to_matrix(j);
    let ev = m.complex_eigenvalues();
    [(ev[0].re, ev[0].im), (ev[1].re, ev[1].im), (ev[2].re, ev[2].im)]
}

/// Unit null vector of `j − λ I` (smallest right singular vector).
pub fn eigenvector3(j: &[[f64; 3]; 3], lambda: f64) -> [f64; 3] {
    let m = to_matrix(j) - Matrix3::identity() * lambda;
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, s)| if *s < best.1 { (i, *s) } else { best });
    let row = v_t.row(k);
    let v = Vector3::new(row[0], row[1], row[2]).normalize();
    [v[0], v[1], v[2]]
}

fn to_matrix(j: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| j[r][c])
}

/// One classical Runge–Kutta step for `y' = f(y)` in `N` dimensions.
pub fn rk4_step<const N: usize>(f: &impl Fn(&[f64; N]) -> [f64; N], y: &[f64; N], h: f64) -> [f64; N] {
    let k1 = f(y);
    let k2 = f(&axpy(y, h / 2.0, &k1));
    let k3 = f(&axpy(y, h / 2.0, &k2));
    let k4 = f(&axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += h * k[i];
    }
    out
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone)]
pub struct AdaptiveRun<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub steps: usize,
}

/// Failure modes of [`dopri5`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdaptiveError {
    /// The right-hand side returned `None` at time `t`.
    Domain { t: f64 },
    StepCollapse,
}

/// Dormand–Prince 5(4) from `t0` to `t1` with mixed absolute/relative tolerance.
///
/// `f` may return `None` to signal that the state left its domain.
pub fn dopri5<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> Option<[f64; N]>,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    atol: f64,
    rtol: f64,
) -> Result<AdaptiveRun<N>, AdaptiveError> {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let span = t1 - t0;
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * (span.abs() / 100.0).min(1e-2 * span.abs().max(1.0));
    let mut steps = 0;
    while (t1 - t) * dir > 0.0 {
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut k = [[0.0; N]; 7];
        let mut ok = true;
        for s in 0..7 {
            let mut ys = y;
            for (r, a) in A[s].iter().enumerate().take(s) {
                for i in 0..N {
                    ys[i] += h * a * k[r][i];
                }
            }
            match f(t + C[s] * h, &ys) {
                Some(v) => k[s] = v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        let err = if ok {
            let mut e2 = 0.0;
            for i in 0..N {
                let y5: f64 = y[i] + h * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>();
                let y4: f64 = y[i] + h * (0..7).map(|s| B4[s] * k[s][i]).sum::<f64>();
                let sc = atol + rtol * y[i].abs().max(y5.abs());
                e2 += ((y5 - y4) / sc).powi(2);
            }
            (e2 / N as f64).sqrt()
        } else {
            f64::INFINITY
        };
        if err <= 1.0 {
            for i in 0..N {
                y[i] += h * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>();
            }
            t += h;
            steps += 1;
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            if !ok && h.abs() < 1e-12 * span.abs().max(1.0) {
                return Err(AdaptiveError::Domain { t });
            }
            let shrink = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.25 };
            h *= shrink;
        }
        if h.abs() < 1e-14 * span.abs().max(1.0) {
            return Err(AdaptiveError::StepCollapse);
        }
    }
    Ok(AdaptiveRun { t, y, steps })
}
