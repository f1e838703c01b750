//! Independent reference computations used by tests and the verify suites.
//!
//! Nothing here feeds the main pipeline: these are finite-difference
//! evaluations of the explicit embeddings and hand-transcribed closed forms
//! against which the series engine is checked.

use crate::bde::LieCartanField;
use crate::charts::{Chart, CriticalEndJet, FormValues, RegularEndJet};
use crate::jets::JetSeries;

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn comb(terms: &[(f64, [f64; 3])], h: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (c, p) in terms {
        for k in 0..3 {
            out[k] += c * p[k];
        }
    }
    out.map(|x| x / h)
}

/// Fundamental forms of a chart by fourth-order central differences of the
/// embedding, with unit normal `X_x × X_y / |X_x × X_y|`.
///
/// Returns `None` when the stencil touches the chart boundary.
pub fn fd_fundamental_forms(chart: &Chart, x: f64, y: f64, step: f64) -> Option<FormValues> {
    let f = |dx: f64, dy: f64| chart.eval(x + dx * step, y + dy * step).ok();
    let c = f(0.0, 0.0)?;
    let mut px = Vec::new();
    let mut py = Vec::new();
    for k in [-2.0, -1.0, 1.0, 2.0] {
        px.push(f(k, 0.0)?);
        py.push(f(0.0, k)?);
    }
    let d1 = |p: &[[f64; 3]]| comb(&[(1.0 / 12.0, p[0]), (-8.0 / 12.0, p[1]), (8.0 / 12.0, p[2]), (-1.0 / 12.0, p[3])], step);
    let d2 = |p: &[[f64; 3]]| {
        comb(
            &[(-1.0 / 12.0, p[0]), (16.0 / 12.0, p[1]), (-30.0 / 12.0, c), (16.0 / 12.0, p[2]), (-1.0 / 12.0, p[3])],
            step * step,
        )
    };
    let xu = d1(&px);
    let xw = d1(&py);
    let xuu = d2(&px);
    let xww = d2(&py);
    let mut cross_terms = Vec::new();
    for (i, j) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        cross_terms.push(f(i, j)?);
    }
    let xuw = sub3(sub3(cross_terms[0], cross_terms[1]), sub3(cross_terms[2], cross_terms[3])).map(|v| v / (4.0 * step * step));
    let n = cross(xu, xw);
    let nn = dot3(n, n).sqrt();
    let n = n.map(|v| v / nn);
    Some(FormValues {
        big_e: dot3(xu, xu),
        big_f: dot3(xu, xw),
        big_g: dot3(xw, xw),
        e: dot3(xuu, n),
        f: dot3(xuw, n),
        g: dot3(xww, n),
    })
}

/// Low-order part of the extended regular-end equation as printed, with
/// `L, M` through degree 2 and `N` through degree 3.
pub fn printed_regular_bde(jet: &RegularEndJet) -> [JetSeries; 3] {
    let (a, b, c) = (jet.a, jet.b, jet.c);
    let t = &jet.third;
    let q = &jet.fourth;
    let l = JetSeries::from_terms(
        2,
        &[
            (0, 0, -b),
            (1, 0, -t.a21),
            (0, 1, -t.a12),
            (1, 1, -(c + q.a22)),
            (2, 0, -(b + 0.5 * q.a31)),
            (0, 2, -0.5 * q.a13),
        ],
    );
    let m = JetSeries::from_terms(
        2,
        &[
            (0, 0, -a),
            (1, 0, -t.a30),
            (0, 1, -t.a21),
            (2, 0, -0.5 * (2.0 * a + q.a40)),
            (1, 1, -q.a31),
            (0, 2, 0.5 * (2.0 * c - q.a22)),
        ],
    );
    let n = JetSeries::from_terms(
        3,
        &[(1, 1, a), (0, 2, b), (2, 1, t.a30), (1, 2, 2.0 * t.a21), (0, 3, t.a12)],
    );
    [l, m, n]
}

/// Low-order part of the saddle critical-end equation as printed, through
/// degree 3 (with `−2(a a12 + a21) v` in `N`).
pub fn printed_saddle_bde(jet: &CriticalEndJet) -> [JetSeries; 3] {
    let a = jet.a;
    let t = &jet.third;
    let l = JetSeries::from_terms(
        3,
        &[
            (2, 0, -a.powi(3)),
            (1, 1, 2.0 * a * a),
            (1, 2, -3.0 * a * t.a12),
            (2, 1, 2.0 * a * a * t.a12 - 3.0 * a * t.a21 - 2.0 * t.a30),
            (3, 0, a * t.a30 + 2.0 * a * a * t.a21),
            (0, 3, 2.0 * t.a12 + a * t.a03),
        ],
    );
    let m = JetSeries::from_terms(
        3,
        &[
            (0, 2, -2.0 * a * a),
            (1, 2, 4.0 * t.a30 - a * a * t.a12),
            (2, 1, a * a * t.a21 - 2.0 * a * t.a30),
            (3, 0, a * a * t.a30),
            (0, 3, 2.0 * a * t.a12 - a * a * t.a03 + 4.0 * t.a21),
        ],
    );
    let n = JetSeries::from_terms(
        3,
        &[
            (0, 2, a.powi(3)),
            (1, 2, -2.0 * a * (a * t.a21 + t.a30)),
            (0, 3, -2.0 * a * (a * t.a12 + t.a21)),
        ],
    );
    [l, m, n]
}

/// The printed `l₀(θ)` of a definite critical end.
pub fn printed_l0(jet: &CriticalEndJet, theta: f64) -> f64 {
    let (a, b) = (jet.a, jet.b);
    let t = &jet.third;
    let (c, s) = (theta.cos(), theta.sin());
    2.0 * a.powi(5)
        * b.powi(5)
        * (t.a30 * b.powi(3) * c * c * s
            + t.a21 * a * b * b * (2.0 * c - 3.0 * c.powi(3))
            + t.a12 * a * a * b * (s - 3.0 * c * c * s)
            + t.a03 * a.powi(3) * (c.powi(3) - c))
}

/// The printed `n₀(θ)`.
///
/// With `corrected` the coefficient of `b a² a12 sin θ` inside the bracket is
/// 1; the verbatim display has 4.
pub fn printed_n0(jet: &CriticalEndJet, theta: f64, corrected: bool) -> f64 {
    let (a, b) = (jet.a, jet.b);
    let t = &jet.third;
    let (c, s) = (theta.cos(), theta.sin());
    let k = if corrected { 1.0 } else { 4.0 };
    4.0 * b.powi(5)
        * a.powi(5)
        * ((-3.0 * t.a21 * b * b * a + t.a03 * a.powi(3)) * c.powi(3)
            + (t.a30 * b.powi(3) - 3.0 * t.a12 * b * a * a) * s * c * c
            + (-t.a03 * a.powi(3) + 2.0 * t.a21 * b * b * a) * c
            + k * b * a * a * t.a12 * s)
}

/// The printed `m₁(θ)`.
pub fn printed_m1(jet: &CriticalEndJet, theta: f64) -> f64 {
    let (a, b) = (jet.a, jet.b);
    let t = &jet.third;
    let (c, s) = (theta.cos(), theta.sin());
    -4.0 * b.powi(5)
        * a.powi(5)
        * ((t.a30 * b.powi(3) + t.a12 * b * a * a) * c + (t.a21 * b * b * a + t.a03 * a.powi(3)) * s)
}

/// Fourth-order central-difference Jacobian of a Lie–Cartan field.
pub fn numeric_jacobian(field: &LieCartanField, x: [f64; 3], step: f64) -> [[f64; 3]; 3] {
    let mut j = [[0.0; 3]; 3];
    for c in 0..3 {
        let at = |k: f64| {
            let mut y = x;
            y[c] += k * step;
            field.value(&y)
        };
        let (p1, m1, p2, m2) = (at(1.0), at(-1.0), at(2.0), at(-2.0));
        for r in 0..3 {
            j[r][c] = (8.0 * (p1[r] - m1[r]) - (p2[r] - m2[r])) / (12.0 * step);
        }
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{build_critical_chart, build_regular_chart, fundamental_forms_critical, fundamental_forms_regular, ThirdOrder, FourthOrder};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1.0)
    }

    fn check(series: FormValues, fd: FormValues, tol: f64) {
        let pairs = [
            (series.big_e, fd.big_e),
            (series.big_f, fd.big_f),
            (series.big_g, fd.big_g),
            (series.e, fd.e),
            (series.f, fd.f),
            (series.g, fd.g),
        ];
        for (s, d) in pairs {
            assert!(rel(s, d) < tol, "{s} vs {d}");
        }
    }

    #[test]
    fn regular_forms_match_embedding() {
        let jet = RegularEndJet {
            k0: 0.3,
            a: 0.7,
            b: -0.4,
            c: 0.2,
            third: ThirdOrder { a30: 0.5, a21: -0.3, a12: 0.8, a03: -0.6 },
            fourth: FourthOrder { a40: 0.1, a31: 0.9, a22: -0.2, a13: 0.4, a04: -0.7 },
        };
        let chart = build_regular_chart(&jet);
        let series = fundamental_forms_regular(&jet).values_at(0.05, 0.05);
        check(series, fd_fundamental_forms(&chart, 0.05, 0.05, 1e-5).unwrap(), 1e-6);
    }

    #[test]
    fn critical_forms_match_embedding() {
        let jet = CriticalEndJet::definite(
            1.2,
            0.8,
            ThirdOrder { a30: 0.5, a21: -0.3, a12: 0.8, a03: -0.6 },
            FourthOrder { a40: 0.1, a31: 0.9, a22: -0.2, a13: 0.4, a04: -0.7 },
        )
        .unwrap();
        let chart = build_critical_chart(&jet);
        let series = fundamental_forms_critical(&jet).values_at(0.2, 0.1);
        check(series, fd_fundamental_forms(&chart, 0.2, 0.1, 1e-5).unwrap(), 1e-6);
    }
}
