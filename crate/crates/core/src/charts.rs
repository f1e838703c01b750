//! End-point charts and their fundamental forms.
//!
//! Regular ends use `(u, w) -> (u/w, h(u,w)/w, 1/w)`; critical ends use
//! `(u, v) -> (u/h, v/h, 1/h)`. Fundamental forms are returned with the
//! powers of `w` (resp. `h`) cleared so the curvature-line equation can be
//! formed as a polynomial.

use crate::error::{Error, Result};
use crate::jets::{Axis, JetSeries};

/// Third-order jet coefficients `a30, a21, a12, a03`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThirdOrder {
    pub a30: f64,
    pub a21: f64,
    pub a12: f64,
    pub a03: f64,
}

/// Fourth-order jet coefficients `a40, a31, a22, a13, a04`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FourthOrder {
    pub a40: f64,
    pub a31: f64,
    pub a22: f64,
    pub a13: f64,
    pub a04: f64,
}

impl ThirdOrder {
    pub fn is_zero(&self) -> bool {
        [self.a30, self.a21, self.a12, self.a03].iter().all(|c| *c == 0.0)
    }
}

/// Height function data at a regular end point:
/// `h = k0 w + a u²/2 + b u w + c w²/2 + cubic/6 + quartic/24` with binomial weights.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RegularEndJet {
    pub k0: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub third: ThirdOrder,
    pub fourth: FourthOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    /// `h = a²u² + b²v² + …`, a local minimum.
    Definite,
    /// `h = (-a u + v) v + …`.
    Saddle,
}

/// Height function data at a critical end point.
///
/// Quartic terms use the weights `(1, 6, 4, 6, 1)/24` as printed for the
/// critical normal forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalEndJet {
    kind: CriticalKind,
    pub a: f64,
    pub b: f64,
    pub third: ThirdOrder,
    pub fourth: FourthOrder,
}

impl CriticalEndJet {
    pub fn definite(a: f64, b: f64, third: ThirdOrder, fourth: FourthOrder) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidJet(format!(
                "definite critical jet needs a > 0 and b > 0 (got a = {a}, b = {b})"
            )));
        }
        Ok(Self { kind: CriticalKind::Definite, a, b, third, fourth })
    }

    pub fn saddle(a: f64, third: ThirdOrder, fourth: FourthOrder) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::InvalidJet(format!("saddle critical jet needs a != 0 (got {a})")));
        }
        Ok(Self { kind: CriticalKind::Saddle, a, b: 0.0, third, fourth })
    }

    pub fn kind(&self) -> CriticalKind {
        self.kind
    }
}

fn cubic_terms(t: &ThirdOrder) -> [(usize, usize, f64); 4] {
    [
        (3, 0, t.a30 / 6.0),
        (2, 1, t.a21 / 2.0),
        (1, 2, t.a12 / 2.0),
        (0, 3, t.a03 / 6.0),
    ]
}

impl RegularEndJet {
    pub fn height(&self, order: usize) -> JetSeries {
        let f = &self.fourth;
        let mut terms = vec![
            (0, 1, self.k0),
            (2, 0, self.a / 2.0),
            (1, 1, self.b),
            (0, 2, self.c / 2.0),
        ];
        terms.extend(cubic_terms(&self.third));
        terms.extend([
            (4, 0, f.a40 / 24.0),
            (3, 1, f.a31 / 6.0),
            (2, 2, f.a22 / 4.0),
            (1, 3, f.a13 / 6.0),
            (0, 4, f.a04 / 24.0),
        ]);
        JetSeries::from_terms(order, &terms)
    }

    /// Largest coefficient magnitude, the scale for relative zero tests.
    pub fn scale(&self) -> f64 {
        let t = &self.third;
        let f = &self.fourth;
        [self.k0, self.a, self.b, self.c, t.a30, t.a21, t.a12, t.a03, f.a40, f.a31, f.a22, f.a13, f.a04]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

impl CriticalEndJet {
    pub fn height(&self, order: usize) -> JetSeries {
        let f = &self.fourth;
        let mut terms = match self.kind {
            CriticalKind::Definite => vec![(2, 0, self.a * self.a), (0, 2, self.b * self.b)],
            CriticalKind::Saddle => vec![(1, 1, -self.a), (0, 2, 1.0)],
        };
        terms.extend(cubic_terms(&self.third));
        terms.extend([
            (4, 0, f.a40 / 24.0),
            (3, 1, f.a31 / 4.0),
            (2, 2, f.a22 / 6.0),
            (1, 3, f.a13 / 4.0),
            (0, 4, f.a04 / 24.0),
        ]);
        JetSeries::from_terms(order, &terms)
    }

    pub fn scale(&self) -> f64 {
        let t = &self.third;
        let f = &self.fourth;
        [self.a, self.b, t.a30, t.a21, t.a12, t.a03, f.a40, f.a31, f.a22, f.a13, f.a04]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

/// Series that are exact polynomials for quartic jets; every derived quantity
/// in this crate stays below this total degree.
pub const EXACT_ORDER: usize = 10;

/// Height value and derivatives up to second order at a point.
#[derive(Debug, Clone, Copy)]
pub struct HeightDerivatives {
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
    pub h11: f64,
    pub h12: f64,
    pub h22: f64,
}

impl HeightDerivatives {
    pub fn of(h: &JetSeries, x: f64, y: f64) -> Self {
        let h1 = h.differentiate(Axis::First);
        let h2 = h.differentiate(Axis::Second);
        Self {
            h: h.eval(x, y),
            h1: h1.eval(x, y),
            h2: h2.eval(x, y),
            h11: h1.differentiate(Axis::First).eval(x, y),
            h12: h1.differentiate(Axis::Second).eval(x, y),
            h22: h2.differentiate(Axis::Second).eval(x, y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Regular,
    Critical,
}

/// A parametrization of the surface near an end point.
#[derive(Debug, Clone)]
pub struct Chart {
    kind: ChartKind,
    height: JetSeries,
}

pub fn build_regular_chart(jet: &RegularEndJet) -> Chart {
    Chart { kind: ChartKind::Regular, height: jet.height(EXACT_ORDER) }
}

pub fn build_critical_chart(jet: &CriticalEndJet) -> Chart {
    Chart { kind: ChartKind::Critical, height: jet.height(EXACT_ORDER) }
}

impl Chart {
    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn height(&self) -> &JetSeries {
        &self.height
    }

    /// Point of R³ for chart coordinates `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> Result<[f64; 3]> {
        let h = self.height.eval(x, y);
        match self.kind {
            ChartKind::Regular => {
                if y == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                Ok([x / y, h / y, 1.0 / y])
            }
            ChartKind::Critical => {
                if h == 0.0 {
                    return Err(Error::OnEndLocus);
                }
                Ok([x / h, y / h, 1.0 / h])
            }
        }
    }

    /// Positive on the chart's finite region (`w > 0`, resp. `h > 0`).
    pub fn finite_region_value(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            ChartKind::Regular => y,
            ChartKind::Critical => self.height.eval(x, y),
        }
    }

    pub fn fundamental_forms(&self) -> FundamentalForms {
        match self.kind {
            ChartKind::Regular => forms_regular(&self.height),
            ChartKind::Critical => forms_critical(&self.height),
        }
    }

    /// Maps chart points to R³, optionally on to S³ through the central projection.
    pub fn to_ambient(&self, points: &[[f64; 2]]) -> Result<Vec<[f64; 3]>> {
        points.iter().map(|p| self.eval(p[0], p[1])).collect()
    }
}

/// Central projection of R³ onto the upper hemisphere of S³.
pub fn central_projection(p: [f64; 3]) -> [f64; 4] {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + 1.0).sqrt();
    [p[0] / n, p[1] / n, p[2] / n, 1.0 / n]
}

/// Inverse of [`central_projection`] on `w > 0`.
pub fn central_projection_inverse(q: [f64; 4]) -> Result<[f64; 3]> {
    if q[3] <= 0.0 {
        return Err(Error::OnEndLocus);
    }
    Ok([q[0] / q[3], q[1] / q[3], q[2] / q[3]])
}

/// Chart points mapped to R³ and, when `sphere` is set, to S³.
pub fn chart_to_ambient(chart: &Chart, points: &[[f64; 2]], sphere: bool) -> Result<Vec<Vec<f64>>> {
    chart
        .to_ambient(points)?
        .into_iter()
        .map(|p| Ok(if sphere { central_projection(p).to_vec() } else { p.to_vec() }))
        .collect()
}

/// Powers of the chart factor (`w` or `h`) that were cleared from each form.
#[derive(Debug, Clone)]
pub struct ClearedFactor {
    pub base: JetSeries,
    /// Exponents for `E, F, G`.
    pub first: [i32; 3],
    /// Exponent for `e, f, g` (each also carries `1/√(EG − F²)`).
    pub second: i32,
}

/// Factor-cleared first and second fundamental forms.
#[derive(Debug, Clone)]
pub struct FundamentalForms {
    pub big_e: JetSeries,
    pub big_f: JetSeries,
    pub big_g: JetSeries,
    pub e: JetSeries,
    pub f: JetSeries,
    pub g: JetSeries,
    pub factor: ClearedFactor,
}

/// Raw (uncleared) form values at a point.
#[derive(Debug, Clone, Copy)]
pub struct FormValues {
    pub big_e: f64,
    pub big_f: f64,
    pub big_g: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl FundamentalForms {
    /// Reassembles the raw forms at `(x, y)` from numerators and cleared factor.
    pub fn values_at(&self, x: f64, y: f64) -> FormValues {
        let base = self.factor.base.eval(x, y);
        let [pe, pf, pg] = self.factor.first;
        let big_e = self.big_e.eval(x, y) / base.powi(pe);
        let big_f = self.big_f.eval(x, y) / base.powi(pf);
        let big_g = self.big_g.eval(x, y) / base.powi(pg);
        let area = (big_e * big_g - big_f * big_f).sqrt();
        let k = 1.0 / (base.powi(self.factor.second) * area);
        FormValues {
            big_e,
            big_f,
            big_g,
            e: self.e.eval(x, y) * k,
            f: self.f.eval(x, y) * k,
            g: self.g.eval(x, y) * k,
        }
    }
}

pub fn fundamental_forms_regular(jet: &RegularEndJet) -> FundamentalForms {
    forms_regular(&jet.height(EXACT_ORDER))
}

pub fn fundamental_forms_critical(jet: &CriticalEndJet) -> FundamentalForms {
    forms_critical(&jet.height(EXACT_ORDER))
}

fn forms_regular(h: &JetSeries) -> FundamentalForms {
    let o = h.order();
    let u = JetSeries::variable(o, Axis::First);
    let w = JetSeries::variable(o, Axis::Second);
    let one = JetSeries::constant(o, 1.0);
    let hu = h.differentiate(Axis::First);
    let hw = h.differentiate(Axis::Second);
    let whw_h = &(&w * &hw) - h;
    FundamentalForms {
        big_e: &one + &(&hu * &hu),
        big_f: &(&hu * &whw_h) - &u,
        big_g: &(&one + &(&u * &u)) + &(&whw_h * &whw_h),
        e: hu.differentiate(Axis::First),
        f: hu.differentiate(Axis::Second),
        g: hw.differentiate(Axis::Second),
        factor: ClearedFactor { base: w, first: [2, 3, 4], second: 4 },
    }
}

fn forms_critical(h: &JetSeries) -> FundamentalForms {
    let o = h.order();
    let u = JetSeries::variable(o, Axis::First);
    let v = JetSeries::variable(o, Axis::Second);
    let one = JetSeries::constant(o, 1.0);
    let hu = h.differentiate(Axis::First);
    let hv = h.differentiate(Axis::Second);
    let h_uhu = h - &(&u * &hu);
    let h_vhv = h - &(&v * &hv);
    let uu = &u * &u;
    let vv = &v * &v;
    let big_e = &(&h_uhu * &h_uhu) + &(&(&vv + &one) * &(&hu * &hu));
    let cross = &(&u * &hv) + &(&v * &hu);
    let big_f = &(&(&(&uu + &vv) + &one) * &(&hu * &hv)) - &(h * &cross);
    let big_g = &(&h_vhv * &h_vhv) + &(&(&uu + &one) * &(&hv * &hv));
    FundamentalForms {
        big_e,
        big_f,
        big_g,
        e: -&hu.differentiate(Axis::First),
        f: -&hu.differentiate(Axis::Second),
        g: -&hv.differentiate(Axis::Second),
        factor: ClearedFactor { base: h.clone(), first: [4, 4, 4], second: 4 },
    }
}
