//! Extended curvature-line equations `L dw² + M du dw + N du² = 0`, their
//! direction fields and Lie–Cartan suspensions.

use crate::charts::{
    fundamental_forms_critical, fundamental_forms_regular, CriticalEndJet, CriticalKind, FourthOrder,
    FundamentalForms, RegularEndJet, ThirdOrder, EXACT_ORDER,
};
use crate::error::{Error, Result};
use crate::jets::{Axis, JetSeries};
use crate::numeric::{eigenvalues3, real_roots};

/// Binary differential equation `L dw² + M du dw + N du² = 0`.
#[derive(Debug, Clone)]
pub struct Bde {
    pub l: JetSeries,
    pub m: JetSeries,
    pub n: JetSeries,
    /// Forms the equation was built from; used to tell the minimal and
    /// maximal foliations apart.
    pub forms: Option<FundamentalForms>,
}

/// `(L, M, N)` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdeValue {
    pub l: f64,
    pub m: f64,
    pub n: f64,
}

impl BdeValue {
    pub fn discriminant(&self) -> f64 {
        self.m * self.m - 4.0 * self.l * self.n
    }

    pub fn scale(&self) -> f64 {
        self.l.abs().max(self.m.abs()).max(self.n.abs())
    }

    /// `L dw² + M du dw + N du²` on the direction `(du, dw)`.
    pub fn residual(&self, d: [f64; 2]) -> f64 {
        self.l * d[1] * d[1] + self.m * d[0] * d[1] + self.n * d[0] * d[0]
    }
}

impl Bde {
    pub fn new(l: JetSeries, m: JetSeries, n: JetSeries) -> Self {
        Self { l, m, n, forms: None }
    }

    pub fn eval(&self, x: f64, y: f64) -> BdeValue {
        BdeValue { l: self.l.eval(x, y), m: self.m.eval(x, y), n: self.n.eval(x, y) }
    }

    /// Truncates all three coefficients to `order`.
    pub fn truncate(&self, order: usize) -> Self {
        Self {
            l: self.l.truncate(order),
            m: self.m.truncate(order),
            n: self.n.truncate(order),
            forms: self.forms.clone(),
        }
    }

    pub fn order(&self) -> usize {
        self.l.order().min(self.m.order()).min(self.n.order())
    }

    /// Builds the equation from factor-cleared forms, multiplying
    /// `(Fg − Gf, Eg − Ge, Ef − Fe)` by the smallest power of the cleared
    /// factor (times `√(EG − F²)`) that makes all three polynomial.
    pub fn from_forms(ff: FundamentalForms) -> Self {
        let [pe, pf, pg] = ff.factor.first;
        let s = ff.factor.second;
        let top = pe.max(pf).max(pg) + s;
        let base = &ff.factor.base;
        let pow = |k: i32| {
            let mut acc = JetSeries::constant(base.order(), 1.0);
            for _ in 0..k {
                acc = &acc * base;
            }
            acc
        };
        let term = |num: &JetSeries, p: i32, second: &JetSeries| &(num * second) * &pow(top - p - s);
        let l = &term(&ff.big_f, pf, &ff.g) - &term(&ff.big_g, pg, &ff.f);
        let m = &term(&ff.big_e, pe, &ff.g) - &term(&ff.big_g, pg, &ff.e);
        let n = &term(&ff.big_e, pe, &ff.f) - &term(&ff.big_f, pf, &ff.e);
        Self { l, m, n, forms: Some(ff) }
    }

    /// Normal curvature `II(d)/I(d)` of a chart direction, when forms are known.
    pub fn normal_curvature(&self, x: f64, y: f64, d: [f64; 2]) -> Option<f64> {
        let v = self.forms.as_ref()?.values_at(x, y);
        let first = v.big_e * d[0] * d[0] + 2.0 * v.big_f * d[0] * d[1] + v.big_g * d[1] * d[1];
        let second = v.e * d[0] * d[0] + 2.0 * v.f * d[0] * d[1] + v.g * d[1] * d[1];
        let k = second / first;
        k.is_finite().then_some(k)
    }
}

/// Extended equation at a regular end point, exact for quartic jets.
pub fn bde_regular(jet: &RegularEndJet) -> Bde {
    Bde::from_forms(fundamental_forms_regular(jet))
}

/// Extended equation at a critical end point, exact for quartic jets.
pub fn bde_critical(jet: &CriticalEndJet) -> Bde {
    Bde::from_forms(fundamental_forms_critical(jet))
}

/// Relative threshold below which the discriminant counts as a double root.
pub const TANGENCY_THRESHOLD: f64 = 1e-12;

/// Unit principal directions `(du, dw)` at a point.
///
/// One direction is returned on the tangency set, two otherwise. With a
/// previous direction the result is ordered by angular continuity and each
/// vector is oriented to agree with it.
pub fn direction_fields(bde: &Bde, point: [f64; 2], previous: Option<[f64; 2]>) -> Result<Vec<[f64; 2]>> {
    directions_of(bde.eval(point[0], point[1]), previous)
}

/// Same as [`direction_fields`] for pointwise coefficients.
pub fn directions_of(v: BdeValue, previous: Option<[f64; 2]>) -> Result<Vec<[f64; 2]>> {
    let scale = v.scale();
    if scale == 0.0 {
        return Err(Error::DegenerateQuadratic);
    }
    let (l, m, n) = (v.l / scale, v.m / scale, v.n / scale);
    let disc = m * m - 4.0 * l * n;
    if disc < -TANGENCY_THRESHOLD {
        return Err(Error::NegativeDiscriminant);
    }
    let sq = disc.max(0.0).sqrt();
    let single = disc.abs() < TANGENCY_THRESHOLD;
    // Null vectors of the form N du² + M du dw + L dw².
    let mut dirs: Vec<[f64; 2]> = if l.abs() >= n.abs() {
        // slope t = dw/du solves L t² + M t + N = 0
        let q = -0.5 * (m + m.signum_or_one() * sq);
        let t1 = q / l;
        let t2 = if q != 0.0 { n / q } else { t1 };
        vec![unit([1.0, t1]), unit([1.0, t2])]
    } else {
        // s = du/dw solves N s² + M s + L = 0
        let q = -0.5 * (m + m.signum_or_one() * sq);
        let s1 = q / n;
        let s2 = if q != 0.0 { l / q } else { s1 };
        vec![unit([s1, 1.0]), unit([s2, 1.0])]
    };
    if single {
        dirs.truncate(1);
    }
    if let Some(prev) = previous {
        dirs.sort_by(|x, y| dot(*y, prev).abs().total_cmp(&dot(*x, prev).abs()));
        for d in dirs.iter_mut() {
            if dot(*d, prev) < 0.0 {
                *d = [-d[0], -d[1]];
            }
        }
    }
    Ok(dirs)
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}

impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

fn unit(d: [f64; 2]) -> [f64; 2] {
    let n = d[0].hypot(d[1]);
    [d[0] / n, d[1] / n]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Which affine chart of the slope line the suspension lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeChart {
    /// `p = dw/du`, `F = L p² + M p + N`.
    P,
    /// `q = du/dw`, `F = L + M q + N q²`.
    Q,
}

#[derive(Debug, Clone)]
struct Derivs {
    f: JetSeries,
    fu: JetSeries,
    fw: JetSeries,
    fuu: JetSeries,
    fuw: JetSeries,
    fww: JetSeries,
}

impl Derivs {
    fn new(f: &JetSeries) -> Self {
        let fu = f.differentiate(Axis::First);
        let fw = f.differentiate(Axis::Second);
        Self {
            fuu: fu.differentiate(Axis::First),
            fuw: fu.differentiate(Axis::Second),
            fww: fw.differentiate(Axis::Second),
            f: f.clone(),
            fu,
            fw,
        }
    }

    fn at(&self, u: f64, w: f64) -> [f64; 6] {
        [
            self.f.eval(u, w),
            self.fu.eval(u, w),
            self.fw.eval(u, w),
            self.fuu.eval(u, w),
            self.fuw.eval(u, w),
            self.fww.eval(u, w),
        ]
    }
}

/// Lie–Cartan vector field on `{F(u, w, s) = 0}` for a slope chart.
#[derive(Debug, Clone)]
pub struct LieCartanField {
    chart: SlopeChart,
    /// Coefficients of `s⁰, s¹, s²` in `F`.
    coeffs: [Derivs; 3],
}

/// Values of `F` and its partial derivatives at a point of `(u, w, s)`-space.
#[derive(Debug, Clone, Copy)]
struct Partials {
    f: f64,
    fu: f64,
    fw: f64,
    fs: f64,
    fuu: f64,
    fuw: f64,
    fww: f64,
    fus: f64,
    fws: f64,
    fss: f64,
}

pub fn lie_cartan(bde: &Bde, chart: SlopeChart) -> LieCartanField {
    let coeffs = match chart {
        SlopeChart::P => [Derivs::new(&bde.n), Derivs::new(&bde.m), Derivs::new(&bde.l)],
        SlopeChart::Q => [Derivs::new(&bde.l), Derivs::new(&bde.m), Derivs::new(&bde.n)],
    };
    LieCartanField { chart, coeffs }
}

impl LieCartanField {
    pub fn chart(&self) -> SlopeChart {
        self.chart
    }

    fn partials(&self, x: &[f64; 3]) -> Partials {
        let [u, w, s] = *x;
        let c: Vec<[f64; 6]> = self.coeffs.iter().map(|d| d.at(u, w)).collect();
        let comb = |k: usize| c[0][k] + c[1][k] * s + c[2][k] * s * s;
        let dcomb = |k: usize| c[1][k] + 2.0 * c[2][k] * s;
        Partials {
            f: comb(0),
            fu: comb(1),
            fw: comb(2),
            fs: dcomb(0),
            fuu: comb(3),
            fuw: comb(4),
            fww: comb(5),
            fus: dcomb(1),
            fws: dcomb(2),
            fss: 2.0 * c[2][0],
        }
    }

    /// `F(u, w, s)`.
    pub fn f(&self, x: &[f64; 3]) -> f64 {
        self.partials(x).f
    }

    /// `(F_u, F_w, F_s)`.
    pub fn gradient(&self, x: &[f64; 3]) -> [f64; 3] {
        let p = self.partials(x);
        [p.fu, p.fw, p.fs]
    }

    /// The field: `(F_p, p F_p, −(F_u + p F_w))` in the p-chart and
    /// `(q F_q, F_q, −(q F_u + F_w))` in the q-chart.
    pub fn value(&self, x: &[f64; 3]) -> [f64; 3] {
        let p = self.partials(x);
        let s = x[2];
        match self.chart {
            SlopeChart::P => [p.fs, s * p.fs, -(p.fu + s * p.fw)],
            SlopeChart::Q => [s * p.fs, p.fs, -(s * p.fu + p.fw)],
        }
    }

    /// Exact Jacobian of [`value`](Self::value).
    pub fn jacobian(&self, x: &[f64; 3]) -> [[f64; 3]; 3] {
        let p = self.partials(x);
        let s = x[2];
        match self.chart {
            SlopeChart::P => [
                [p.fus, p.fws, p.fss],
                [s * p.fus, s * p.fws, p.fs + s * p.fss],
                [-(p.fuu + s * p.fuw), -(p.fuw + s * p.fww), -(p.fus + p.fw + s * p.fws)],
            ],
            SlopeChart::Q => [
                [s * p.fus, s * p.fws, p.fs + s * p.fss],
                [p.fus, p.fws, p.fss],
                [-(s * p.fuu + p.fuw), -(s * p.fuw + p.fww), -(p.fu + s * p.fus + p.fws)],
            ],
        }
    }

    /// Chart direction `(du, dw)` encoded by the slope coordinate.
    pub fn chart_direction(&self, s: f64) -> [f64; 2] {
        match self.chart {
            SlopeChart::P => [1.0, s],
            SlopeChart::Q => [s, 1.0],
        }
    }

    /// Polynomials in `s` (ascending) of `F`, `F_s` and the third field
    /// component's bracket along the fiber over the chart origin.
    fn fiber_polys(&self) -> ([f64; 3], [f64; 2], [f64; 4]) {
        let c: Vec<[f64; 6]> = self.coeffs.iter().map(|d| d.at(0.0, 0.0)).collect();
        let f = [c[0][0], c[1][0], c[2][0]];
        let fs = [c[1][0], 2.0 * c[2][0]];
        // p-chart: F_u + p F_w ; q-chart: q F_u + F_w
        let (a, b) = match self.chart {
            SlopeChart::P => (1, 2),
            SlopeChart::Q => (2, 1),
        };
        let third = [c[0][a], c[1][a] + c[0][b], c[2][a] + c[1][b], c[2][b]];
        (f, fs, third)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityKind {
    HyperbolicSaddle,
    NonHyperbolic,
    Other,
}

/// A zero of a Lie–Cartan field on the fiber over the chart origin.
#[derive(Debug, Clone)]
pub struct SuspensionSingularity {
    pub chart: SlopeChart,
    /// Slope coordinate (`p` or `q`).
    pub p_value: f64,
    pub jacobian: [[f64; 3]; 3],
    /// Real parts of the eigenvalues; the one closest to zero is last and the
    /// other two are sorted ascending.
    pub eigenvalues: [f64; 3],
    /// Imaginary parts matching `eigenvalues`.
    pub eigenvalues_im: [f64; 3],
    pub kind: SingularityKind,
}

impl SuspensionSingularity {
    pub fn point(&self) -> [f64; 3] {
        [0.0, 0.0, self.p_value]
    }

    /// The two eigenvalues away from the cone direction.
    pub fn nonzero_eigenvalues(&self) -> [f64; 2] {
        [self.eigenvalues[0], self.eigenvalues[1]]
    }
}

/// Zeros of the field on the segment `{(0, 0, s) : s ∈ [lo, hi]}`.
pub fn suspension_singularities(field: &LieCartanField, search: (f64, f64)) -> Result<Vec<SuspensionSingularity>> {
    let (f, fs, third) = field.fiber_polys();
    let scale = f
        .iter()
        .chain(fs.iter())
        .chain(third.iter())
        .fold(0.0_f64, |m, c| m.max(c.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;
    let fs_zero = fs.iter().all(|c| c.abs() <= tol);
    let f_zero = f.iter().all(|c| c.abs() <= tol);
    let candidates: Vec<f64> = if fs_zero && f_zero {
        real_roots(&third, 1e-12)
    } else if fs_zero {
        real_roots(&f, 1e-12)
    } else {
        real_roots(&fs, 1e-12)
    };
    let eval = |poly: &[f64], s: f64| poly.iter().rev().fold(0.0, |acc, c| acc * s + c);
    let mut zeros = Vec::new();
    for s in candidates {
        let w = 1.0 + s.abs().powi(3);
        if eval(&f, s).abs() > 1e-9 * scale * w
            || eval(&fs, s).abs() > 1e-9 * scale * w
            || eval(&third, s).abs() > 1e-9 * scale * w
        {
            continue;
        }
        zeros.push(s);
    }
    if zeros.is_empty() {
        return Err(Error::NoSingularity);
    }
    Ok(zeros
        .into_iter()
        .filter(|s| *s >= search.0 && *s <= search.1)
        .map(|s| singularity_at(field, s))
        .collect())
}

fn singularity_at(field: &LieCartanField, s: f64) -> SuspensionSingularity {
    let x = [0.0, 0.0, s];
    let jac = field.jacobian(&x);
    let mut ev = eigenvalues3(&jac).to_vec();
    // The eigenvalue of smallest modulus goes last.
    let (zi, _) = ev
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, z)| if z.0.hypot(z.1) < b.1 { (i, z.0.hypot(z.1)) } else { b });
    let zero = ev.remove(zi);
    ev.sort_by(|x, y| x.0.total_cmp(&y.0));
    let eigenvalues = [ev[0].0, ev[1].0, zero.0];
    let eigenvalues_im = [ev[0].1, ev[1].1, zero.1];
    let mag = jac.iter().flatten().fold(0.0_f64, |m, c| m.max(c.abs())).max(f64::MIN_POSITIVE);
    let kind = if ev.iter().any(|z| z.1.abs() > 1e-12 * mag) {
        SingularityKind::Other
    } else if ev.iter().any(|z| z.0.abs() <= 1e-9 * mag) {
        SingularityKind::NonHyperbolic
    } else if ev[0].0 * ev[1].0 < 0.0 {
        SingularityKind::HyperbolicSaddle
    } else {
        SingularityKind::Other
    };
    SuspensionSingularity { chart: field.chart, p_value: s, jacobian: jac, eigenvalues, eigenvalues_im, kind }
}

/// Rotates a saddle jet by `tan θ = a` so the branch of `h⁻¹(0)` tangent to
/// `v = a u` becomes tangent to the new first axis.
///
/// The quadratic part becomes `(a ū + v̄) v̄`, so the result has `a' = −a`.
pub fn rotate_saddle_jet(jet: &CriticalEndJet) -> Result<CriticalEndJet> {
    if jet.kind() != CriticalKind::Saddle {
        return Err(Error::InvalidJet("rotation applies to saddle jets only".into()));
    }
    let a = jet.a;
    let c = 1.0 / (1.0 + a * a).sqrt();
    let s = a * c;
    let h = jet.height(4).linear_change([[c, -s], [s, c]]);
    let third = ThirdOrder {
        a30: 6.0 * h.coeff(3, 0),
        a21: 2.0 * h.coeff(2, 1),
        a12: 2.0 * h.coeff(1, 2),
        a03: 6.0 * h.coeff(0, 3),
    };
    let fourth = FourthOrder {
        a40: 24.0 * h.coeff(4, 0),
        a31: 4.0 * h.coeff(3, 1),
        a22: 6.0 * h.coeff(2, 2),
        a13: 4.0 * h.coeff(1, 3),
        a04: 24.0 * h.coeff(0, 4),
    };
    CriticalEndJet::saddle(-h.coeff(1, 1), third, fourth)
}

/// Blow-up `v = u w` of a BDE in `(u, v)`, divided by `u³`.
///
/// Writes `L dv² + M du dv + N du²` in `(u, w)` as
/// `(L w² + M w + N) du² + u (2 L w + M) du dw + L u² dw²` and removes the
/// common factor.
pub fn blow_up_bde(bde: &Bde, factor_power: usize) -> Result<Bde> {
    // two spare orders keep the products with w² and u² lossless
    let o = 2 * bde.order() + 2;
    let lb = bde.l.blow_up_first().with_order(o);
    let mb = bde.m.blow_up_first().with_order(o);
    let nb = bde.n.blow_up_first().with_order(o);
    let u = JetSeries::variable(o, Axis::First);
    let w = JetSeries::variable(o, Axis::Second);
    let du2 = &(&(&lb * &(&w * &w)) + &(&mb * &w)) + &nb;
    let dudw = &u * &(&(&lb * &w).scale(2.0) + &mb);
    let dw2 = &lb * &(&u * &u);
    let tol = 1e-12 * bde.l.max_abs().max(bde.m.max_abs()).max(bde.n.max_abs());
    Ok(Bde::new(
        dw2.divide_first_power(factor_power, tol)?,
        dudw.divide_first_power(factor_power, tol)?,
        du2.divide_first_power(factor_power, tol)?,
    ))
}

/// Blow-up `v = u w` of a saddle critical end, scaled by `1/a` so the
/// leading terms read `(−a30² u/4 + a a30 w) du² + (a a30 u − 2a² w) du dw − a² u dw²`.
pub fn saddle_blowup_bde(jet: &CriticalEndJet) -> Result<Bde> {
    if jet.kind() != crate::charts::CriticalKind::Saddle {
        return Err(Error::InvalidJet("blow-up needs a saddle critical jet".into()));
    }
    let b = blow_up_bde(&bde_critical(jet), 3)?;
    let k = 1.0 / jet.a;
    Ok(Bde::new(b.l.scale(k), b.m.scale(k), b.n.scale(k)))
}

/// Order used for series that must be exact for quartic jets.
pub const BDE_ORDER: usize = EXACT_ORDER;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reg(a: f64, b: f64, a30: f64) -> RegularEndJet {
        RegularEndJet { a, b, third: ThirdOrder { a30, ..Default::default() }, ..Default::default() }
    }

    #[test]
    fn regular_leading_terms() {
        let bde = bde_regular(&reg(1.0, 2.0, 0.0));
        assert_abs_diff_eq!(bde.l.coeff(0, 0), -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bde.m.coeff(0, 0), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bde.n.coeff(1, 1), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bde.n.coeff(0, 2), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn plane_has_zero_equation() {
        let bde = bde_regular(&RegularEndJet::default());
        assert_eq!(bde.l.max_abs() + bde.m.max_abs() + bde.n.max_abs(), 0.0);
    }

    #[test]
    fn saddle_leading_terms() {
        let jet = CriticalEndJet::saddle(1.0, Default::default(), Default::default()).unwrap();
        let bde = bde_critical(&jet);
        assert_abs_diff_eq!(bde.l.coeff(2, 0), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bde.l.coeff(1, 1), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bde.m.coeff(0, 2), -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bde.n.coeff(0, 2), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_equation_has_diagonal_slopes() {
        let o = 2;
        let bde = Bde::new(JetSeries::constant(o, -1.0), JetSeries::zero(o), JetSeries::constant(o, 1.0));
        let dirs = direction_fields(&bde, [0.3, 0.2], None).unwrap();
        let mut slopes: Vec<f64> = dirs.iter().map(|d| d[1] / d[0]).collect();
        slopes.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(slopes[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(slopes[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn biregular_slopes_at_origin() {
        let bde = bde_regular(&reg(1.0, 1.0, 0.0));
        let dirs = direction_fields(&bde, [0.0, 0.0], None).unwrap();
        let mut slopes: Vec<f64> = dirs.iter().map(|d| d[1] / d[0]).collect();
        slopes.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(slopes[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(slopes[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn elliptic_point_has_no_direction() {
        let o = 1;
        let bde = Bde::new(JetSeries::constant(o, 1.0), JetSeries::zero(o), JetSeries::constant(o, 1.0));
        assert_eq!(direction_fields(&bde, [0.0, 0.0], None), Err(Error::NegativeDiscriminant));
        let zero = Bde::new(JetSeries::zero(o), JetSeries::zero(o), JetSeries::zero(o));
        assert_eq!(direction_fields(&zero, [0.0, 0.0], None), Err(Error::DegenerateQuadratic));
    }

    #[test]
    fn continuity_ordering() {
        let o = 1;
        let bde = Bde::new(JetSeries::constant(o, -1.0), JetSeries::zero(o), JetSeries::constant(o, 1.0));
        let prev = [-1.0, -0.9];
        let dirs = direction_fields(&bde, [0.0, 0.0], Some(prev)).unwrap();
        assert!(dirs[0][0] < 0.0 && dirs[0][1] < 0.0);
        assert_abs_diff_eq!(dirs[0][1] / dirs[0][0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn lie_cartan_at_biregular_origin() {
        let bde = bde_regular(&reg(1.0, 2.0, 0.0));
        let x = lie_cartan(&bde, SlopeChart::P).value(&[0.0, 0.0, 0.0]);
        assert_abs_diff_eq!(x[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[2], 0.0, epsilon = 1e-14);
        // Over the origin the q-chart root is q = -b/a.
        let y = lie_cartan(&bde, SlopeChart::Q).value(&[0.0, 0.0, -2.0]);
        assert_abs_diff_eq!(y[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(y[1], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(y[2], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn inflexion_singularity() {
        let bde = bde_regular(&reg(0.0, 1.0, 1.0));
        let s = suspension_singularities(&lie_cartan(&bde, SlopeChart::P), (-10.0, 10.0)).unwrap();
        assert_eq!(s.len(), 1);
        assert_abs_diff_eq!(s[0].p_value, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[0].eigenvalues[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[0].eigenvalues[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[0].eigenvalues[2], 0.0, epsilon = 1e-12);
        assert_eq!(s[0].kind, SingularityKind::HyperbolicSaddle);
    }

    #[test]
    fn regular_fiber_reports_no_singularity() {
        let bde = bde_regular(&reg(1.0, 2.0, 0.0));
        let field = lie_cartan(&bde, SlopeChart::P);
        assert_eq!(suspension_singularities(&field, (-0.5, 0.5)).unwrap_err(), Error::NoSingularity);
    }

    #[test]
    fn umbilic_inflexion_singularities() {
        let jet = RegularEndJet {
            third: ThirdOrder { a30: -1.0, a12: 1.0, ..Default::default() },
            ..Default::default()
        };
        let field = lie_cartan(&bde_regular(&jet), SlopeChart::P);
        let s = suspension_singularities(&field, (-10.0, 10.0)).unwrap();
        let ps: Vec<f64> = s.iter().map(|x| x.p_value).collect();
        assert_eq!(ps.len(), 3);
        for (p, e) in ps.iter().zip([-1.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*p, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn tangency_of_the_field() {
        let jet = RegularEndJet {
            a: 0.3,
            b: -0.7,
            third: ThirdOrder { a30: 0.4, a21: -0.2, a12: 0.9, a03: 0.1 },
            ..Default::default()
        };
        let field = lie_cartan(&bde_regular(&jet), SlopeChart::P);
        for k in 0..20 {
            let x = [0.05 * k as f64 - 0.5, 0.1 + 0.02 * k as f64, 0.3 - 0.07 * k as f64];
            let g = field.gradient(&x);
            let v = field.value(&x);
            let d = g[0] * v[0] + g[1] * v[1] + g[2] * v[2];
            assert!(d.abs() < 1e-10);
        }
    }

    #[test]
    fn rotation_round_trip() {
        let t = ThirdOrder { a30: 0.3, a21: -0.4, a12: 0.8, a03: 0.2 };
        let f = FourthOrder { a40: 0.1, a31: -0.5, a22: 0.7, a13: 0.25, a04: -0.3 };
        let jet = CriticalEndJet::saddle(1.7, t, f).unwrap();
        let once = rotate_saddle_jet(&jet).unwrap();
        assert_abs_diff_eq!(once.a, -1.7, epsilon = 1e-14);
        let back = rotate_saddle_jet(&once).unwrap();
        assert_abs_diff_eq!(back.a, jet.a, epsilon = 1e-12);
        let x = [back.third.a30, back.third.a21, back.third.a12, back.third.a03];
        let y = [t.a30, t.a21, t.a12, t.a03];
        for k in 0..4 {
            assert_abs_diff_eq!(x[k], y[k], epsilon = 1e-12);
        }
        assert_abs_diff_eq!(back.fourth.a31, f.a31, epsilon = 1e-12);
        assert_abs_diff_eq!(back.fourth.a22, f.a22, epsilon = 1e-12);
    }

    #[test]
    fn rotation_without_cubics_keeps_them_zero() {
        let jet = CriticalEndJet::saddle(1.0, Default::default(), Default::default()).unwrap();
        let r = rotate_saddle_jet(&jet).unwrap();
        assert!(r.third.is_zero());
    }

    #[test]
    fn saddle_blow_up_singularities() {
        let a = 1.0;
        let jet = CriticalEndJet::saddle(a, ThirdOrder { a30: 2.0, ..Default::default() }, Default::default())
            .unwrap();
        let blown = blow_up_bde(&bde_critical(&jet), 3).unwrap();
        let field = lie_cartan(&blown, SlopeChart::Q);
        let s = suspension_singularities(&field, (-100.0, 100.0)).unwrap();
        let qs: Vec<f64> = s.iter().map(|x| x.p_value).collect();
        assert_eq!(qs.len(), 3);
        for (q, e) in qs.iter().zip([0.0, 1.0, 3.0]) {
            assert_abs_diff_eq!(*q, e, epsilon = 1e-10);
        }
    }
}
