//! Truncated bivariate power series and trigonometric polynomials.
//!
//! A [`JetSeries`] stores `Σ c_ij x^i y^j` for every `i + j <= order`. The two
//! variables are positional: `(u, w)` in the regular chart, `(u, v)` in the
//! critical chart. Binary operations truncate to the smaller operand order.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Default truncation order of the series engine.
pub const DEFAULT_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// First chart variable (`u`).
    First,
    /// Second chart variable (`w` or `v`).
    Second,
}

#[inline]
fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

#[inline]
fn len_for(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct JetSeries {
    order: usize,
    coeffs: Vec<f64>,
}

impl JetSeries {
    pub fn zero(order: usize) -> Self {
        Self {
            order,
            coeffs: vec![0.0; len_for(order)],
        }
    }

    pub fn constant(order: usize, c: f64) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The coordinate function `u` (or `w`/`v` for [`Axis::Second`]).
    pub fn variable(order: usize, axis: Axis) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            match axis {
                Axis::First => s.set(1, 0, 1.0),
                Axis::Second => s.set(0, 1, 1.0),
            }
        }
        s
    }

    /// Builds a series from `(i, j, c)` monomials; terms above `order` are dropped.
    pub fn from_terms(order: usize, terms: &[(usize, usize, f64)]) -> Self {
        let mut s = Self::zero(order);
        for &(i, j, c) in terms {
            if i + j <= order {
                s.coeffs[index(i, j)] += c;
            }
        }
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient of `x^i y^j`; zero beyond the truncation order.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.order {
            0.0
        } else {
            self.coeffs[index(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, c: f64) {
        assert!(i + j <= self.order, "monomial ({i},{j}) above order {}", self.order);
        self.coeffs[index(i, j)] = c;
    }

    /// Iterates `(i, j, c)` over every stored coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.order).flat_map(move |d| (0..=d).map(move |j| (d - j, j, self.coeffs[index(d - j, j)])))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut s = Self::zero(order);
        s.coeffs.copy_from_slice(&self.coeffs[..len_for(order)]);
        s
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Horner-style evaluation by total degree.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut xp = vec![1.0; self.order + 1];
        let mut yp = vec![1.0; self.order + 1];
        for k in 1..=self.order {
            xp[k] = xp[k - 1] * x;
            yp[k] = yp[k - 1] * y;
        }
        self.terms().map(|(i, j, c)| c * xp[i] * yp[j]).sum()
    }

    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0 == 0.0 {
            return Err(Error::ZeroConstantTerm);
        }
        // 1/(c0 (1 + t)) = (1/c0) Σ (-t)^k
        let t = self.without_constant().scale(1.0 / c0);
        let terms = (0..=self.order).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 });
        Ok(power_series_in(&t, terms).scale(1.0 / c0))
    }

    pub fn sqrt_series(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0 <= 0.0 {
            return Err(Error::NonPositiveConstantTerm(c0));
        }
        let t = self.without_constant().scale(1.0 / c0);
        // binomial(1/2, k)
        let mut binom = Vec::with_capacity(self.order + 1);
        let mut b = 1.0;
        for k in 0..=self.order {
            binom.push(b);
            b *= (0.5 - k as f64) / (k as f64 + 1.0);
        }
        Ok(power_series_in(&t, binom.into_iter()).scale(c0.sqrt()))
    }

    fn without_constant(&self) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = 0.0;
        s
    }

    /// Formal partial derivative; the order drops by one.
    pub fn differentiate(&self, axis: Axis) -> Self {
        let order = self.order.saturating_sub(1);
        let mut s = Self::zero(order);
        if self.order == 0 {
            return s;
        }
        for (i, j, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            match axis {
                Axis::First if i > 0 && i + j - 1 <= order => {
                    s.coeffs[index(i - 1, j)] += c * i as f64;
                }
                Axis::Second if j > 0 && i + j - 1 <= order => {
                    s.coeffs[index(i, j - 1)] += c * j as f64;
                }
                _ => {}
            }
        }
        s
    }

    /// Same coefficients at a larger (or smaller) order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut s = Self::zero(order);
        let n = len_for(order.min(self.order));
        s.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        s
    }

    /// Substitutes `y = x * s` (projective blow-up along the first axis).
    /// The order doubles so that no term is lost.
    pub fn blow_up_first(&self) -> Self {
        let mut out = Self::zero(2 * self.order);
        for (i, j, c) in self.terms() {
            if c != 0.0 {
                out.coeffs[index(i + j, j)] += c;
            }
        }
        out
    }

    /// Substitutes `x = s * y` (projective blow-up along the second axis).
    pub fn blow_up_second(&self) -> Self {
        let mut out = Self::zero(2 * self.order);
        for (i, j, c) in self.terms() {
            if c != 0.0 {
                out.coeffs[index(i, i + j)] += c;
            }
        }
        out
    }

    /// Divides by `x^k`. Every coefficient with `i < k` must be below `tol`.
    pub fn divide_first_power(&self, k: usize, tol: f64) -> Result<Self> {
        let order = self.order.saturating_sub(k);
        let mut out = Self::zero(order);
        for (i, j, c) in self.terms() {
            if i < k {
                if c.abs() > tol {
                    return Err(Error::InvalidJet(format!(
                        "coefficient of x^{i} y^{j} = {c:e} blocks division by x^{k}"
                    )));
                }
            } else if i - k + j <= order {
                out.coeffs[index(i - k, j)] = c;
            }
        }
        Ok(out)
    }

    /// Linear change of variables `x = m00 X + m01 Y`, `y = m10 X + m11 Y`.
    pub fn linear_change(&self, m: [[f64; 2]; 2]) -> Self {
        let order = self.order;
        let x = Self::from_terms(order, &[(1, 0, m[0][0]), (0, 1, m[0][1])]);
        let y = Self::from_terms(order, &[(1, 0, m[1][0]), (0, 1, m[1][1])]);
        let xp = powers(&x, order);
        let yp = powers(&y, order);
        let mut out = Self::zero(order);
        for (i, j, c) in self.terms() {
            if c != 0.0 {
                out = &out + &(&xp[i] * &yp[j]).scale(c);
            }
        }
        out
    }

    /// Substitutes `x = scale_x r cosθ`, `y = scale_y r sinθ`.
    pub fn polar_substitute(&self, scale_x: f64, scale_y: f64) -> PolarSeries {
        let mut coeffs: Vec<TrigPoly> = (0..=self.order).map(TrigPoly::zero).collect();
        for (i, j, c) in self.terms() {
            if c != 0.0 {
                let k = c * scale_x.powi(i as i32) * scale_y.powi(j as i32);
                coeffs[i + j].add_term(i, j, k);
            }
        }
        PolarSeries { coeffs }
    }
}

fn powers(x: &JetSeries, n: usize) -> Vec<JetSeries> {
    let mut out = vec![JetSeries::constant(x.order, 1.0)];
    for k in 1..=n {
        let next = &out[k - 1] * x;
        out.push(next);
    }
    out
}

/// Evaluates `Σ c_k t^k` for a series `t` without constant term.
fn power_series_in(t: &JetSeries, coeffs: impl Iterator<Item = f64>) -> JetSeries {
    let mut acc = JetSeries::zero(t.order);
    let mut p = JetSeries::constant(t.order, 1.0);
    for c in coeffs {
        acc = &acc + &p.scale(c);
        p = &p * t;
    }
    acc
}

impl Add for &JetSeries {
    type Output = JetSeries;
    fn add(self, rhs: &JetSeries) -> JetSeries {
        let order = self.order.min(rhs.order);
        let n = len_for(order);
        JetSeries {
            order,
            coeffs: self.coeffs[..n].iter().zip(&rhs.coeffs[..n]).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &JetSeries {
    type Output = JetSeries;
    fn sub(self, rhs: &JetSeries) -> JetSeries {
        let order = self.order.min(rhs.order);
        let n = len_for(order);
        JetSeries {
            order,
            coeffs: self.coeffs[..n].iter().zip(&rhs.coeffs[..n]).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &JetSeries {
    type Output = JetSeries;
    fn mul(self, rhs: &JetSeries) -> JetSeries {
        let order = self.order.min(rhs.order);
        let mut out = JetSeries::zero(order);
        for (i1, j1, c1) in self.terms() {
            if c1 == 0.0 || i1 + j1 > order {
                continue;
            }
            let rest = order - i1 - j1;
            for d in 0..=rest {
                for j2 in 0..=d {
                    let i2 = d - j2;
                    let c2 = rhs.coeffs[index(i2, j2)];
                    if c2 != 0.0 {
                        out.coeffs[index(i1 + i2, j1 + j2)] += c1 * c2;
                    }
                }
            }
        }
        out
    }
}

impl Neg for &JetSeries {
    type Output = JetSeries;
    fn neg(self) -> JetSeries {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for JetSeries {
            type Output = JetSeries;
            fn $m(self, rhs: JetSeries) -> JetSeries {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&JetSeries> for JetSeries {
            type Output = JetSeries;
            fn $m(self, rhs: &JetSeries) -> JetSeries {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Polynomial in `cos θ` and `sin θ`, stored in the monomial basis
/// `cos^a θ sin^b θ` with `a + b <= degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    degree: usize,
    coeffs: Vec<f64>,
}

impl TrigPoly {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![0.0; len_for(degree)],
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut t = Self::zero(0);
        t.coeffs[0] = c;
        t
    }

    pub fn from_terms(terms: &[(usize, usize, f64)]) -> Self {
        let degree = terms.iter().map(|&(a, b, _)| a + b).max().unwrap_or(0);
        let mut t = Self::zero(degree);
        for &(a, b, c) in terms {
            t.add_term(a, b, c);
        }
        t
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient of `cos^a θ sin^b θ`.
    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.degree {
            0.0
        } else {
            self.coeffs[index(a, b)]
        }
    }

    pub fn add_term(&mut self, a: usize, b: usize, c: f64) {
        if a + b > self.degree {
            let mut grown = Self::zero(a + b);
            grown.coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
            *self = grown;
        }
        self.coeffs[index(a, b)] += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.degree).flat_map(move |d| (0..=d).map(move |b| (d - b, b, self.coeffs[index(d - b, b)])))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let mut cp = vec![1.0; self.degree + 1];
        let mut sp = vec![1.0; self.degree + 1];
        for k in 1..=self.degree {
            cp[k] = cp[k - 1] * c;
            sp[k] = sp[k - 1] * s;
        }
        self.terms().map(|(a, b, k)| k * cp[a] * sp[b]).sum()
    }

    /// Exact `∫_0^{2π}` using `∫ cos^a sin^b = 2π (a-1)!!(b-1)!!/(a+b)!!` for even `a`, `b`.
    pub fn integral_full_period(&self) -> f64 {
        self.terms()
            .filter(|&(a, b, c)| c != 0.0 && a % 2 == 0 && b % 2 == 0)
            .map(|(a, b, c)| c * 2.0 * PI * double_factorial_ratio(a, b))
            .sum()
    }

    /// Largest coefficient magnitude; used for relative tolerances.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Canonical form using `sin² θ = 1 − cos² θ`, so only `sin⁰` and `sin¹`
    /// remain. Two trig polynomials are equal as functions iff their reduced
    /// forms agree.
    pub fn reduced(&self) -> Self {
        let mut out = Self::zero(self.degree);
        for (a, b, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            let (half, odd) = (b / 2, b % 2);
            let mut binom = 1.0;
            for k in 0..=half {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                out.add_term(a + 2 * k, odd, sign * binom * c);
                binom = binom * (half - k) as f64 / (k + 1) as f64;
            }
        }
        out
    }

    /// True when no monomial of even total degree has a nonzero coefficient.
    pub fn is_odd(&self, tol: f64) -> bool {
        self.terms().all(|(a, b, c)| (a + b) % 2 == 1 || c.abs() <= tol)
    }
}

fn double_factorial_ratio(a: usize, b: usize) -> f64 {
    // (a-1)!! (b-1)!! / (a+b)!!, a and b even
    let mut num = 1.0;
    let mut k = 1;
    while k < a {
        num *= k as f64;
        k += 2;
    }
    k = 1;
    while k < b {
        num *= k as f64;
        k += 2;
    }
    let mut den = 1.0;
    k = 2;
    while k <= a + b {
        den *= k as f64;
        k += 2;
    }
    num / den
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        let (big, small) = if self.degree >= rhs.degree { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (o, s) in out.coeffs.iter_mut().zip(&small.coeffs) {
            *o += s;
        }
        out
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        let mut out = TrigPoly::zero(self.degree + rhs.degree);
        for (a1, b1, c1) in self.terms() {
            if c1 == 0.0 {
                continue;
            }
            for (a2, b2, c2) in rhs.terms() {
                if c2 != 0.0 {
                    out.coeffs[index(a1 + a2, b1 + b2)] += c1 * c2;
                }
            }
        }
        out
    }
}

/// Power series in `r` whose coefficients are trigonometric polynomials in `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSeries {
    pub coeffs: Vec<TrigPoly>,
}

impl PolarSeries {
    pub fn zero(len: usize) -> Self {
        Self {
            coeffs: vec![TrigPoly::zero(0); len],
        }
    }

    /// Number of stored powers of `r`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> TrigPoly {
        self.coeffs.get(k).cloned().unwrap_or_else(|| TrigPoly::zero(0))
    }

    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, t| acc * r + t.eval(theta))
    }

    /// Multiplies every coefficient by a fixed trigonometric polynomial.
    pub fn times_trig(&self, t: &TrigPoly) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * t).collect(),
        }
    }

    /// Multiplies by `r^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![TrigPoly::zero(0); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.scale(k)).collect(),
        }
    }

    pub fn truncate(&self, len: usize) -> Self {
        let mut coeffs: Vec<TrigPoly> = self.coeffs.iter().take(len).cloned().collect();
        while coeffs.len() < len {
            coeffs.push(TrigPoly::zero(0));
        }
        Self { coeffs }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.len().max(rhs.len());
        Self {
            coeffs: (0..n).map(|k| &self.coeff(k) + &rhs.coeff(k)).collect(),
        }
    }

    /// Cauchy product truncated to `len` powers of `r`.
    pub fn mul_trunc(&self, rhs: &Self, len: usize) -> Self {
        let mut out = Self::zero(len);
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.max_abs() == 0.0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(len - i) {
                if b.max_abs() != 0.0 {
                    out.coeffs[i + j] = &out.coeffs[i + j] + &(a * b);
                }
            }
        }
        out
    }
}
