//! Polar expansion at a definite critical end and the return map of the
//! circulating foliation.

use std::f64::consts::PI;

use crate::bde::bde_critical;
use crate::charts::{CriticalEndJet, CriticalKind};
use crate::classify::delta;
use crate::error::{Error, Result};
use crate::jets::{PolarSeries, TrigPoly};
use crate::numeric::{dopri5, AdaptiveError};

/// The curvature-line equation in polar coordinates `u = b r cos θ`,
/// `v = a r sin θ`, written as `L dr² + M dr dθ + N dθ² = 0` and normalised
/// by `a² b² / r³`.
#[derive(Debug, Clone)]
pub struct PolarBde {
    pub a: f64,
    pub b: f64,
    pub l: PolarSeries,
    pub m: PolarSeries,
    /// Full `N`, including its `r²` prefactor.
    pub n: PolarSeries,
}

impl PolarBde {
    pub fn l_coeff(&self, k: usize) -> TrigPoly {
        self.l.coeff(k)
    }

    pub fn m_coeff(&self, k: usize) -> TrigPoly {
        self.m.coeff(k)
    }

    /// `n_k` in `N = r² (n₀/2 + n₁ r/6 + n₂ r²/24 + …)`.
    pub fn n_coeff(&self, k: usize) -> TrigPoly {
        self.n.coeff(k + 2).scale(factorial(k + 2))
    }

    /// `(L, M, N)` at a polar point, evaluated exactly.
    pub fn eval(&self, r: f64, theta: f64) -> [f64; 3] {
        [self.l.eval(r, theta), self.m.eval(r, theta), self.n.eval(r, theta)]
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn shift_down(s: &PolarSeries, k: usize) -> Result<PolarSeries> {
    let scale = s.coeffs.iter().map(TrigPoly::max_abs).fold(0.0_f64, f64::max);
    for c in s.coeffs.iter().take(k) {
        if c.max_abs() > 1e-11 * scale.max(1.0) {
            return Err(Error::InvalidJet(format!("polar equation does not vanish to order r^{k}")));
        }
    }
    Ok(PolarSeries { coeffs: s.coeffs.iter().skip(k).cloned().collect() })
}

/// Polar form of the critical-end equation of a definite jet.
pub fn polar_bde(jet: &CriticalEndJet) -> Result<PolarBde> {
    if jet.kind() != CriticalKind::Definite {
        return Err(Error::InvalidJet("polar expansion needs a definite critical jet".into()));
    }
    let (a, b) = (jet.a, jet.b);
    let bde = bde_critical(jet);
    let lr = bde.l.polar_substitute(b, a);
    let mr = bde.m.polar_substitute(b, a);
    let nr = bde.n.polar_substitute(b, a);
    let cc = TrigPoly::from_terms(&[(2, 0, 1.0)]);
    let ss = TrigPoly::from_terms(&[(0, 2, 1.0)]);
    let cs = TrigPoly::from_terms(&[(1, 1, 1.0)]);
    let c2s2 = &cc - &ss;

    let lp = lr
        .times_trig(&ss.scale(a * a))
        .add(&mr.times_trig(&cs.scale(a * b)))
        .add(&nr.times_trig(&cc.scale(b * b)));
    let mp = lr
        .times_trig(&cs.scale(2.0 * a * a))
        .add(&mr.times_trig(&c2s2.scale(a * b)))
        .add(&nr.times_trig(&cs.scale(-2.0 * b * b)))
        .shift_up(1);
    let np = lr
        .times_trig(&cc.scale(a * a))
        .add(&mr.times_trig(&cs.scale(-a * b)))
        .add(&nr.times_trig(&ss.scale(b * b)))
        .shift_up(2);
    let k = a * a * b * b;
    Ok(PolarBde {
        a,
        b,
        l: shift_down(&lp.scale(k), 3)?,
        m: shift_down(&mp.scale(k), 3)?,
        n: shift_down(&np.scale(k), 3)?,
    })
}

/// Coefficients of `dr/dθ = d₂ r²/2 + d₃ r³/6 + d₄ r⁴/24 + …` for the root
/// that vanishes at `r = 0`.
#[derive(Debug, Clone)]
pub struct RadialSeries {
    pub d2: TrigPoly,
    pub d3: TrigPoly,
    pub d4: TrigPoly,
    /// Coefficients of `r^k` for `k < RADIAL_TERMS`.
    pub rho: PolarSeries,
}

/// Number of powers of `r` kept in [`RadialSeries::rho`].
pub const RADIAL_TERMS: usize = 8;

impl RadialSeries {
    /// `dr/dθ` summed through `r^(RADIAL_TERMS - 1)`.
    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        self.rho.eval(r, theta)
    }
}

/// Expands the small root of `L ρ² + M ρ + N = 0` in powers of `r` by
/// fixed-point iteration `ρ = −(N + L ρ²)/M`.
pub fn radial_ode_series(pbde: &PolarBde) -> Result<RadialSeries> {
    const LEN: usize = RADIAL_TERMS;
    let m0 = pbde.m.coeff(0).reduced();
    let c = m0.coeff(0, 0);
    let mag = m0.max_abs();
    if c == 0.0 || (&m0 - &TrigPoly::constant(c)).max_abs() > 1e-10 * mag {
        return Err(Error::DegenerateM);
    }
    let l = pbde.l.truncate(LEN);
    let n = pbde.n.truncate(LEN);
    // 1/M = (1/m0) Σ (−(M − m0)/m0)^k
    let mut tail = pbde.m.truncate(LEN);
    tail.coeffs[0] = TrigPoly::zero(0);
    let t = tail.scale(-1.0 / c);
    let mut inv = PolarSeries { coeffs: vec![TrigPoly::constant(1.0)] };
    let mut pow = inv.clone();
    for _ in 1..LEN {
        pow = pow.mul_trunc(&t, LEN);
        inv = inv.add(&pow);
    }
    let inv = inv.scale(1.0 / c);
    let mut rho = PolarSeries::zero(LEN);
    for _ in 0..=LEN {
        let num = n.add(&l.mul_trunc(&rho.mul_trunc(&rho, LEN), LEN));
        rho = num.mul_trunc(&inv, LEN).scale(-1.0);
    }
    Ok(RadialSeries {
        d2: rho.coeff(2).scale(2.0),
        d3: rho.coeff(3).scale(6.0),
        d4: rho.coeff(4).scale(24.0),
        rho,
    })
}

/// `dθ/dr` of the radial foliation, the small root of `N σ² + M σ + L = 0`.
pub fn radial_slope(pbde: &PolarBde, r: f64, theta: f64) -> Option<f64> {
    let [l, m, n] = pbde.eval(r, theta);
    let disc = m * m - 4.0 * l * n;
    if disc < 0.0 {
        return None;
    }
    Some(-2.0 * l / (m + m.signum() * disc.sqrt()))
}

/// `dr/dθ` of the circulating foliation, the small root of `L ρ² + M ρ + N = 0`.
pub fn circulating_slope(pbde: &PolarBde, r: f64, theta: f64) -> Option<f64> {
    let [l, m, n] = pbde.eval(r, theta);
    let disc = m * m - 4.0 * l * n;
    if disc < 0.0 || m >= 0.0 {
        return None;
    }
    Some(-2.0 * n / (m - disc.sqrt()))
}

/// Results of the return-map computation.
#[derive(Debug, Clone)]
pub struct ReturnMapReport {
    /// `(θ, [q₁, q₂, q₃, q₄])` at every integration node.
    pub q_profiles: Vec<(f64, [f64; 4])>,
    pub q_end: [f64; 4],
    pub delta_closed: f64,
    /// `π Δ / (2¹⁰ a⁵ b⁵)`.
    pub pi4_closed: f64,
    /// `q₄(2π)`.
    pub pi4_numeric: f64,
    /// `|pi4_numeric − pi4_closed| / |pi4_closed|`, or the absolute
    /// difference when the closed form vanishes.
    pub rel_gap: f64,
    /// `(h, Π(h))` from direct integration, when requested.
    pub poincare_samples: Vec<(f64, f64)>,
}

/// Closed-form fourth derivative of the return map.
pub fn pi4_closed(jet: &CriticalEndJet) -> f64 {
    PI * delta(jet) / (1024.0 * jet.a.powi(5) * jet.b.powi(5))
}

/// Integrates the linear variational system
/// `q₁' = 0, q₂' = d₂, q₃' = 3 d₂ q₂ + d₃, q₄' = 3 d₂ q₂² + 4 d₂ q₃ + 6 d₃ q₂ + d₄`
/// from `q(0) = 0` over `[0, 2π]` with `steps` classical RK4 steps.
pub fn integrate_q_system(jet: &CriticalEndJet, steps: usize) -> Result<ReturnMapReport> {
    let steps = steps.max(1000);
    let pbde = polar_bde(jet)?;
    let ds = radial_ode_series(&pbde)?;
    let h = 2.0 * PI / steps as f64;
    // d_k sampled on the half-step grid used by RK4.
    let grid: Vec<[f64; 3]> = (0..=2 * steps)
        .map(|j| {
            let th = j as f64 * h / 2.0;
            [ds.d2.eval(th), ds.d3.eval(th), ds.d4.eval(th)]
        })
        .collect();
    let rhs = |d: [f64; 3], q: [f64; 3]| {
        let [d2, d3, d4] = d;
        let [q2, q3, _] = q;
        [d2, 3.0 * d2 * q2 + d3, 3.0 * d2 * q2 * q2 + 4.0 * d2 * q3 + 6.0 * d3 * q2 + d4]
    };
    let axpy = |q: [f64; 3], t: f64, k: [f64; 3]| [q[0] + t * k[0], q[1] + t * k[1], q[2] + t * k[2]];
    let mut q = [0.0; 3];
    let mut q_profiles = Vec::with_capacity(steps + 1);
    q_profiles.push((0.0, [0.0; 4]));
    for k in 0..steps {
        let (d0, dm, d1) = (grid[2 * k], grid[2 * k + 1], grid[2 * k + 2]);
        let k1 = rhs(d0, q);
        let k2 = rhs(dm, axpy(q, h / 2.0, k1));
        let k3 = rhs(dm, axpy(q, h / 2.0, k2));
        let k4 = rhs(d1, axpy(q, h, k3));
        for i in 0..3 {
            q[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        q_profiles.push(((k + 1) as f64 * h, [0.0, q[0], q[1], q[2]]));
    }
    let y = [0.0, q[0], q[1], q[2]];
    let q_end = [y[0], y[1], y[2], y[3]];
    let closed = pi4_closed(jet);
    let numeric = q_end[3];
    let rel_gap = if closed == 0.0 {
        numeric.abs()
    } else {
        (numeric - closed).abs() / closed.abs()
    };
    Ok(ReturnMapReport {
        q_profiles,
        q_end,
        delta_closed: delta(jet),
        pi4_closed: closed,
        pi4_numeric: numeric,
        rel_gap,
        poincare_samples: Vec::new(),
    })
}

/// Direct return map: integrates the full polar equation of the circulating
/// leaf from `(r, θ) = (h, 0)` to `θ = 2π` for each radius.
pub fn poincare_numeric(jet: &CriticalEndJet, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    let pbde = polar_bde(jet)?;
    radii.iter().map(|&h| Ok((h, return_radius(&pbde, h, 2.0 * PI)?))).collect()
}

/// Radius reached at angle `theta_end` along the circulating leaf through `(h, 0)`.
pub fn return_radius(pbde: &PolarBde, h: f64, theta_end: f64) -> Result<f64> {
    let rhs = |t: f64, y: &[f64; 1]| {
        if y[0] <= 0.0 {
            return None;
        }
        circulating_slope(pbde, y[0], t).map(|s| [s])
    };
    match dopri5(&rhs, 0.0, theta_end, [h], 1e-16, 1e-13) {
        Ok(run) => Ok(run.y[0]),
        Err(AdaptiveError::Domain { t }) => Err(Error::LeftDomain { theta: t }),
        Err(AdaptiveError::StepCollapse) => Err(Error::StepCollapse(1e-14)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{FourthOrder, ThirdOrder};
    use approx::assert_relative_eq;

    fn sample() -> CriticalEndJet {
        CriticalEndJet::definite(
            1.3,
            0.7,
            ThirdOrder { a30: 0.4, a21: -0.8, a12: 0.3, a03: 0.9 },
            FourthOrder { a40: -0.2, a31: 0.5, a22: 0.1, a13: -0.6, a04: 0.7 },
        )
        .unwrap()
    }

    #[test]
    fn m0_is_constant() {
        let j = sample();
        let p = polar_bde(&j).unwrap();
        let m0 = p.m_coeff(0);
        let want = -8.0 * j.a.powi(7) * j.b.powi(7);
        for th in [0.0, 0.4, 2.0, 5.0] {
            assert_relative_eq!(m0.eval(th), want, max_relative = 1e-13);
        }
        let unit = CriticalEndJet::definite(1.0, 1.0, Default::default(), Default::default()).unwrap();
        assert_relative_eq!(polar_bde(&unit).unwrap().m_coeff(0).eval(0.3), -8.0, max_relative = 4.0 * f64::EPSILON);
        assert_eq!(polar_bde(&unit).unwrap().m_coeff(0).reduced().coeff(0, 0), -8.0);
    }

    #[test]
    fn n_vanishes_to_second_order() {
        let p = polar_bde(&sample()).unwrap();
        assert!(p.n.coeff(0).max_abs() < 1e-12);
        assert!(p.n.coeff(1).max_abs() < 1e-12);
    }

    #[test]
    fn flat_jet_has_trivial_return_map() {
        let j = CriticalEndJet::definite(1.2, 0.9, Default::default(), Default::default()).unwrap();
        let p = polar_bde(&j).unwrap();
        assert_eq!(p.l_coeff(0).max_abs(), 0.0);
        let rep = integrate_q_system(&j, 1000).unwrap();
        assert!(rep.q_end.iter().all(|q| q.abs() < 1e-15));
        assert!(rep.rel_gap < 1e-15);
        let pm = poincare_numeric(&j, &[0.01]).unwrap();
        assert!((pm[0].1 - 0.01).abs() < 1e-14);
    }

    #[test]
    fn d2_is_minus_n0_over_m0() {
        let p = polar_bde(&sample()).unwrap();
        let ds = radial_ode_series(&p).unwrap();
        let m0 = p.m_coeff(0).reduced().coeff(0, 0);
        for th in [0.3, 1.7, 4.4] {
            assert_relative_eq!(ds.d2.eval(th), -p.n_coeff(0).eval(th) / m0, max_relative = 1e-12);
        }
    }

    #[test]
    fn series_root_matches_quadratic_root() {
        let p = polar_bde(&sample()).unwrap();
        let ds = radial_ode_series(&p).unwrap();
        let (r, th) = (1e-3, 0.8);
        let exact = circulating_slope(&p, r, th).unwrap();
        assert_relative_eq!(ds.eval(r, th), exact, max_relative = 1e-12);
    }

    #[test]
    fn low_order_flatness() {
        let rep = integrate_q_system(&sample(), 4096).unwrap();
        for k in 0..3 {
            assert!(rep.q_end[k].abs() < 1e-7, "q{} = {}", k + 1, rep.q_end[k]);
        }
    }

    #[test]
    fn radial_foliation_slope() {
        let p = polar_bde(&sample()).unwrap();
        let m0 = p.m_coeff(0).reduced().coeff(0, 0);
        for th in [0.2, 2.5] {
            let lim = -p.l_coeff(0).eval(th) / m0;
            let s1 = radial_slope(&p, 1e-4, th).unwrap();
            let s2 = radial_slope(&p, 2e-4, th).unwrap();
            // first-order extrapolation to r = 0
            assert_relative_eq!(2.0 * s1 - s2, lim, max_relative = 1e-6, epsilon = 1e-12);
        }
    }
}
