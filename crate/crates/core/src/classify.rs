//! End-point classification with certificate quantities.

use std::collections::BTreeMap;
use std::fmt;

use crate::charts::{CriticalEndJet, CriticalKind, RegularEndJet};

/// Default relative tolerance for zero tests.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Biregular,
    InflexionHyperbolic,
    InflexionElliptic,
    InflexionCubicContact,
    UmbilicInflexionD1,
    UmbilicInflexionD3,
    CriticalFocalDefinite,
    /// `Δ = 0` at a definite critical end. This name is not from the
    /// literature; it marks the case where the focal test is inconclusive.
    CriticalDefiniteNonFocal,
    CriticalSaddleEven,
    CriticalSaddleOdd,
    Degenerate,
}

impl Verdict {
    pub const ALL: [Verdict; 11] = [
        Verdict::Biregular,
        Verdict::InflexionHyperbolic,
        Verdict::InflexionElliptic,
        Verdict::InflexionCubicContact,
        Verdict::UmbilicInflexionD1,
        Verdict::UmbilicInflexionD3,
        Verdict::CriticalFocalDefinite,
        Verdict::CriticalDefiniteNonFocal,
        Verdict::CriticalSaddleEven,
        Verdict::CriticalSaddleOdd,
        Verdict::Degenerate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Biregular => "Biregular",
            Verdict::InflexionHyperbolic => "InflexionHyperbolic",
            Verdict::InflexionElliptic => "InflexionElliptic",
            Verdict::InflexionCubicContact => "InflexionCubicContact",
            Verdict::UmbilicInflexionD1 => "UmbilicInflexionD1",
            Verdict::UmbilicInflexionD3 => "UmbilicInflexionD3",
            Verdict::CriticalFocalDefinite => "CriticalFocalDefinite",
            Verdict::CriticalDefiniteNonFocal => "CriticalDefiniteNonFocal",
            Verdict::CriticalSaddleEven => "CriticalSaddleEven",
            Verdict::CriticalSaddleOdd => "CriticalSaddleOdd",
            Verdict::Degenerate => "Degenerate",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Verdict plus the quantities it was decided from.
#[derive(Debug, Clone, PartialEq)]
pub struct EndPointClass {
    pub verdict: Verdict,
    pub certificates: BTreeMap<String, f64>,
}

impl EndPointClass {
    pub fn certificate(&self, name: &str) -> Option<f64> {
        self.certificates.get(name).copied()
    }
}

fn is_zero(x: f64, scale: f64, tol: f64) -> bool {
    x.abs() <= tol * scale
}

/// Decision tree for regular ends. Zero tests are relative to the largest
/// jet coefficient, so verdicts do not change under `h → λ h`.
pub fn classify_regular(jet: &RegularEndJet, tol: f64) -> EndPointClass {
    let t = &jet.third;
    let scale = jet.scale();
    let beta = t.a30 * jet.b;
    let b_a40 = jet.b * jet.fourth.a40;
    let disc = t.a21 * t.a21 - t.a12 * t.a30;
    let mut certificates = BTreeMap::new();
    certificates.insert("a".to_string(), jet.a);
    certificates.insert("beta".to_string(), beta);
    certificates.insert("b_a40".to_string(), b_a40);
    certificates.insert("umbilic_disc".to_string(), disc);

    let zero = |x: f64| scale == 0.0 || is_zero(x, scale, tol);
    let verdict = if !zero(jet.a) {
        Verdict::Biregular
    } else if !zero(jet.b) && !zero(t.a30) {
        if beta < 0.0 {
            Verdict::InflexionHyperbolic
        } else {
            Verdict::InflexionElliptic
        }
    } else if !zero(jet.b) && !zero(jet.fourth.a40) {
        Verdict::InflexionCubicContact
    } else if zero(jet.b) && !zero(t.a30) {
        let disc_scale = t.a21 * t.a21 + (t.a12 * t.a30).abs();
        if is_zero(disc, disc_scale, tol) {
            Verdict::Degenerate
        } else if disc < 0.0 {
            Verdict::UmbilicInflexionD1
        } else {
            Verdict::UmbilicInflexionD3
        }
    } else {
        Verdict::Degenerate
    };
    EndPointClass { verdict, certificates }
}

/// `a03 a³ + 3 a a21 + 3 a² a12 + a30`, the cubic factor of the saddle invariant.
pub fn saddle_cubic(jet: &CriticalEndJet) -> f64 {
    let (a, t) = (jet.a, &jet.third);
    t.a03 * a.powi(3) + 3.0 * a * t.a21 + 3.0 * a * a * t.a12 + t.a30
}

/// `σ = a a30 (a03 a³ + 3 a a21 + 3 a² a12 + a30)`.
pub fn sigma(jet: &CriticalEndJet) -> f64 {
    jet.a * jet.third.a30 * saddle_cubic(jet)
}

pub fn classify_critical(jet: &CriticalEndJet, tol: f64) -> EndPointClass {
    let mut certificates = BTreeMap::new();
    certificates.insert("a".to_string(), jet.a);
    let verdict = match jet.kind() {
        CriticalKind::Definite => {
            let d = delta(jet);
            certificates.insert("delta".to_string(), d);
            // Δ is homogeneous of degree 12 in the jet coefficients.
            if d.abs() > tol * jet.scale().powi(12) {
                Verdict::CriticalFocalDefinite
            } else {
                Verdict::CriticalDefiniteNonFocal
            }
        }
        CriticalKind::Saddle => {
            let (a, t) = (jet.a, &jet.third);
            let s = sigma(jet);
            let cubic_scale = (t.a03 * a.powi(3)).abs()
                + (3.0 * a * t.a21).abs()
                + (3.0 * a * a * t.a12).abs()
                + t.a30.abs();
            let scale = (a * t.a30).abs() * cubic_scale;
            certificates.insert("sigma".to_string(), s);
            certificates.insert("k1".to_string(), t.a30 / a);
            certificates.insert("k2".to_string(), -saddle_cubic(jet) / (3.0 * a));
            if s > tol * scale {
                Verdict::CriticalSaddleEven
            } else if s < -tol * scale {
                Verdict::CriticalSaddleOdd
            } else {
                Verdict::Degenerate
            }
        }
    };
    EndPointClass { verdict, certificates }
}

/// The focal invariant `Δ` of a definite critical end.
pub fn delta(jet: &CriticalEndJet) -> f64 {
    delta_terms(jet).iter().map(|t| t.1).sum()
}

/// The groups of `Δ`, labelled by their power of `a` and `b`, in the order
/// they are summed.
pub fn delta_terms(jet: &CriticalEndJet) -> Vec<(&'static str, f64)> {
    let (a, b) = (jet.a, jet.b);
    let t = &jet.third;
    let q = &jet.fourth;
    let (a30, a21, a12, a03) = (t.a30, t.a21, t.a12, t.a03);
    let (a40, a31, a22, a13, a04) = (q.a40, q.a31, q.a22, q.a13, q.a04);
    let p = |x: f64, n: i32| x.powi(n);
    vec![
        ("a^4 b^6", 12.0 * (a30 * a21 + 3.0 * a03 * a30 - 5.0 * a12 * a21) * p(b, 6) * p(a, 4)),
        ("a^6 b^4", 12.0 * (5.0 * a12 * a21 - a12 * a03 - 3.0 * a03 * a30) * p(a, 6) * p(b, 4)),
        ("a^4 b^4 (i)", 4.0 * (3.0 * a04 * a30 * a21 + a13 * a21 * a21 + 10.0 * a31 * a03 * a21) * p(a, 4) * p(b, 4)),
        ("a^4 b^4 (ii)", -4.0 * (10.0 * a13 * a12 * a30 + 3.0 * a40 * a12 * a03 + a31 * a12 * a12) * p(a, 4) * p(b, 4)),
        ("a^8", 4.0 * (a13 * a03 * a03 - a04 * a12 * a03) * p(a, 8)),
        ("b^8", 4.0 * (a40 * a30 * a21 - a31 * a30 * a30) * p(b, 8)),
        ("b^6", 3.0 * (p(a30, 3) * a03 + 2.0 * a30 * p(a21, 3) - 3.0 * a30 * a30 * a21 * a12) * p(b, 6)),
        ("a^6", 3.0 * (3.0 * a12 * a03 * a03 * a21 - 2.0 * p(a12, 3) * a03 - a30 * p(a03, 3)) * p(a, 6)),
        (
            "a^6 b^2",
            4.0 * (a03 * (2.0 * a13 * a21 - 3.0 * a04 * a30 - 3.0 * a31 * a03 + 12.0 * a22 * a12)
                + 5.0 * a04 * a12 * a21
                - 13.0 * a13 * a12 * a12)
                * p(a, 6)
                * p(b, 2),
        ),
        (
            "a^2 b^6",
            4.0 * (a30 * (3.0 * a13 * a30 - 2.0 * a31 * a12 + 3.0 * a40 * a03 - 12.0 * a22 * a21)
                - 5.0 * a40 * a21 * a12
                + 13.0 * a31 * a21 * a21)
                * p(a, 2)
                * p(b, 6),
        ),
        ("a^2 b^4", 9.0 * (a30 * a21 * a21 * a03 - 2.0 * a30 * a21 * a12 * a12 + a12 * p(a21, 3)) * p(a, 2) * p(b, 4)),
        ("a^4 b^2", 9.0 * (-p(a12, 3) * a21 - a30 * a03 * a12 * a12 + 2.0 * a12 * a21 * a21 * a03) * p(a, 4) * p(b, 2)),
        ("a^8 b^2", 12.0 * p(b, 2) * p(a, 8) * a12 * a03),
        ("a^2 b^8", -12.0 * p(b, 8) * p(a, 2) * a30 * a21),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{FourthOrder, ThirdOrder};

    fn reg(a: f64, b: f64, t: ThirdOrder) -> RegularEndJet {
        RegularEndJet { a, b, third: t, ..Default::default() }
    }

    #[test]
    fn regular_examples() {
        let v = |j: &RegularEndJet| classify_regular(j, DEFAULT_TOL).verdict;
        assert_eq!(v(&reg(1.0, 0.3, ThirdOrder::default())), Verdict::Biregular);
        let hyp = reg(0.0, -1.0, ThirdOrder { a30: 1.0, ..Default::default() });
        assert_eq!(v(&hyp), Verdict::InflexionHyperbolic);
        assert_eq!(classify_regular(&hyp, DEFAULT_TOL).certificate("beta"), Some(-1.0));
        let d1 = reg(0.0, 0.0, ThirdOrder { a30: 1.0, a12: 1.0, ..Default::default() });
        assert_eq!(v(&d1), Verdict::UmbilicInflexionD1);
        let d3 = reg(0.0, 0.0, ThirdOrder { a30: -1.0, a12: 1.0, ..Default::default() });
        assert_eq!(v(&d3), Verdict::UmbilicInflexionD3);
        assert_eq!(v(&reg(0.0, 0.0, ThirdOrder::default())), Verdict::Degenerate);
        let cc = RegularEndJet { b: 1.0, fourth: FourthOrder { a40: 2.0, ..Default::default() }, ..Default::default() };
        assert_eq!(v(&cc), Verdict::InflexionCubicContact);
        assert_eq!(v(&RegularEndJet::default()), Verdict::Degenerate);
    }

    #[test]
    fn a30_flip_swaps_inflexions() {
        let e = reg(0.0, 1.0, ThirdOrder { a30: 0.7, ..Default::default() });
        let h = reg(0.0, 1.0, ThirdOrder { a30: -0.7, ..Default::default() });
        assert_eq!(classify_regular(&e, DEFAULT_TOL).verdict, Verdict::InflexionElliptic);
        assert_eq!(classify_regular(&h, DEFAULT_TOL).verdict, Verdict::InflexionHyperbolic);
    }

    #[test]
    fn tolerance_is_relative() {
        let tiny = reg(1e-12, 1.0, ThirdOrder { a30: 1.0, ..Default::default() });
        assert_eq!(classify_regular(&tiny, DEFAULT_TOL).verdict, Verdict::InflexionElliptic);
        let small = RegularEndJet { a: 1e-12, ..Default::default() };
        assert_eq!(classify_regular(&small, DEFAULT_TOL).verdict, Verdict::Biregular);
    }

    #[test]
    fn critical_examples() {
        let d = CriticalEndJet::definite(1.0, 1.0, Default::default(), Default::default()).unwrap();
        let c = classify_critical(&d, DEFAULT_TOL);
        assert_eq!(c.verdict, Verdict::CriticalDefiniteNonFocal);
        assert_eq!(c.certificate("delta"), Some(0.0));

        let s = CriticalEndJet::saddle(1.0, ThirdOrder { a30: 1.0, ..Default::default() }, Default::default()).unwrap();
        let c = classify_critical(&s, DEFAULT_TOL);
        assert_eq!(c.verdict, Verdict::CriticalSaddleEven);
        assert_eq!(c.certificate("sigma"), Some(1.0));
        assert_eq!(c.certificate("k1"), Some(1.0));
        assert!((c.certificate("k2").unwrap() + 1.0 / 3.0).abs() < 1e-15);

        let s = CriticalEndJet::saddle(1.0, ThirdOrder { a30: -1.0, ..Default::default() }, Default::default()).unwrap();
        assert_eq!(classify_critical(&s, DEFAULT_TOL).verdict, Verdict::CriticalSaddleEven);

        let s = CriticalEndJet::saddle(1.0, ThirdOrder { a30: 1.0, a03: -2.0, ..Default::default() }, Default::default())
            .unwrap();
        assert_eq!(classify_critical(&s, DEFAULT_TOL).verdict, Verdict::CriticalSaddleOdd);

        let s = CriticalEndJet::saddle(1.0, ThirdOrder { a30: 1.0, a03: -1.0, ..Default::default() }, Default::default())
            .unwrap();
        assert_eq!(classify_critical(&s, DEFAULT_TOL).verdict, Verdict::Degenerate);
    }

    #[test]
    fn delta_single_cubic_vanishes() {
        let j = CriticalEndJet::definite(1.0, 1.0, ThirdOrder { a30: 1.0, ..Default::default() }, Default::default())
            .unwrap();
        assert_eq!(delta(&j), 0.0);
        let j = CriticalEndJet::definite(
            1.0,
            1.0,
            ThirdOrder { a30: 1.0, a03: 1.0, ..Default::default() },
            Default::default(),
        )
        .unwrap();
        // 12·3 b⁶a⁴ − 12·3 a⁶b⁴ + 3 b⁶ − 3 a⁶ at a = b = 1
        assert_eq!(delta(&j), 0.0);
    }

    #[test]
    fn verdict_names_round_trip() {
        for v in Verdict::ALL {
            assert_eq!(Verdict::from_name(v.name()), Some(v));
        }
    }
}
