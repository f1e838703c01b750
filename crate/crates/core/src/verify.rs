//! Randomised oracle suites behind `endline verify` and the acceptance tests.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bde::{
    bde_critical, bde_regular, lie_cartan, saddle_blowup_bde, suspension_singularities, SingularityKind, SlopeChart,
};
use crate::charts::{
    build_critical_chart, build_regular_chart, fundamental_forms_critical, fundamental_forms_regular, CriticalEndJet,
    FourthOrder, RegularEndJet, ThirdOrder,
};
use crate::error::{Error, Result};
use crate::jets::JetSeries;
use crate::numeric::eigenvalues3;
use crate::oracle;
use crate::returnmap::{integrate_q_system, polar_bde};
use crate::trace::{fit_powers, trace_contact_leaf, trace_separatrices, Region, SeparatrixOptions};

/// Names accepted by [`run_suite`].
pub const SUITES: [&str; 5] = ["coeffs", "polar", "eigen", "returnmap", "separatrix"];

/// Environment variable capping the worker count of the suites.
pub const THREADS_ENV: &str = "ENDLINE_THREADS";

/// Aggregated result of one check over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckStat {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub samples: usize,
}

impl CheckStat {
    pub fn passed(&self) -> bool {
        self.max_error.is_finite() && self.max_error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<CheckStat>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckStat::passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} (trials {}, seed {})", self.suite, self.trials, self.seed)?;
        for c in &self.checks {
            writeln!(
                f,
                "  {} {:<28} max_error {:.3e}  tol {:.1e}  samples {}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.max_error,
                c.tolerance,
                c.samples
            )?;
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Thread pool honouring [`THREADS_ENV`].
pub fn thread_pool() -> rayon::ThreadPool {
    let n = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()).filter(|n| *n > 0);
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = n {
        b = b.num_threads(n);
    }
    b.build().expect("thread pool")
}

/// Per-trial generator, independent of scheduling.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

fn random_third(rng: &mut impl Rng) -> ThirdOrder {
    ThirdOrder {
        a30: uniform(rng, -1.0, 1.0),
        a21: uniform(rng, -1.0, 1.0),
        a12: uniform(rng, -1.0, 1.0),
        a03: uniform(rng, -1.0, 1.0),
    }
}

fn random_fourth(rng: &mut impl Rng) -> FourthOrder {
    FourthOrder {
        a40: uniform(rng, -1.0, 1.0),
        a31: uniform(rng, -1.0, 1.0),
        a22: uniform(rng, -1.0, 1.0),
        a13: uniform(rng, -1.0, 1.0),
        a04: uniform(rng, -1.0, 1.0),
    }
}

/// Regular jet with all coefficients in `[−1, 1]`.
pub fn random_regular(rng: &mut impl Rng) -> RegularEndJet {
    RegularEndJet {
        k0: uniform(rng, -1.0, 1.0),
        a: uniform(rng, -1.0, 1.0),
        b: uniform(rng, -1.0, 1.0),
        c: uniform(rng, -1.0, 1.0),
        third: random_third(rng),
        fourth: random_fourth(rng),
    }
}

/// Definite jet with `a, b ∈ [0.5, 2]` and higher terms in `[−1, 1]`.
pub fn random_definite(rng: &mut impl Rng) -> CriticalEndJet {
    let a = uniform(rng, 0.5, 2.0);
    let b = uniform(rng, 0.5, 2.0);
    CriticalEndJet::definite(a, b, random_third(rng), random_fourth(rng)).expect("a, b > 0")
}

/// Saddle jet with `|a| ∈ [0.5, 2]` and higher terms in `[−1, 1]`.
pub fn random_saddle(rng: &mut impl Rng) -> CriticalEndJet {
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let a = sign * uniform(rng, 0.5, 2.0);
    CriticalEndJet::saddle(a, random_third(rng), random_fourth(rng)).expect("a != 0")
}

fn signed_magnitude(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    s * uniform(rng, lo, hi)
}

struct Acc {
    names: Vec<(&'static str, f64)>,
    errs: Vec<f64>,
    samples: Vec<usize>,
}

impl Acc {
    fn new(names: &[(&'static str, f64)]) -> Self {
        Self { names: names.to_vec(), errs: vec![0.0; names.len()], samples: vec![0; names.len()] }
    }

    fn merge(mut self, other: Acc) -> Acc {
        for k in 0..self.errs.len() {
            self.errs[k] = worst(self.errs[k], other.errs[k]);
            self.samples[k] += other.samples[k];
        }
        self
    }

    fn record(&mut self, k: usize, err: f64) {
        self.errs[k] = worst(self.errs[k], err);
        self.samples[k] += 1;
    }

    fn finish(self) -> Vec<CheckStat> {
        self.names
            .iter()
            .zip(self.errs)
            .zip(self.samples)
            .map(|((&(n, tol), e), s)| CheckStat { name: n.to_string(), max_error: e, tolerance: tol, samples: s })
            .collect()
    }
}

/// NaN-propagating maximum so a failed evaluation cannot hide.
fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn rel_err(got: f64, want: f64, floor: f64) -> f64 {
    (got - want).abs() / want.abs().max(floor)
}

/// Largest coefficient difference over monomials of total degree `<= deg`.
pub fn coefficient_error(a: &JetSeries, b: &JetSeries, deg: usize) -> f64 {
    let mut err = 0.0_f64;
    for d in 0..=deg {
        for i in 0..=d {
            err = err.max((a.coeff(i, d - i) - b.coeff(i, d - i)).abs());
        }
    }
    err
}

fn run_trials(trials: usize, seed: u64, names: &[(&'static str, f64)], f: impl Fn(&mut ChaCha8Rng, &mut Acc) + Sync) -> Vec<CheckStat> {
    let pool = thread_pool();
    let acc = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut acc = Acc::new(names);
                let mut rng = trial_rng(seed, t);
                f(&mut rng, &mut acc);
                acc
            })
            .reduce(|| Acc::new(names), Acc::merge)
    });
    acc.finish()
}

/// Curvature-line equation coefficients against the printed low-order terms,
/// and the series fundamental forms against finite differences of the
/// explicit embedding.
pub fn suite_coeffs(trials: usize, seed: u64) -> Vec<CheckStat> {
    let names = [
        ("regular_bde_vs_printed", 1e-10),
        ("saddle_bde_vs_printed", 1e-10),
        ("regular_forms_vs_embedding", 1e-6),
        ("critical_forms_vs_embedding", 1e-6),
    ];
    run_trials(trials, seed, &names, |rng, acc| {
        let rj = random_regular(rng);
        let bde = bde_regular(&rj);
        let [l, m, n] = oracle::printed_regular_bde(&rj);
        let e = coefficient_error(&bde.l, &l, 2).max(coefficient_error(&bde.m, &m, 2)).max(coefficient_error(&bde.n, &n, 3));
        acc.record(0, e);

        let sj = random_saddle(rng);
        let bde = bde_critical(&sj);
        let [l, m, n] = oracle::printed_saddle_bde(&sj);
        let e = coefficient_error(&bde.l, &l, 3).max(coefficient_error(&bde.m, &m, 3)).max(coefficient_error(&bde.n, &n, 3));
        acc.record(1, e);

        let (x, y) = (uniform(rng, -0.2, 0.2), uniform(rng, 0.2, 0.4));
        if let Some(fd) = oracle::fd_fundamental_forms(&build_regular_chart(&rj), x, y, 1e-4) {
            acc.record(2, forms_error(fundamental_forms_regular(&rj).values_at(x, y), fd));
        }
        let dj = random_definite(rng);
        let r = uniform(rng, 0.2, 0.3);
        let th = uniform(rng, 0.0, 2.0 * PI);
        let (x, y) = (r * th.cos(), r * th.sin());
        if let Some(fd) = oracle::fd_fundamental_forms(&build_critical_chart(&dj), x, y, 1e-4) {
            acc.record(3, forms_error(fundamental_forms_critical(&dj).values_at(x, y), fd));
        }
    })
}

fn forms_error(s: crate::charts::FormValues, d: crate::charts::FormValues) -> f64 {
    let pairs = [(s.big_e, d.big_e), (s.big_f, d.big_f), (s.big_g, d.big_g), (s.e, d.e), (s.f, d.f), (s.g, d.g)];
    // first and second forms are compared on their own magnitude
    let scale = |r: &[(f64, f64)]| r.iter().fold(1e-300_f64, |m, p| m.max(p.1.abs()));
    let (first, second) = pairs.split_at(3);
    let (s1, s2) = (scale(first), scale(second));
    first
        .iter()
        .map(|p| (p.0 - p.1).abs() / s1)
        .chain(second.iter().map(|p| (p.0 - p.1).abs() / s2))
        .fold(0.0, f64::max)
}

/// Polar coefficients `l₀, n₀, m₁, m₀` against their hand transcriptions.
pub fn suite_polar(trials: usize, seed: u64) -> Vec<CheckStat> {
    let names = [("l0_vs_printed", 1e-9), ("n0_vs_printed", 1e-9), ("m1_vs_printed", 1e-9), ("m0_constant", 1e-13)];
    run_trials(trials, seed, &names, |rng, acc| {
        let jet = random_definite(rng);
        let Ok(p) = polar_bde(&jet) else {
            (0..4).for_each(|k| acc.record(k, f64::NAN));
            return;
        };
        let scale = jet.a.powi(5) * jet.b.powi(5);
        let (l0, n0, m1, m0) = (p.l_coeff(0), p.n_coeff(0), p.m_coeff(1), p.m_coeff(0));
        let m0_want = -8.0 * jet.a.powi(7) * jet.b.powi(7);
        for k in 0..32 {
            let th = 2.0 * PI * k as f64 / 32.0;
            acc.record(0, (l0.eval(th) - oracle::printed_l0(&jet, th)).abs() / scale);
            acc.record(1, (n0.eval(th) - oracle::printed_n0(&jet, th, true)).abs() / scale);
            acc.record(2, (m1.eval(th) - oracle::printed_m1(&jet, th)).abs() / scale);
            acc.record(3, rel_err(m0.eval(th), m0_want, 0.0));
        }
    })
}

/// Eigenvalues of finite-difference Jacobians of the Lie–Cartan fields at
/// every singular point with a printed spectrum.
pub fn suite_eigen(trials: usize, seed: u64) -> Vec<CheckStat> {
    let names = [("inflexion_saddle", 1e-8), ("umbilic_inflexion", 1e-8), ("saddle_blowup", 1e-8)];
    run_trials(trials, seed, &names, |rng, acc| {
        for (k, err) in eigen_trial(rng).into_iter().enumerate() {
            for e in err {
                acc.record(k, e);
            }
        }
    })
}

/// Relative mismatch between the two nonzero eigenvalues of a numeric
/// Jacobian and an expected pair.
fn spectrum_error(j: &[[f64; 3]; 3], want: [f64; 2]) -> f64 {
    let ev = eigenvalues3(j);
    if ev.iter().any(|e| e.1.abs() > 1e-9) {
        return f64::INFINITY;
    }
    let mut re: Vec<f64> = ev.iter().map(|e| e.0).collect();
    re.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut got = [re[1], re[2]];
    got.sort_by(f64::total_cmp);
    let mut want = want;
    want.sort_by(f64::total_cmp);
    let scale = want[0].abs().max(want[1].abs());
    ((got[0] - want[0]).abs().max((got[1] - want[1]).abs())) / scale
}

fn eigen_trial(rng: &mut ChaCha8Rng) -> [Vec<f64>; 3] {
    let mut out: [Vec<f64>; 3] = Default::default();
    let fd = 1e-4;

    // inflexion: a = 0, saddle at p = 0 with spectrum (−a30, a30)
    let jet = RegularEndJet {
        a: 0.0,
        b: signed_magnitude(rng, 0.5, 2.0),
        third: ThirdOrder { a30: signed_magnitude(rng, 0.5, 2.0), ..random_third(rng) },
        ..random_regular(rng)
    };
    let field = lie_cartan(&bde_regular(&jet), SlopeChart::P);
    let j = oracle::numeric_jacobian(&field, [0.0, 0.0, 0.0], fd);
    out[0].push(spectrum_error(&j, [-jet.third.a30, jet.third.a30]));

    // umbilic inflexion: a = b = 0, singular slopes are the roots of the cubic form
    let jet = RegularEndJet { a: 0.0, b: 0.0, ..random_regular(rng) };
    let t = jet.third;
    let field = lie_cartan(&bde_regular(&jet), SlopeChart::P);
    match suspension_singularities(&field, (-1e6, 1e6)) {
        Ok(sings) => {
            for s in sings {
                let p = s.p_value;
                let l1 = -(t.a30 + 3.0 * t.a21 * p + 2.0 * t.a12 * p * p);
                let l2 = t.a30 + 4.0 * t.a21 * p + 3.0 * t.a12 * p * p;
                let j = oracle::numeric_jacobian(&field, s.point(), fd);
                out[1].push(spectrum_error(&j, [l1, l2]));
            }
        }
        Err(_) => out[1].push(f64::NAN),
    }

    // saddle critical end after the blow-up v = u w
    let jet = random_saddle(rng);
    let a = jet.a;
    let a30 = signed_magnitude(rng, 0.5, 2.0);
    let jet = CriticalEndJet::saddle(a, ThirdOrder { a30, ..jet.third }, jet.fourth).expect("a != 0");
    match saddle_blowup_bde(&jet) {
        Ok(blown) => {
            let printed = [
                (blown.l.coeff(1, 0), -a * a),
                (blown.l.coeff(0, 1), 0.0),
                (blown.m.coeff(1, 0), a * a30),
                (blown.m.coeff(0, 1), -2.0 * a * a),
                (blown.n.coeff(1, 0), -0.25 * a30 * a30),
                (blown.n.coeff(0, 1), a * a30),
            ];
            out[2].push(printed.iter().map(|(g, w)| (g - w).abs() / (a * a).max(1.0)).fold(0.0, f64::max));
            let field = lie_cartan(&blown, SlopeChart::Q);
            let a2 = a * a;
            for (q, pair) in [(0.0, [-2.0 * a2, 3.0 * a2]), (2.0 * a / a30, [2.0 * a2, -2.0 * a2]), (6.0 * a / a30, [6.0 * a2, -2.0 * a2])] {
                let j = oracle::numeric_jacobian(&field, [0.0, 0.0, q], fd);
                out[2].push(spectrum_error(&j, pair));
            }
        }
        Err(_) => out[2].push(f64::NAN),
    }
    out
}

/// Fourth derivative of the return map against the closed form in `Δ`,
/// plus flatness of the lower orders.
pub fn suite_returnmap(trials: usize, seed: u64) -> Vec<CheckStat> {
    suite_returnmap_steps(trials, seed, 4096)
}

pub fn suite_returnmap_steps(trials: usize, seed: u64, steps: usize) -> Vec<CheckStat> {
    let names = [("q4_vs_closed_form", 1e-5), ("q1_q3_flat", 1e-7)];
    run_trials(trials, seed, &names, |rng, acc| {
        let jet = random_definite(rng);
        match integrate_q_system(&jet, steps) {
            Ok(r) => {
                acc.record(0, r.rel_gap);
                acc.record(1, r.q_end[..3].iter().fold(0.0_f64, |m, q| m.max(q.abs())));
            }
            Err(_) => {
                acc.record(0, f64::NAN);
                acc.record(1, f64::NAN);
            }
        }
    })
}

/// Fits of the traced separatrices at inflexion and cubic-contact ends.
pub fn suite_separatrix(trials: usize, seed: u64) -> Vec<CheckStat> {
    let names = [("inflexion_quadratic_fit", 0.02), ("cubic_contact_fit", 0.05)];
    run_trials(trials, seed, &names, |rng, acc| {
        let b = signed_magnitude(rng, 0.5, 2.0);
        let a30 = signed_magnitude(rng, 0.5, 2.0);
        let jet = RegularEndJet { a: 0.0, b, third: ThirdOrder { a30, ..random_third(rng) }, ..random_regular(rng) };
        acc.record(0, inflexion_fit_error(&jet));

        let jet = RegularEndJet {
            a: 0.0,
            b,
            third: ThirdOrder { a30: 0.0, ..random_third(rng) },
            fourth: FourthOrder { a40: signed_magnitude(rng, 0.5, 2.0), ..random_fourth(rng) },
            ..random_regular(rng)
        };
        acc.record(1, cubic_contact_fit_error(&jet));
    })
}

/// Worst relative error of `w ≈ c₂ u²` against `−a30/(2b)` over the
/// separatrices of the inflexion saddle that leave the end locus.
pub fn inflexion_fit_error(jet: &RegularEndJet) -> f64 {
    let want = -jet.third.a30 / (2.0 * jet.b);
    let bde = bde_regular(jet);
    let field = lie_cartan(&bde, SlopeChart::P);
    let Ok(sings) = suspension_singularities(&field, (-1e-9, 1e-9)) else {
        return f64::NAN;
    };
    let Some(sing) = sings.iter().find(|s| s.kind == SingularityKind::HyperbolicSaddle) else {
        return f64::NAN;
    };
    let Ok(seps) = trace_separatrices(&bde, &field, sing, &Region::UpperHalfPlane, SeparatrixOptions::default()) else {
        return f64::NAN;
    };
    let mut worst_err = f64::NAN;
    for s in &seps {
        let off_locus = s.trajectory.points.iter().any(|p| p[0].abs() > 1e-3 && p[0].abs() < 2e-2 && p[1].abs() > 1e-3 * p[0] * p[0]);
        if !off_locus {
            continue;
        }
        let err = match fit_powers(&s.trajectory.points, &[2, 3], (1e-3, 2e-2)) {
            Some(c) => rel_err(c[0], want, 0.0),
            None => f64::NAN,
        };
        worst_err = if worst_err.is_nan() { err } else { worst(worst_err, err) };
    }
    worst_err
}

/// Relative error of `w ≈ c₃ u³` against `−a40/(6b)` for the leaf through a
/// cubic-contact end point.
pub fn cubic_contact_fit_error(jet: &RegularEndJet) -> f64 {
    let want = -jet.fourth.a40 / (6.0 * jet.b);
    let leaf = trace_contact_leaf(&bde_regular(jet), 1e-2, 4000);
    match fit_powers(&leaf.points, &[3, 4], (1e-3, 1e-2)) {
        Some(c) => rel_err(c[0], want, 0.0),
        None => f64::NAN,
    }
}

/// Runs a named suite.
pub fn run_suite(name: &str, trials: usize, seed: u64) -> Result<SuiteReport> {
    let checks = match name {
        "coeffs" => suite_coeffs(trials, seed),
        "polar" => suite_polar(trials, seed),
        "eigen" => suite_eigen(trials, seed),
        "returnmap" => suite_returnmap(trials, seed),
        "separatrix" => suite_separatrix(trials, seed),
        other => {
            return Err(Error::InvalidJet(format!(
                "unknown suite `{other}` (expected one of {})",
                SUITES.join(", ")
            )))
        }
    };
    Ok(SuiteReport { suite: name.to_string(), trials, seed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_are_deterministic() {
        let a = run_suite("coeffs", 4, 7).unwrap();
        let b = run_suite("coeffs", 4, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope", 1, 0).is_err());
    }

    #[test]
    fn small_suites_pass() {
        for name in ["coeffs", "polar", "eigen", "separatrix"] {
            let r = run_suite(name, 6, 11).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn lower_orders_of_the_return_map_are_flat() {
        let checks = suite_returnmap_steps(4, 3, 1024);
        assert!(checks[1].passed(), "{:?}", checks[1]);
    }
}
