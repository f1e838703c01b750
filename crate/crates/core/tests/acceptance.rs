//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL ...` line
//! and fails when its criterion does.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use endline_core::bde::SingularityKind;
use endline_core::charts::{CriticalEndJet, RegularEndJet, ThirdOrder};
use endline_core::classify::{classify_critical, classify_regular, delta, Verdict};
use endline_core::jetfile::JetFile;
use endline_core::jets::{Axis, JetSeries};
use endline_core::returnmap::poincare_numeric;
use endline_core::trace::{
    is_monotone, portrait, separatrices_per_sector, trace_circulating_leaf, EndJet, PhasePortrait, SeedPolicy,
};
use endline_core::verify::{
    random_definite, suite_coeffs, suite_eigen, suite_polar, suite_returnmap_steps, suite_separatrix, trial_rng,
    CheckStat,
};

const SEED: u64 = 20240917;

fn report(n: usize, ok: bool, detail: &str) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
}

fn summarize(stats: &[CheckStat], names: &[&str]) -> (bool, String) {
    let picked: Vec<&CheckStat> = stats.iter().filter(|s| names.contains(&s.name.as_str())).collect();
    assert_eq!(picked.len(), names.len(), "missing checks in {stats:?}");
    let ok = picked.iter().all(|s| s.passed());
    let detail = picked
        .iter()
        .map(|s| format!("{}={:.2e}/{:.0e} (n={})", s.name, s.max_error, s.tolerance, s.samples))
        .collect::<Vec<_>>()
        .join(" ");
    (ok, detail)
}

fn all_checks(stats: &[CheckStat]) -> (bool, String) {
    let names: Vec<&str> = stats.iter().map(|s| s.name.as_str()).collect();
    summarize(stats, &names)
}

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load(rel: &str) -> (String, EndJet) {
    let text = fs::read_to_string(fixtures_dir().join(rel)).unwrap();
    let expect = text
        .lines()
        .find_map(|l| l.strip_prefix("# expect:"))
        .map(|s| s.trim().to_string())
        .unwrap_or_default();
    (expect, JetFile::parse(&text).unwrap().to_end_jet().unwrap())
}

#[test]
fn criterion_1_return_map_law() {
    let start = Instant::now();
    let stats = suite_returnmap_steps(100, SEED, 4096);
    let secs = start.elapsed().as_secs_f64();
    let (ok, detail) = all_checks(&stats);
    let fast = secs < 30.0;
    report(1, ok && fast, &format!("{detail} runtime={secs:.1}s/30s"));
    assert!(ok && fast);
}

#[test]
fn criterion_2_bde_closed_forms() {
    let stats = suite_coeffs(50, SEED);
    let (ok, detail) = summarize(&stats, &["regular_bde_vs_printed", "saddle_bde_vs_printed"]);
    report(2, ok, &detail);
    assert!(ok);
}

#[test]
fn criterion_3_polar_coefficients() {
    let stats = suite_polar(25, SEED);
    let (ok, detail) = all_checks(&stats);
    report(3, ok, &detail);
    assert!(ok);
}

#[test]
fn criterion_4_eigenvalues() {
    let stats = suite_eigen(25, SEED);
    let (ok, detail) = all_checks(&stats);
    report(4, ok, &detail);
    assert!(ok);
}

#[test]
fn criterion_5_separatrix_fits() {
    let stats = suite_separatrix(20, SEED);
    let (ok, detail) = all_checks(&stats);
    report(5, ok, &detail);
    assert!(ok);
}

fn verdict_of(jet: &EndJet, tol: f64) -> Verdict {
    match jet {
        EndJet::Regular(j) => classify_regular(j, tol).verdict,
        EndJet::Critical(j) => classify_critical(j, tol).verdict,
    }
}

/// Reflection `u ↦ −u` of a definite jet: flips `Δ` and the sense of
/// rotation of the circulating leaves.
fn reflect(j: &CriticalEndJet) -> CriticalEndJet {
    let mut t = j.third;
    t.a30 = -t.a30;
    t.a12 = -t.a12;
    let mut f = j.fourth;
    f.a31 = -f.a31;
    f.a13 = -f.a13;
    CriticalEndJet::definite(j.a, j.b, t, f).unwrap()
}

#[test]
fn criterion_6_classification_table() {
    let mut failures = Vec::new();
    let mut paths: Vec<_> = fs::read_dir(fixtures_dir().join("classify")).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    for p in &paths {
        let rel = p.strip_prefix(fixtures_dir()).unwrap().to_str().unwrap().to_string();
        let (expect, jet) = load(&rel);
        let got = verdict_of(&jet, 1e-9);
        if got.name() != expect {
            failures.push(format!("{rel}: {got} != {expect}"));
        }
    }

    // a30 ↦ −a30 swaps the two inflexion types
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut swaps = 0;
    for _ in 0..50 {
        let b = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let a30 = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let third = ThirdOrder { a30, a21: rng.random_range(-1.0..1.0), a12: rng.random_range(-1.0..1.0), a03: rng.random_range(-1.0..1.0) };
        let j = RegularEndJet { b, third, ..Default::default() };
        let flipped = RegularEndJet { third: ThirdOrder { a30: -a30, ..third }, ..j };
        let (v, w) = (classify_regular(&j, 1e-9).verdict, classify_regular(&flipped, 1e-9).verdict);
        let swapped = matches!(
            (v, w),
            (Verdict::InflexionHyperbolic, Verdict::InflexionElliptic) | (Verdict::InflexionElliptic, Verdict::InflexionHyperbolic)
        );
        if swapped {
            swaps += 1;
        } else {
            failures.push(format!("a30 flip: {v} -> {w}"));
        }
    }

    // reflection negates Δ and the spiral direction of the return map
    let mut spirals = 0;
    for trial in 0..10 {
        let j = random_definite(&mut trial_rng(SEED, trial));
        let r = reflect(&j);
        let (d, dr) = (delta(&j), delta(&r));
        if (d + dr).abs() > 1e-9 * d.abs().max(1.0) {
            failures.push(format!("trial {trial}: delta {d} vs reflected {dr}"));
        }
        let h = 0.05;
        let disp = poincare_numeric(&j, &[h]).unwrap()[0].1 - h;
        let disp_r = poincare_numeric(&r, &[h]).unwrap()[0].1 - h;
        if disp != 0.0 && disp.signum() == -disp_r.signum() {
            spirals += 1;
        } else {
            failures.push(format!("trial {trial}: displacement {disp:e} vs reflected {disp_r:e}"));
        }
    }

    let ok = failures.is_empty();
    report(
        6,
        ok,
        &format!("fixtures={} a30_swaps={swaps}/50 spiral_flips={spirals}/10 {}", paths.len(), failures.join("; ")),
    );
    assert!(ok);
}

fn draw(rel: &str) -> (EndJet, PhasePortrait) {
    let (_, jet) = load(rel);
    let p = portrait(&jet, SeedPolicy { grid: 7, ..SeedPolicy::default() }, 1e-9).unwrap();
    (jet, p)
}

#[test]
fn criterion_7_portrait_topology() {
    let mut failures = Vec::new();
    let mut notes = Vec::new();

    let singular = [
        ("classify/01_biregular.jet", 0),
        ("classify/02_inflexion_hyperbolic.jet", 1),
        ("classify/03_inflexion_elliptic.jet", 1),
        ("classify/04_inflexion_cubic_contact.jet", 1),
        ("classify/05_umbilic_inflexion_d1.jet", 1),
        ("classify/06_umbilic_inflexion_d3.jet", 1),
        ("classify/07_critical_focal.jet", 1),
        ("classify/08_critical_nonfocal.jet", 1),
        ("classify/09_saddle_even.jet", 1),
        ("classify/10_saddle_odd.jet", 1),
    ];
    let mut portraits = Vec::new();
    for (rel, want) in singular {
        let (jet, p) = draw(rel);
        if p.singular_points.len() != want {
            failures.push(format!("{rel}: {} singular points, want {want}", p.singular_points.len()));
        }
        portraits.push((rel, jet, p));
    }

    // D1 has one suspension saddle, D3 three
    for (rel, want) in [("classify/05_umbilic_inflexion_d1.jet", 1), ("classify/06_umbilic_inflexion_d3.jet", 3)] {
        let p = &portraits.iter().find(|(r, _, _)| *r == rel).unwrap().2;
        let total = p.suspension_singularities.len();
        let saddles = p.suspension_singularities.iter().filter(|s| s.kind == SingularityKind::HyperbolicSaddle).count();
        notes.push(format!("{}: singularities={total} saddles={saddles}", &rel[9..11]));
        if total != want || saddles != want {
            failures.push(format!("{rel}: {total} suspension singularities ({saddles} saddles), want {want}"));
        }
    }

    // even: one sector of the finite region carries no separatrix and no
    // interior singular point; odd: both sectors carry separatrices
    for (rel, even) in [("classify/09_saddle_even.jet", true), ("classify/10_saddle_odd.jet", false)] {
        let (_, jet, p) = portraits.iter().find(|(r, _, _)| *r == rel).unwrap();
        let EndJet::Critical(j) = jet else { unreachable!() };
        let counts = separatrices_per_sector(j, p);
        let interior = p.singular_points.iter().filter(|s| s.point[0].hypot(s.point[1]) > 1e-9).count();
        notes.push(format!("{}: sectors={counts:?}", &rel[9..11]));
        let ok = if even { interior == 0 && counts.contains(&0) } else { counts.iter().all(|c| *c > 0) };
        if !ok {
            failures.push(format!(
                "{rel}: separatrices per sector {counts:?} do not match the {} pattern",
                if even { "even" } else { "odd" }
            ));
        }
    }

    // focal spiral: the circulating leaf winds monotonically for 3 turns
    let (_, focal) = load("classify/07_critical_focal.jet");
    let EndJet::Critical(fj) = focal else { unreachable!() };
    let (_, angles) = trace_circulating_leaf(&fj, 0.05, 3.0).unwrap();
    let total = angles.last().copied().unwrap_or(0.0);
    notes.push(format!("winding={:.3}turns", total / (2.0 * PI)));
    if !(is_monotone(&angles, 1e-9) && total >= 6.0 * PI - 1e-6) {
        failures.push(format!("focal winding not monotone over 3 turns (total {total})"));
    }

    let ok = failures.is_empty();
    report(7, ok, &format!("{} {}", notes.join(" "), failures.join("; ")));
    assert!(ok);
}

fn random_series(rng: &mut ChaCha8Rng, order: usize) -> JetSeries {
    let mut s = JetSeries::zero(order);
    for d in 0..=order {
        for j in 0..=d {
            s.set(d - j, j, rng.random_range(-1.0..1.0));
        }
    }
    s
}

fn gap(a: &JetSeries, b: &JetSeries) -> f64 {
    assert_eq!(a.order(), b.order());
    (a - b).max_abs()
}

#[test]
fn criterion_8_series_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let names = ["associativity", "commutativity", "distributivity", "inverse", "sqrt", "derivative", "leibniz", "polar"];
    let mut worst = [0.0_f64; 8];
    for _ in 0..1000 {
        let order = rng.random_range(1..=8);
        let (x, y, z) = (random_series(&mut rng, order), random_series(&mut rng, order), random_series(&mut rng, order));
        worst[0] = worst[0].max(gap(&(&(&x * &y) * &z), &(&x * &(&y * &z))));
        worst[1] = worst[1].max(gap(&(&x * &y), &(&y * &x)).max(gap(&(&x + &y), &(&y + &x))));
        worst[2] = worst[2].max(gap(&(&x * &(&y + &z)), &(&(&x * &y) + &(&x * &z))));

        // unit constant term keeps the inverse well conditioned
        let mut u = x.scale(0.25);
        u.set(0, 0, if rng.random_bool(0.5) { 1.0 } else { -1.0 });
        let one = JetSeries::constant(order, 1.0);
        worst[3] = worst[3].max(gap(&(&u * &u.reciprocal().unwrap()), &one));
        let mut pos = x.scale(0.25);
        pos.set(0, 0, 1.0);
        let root = pos.sqrt_series().unwrap();
        worst[4] = worst[4].max(gap(&(&root * &root), &pos));

        let dxy = x.differentiate(Axis::First).differentiate(Axis::Second);
        let dyx = x.differentiate(Axis::Second).differentiate(Axis::First);
        worst[5] = worst[5].max(gap(&dxy, &dyx));
        let lhs = (&x * &y).differentiate(Axis::First);
        let rhs = &(&x.differentiate(Axis::First) * &y) + &(&x * &y.differentiate(Axis::First));
        worst[6] = worst[6].max(gap(&lhs, &rhs));

        let (sx, sy) = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
        let (r, t) = (rng.random_range(0.0..0.5), rng.random_range(0.0..2.0 * PI));
        let polar = x.polar_substitute(sx, sy).eval(r, t);
        let direct = x.eval(sx * r * t.cos(), sy * r * t.sin());
        worst[7] = worst[7].max((polar - direct).abs());
    }
    let ok = worst.iter().all(|w| *w <= 1e-12);
    let detail = names.iter().zip(worst).map(|(n, w)| format!("{n}={w:.1e}")).collect::<Vec<_>>().join(" ");
    report(8, ok, &format!("cases=1000 tol=1e-12 {detail}"));
    assert!(ok);
}
