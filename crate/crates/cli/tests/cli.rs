use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn endline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_endline")).args(args).output().expect("spawn endline")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn expected_verdict(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix("# expect:"))
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| panic!("{} has no expect line", path.display()))
}

#[test]
fn classify_fixtures_match_their_expectations() {
    let mut paths: Vec<_> = fs::read_dir(fixture("classify")).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    assert_eq!(paths.len(), 12);
    for p in paths {
        let want = expected_verdict(&p);
        let out = endline(&["classify", p.to_str().unwrap(), "--tol", "1e-9"]);
        let text = stdout(&out);
        assert!(text.contains(&format!("verdict: {want}\n")), "{}: {text}", p.display());
        let code = if want == "Degenerate" { 2 } else { 0 };
        assert_eq!(out.status.code(), Some(code), "{}", p.display());
    }
}

#[test]
fn parse_errors_exit_one_with_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.jet");
    fs::write(&p, "schema_version = 1\nchart = regular\nb = 1\nzz = 3\n").unwrap();
    let out = endline(&["classify", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("line 4"), "{err}");
    assert!(err.contains("zz"), "{err}");
}

#[test]
fn missing_file_exits_one() {
    let out = endline(&["classify", "/nonexistent/x.jet"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn portrait_svg_marks_singular_points() {
    let dir = tempfile::tempdir().unwrap();
    for (name, want) in [("01_biregular.jet", 0), ("03_inflexion_elliptic.jet", 1), ("07_critical_focal.jet", 1)] {
        let out_dir = dir.path().join(name);
        let out = endline(&[
            "portrait",
            fixture("classify").join(name).to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed-grid",
            "5",
        ]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr(&out));
        let svg = fs::read_to_string(out_dir.join("portrait.svg")).unwrap();
        assert_eq!(svg.matches(r#"class="singular-point""#).count(), want, "{name}");
    }
}

#[test]
fn portrait_of_a_degenerate_jet_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = endline(&[
        "portrait",
        fixture("classify/12_degenerate_saddle.jet").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("portrait.svg").exists());
}

#[test]
fn portrait_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let d = dir.path().join(sub);
        let out = endline(&[
            "portrait",
            fixture("classify/02_inflexion_hyperbolic.jet").to_str().unwrap(),
            "--format",
            "csv",
            "--seed-grid",
            "5",
            "--out",
            d.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let mut files: Vec<_> = fs::read_dir(&d).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files
            .iter()
            .map(|f| (f.file_name().unwrap().to_owned(), fs::read(f).unwrap()))
            .collect::<Vec<_>>()
    };
    let a = run("a");
    let b = run("b");
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let first = String::from_utf8(a[0].1.clone()).unwrap();
    assert!(first.starts_with("u,w,foliation_id\n"));
}

#[test]
fn trace_writes_csv_to_stdout() {
    let out = endline(&[
        "trace",
        fixture("classify/01_biregular.jet").to_str().unwrap(),
        "--at",
        "0.1,0.2",
        "--foliation",
        "minimal",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("u,w,foliation_id"));
    let rows: Vec<_> = lines.collect();
    assert!(rows.len() > 10);
    assert!(rows.iter().all(|r| r.ends_with(",0")));
}

#[test]
fn trace_outside_the_chart_fails() {
    let out = endline(&["trace", fixture("classify/01_biregular.jet").to_str().unwrap(), "--at", "0.1,-0.2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("outside"));
}

#[test]
fn returnmap_needs_a_definite_jet() {
    let bad = endline(&["returnmap", fixture("classify/09_saddle_even.jet").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    let ok = endline(&["returnmap", fixture("returnmap/flat.jet").to_str().unwrap(), "--steps", "1024"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stdout(&ok).contains("pi4_closed:"));
}

#[test]
fn verify_rejects_unknown_suites() {
    let out = endline(&["verify", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown suite"));
}

#[test]
fn verify_polar_passes() {
    let out = endline(&["verify", "polar", "--trials", "4", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn thread_cap_must_be_positive() {
    let out = Command::new(env!("CARGO_BIN_EXE_endline"))
        .args(["verify", "polar", "--trials", "1"])
        .env("ENDLINE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_endline"))
        .args(["verify", "polar", "--trials", "2"])
        .env("ENDLINE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
