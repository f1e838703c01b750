//! `endline`: classify, trace and render principal nets at end points.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use endline_core::charts::{CriticalKind, EXACT_ORDER};
use endline_core::classify::{classify_critical, classify_regular, delta_terms, EndPointClass, Verdict, DEFAULT_TOL};
use endline_core::export::{portrait_svg, trajectory_csv};
use endline_core::jetfile::JetFile;
use endline_core::returnmap::{integrate_q_system, poincare_numeric};
use endline_core::trace::{portrait, trace_field, Branch, EndJet, SeedPolicy, StepControl};
use endline_core::verify::{run_suite, SUITES, THREADS_ENV};

#[derive(Parser)]
#[command(name = "endline", version, about = "Principal curvature nets at end points of surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Svg,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Foliation {
    Minimal,
    Maximal,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Print the verdict and certificates of a jet file.
    Classify {
        path: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Trace both foliations from a seed grid and write SVG or CSV.
    Portrait {
        path: PathBuf,
        #[arg(long, default_value = "portrait")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Svg)]
        format: Format,
        /// Seeds per axis over [-1, 1]².
        #[arg(long = "seed-grid", default_value_t = 11)]
        seed_grid: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Truncation order of the curvature-line equation.
        #[arg(long, default_value_t = EXACT_ORDER)]
        order: usize,
    },
    /// Fourth derivative of the return map at a definite critical end.
    Returnmap {
        path: PathBuf,
        /// RK4 steps of the variational system.
        #[arg(long, default_value_t = 4096)]
        steps: usize,
    },
    /// Trace the leaves through one chart point and write CSV.
    Trace {
        path: PathBuf,
        /// Chart point `u,w`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        at: [f64; 2],
        #[arg(long, value_enum, default_value_t = Foliation::Both)]
        foliation: Foliation,
        /// Output directory; CSV goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = EXACT_ORDER)]
        order: usize,
    },
    /// Run a randomised oracle suite.
    Verify {
        /// One of coeffs, polar, eigen, returnmap, separatrix.
        suite: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let (u, w) = s.split_once(',').ok_or_else(|| format!("expected `u,w`, found `{s}`"))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok([p(u)?, p(w)?])
}

fn load(path: &Path) -> Result<(JetFile, EndJet)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = JetFile::parse(&text).with_context(|| format!("{}", path.display()))?;
    let jet = file.to_end_jet().with_context(|| format!("{}", path.display()))?;
    Ok((file, jet))
}

fn classify(jet: &EndJet, tol: f64) -> EndPointClass {
    match jet {
        EndJet::Regular(j) => classify_regular(j, tol),
        EndJet::Critical(j) => classify_critical(j, tol),
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV} must be a positive integer, found `{v}`"))?;
        if n == 0 {
            bail!("{THREADS_ENV} must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    match cli.command {
        Command::Classify { path, tol } => {
            let (file, jet) = load(&path)?;
            let c = classify(&jet, tol);
            println!("chart: {}", file.chart.name());
            println!("verdict: {}", c.verdict);
            for (k, v) in &c.certificates {
                println!("{k}: {v}");
            }
            Ok(if c.verdict == Verdict::Degenerate { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Portrait { path, out, format, seed_grid, tol, order } => {
            let (_, jet) = load(&path)?;
            let verdict = classify(&jet, tol).verdict;
            if verdict == Verdict::Degenerate {
                eprintln!("verdict: Degenerate (no portrait)");
                return Ok(ExitCode::from(2));
            }
            let policy = SeedPolicy { grid: seed_grid, order, ..SeedPolicy::default() };
            let p = portrait(&jet, policy, tol)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            match format {
                Format::Svg => {
                    let file = out.join("portrait.svg");
                    fs::write(&file, portrait_svg(&p, verdict.name())).with_context(|| format!("writing {}", file.display()))?;
                    println!("{}", file.display());
                }
                Format::Csv => {
                    let leaves = p.trajectories.iter().map(|t| ("leaf", t));
                    let seps = p.separatrices.iter().map(|s| ("separatrix", &s.trajectory));
                    for (k, (kind, t)) in leaves.chain(seps).enumerate() {
                        let file = out.join(format!("{kind}_{k:04}.csv"));
                        fs::write(&file, trajectory_csv(t)).with_context(|| format!("writing {}", file.display()))?;
                    }
                    println!("{}", out.display());
                }
            }
            println!(
                "verdict: {verdict}\ntrajectories: {}\nseparatrices: {}\nsingular_points: {}",
                p.trajectories.len(),
                p.separatrices.len(),
                p.singular_points.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Returnmap { path, steps } => {
            let (_, jet) = load(&path)?;
            let j = match jet {
                EndJet::Critical(j) if j.kind() == CriticalKind::Definite => j,
                _ => bail!("{}: returnmap needs a critical-definite jet", path.display()),
            };
            let r = integrate_q_system(&j, steps)?;
            println!("steps: {}", steps.max(1000));
            println!("q1(2pi): {:e}", r.q_end[0]);
            println!("q2(2pi): {:e}", r.q_end[1]);
            println!("q3(2pi): {:e}", r.q_end[2]);
            println!("q4(2pi): {:e}", r.q_end[3]);
            println!("delta: {:e}", r.delta_closed);
            for (label, v) in delta_terms(&j) {
                println!("delta_term[{label}]: {v:e}");
            }
            println!("pi4_closed: {:e}", r.pi4_closed);
            println!("pi4_numeric: {:e}", r.pi4_numeric);
            println!("rel_gap: {:e}", r.rel_gap);
            for (h, ph) in poincare_numeric(&j, &[0.02, 0.05])? {
                println!("poincare[{h}]: {ph:e} (displacement {:e})", ph - h);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Trace { path, at, foliation, out, order } => {
            let (_, jet) = load(&path)?;
            let bde = jet.bde().truncate(order);
            let ctl = StepControl::with_region(jet.region());
            let branches: &[Branch] = match foliation {
                Foliation::Minimal => &[Branch::Minimal],
                Foliation::Maximal => &[Branch::Maximal],
                Foliation::Both => &[Branch::Minimal, Branch::Maximal],
            };
            for b in branches {
                let t = trace_field(&bde, at, *b, &ctl).with_context(|| format!("tracing the {} leaf", b.name()))?;
                let csv = trajectory_csv(&t);
                match &out {
                    Some(dir) => {
                        fs::create_dir_all(dir)?;
                        let file = dir.join(format!("trace_{}.csv", b.name()));
                        fs::write(&file, csv).with_context(|| format!("writing {}", file.display()))?;
                        println!("{} ({} points, ends: {} / {})", file.display(), t.points.len(), t.start_termination.name(), t.termination.name());
                    }
                    None => print!("{csv}"),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, trials, seed } => {
            if !SUITES.contains(&suite.as_str()) {
                bail!("unknown suite `{suite}` (expected one of {})", SUITES.join(", "));
            }
            let report = run_suite(&suite, trials, seed)?;
            println!("{report}");
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
