//! Python bindings: `import endline`.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use endline_core::charts::{CriticalKind, EXACT_ORDER};
use endline_core::classify::{classify_critical, classify_regular, delta_terms, EndPointClass, DEFAULT_TOL};
use endline_core::export::{portrait_svg, trajectory_csv};
use endline_core::jetfile::JetFile;
use endline_core::returnmap::integrate_q_system;
use endline_core::trace::{portrait, trace_field, Branch, EndJet, SeedPolicy, StepControl};
use endline_core::verify::run_suite;

create_exception!(endline, EndlineError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    EndlineError::new_err(e.to_string())
}

fn branch(name: &str) -> PyResult<Branch> {
    match name {
        "minimal" => Ok(Branch::Minimal),
        "maximal" => Ok(Branch::Maximal),
        other => Err(err(format!("unknown foliation `{other}` (expected minimal or maximal)"))),
    }
}

/// Verdict and certificates of a classification.
#[pyclass(frozen, get_all, skip_from_py_object, module = "endline")]
#[derive(Clone)]
pub struct Classification {
    pub verdict: String,
    pub certificates: BTreeMap<String, f64>,
}

#[pymethods]
impl Classification {
    fn __repr__(&self) -> String {
        format!("Classification(verdict={:?})", self.verdict)
    }
}

impl From<EndPointClass> for Classification {
    fn from(c: EndPointClass) -> Self {
        Self { verdict: c.verdict.name().to_string(), certificates: c.certificates.into_iter().collect() }
    }
}

/// Fourth-order return-map data at a definite critical end.
#[pyclass(frozen, get_all, skip_from_py_object, module = "endline")]
#[derive(Clone)]
pub struct ReturnMap {
    pub q: Vec<f64>,
    pub delta: f64,
    pub delta_terms: Vec<(String, f64)>,
    pub pi4_closed: f64,
    pub pi4_numeric: f64,
    pub rel_gap: f64,
}

#[pymethods]
impl ReturnMap {
    fn __repr__(&self) -> String {
        format!("ReturnMap(delta={:e}, pi4_closed={:e}, pi4_numeric={:e})", self.delta, self.pi4_closed, self.pi4_numeric)
    }
}

/// An end-point jet in its chart.
#[pyclass(frozen, module = "endline")]
pub struct Jet {
    file: JetFile,
    jet: EndJet,
}

impl Jet {
    fn from_file(file: JetFile) -> PyResult<Self> {
        let jet = file.to_end_jet().map_err(err)?;
        Ok(Self { file, jet })
    }
}

#[pymethods]
impl Jet {
    /// Parses jet-file text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Self::from_file(JetFile::parse(text).map_err(err)?)
    }

    /// Reads a jet file.
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| err(format!("{}: {e}", path.display())))?;
        Self::from_file(JetFile::parse(&text).map_err(|e| err(format!("{}: {e}", path.display())))?)
    }

    /// Builds a jet from a chart name and coefficients.
    #[staticmethod]
    #[pyo3(signature = (chart, **coefficients))]
    fn from_coefficients(chart: &str, coefficients: Option<BTreeMap<String, f64>>) -> PyResult<Self> {
        let mut text = format!("schema_version = 1\nchart = {chart}\n");
        for (k, v) in coefficients.unwrap_or_default() {
            text.push_str(&format!("{k} = {v:e}\n"));
        }
        Self::parse(&text)
    }

    #[getter]
    fn chart(&self) -> &'static str {
        self.file.chart.name()
    }

    #[getter]
    fn coefficients(&self) -> BTreeMap<String, f64> {
        self.file.coefficients.clone()
    }

    /// Canonical jet-file text.
    fn to_text(&self) -> String {
        self.file.to_canonical_string()
    }

    #[pyo3(signature = (tol = DEFAULT_TOL))]
    fn classify(&self, tol: f64) -> Classification {
        match &self.jet {
            EndJet::Regular(j) => classify_regular(j, tol).into(),
            EndJet::Critical(j) => classify_critical(j, tol).into(),
        }
    }

    /// `(L, M, N)` of the curvature-line equation at a chart point.
    fn bde(&self, u: f64, w: f64) -> (f64, f64, f64) {
        let v = self.jet.bde().eval(u, w);
        (v.l, v.m, v.n)
    }

    /// Leaf of one foliation through `(u, w)` as a list of points.
    #[pyo3(signature = (u, w, foliation = "minimal", order = EXACT_ORDER))]
    fn trace(&self, py: Python<'_>, u: f64, w: f64, foliation: &str, order: usize) -> PyResult<Vec<(f64, f64)>> {
        let b = branch(foliation)?;
        let jet = self.jet.clone();
        let t = py
            .detach(move || {
                let bde = jet.bde().truncate(order);
                trace_field(&bde, [u, w], b, &StepControl::with_region(jet.region()))
            })
            .map_err(err)?;
        Ok(t.points.iter().map(|p| (p[0], p[1])).collect())
    }

    /// Same leaf as CSV text with rows `u,w,foliation_id`.
    #[pyo3(signature = (u, w, foliation = "minimal"))]
    fn trace_csv(&self, py: Python<'_>, u: f64, w: f64, foliation: &str) -> PyResult<String> {
        let b = branch(foliation)?;
        let jet = self.jet.clone();
        let t = py
            .detach(move || trace_field(&jet.bde(), [u, w], b, &StepControl::with_region(jet.region())))
            .map_err(err)?;
        Ok(trajectory_csv(&t))
    }

    /// SVG phase portrait of both foliations.
    #[pyo3(signature = (seed_grid = 11, tol = DEFAULT_TOL, order = EXACT_ORDER))]
    fn portrait_svg(&self, py: Python<'_>, seed_grid: usize, tol: f64, order: usize) -> PyResult<String> {
        let jet = self.jet.clone();
        py.detach(move || {
            let verdict = jet.verdict(tol);
            let policy = SeedPolicy { grid: seed_grid, order, ..SeedPolicy::default() };
            portrait(&jet, policy, tol).map(|p| portrait_svg(&p, verdict.name()))
        })
        .map_err(err)
    }

    /// Return-map derivatives at a definite critical end.
    #[pyo3(signature = (steps = 4096))]
    fn return_map(&self, py: Python<'_>, steps: usize) -> PyResult<ReturnMap> {
        let j = match &self.jet {
            EndJet::Critical(j) if j.kind() == CriticalKind::Definite => *j,
            _ => return Err(err("return_map needs a critical-definite jet")),
        };
        let r = py.detach(move || integrate_q_system(&j, steps)).map_err(err)?;
        Ok(ReturnMap {
            q: r.q_end.to_vec(),
            delta: r.delta_closed,
            delta_terms: delta_terms(&j).into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            pi4_closed: r.pi4_closed,
            pi4_numeric: r.pi4_numeric,
            rel_gap: r.rel_gap,
        })
    }

    fn __repr__(&self) -> String {
        format!("Jet({:?})", self.file.to_canonical_string())
    }
}

/// `(check, max_error, tolerance, samples)`.
type CheckRow = (String, f64, f64, usize);

/// Runs an oracle suite; returns `(passed, [CheckRow])`.
#[pyfunction]
#[pyo3(signature = (suite, trials = 20, seed = 0))]
fn verify(py: Python<'_>, suite: String, trials: usize, seed: u64) -> PyResult<(bool, Vec<CheckRow>)> {
    let report = py.detach(move || run_suite(&suite, trials, seed)).map_err(err)?;
    let checks = report.checks.iter().map(|c| (c.name.clone(), c.max_error, c.tolerance, c.samples)).collect();
    Ok((report.passed(), checks))
}

#[pymodule]
fn endline(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Jet>()?;
    m.add_class::<Classification>()?;
    m.add_class::<ReturnMap>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("EndlineError", m.py().get_type::<EndlineError>())?;
    m.add("SUITES", endline_core::verify::SUITES.to_vec())?;
    Ok(())
}
