//! Flat `key = value` jet files.
//!
//! ```text
//! schema_version = 1
//! chart = regular
//! b = 1
//! a30 = 1
//! ```
//!
//! `#` starts a comment. Unknown keys are rejected, missing coefficients
//! are zero.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::charts::{CriticalEndJet, CriticalKind, FourthOrder, RegularEndJet, ThirdOrder};
use crate::error::{Error, Result};
use crate::trace::EndJet;

pub const SCHEMA_VERSION: u32 = 1;

/// Coefficient names in file order.
pub const COEFFICIENT_NAMES: [&str; 13] =
    ["k0", "a", "b", "c", "a30", "a21", "a12", "a03", "a40", "a31", "a22", "a13", "a04"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartTag {
    Regular,
    CriticalDefinite,
    CriticalSaddle,
}

impl ChartTag {
    pub fn name(&self) -> &'static str {
        match self {
            ChartTag::Regular => "regular",
            ChartTag::CriticalDefinite => "critical-definite",
            ChartTag::CriticalSaddle => "critical-saddle",
        }
    }

    /// Coefficients that mean something for this chart.
    pub fn allowed(&self) -> &'static [&'static str] {
        match self {
            ChartTag::Regular => &COEFFICIENT_NAMES,
            ChartTag::CriticalDefinite => &COEFFICIENT_NAMES[1..],
            ChartTag::CriticalSaddle => &["a", "a30", "a21", "a12", "a03", "a40", "a31", "a22", "a13", "a04"],
        }
    }
}

impl FromStr for ChartTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "regular" => Ok(ChartTag::Regular),
            "critical-definite" => Ok(ChartTag::CriticalDefinite),
            "critical-saddle" => Ok(ChartTag::CriticalSaddle),
            other => Err(format!(
                "unknown chart `{other}` (expected regular, critical-definite or critical-saddle)"
            )),
        }
    }
}

/// A parsed jet file.
#[derive(Debug, Clone, PartialEq)]
pub struct JetFile {
    pub schema_version: u32,
    pub chart: ChartTag,
    /// Explicitly given coefficients.
    pub coefficients: BTreeMap<String, f64>,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

impl JetFile {
    pub fn coefficient(&self, name: &str) -> f64 {
        self.coefficients.get(name).copied().unwrap_or(0.0)
    }

    /// Parses and validates a jet file.
    pub fn parse(text: &str) -> Result<Self> {
        let mut schema: Option<(usize, u32)> = None;
        let mut chart: Option<(usize, ChartTag)> = None;
        let mut coefficients = BTreeMap::new();
        let mut lines_of: BTreeMap<String, usize> = BTreeMap::new();
        let mut last = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| perr(line, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(perr(line, "missing key before `=`"));
            }
            if value.is_empty() {
                return Err(perr(line, format!("missing value for `{key}`")));
            }
            if let Some(prev) = lines_of.insert(key.to_string(), line) {
                return Err(perr(line, format!("duplicate key `{key}` (first given on line {prev})")));
            }
            match key {
                "schema_version" => {
                    let v: u32 = value.parse().map_err(|_| perr(line, format!("schema_version must be an integer, found `{value}`")))?;
                    if v != SCHEMA_VERSION {
                        return Err(perr(line, format!("unsupported schema_version {v} (expected {SCHEMA_VERSION})")));
                    }
                    schema = Some((line, v));
                }
                "chart" => chart = Some((line, value.parse().map_err(|e: String| perr(line, e))?)),
                k if COEFFICIENT_NAMES.contains(&k) => {
                    let v: f64 = value.parse().map_err(|_| perr(line, format!("`{key}` is not a number: `{value}`")))?;
                    if !v.is_finite() {
                        return Err(perr(line, format!("`{key}` must be finite")));
                    }
                    coefficients.insert(key.to_string(), v);
                }
                other => {
                    return Err(perr(
                        line,
                        format!("unknown key `{other}` (expected schema_version, chart or one of {})", COEFFICIENT_NAMES.join(", ")),
                    ))
                }
            }
        }
        let end = last.max(1);
        let (_, schema_version) = schema.ok_or_else(|| perr(end, "missing required key `schema_version`"))?;
        let (chart_line, chart) = chart.ok_or_else(|| perr(end, "missing required key `chart`"))?;
        for (k, v) in &coefficients {
            if !chart.allowed().contains(&k.as_str()) && *v != 0.0 {
                return Err(perr(lines_of[k], format!("`{k}` is not a coefficient of a {} jet", chart.name())));
            }
        }
        let file = JetFile { schema_version, chart, coefficients };
        file.to_end_jet().map_err(|e| match e {
            Error::InvalidJet(m) => perr(chart_line, m),
            other => other,
        })?;
        Ok(file)
    }

    fn third(&self) -> ThirdOrder {
        ThirdOrder {
            a30: self.coefficient("a30"),
            a21: self.coefficient("a21"),
            a12: self.coefficient("a12"),
            a03: self.coefficient("a03"),
        }
    }

    fn fourth(&self) -> FourthOrder {
        FourthOrder {
            a40: self.coefficient("a40"),
            a31: self.coefficient("a31"),
            a22: self.coefficient("a22"),
            a13: self.coefficient("a13"),
            a04: self.coefficient("a04"),
        }
    }

    pub fn to_end_jet(&self) -> Result<EndJet> {
        Ok(match self.chart {
            ChartTag::Regular => EndJet::Regular(RegularEndJet {
                k0: self.coefficient("k0"),
                a: self.coefficient("a"),
                b: self.coefficient("b"),
                c: self.coefficient("c"),
                third: self.third(),
                fourth: self.fourth(),
            }),
            ChartTag::CriticalDefinite => EndJet::Critical(CriticalEndJet::definite(
                self.coefficient("a"),
                self.coefficient("b"),
                self.third(),
                self.fourth(),
            )?),
            ChartTag::CriticalSaddle => {
                EndJet::Critical(CriticalEndJet::saddle(self.coefficient("a"), self.third(), self.fourth())?)
            }
        })
    }

    /// Jet file holding every nonzero coefficient of `jet`.
    pub fn from_end_jet(jet: &EndJet) -> Self {
        let (chart, values): (ChartTag, Vec<(&str, f64)>) = match jet {
            EndJet::Regular(j) => (
                ChartTag::Regular,
                vec![("k0", j.k0), ("a", j.a), ("b", j.b), ("c", j.c)],
            ),
            EndJet::Critical(j) => match j.kind() {
                CriticalKind::Definite => (ChartTag::CriticalDefinite, vec![("a", j.a), ("b", j.b)]),
                CriticalKind::Saddle => (ChartTag::CriticalSaddle, vec![("a", j.a)]),
            },
        };
        let (t, f) = match jet {
            EndJet::Regular(j) => (j.third, j.fourth),
            EndJet::Critical(j) => (j.third, j.fourth),
        };
        let higher = [
            ("a30", t.a30),
            ("a21", t.a21),
            ("a12", t.a12),
            ("a03", t.a03),
            ("a40", f.a40),
            ("a31", f.a31),
            ("a22", f.a22),
            ("a13", f.a13),
            ("a04", f.a04),
        ];
        let coefficients = values
            .into_iter()
            .chain(higher)
            .filter(|(_, v)| *v != 0.0)
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        JetFile { schema_version: SCHEMA_VERSION, chart, coefficients }
    }

    /// Canonical text: keys sorted, zero coefficients dropped, shortest
    /// round-trip decimals.
    pub fn to_canonical_string(&self) -> String {
        let mut entries: BTreeMap<&str, String> = BTreeMap::new();
        entries.insert("chart", self.chart.name().to_string());
        entries.insert("schema_version", self.schema_version.to_string());
        for (k, v) in &self.coefficients {
            if *v != 0.0 {
                entries.insert(k, format!("{v}"));
            }
        }
        entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

impl fmt::Display for JetFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_with_defaults() {
        let f = JetFile::parse("schema_version = 1\nchart = regular\n# comment\nb = 1\na30 = 1 # trailing\n").unwrap();
        assert_eq!(f.coefficient("a"), 0.0);
        match f.to_end_jet().unwrap() {
            EndJet::Regular(j) => {
                assert_eq!(j.b, 1.0);
                assert_eq!(j.third.a30, 1.0);
            }
            _ => panic!("wrong chart"),
        }
    }

    #[test]
    fn errors_are_line_anchored() {
        let cases = [
            ("schema_version = 1\nchart = regular\nfoo = 1\n", 3),
            ("schema_version = 1\nchart = regular\na = x\n", 3),
            ("schema_version = 1\nchart = planar\n", 2),
            ("schema_version = 2\nchart = regular\n", 1),
            ("schema_version = 1\nchart = regular\nb = 1\nb = 2\n", 4),
            ("schema_version = 1\n\nchart = critical-definite\na = 1\n", 3),
            ("schema_version = 1\nchart = critical-saddle\na = 1\nb = 2\n", 4),
            ("schema_version = 1\na = 1\n", 2),
            ("schema_version = 1\nchart regular\n", 2),
        ];
        for (text, want) in cases {
            match JetFile::parse(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn canonical_form_sorts_keys() {
        let f = JetFile::parse("chart = regular\nschema_version = 1\na30 = 0.1\nb = 1.0\na = 0\n").unwrap();
        assert_eq!(f.to_canonical_string(), "a30 = 0.1\nb = 1\nchart = regular\nschema_version = 1\n");
    }

    proptest! {
        #[test]
        fn canonical_round_trip(vals in proptest::collection::vec(-1e6f64..1e6, 13), which in 0usize..3) {
            let chart = [ChartTag::Regular, ChartTag::CriticalDefinite, ChartTag::CriticalSaddle][which];
            let mut coefficients = BTreeMap::new();
            for (k, v) in chart.allowed().iter().zip(&vals) {
                coefficients.insert(k.to_string(), *v);
            }
            if chart == ChartTag::CriticalDefinite {
                coefficients.insert("a".into(), vals[0].abs() + 0.5);
                coefficients.insert("b".into(), vals[1].abs() + 0.5);
            }
            if chart == ChartTag::CriticalSaddle {
                coefficients.insert("a".into(), vals[0].abs() + 0.5);
            }
            let f = JetFile { schema_version: SCHEMA_VERSION, chart, coefficients };
            let text = f.to_canonical_string();
            let back = JetFile::parse(&text).unwrap();
            prop_assert_eq!(back.to_canonical_string(), text);
            for k in COEFFICIENT_NAMES {
                prop_assert_eq!(back.coefficient(k).to_bits(), f.coefficient(k).to_bits());
            }
        }
    }
}
