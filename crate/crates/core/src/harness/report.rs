use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Config, Suite};
use super::corpus::ExpectedClass;
use crate::convexity::{Status, Verdict};
use crate::inequality::{BoundCheck, ChainResult, GapDecomposition, IdentityResidual};
use crate::mappings::PropertyReport;
use crate::quad::Rect;
use crate::Result;

/// Result of one suite on one entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    /// A printed statement was violated where that is a known erratum.
    ExpectedFail,
    Inconclusive,
    /// The inequality's hypothesis was not established.
    Skip,
    Error,
}

impl Outcome {
    /// Outcomes that make the run exit non-zero.
    pub fn is_unexpected(&self) -> bool {
        matches!(self, Outcome::Fail | Outcome::Error)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::ExpectedFail => "expected-fail",
            Outcome::Inconclusive => "inconclusive",
            Outcome::Skip => "skip",
            Outcome::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub config: Config,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SuiteData {
    Classify {
        observed: ExpectedClass,
        verdicts: Vec<Verdict>,
    },
    Lemma1 {
        decomposition: GapDecomposition,
        identity: IdentityResidual,
        threshold: f64,
    },
    Bounds {
        checks: Vec<BoundCheck>,
    },
    Chain {
        chain: ChainResult,
    },
    Mappings {
        h: Vec<PropertyReport>,
        g: Vec<PropertyReport>,
        g_mean: BoundCheck,
    },
    Errata {
        checks: Vec<BoundCheck>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub suite: Suite,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// The failed hypothesis check behind a skip, witness included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<SuiteData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub name: String,
    pub expression: String,
    pub rect: Rect,
    pub expected_class: Option<ExpectedClass>,
    pub results: Vec<SuiteRecord>,
}

/// A printed statement that fails where its corrected counterpart holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrataFinding {
    pub entry: String,
    pub statement: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Right-hand side and margin of the corrected statement.
    pub corrected_rhs: f64,
    pub corrected_margin: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub entries: Vec<EntryReport>,
    pub errata: Vec<ErrataFinding>,
}

/// One line of the CSV summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub entry: String,
    pub suite: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    pub status: String,
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Inconclusive => "inconclusive",
    }
}

impl Report {
    pub fn unexpected_failures(&self) -> usize {
        self.entries
            .iter()
            .flat_map(|e| &e.results)
            .filter(|r| r.outcome.is_unexpected())
            .count()
    }

    pub fn summary_rows(&self) -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for e in &self.entries {
            for rec in &e.results {
                let row = |suite: String, lhs, rhs, margin, status: &str| SummaryRow {
                    entry: e.name.clone(),
                    suite,
                    lhs,
                    rhs,
                    margin,
                    status: status.to_string(),
                };
                let checks = match &rec.data {
                    Some(SuiteData::Bounds { checks }) | Some(SuiteData::Errata { checks }) => checks.clone(),
                    Some(SuiteData::Mappings { g_mean, .. }) => vec![g_mean.clone()],
                    _ => Vec::new(),
                };
                match &rec.data {
                    Some(SuiteData::Lemma1 { identity, .. }) => rows.push(row(
                        rec.suite.to_string(),
                        Some(identity.lhs),
                        Some(identity.rhs),
                        Some(identity.rhs - identity.lhs),
                        rec.outcome.name(),
                    )),
                    _ if checks.is_empty() => {
                        rows.push(row(rec.suite.to_string(), None, None, None, rec.outcome.name()))
                    }
                    _ => {}
                }
                for c in checks {
                    rows.push(row(
                        format!("{}/{}", rec.suite, c.inequality.name()),
                        Some(c.lhs),
                        Some(c.rhs),
                        Some(c.margin),
                        status_name(c.status),
                    ));
                }
            }
        }
        rows
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits::new());
        self.serialize(&mut ser)?;
        buf.push(b'\n');
        Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
    }

    pub fn from_json(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in self.summary_rows() {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Writes JSON to `path`; a `.csv` path gets the CSV summary and the
    /// JSON report next to it with a `.json` extension.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            self.write_csv(std::fs::File::create(path)?)?;
            std::fs::write(path.with_extension("json"), self.to_json()?)?;
        } else {
            std::fs::write(path, self.to_json()?)?;
        }
        Ok(())
    }
}

/// Pretty JSON with every float written to 17 significant digits.
struct SignificantDigits<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

impl SignificantDigits<'_> {
    fn new() -> Self {
        SignificantDigits {
            inner: serde_json::ser::PrettyFormatter::new(),
        }
    }
}

macro_rules! forward {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.inner.$name(w)
            }
        )*
    };
}

impl serde_json::ser::Formatter for SignificantDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    forward!(
        begin_array,
        end_array,
        end_array_value,
        begin_object,
        end_object,
        begin_object_value,
        end_object_value
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty() -> Report {
        Report {
            meta: Meta {
                tool: "hadamard".into(),
                version: "0".into(),
                timestamp: "t".into(),
                config: Config::default(),
            },
            entries: Vec::new(),
            errata: Vec::new(),
        }
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let json = empty().to_json().unwrap();
        assert!(json.contains("\"tol\": 1.0000000000000001e-9"), "{json}");
        assert!(json.contains("\"p\": 2.0000000000000000e0"), "{json}");
        assert!(json.contains("\"seed\": 42"), "{json}");
        assert_eq!(Report::from_json(&json).unwrap(), empty());
    }

    #[test]
    fn awkward_floats_round_trip() {
        let mut r = empty();
        r.meta.config.tol = 0.1 + 0.2;
        r.meta.config.tol_margin = f64::MIN_POSITIVE;
        r.meta.config.p = 1.0 + f64::EPSILON;
        let back = Report::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
