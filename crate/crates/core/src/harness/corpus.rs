use serde::{Deserialize, Serialize};

use crate::expr::{parse, Expr};
use crate::quad::Rect;
use crate::Result;

/// Co-ordinate class an entry is expected to fall in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectedClass {
    CoordinateConvex,
    CoordinateQuasiConvexOnly,
    Neither,
}

impl ExpectedClass {
    pub fn name(&self) -> &'static str {
        match self {
            ExpectedClass::CoordinateConvex => "coordinate-convex",
            ExpectedClass::CoordinateQuasiConvexOnly => "coordinate-quasi-convex-only",
            ExpectedClass::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub expression: String,
    pub rect: Rect,
    /// `None` for ad-hoc expressions, which are classified but not judged.
    pub expected_class: Option<ExpectedClass>,
    pub notes: String,
}

impl CorpusEntry {
    pub fn new(name: &str, expression: &str, rect: Rect, expected_class: Option<ExpectedClass>, notes: &str) -> Self {
        CorpusEntry {
            name: name.to_string(),
            expression: expression.to_string(),
            rect,
            expected_class,
            notes: notes.to_string(),
        }
    }

    pub fn expr(&self) -> Result<Expr> {
        Ok(parse(&self.expression)?)
    }
}

fn rect(a: f64, b: f64, c: f64, d: f64) -> Rect {
    Rect::new(a, b, c, d).expect("builtin rectangles are valid")
}

pub fn builtin_corpus() -> Vec<CorpusEntry> {
    use ExpectedClass::*;
    let unit = Rect::unit();
    let sym = rect(-1.0, 1.0, -1.0, 1.0);
    let shifted = rect(1.0, 3.0, -1.0, 2.0);
    vec![
        CorpusEntry::new(
            "xy",
            "x*y",
            unit,
            Some(CoordinateConvex),
            "bilinear; every inequality holds with equality",
        ),
        CorpusEntry::new(
            "x2y2",
            "x^2*y^2",
            unit,
            Some(CoordinateConvex),
            "strict inequalities; G mean form separates",
        ),
        CorpusEntry::new("expsum", "exp(x+y)", unit, Some(CoordinateConvex), "jointly convex"),
        CorpusEntry::new(
            "cubes",
            "x^3+y^3",
            sym,
            Some(CoordinateQuasiConvexOnly),
            "monotone partial maps, x^3 not convex",
        ),
        CorpusEntry::new("negsq", "-x^2", sym, Some(Neither), "concave in x"),
        CorpusEntry::new("const", "5", unit, Some(CoordinateConvex), "all aggregates coincide"),
        CorpusEntry::new(
            "xy_shift",
            "x*y",
            shifted,
            Some(CoordinateConvex),
            "bilinear off the origin",
        ),
        CorpusEntry::new(
            "x2y2_shift",
            "x^2*y^2",
            shifted,
            Some(CoordinateConvex),
            "f_xy changes sign inside",
        ),
        CorpusEntry::new(
            "expsum_shift",
            "exp(x+y)",
            shifted,
            Some(CoordinateConvex),
            "jointly convex off the origin",
        ),
    ]
}

pub fn find_entry(name: &str) -> Option<CorpusEntry> {
    builtin_corpus().into_iter().find(|e| e.name == name)
}
