//! Gauss-Legendre rules and composite tensor-product quadrature on rectangles.
//!
//! All refinement is by panel doubling, and the error estimate is always the
//! absolute difference between the last two levels. Evaluation order is fixed
//! so results are reproducible bit for bit.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::EvalError;

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 32;

/// Default absolute tolerance for every integral in the workbench.
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_ORDER: usize = 10;
pub const MAX_PANELS_1D: usize = 1 << 14;
/// Per-axis cap for 2D refinement. A full 2^14 × 2^14 tensor grid is not
/// evaluable in practice, so 2D stops at 2^9 panels per axis and flags the result.
pub const MAX_PANELS_2D: usize = 1 << 9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RectError {
    #[error("degenerate rectangle: need a < b and c < d, got [{a}, {b}] x [{c}, {d}]")]
    Degenerate { a: f64, b: f64, c: f64, d: f64 },
    #[error("rectangle must be given as `a,b,c,d`: {0}")]
    Syntax(String),
}

/// Closed rectangle `[a, b] x [c, d]` with `a < b` and `c < d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRect", into = "RawRect")]
pub struct Rect {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

#[derive(Serialize, Deserialize)]
struct RawRect {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TryFrom<RawRect> for Rect {
    type Error = RectError;
    fn try_from(r: RawRect) -> Result<Self, Self::Error> {
        Rect::new(r.a, r.b, r.c, r.d)
    }
}

impl From<Rect> for RawRect {
    fn from(r: Rect) -> Self {
        RawRect {
            a: r.a,
            b: r.b,
            c: r.c,
            d: r.d,
        }
    }
}

/// The four corners, in the fixed order used for tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Corner {
    Ac,
    Ad,
    Bc,
    Bd,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::Ac, Corner::Ad, Corner::Bc, Corner::Bd];
}

impl Rect {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, RectError> {
        let finite = [a, b, c, d].iter().all(|v| v.is_finite());
        if !finite || a >= b || c >= d {
            return Err(RectError::Degenerate { a, b, c, d });
        }
        Ok(Rect { a, b, c, d })
    }

    pub fn unit() -> Self {
        Rect {
            a: 0.0,
            b: 1.0,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn height(&self) -> f64 {
        self.d - self.c
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn mid_x(&self) -> f64 {
        (self.a + self.b) / 2.0
    }

    pub fn mid_y(&self) -> f64 {
        (self.c + self.d) / 2.0
    }

    pub fn corner(&self, corner: Corner) -> (f64, f64) {
        match corner {
            Corner::Ac => (self.a, self.c),
            Corner::Ad => (self.a, self.d),
            Corner::Bc => (self.b, self.c),
            Corner::Bd => (self.b, self.d),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.a..=self.b).contains(&x) && (self.c..=self.d).contains(&y)
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for Rect {
    type Err = RectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(RectError::Syntax(s.to_string()));
        }
        let mut v = [0.0; 4];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part.parse().map_err(|_| RectError::Syntax(s.to_string()))?;
        }
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    /// |finest - next finest| over the refinement sequence.
    pub error_estimate: f64,
    /// Panels used at the finest level (per axis for 2D, summed over split pieces).
    pub panels: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("unsupported Gauss rule order {0} (supported: {MIN_ORDER}..={MAX_ORDER})")]
    UnsupportedOrder(usize),
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("tolerance {tol:e} not reached after {} panels (estimate {:e}, value {})", best.panels, best.error_estimate, best.value)]
    ToleranceNotReached { best: QuadResult, tol: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub order: usize,
    pub tol: f64,
    pub max_panels_1d: usize,
    pub max_panels_2d: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            order: DEFAULT_ORDER,
            tol: DEFAULT_TOL,
            max_panels_1d: MAX_PANELS_1D,
            max_panels_2d: MAX_PANELS_2D,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions {
            tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<&'static GaussRule, QuadError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(QuadError::InvalidTolerance(self.tol));
        }
        gauss_rule(self.order)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Legendre roots by Newton iteration on the three-term recurrence.
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let step = p / d;
                z -= step;
                if step.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }
}

/// `(P_n(z), P_n'(z))`.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();

/// Cached n-point rule, `2 <= n <= 32`.
pub fn gauss_rule(n: usize) -> Result<&'static GaussRule, QuadError> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&n) {
        return Err(QuadError::UnsupportedOrder(n));
    }
    let rules = RULES.get_or_init(|| (MIN_ORDER..=MAX_ORDER).map(GaussRule::compute).collect());
    Ok(&rules[n - MIN_ORDER])
}

/// Composite rule with `panels` equal panels on `[lo, hi]`.
pub fn composite1d<F>(rule: &GaussRule, g: &F, lo: f64, hi: f64, panels: usize) -> Result<f64, EvalError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let left = lo + p as f64 * h;
        let mut acc = 0.0;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * g(left + 0.5 * h * (t + 1.0))?;
        }
        total += acc * 0.5 * h;
    }
    Ok(total)
}

/// Tensor-product composite rule with `panels x panels` equal cells.
pub fn composite2d<F>(rule: &GaussRule, f: &F, r: &Rect, panels: usize) -> Result<f64, EvalError>
where
    F: Fn(f64, f64) -> Result<f64, EvalError>,
{
    let hx = r.width() / panels as f64;
    let hy = r.height() / panels as f64;
    let mut total = 0.0;
    for px in 0..panels {
        let x0 = r.a + px as f64 * hx;
        for (&tx, &wx) in rule.nodes.iter().zip(&rule.weights) {
            let x = x0 + 0.5 * hx * (tx + 1.0);
            let mut column = 0.0;
            for py in 0..panels {
                let y0 = r.c + py as f64 * hy;
                for (&ty, &wy) in rule.nodes.iter().zip(&rule.weights) {
                    column += wy * f(x, y0 + 0.5 * hy * (ty + 1.0))?;
                }
            }
            total += wx * column;
        }
    }
    Ok(total * 0.25 * hx * hy)
}

fn refine<S>(tol: f64, max_panels: usize, mut level: S) -> Result<QuadResult, QuadError>
where
    S: FnMut(usize) -> Result<f64, EvalError>,
{
    let mut panels = 1;
    let mut prev = level(panels)?;
    loop {
        panels *= 2;
        let value = level(panels)?;
        let err = (value - prev).abs();
        let result = QuadResult {
            value,
            error_estimate: err,
            panels,
        };
        if err <= tol {
            return Ok(result);
        }
        if panels >= max_panels {
            return Err(QuadError::ToleranceNotReached { best: result, tol });
        }
        prev = value;
    }
}

/// Adaptive (panel-doubling) integral of `g` over `[lo, hi]`.
pub fn integrate1d<F>(g: F, lo: f64, hi: f64, opts: &QuadOptions) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    let rule = opts.validate()?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(QuadError::InvalidInterval { lo, hi });
    }
    refine(opts.tol, opts.max_panels_1d, |k| composite1d(rule, &g, lo, hi, k))
}

fn split_points(lo: f64, hi: f64, breaks: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&t| t > lo && t < hi).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(hi);
    pts
}

fn combine(parts: &[QuadResult]) -> QuadResult {
    QuadResult {
        value: parts.iter().map(|p| p.value).sum(),
        error_estimate: parts.iter().map(|p| p.error_estimate).sum(),
        panels: parts.iter().map(|p| p.panels).sum(),
    }
}

/// Like [`integrate1d`], but integrates each piece between `breaks` separately
/// so a kink at a break point never sits inside a panel.
pub fn integrate1d_split<F>(g: F, lo: f64, hi: f64, breaks: &[f64], opts: &QuadOptions) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    let pts = split_points(lo, hi, breaks);
    let pieces = pts.len() - 1;
    let sub = QuadOptions {
        tol: opts.tol / pieces as f64,
        ..*opts
    };
    let mut parts = Vec::with_capacity(pieces);
    let mut failed = false;
    for w in pts.windows(2) {
        match integrate1d(&g, w[0], w[1], &sub) {
            Ok(q) => parts.push(q),
            Err(QuadError::ToleranceNotReached { best, .. }) => {
                failed = true;
                parts.push(best);
            }
            Err(e) => return Err(e),
        }
    }
    let total = combine(&parts);
    if failed {
        return Err(QuadError::ToleranceNotReached {
            best: total,
            tol: opts.tol,
        });
    }
    Ok(total)
}

/// Adaptive tensor-product integral of `f` over `r` (not normalized by area).
pub fn integrate2d<F>(f: F, r: &Rect, opts: &QuadOptions) -> Result<QuadResult, QuadError>
where
    F: Fn(f64, f64) -> Result<f64, EvalError>,
{
    let rule = opts.validate()?;
    refine(opts.tol, opts.max_panels_2d, |k| composite2d(rule, &f, r, k))
}

/// [`integrate2d`] over the sub-rectangles cut by `x_breaks` and `y_breaks`.
pub fn integrate2d_split<F>(
    f: F,
    r: &Rect,
    x_breaks: &[f64],
    y_breaks: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult, QuadError>
where
    F: Fn(f64, f64) -> Result<f64, EvalError>,
{
    let xs = split_points(r.a, r.b, x_breaks);
    let ys = split_points(r.c, r.d, y_breaks);
    let pieces = (xs.len() - 1) * (ys.len() - 1);
    let sub = QuadOptions {
        tol: opts.tol / pieces as f64,
        ..*opts
    };
    let mut parts = Vec::with_capacity(pieces);
    let mut failed = false;
    for wx in xs.windows(2) {
        for wy in ys.windows(2) {
            let cell = Rect::new(wx[0], wx[1], wy[0], wy[1]).expect("split cells are non-degenerate");
            match integrate2d(&f, &cell, &sub) {
                Ok(q) => parts.push(q),
                Err(QuadError::ToleranceNotReached { best, .. }) => {
                    failed = true;
                    parts.push(best);
                }
                Err(e) => return Err(e),
            }
        }
    }
    let total = combine(&parts);
    if failed {
        return Err(QuadError::ToleranceNotReached {
            best: total,
            tol: opts.tol,
        });
    }
    Ok(total)
}

/// `∫∫_{[0,1]^2} |(1-2t)(1-2s)| dt ds`, split at `t = s = 1/2`.
pub fn abs_kernel_integral(opts: &QuadOptions) -> Result<QuadResult, QuadError> {
    integrate2d_split(
        |t, s| Ok(((1.0 - 2.0 * t) * (1.0 - 2.0 * s)).abs()),
        &Rect::unit(),
        &[0.5],
        &[0.5],
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_point_rule() {
        let r = gauss_rule(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r.nodes[0], -s, epsilon = 1e-15);
        assert_abs_diff_eq!(r.nodes[1], s, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn two_point_rule_kills_odd_cubic() {
        let r = gauss_rule(2).unwrap();
        let v = composite1d(r, &|t: f64| Ok(t.powi(3)), -1.0, 1.0, 1).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-16);
    }

    #[test]
    fn weights_sum_to_two() {
        for n in MIN_ORDER..=MAX_ORDER {
            let r = gauss_rule(n).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert_abs_diff_eq!(s, 2.0, epsilon = 1e-13);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]), "n={n} nodes not sorted");
        }
    }

    #[test]
    fn unsupported_orders() {
        assert_eq!(gauss_rule(1).unwrap_err(), QuadError::UnsupportedOrder(1));
        assert_eq!(gauss_rule(33).unwrap_err(), QuadError::UnsupportedOrder(33));
    }

    #[test]
    fn one_d_examples() {
        let opts = QuadOptions::with_tol(1e-10);
        let q = integrate1d(|x| Ok(x * x), 0.0, 1.0, &opts).unwrap();
        assert_abs_diff_eq!(q.value, 1.0 / 3.0, epsilon = 1e-10);
        let q = integrate1d(|_| Ok(0.0), 0.0, 1.0, &opts).unwrap();
        assert_eq!(q.value, 0.0);
        // panel boundaries at powers of two put t = 1/2 on a boundary as soon as panels >= 2
        let q = integrate1d(|t| Ok((1.0 - 2.0 * t).abs()), 0.0, 1.0, &opts).unwrap();
        assert_abs_diff_eq!(q.value, 0.5, epsilon = 1e-12);
        let q = integrate1d_split(|t| Ok((1.0 - 2.0 * t).abs()), 0.0, 1.0, &[0.5], &opts).unwrap();
        assert_abs_diff_eq!(q.value, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn one_d_input_validation() {
        let opts = QuadOptions::default();
        assert!(matches!(
            integrate1d(Ok, 1.0, 0.0, &opts),
            Err(QuadError::InvalidInterval { .. })
        ));
        assert!(matches!(
            integrate1d(Ok, 0.0, 1.0, &QuadOptions::with_tol(0.0)),
            Err(QuadError::InvalidTolerance(_))
        ));
    }

    #[test]
    fn tolerance_not_reached_is_flagged_with_best_value() {
        // sqrt kink off the panel grid converges slowly; cap panels low
        let opts = QuadOptions {
            tol: 1e-15,
            max_panels_1d: 8,
            ..Default::default()
        };
        let err = integrate1d(|x| Ok((x - 0.3).abs().sqrt()), 0.0, 1.0, &opts).unwrap_err();
        match err {
            QuadError::ToleranceNotReached { best, tol } => {
                assert_eq!(best.panels, 8);
                assert_eq!(tol, 1e-15);
                assert!(best.error_estimate > 1e-15);
                let exact = (2.0 / 3.0) * (0.3f64.powf(1.5) + 0.7f64.powf(1.5));
                assert!((best.value - exact).abs() < 1e-3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eval_errors_surface() {
        let err = integrate1d(
            |x| {
                if x > 0.5 {
                    Err(EvalError::NonFinite { node: "g".into() })
                } else {
                    Ok(x)
                }
            },
            0.0,
            1.0,
            &QuadOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, QuadError::Eval(_)));
    }

    #[test]
    fn two_d_examples() {
        let opts = QuadOptions::default();
        let u = Rect::unit();
        let q = integrate2d(|x, y| Ok(x * y), &u, &opts).unwrap();
        assert_abs_diff_eq!(q.value, 0.25, epsilon = 1e-14);
        let q = integrate2d(|x, y| Ok(x * x * y * y), &u, &opts).unwrap();
        assert_abs_diff_eq!(q.value, 1.0 / 9.0, epsilon = 1e-14);
        let q = abs_kernel_integral(&opts).unwrap();
        assert_abs_diff_eq!(q.value, 0.25, epsilon = 1e-14);
    }

    #[test]
    fn rect_validation_and_parsing() {
        assert!(Rect::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(Rect::new(0.0, 1.0, 2.0, -1.0).is_err());
        assert!(Rect::new(0.0, f64::NAN, 0.0, 1.0).is_err());
        let r: Rect = "1, 3, -1, 2".parse().unwrap();
        assert_eq!((r.a(), r.b(), r.c(), r.d()), (1.0, 3.0, -1.0, 2.0));
        assert_eq!(r.area(), 6.0);
        assert!("1,2,3".parse::<Rect>().is_err());
        assert!("a,b,c,d".parse::<Rect>().is_err());
        let bad: Result<Rect, _> = serde_json::from_str(r#"{"a":1,"b":0,"c":0,"d":1}"#);
        assert!(bad.is_err());
    }
}
