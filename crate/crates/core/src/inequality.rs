//! Trapezoid-type gap on a rectangle, its kernel representation, the bounds
//! on its absolute value, and the five-term chain for co-ordinate convex
//! functions.
//!
//! For `f` on `[a, b] x [c, d]` the gap is
//!
//! ```text
//! gap = (f(a,c) + f(a,d) + f(b,c) + f(b,d)) / 4  +  mean(f)  -  A
//! A   = 1/2 [ mean_x(f(·,c) + f(·,d)) + mean_y(f(a,·) + f(b,·)) ]
//! ```
//!
//! and equals `(b-a)(d-c)/4 ∫∫ (1-2t)(1-2s) f_xy(ta+(1-t)b, sc+(1-s)d) dt ds`.

use serde::{Deserialize, Serialize};

use crate::calculus::{corner_max, mixed_partial, printed_pair_max, CornerMax};
use crate::convexity::{check_convex_coords, check_quasiconvex_coords, Status, Verdict};
use crate::expr::{AbsPower, Bivariate, Expr};
use crate::quad::{integrate1d, integrate2d, QuadOptions, QuadResult, Rect};
use crate::{Error, Result, Settings};

/// Mean of `f(·, y)` over `[a, b]`.
pub fn mean_along_x<B: Bivariate + ?Sized>(f: &B, r: &Rect, y: f64, quad: &QuadOptions) -> Result<QuadResult> {
    let q = integrate1d(|x| f.value(x, y), r.a(), r.b(), quad)?;
    Ok(scale(q, 1.0 / r.width()))
}

/// Mean of `f(x, ·)` over `[c, d]`.
pub fn mean_along_y<B: Bivariate + ?Sized>(f: &B, r: &Rect, x: f64, quad: &QuadOptions) -> Result<QuadResult> {
    let q = integrate1d(|y| f.value(x, y), r.c(), r.d(), quad)?;
    Ok(scale(q, 1.0 / r.height()))
}

/// `1/((b-a)(d-c)) ∫∫ f`.
pub fn integral_mean<B: Bivariate + ?Sized>(f: &B, r: &Rect, quad: &QuadOptions) -> Result<QuadResult> {
    let q = integrate2d(|x, y| f.value(x, y), r, quad)?;
    Ok(scale(q, 1.0 / r.area()))
}

pub fn corner_average<B: Bivariate + ?Sized>(f: &B, r: &Rect) -> Result<f64> {
    // pairwise in (a,c), (a,d), (b,c), (b,d) order; the mapping G sums the same way
    let left = f.value(r.a(), r.c())? + f.value(r.a(), r.d())?;
    let right = f.value(r.b(), r.c())? + f.value(r.b(), r.d())?;
    Ok((left + right) / 4.0)
}

fn scale(q: QuadResult, factor: f64) -> QuadResult {
    QuadResult {
        value: q.value * factor,
        error_estimate: q.error_estimate * factor.abs(),
        panels: q.panels,
    }
}

/// The aggregates making up the trapezoid-type gap. The sign of `gap` is kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapDecomposition {
    pub corner_avg: f64,
    pub integral_mean: f64,
    pub edge_term_a: f64,
    pub gap: f64,
    /// Sum of the quadrature error estimates entering `gap`.
    pub quad_error: f64,
}

pub fn trapezoid_gap<B: Bivariate + ?Sized>(f: &B, r: &Rect, quad: &QuadOptions) -> Result<GapDecomposition> {
    let corner_avg = corner_average(f, r)?;
    let mean = integral_mean(f, r, quad)?;
    let edges = [
        mean_along_x(f, r, r.c(), quad)?,
        mean_along_x(f, r, r.d(), quad)?,
        mean_along_y(f, r, r.a(), quad)?,
        mean_along_y(f, r, r.b(), quad)?,
    ];
    let edge_term_a = 0.5 * ((edges[0].value + edges[1].value) + (edges[2].value + edges[3].value));
    let edge_err: f64 = 0.5 * edges.iter().map(|q| q.error_estimate).sum::<f64>();
    Ok(GapDecomposition {
        corner_avg,
        integral_mean: mean.value,
        edge_term_a,
        gap: corner_avg + mean.value - edge_term_a,
        quad_error: mean.error_estimate + edge_err,
    })
}

/// Both sides of the kernel identity for the gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    /// The gap, computed from its aggregates.
    pub lhs: f64,
    /// `(b-a)(d-c)/4 ∫∫ (1-2t)(1-2s) f_xy(ta+(1-t)b, sc+(1-s)d) dt ds`.
    pub rhs: f64,
    pub residual: f64,
    pub quad_error: f64,
}

pub fn lemma1_residual(f: &Expr, r: &Rect, quad: &QuadOptions) -> Result<IdentityResidual> {
    let fts = mixed_partial(f)?;
    let gap = trapezoid_gap(f, r, quad)?;
    let (a, b, c, d) = (r.a(), r.b(), r.c(), r.d());
    let kernel = integrate2d(
        |t, s| {
            let x = t * a + (1.0 - t) * b;
            let y = s * c + (1.0 - s) * d;
            Ok((1.0 - 2.0 * t) * (1.0 - 2.0 * s) * fts.eval(x, y)?)
        },
        &Rect::unit(),
        quad,
    )?;
    let rhs = kernel.value * r.area() / 4.0;
    Ok(IdentityResidual {
        lhs: gap.gap,
        rhs,
        residual: (gap.gap - rhs).abs(),
        quad_error: gap.quad_error + kernel.error_estimate * r.area() / 4.0,
    })
}

/// Which bound on `|gap|` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundVariant {
    /// `(b-a)(d-c)/16 · max|f_xy|`
    Abs,
    /// `(b-a)(d-c) / (4 (p+1)^(2/p)) · (max|f_xy|^q)^(1/q)`, `1/p + 1/q = 1`
    Holder { p: f64 },
    /// `(b-a)(d-c)/4 · (max|f_xy|^q)^(1/q)`, `q` conjugate to `p`
    HolderRelaxed { p: f64 },
    /// `(b-a)(d-c)/16 · (max|f_xy|^q)^(1/q)`, `q >= 1`
    PowerMean { q: f64 },
}

/// Conjugate exponent `p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

impl BoundVariant {
    fn validate(&self) -> Result<()> {
        match *self {
            BoundVariant::Abs => Ok(()),
            BoundVariant::Holder { p } | BoundVariant::HolderRelaxed { p } => {
                if p > 1.0 && p.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!(
                        "Hölder exponent p must be > 1, got {p}"
                    )))
                }
            }
            BoundVariant::PowerMean { q } => {
                if q >= 1.0 && q.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!(
                        "power-mean exponent q must be >= 1, got {q}"
                    )))
                }
            }
        }
    }

    /// Exponent applied to `|f_xy|` before taking the corner maximum.
    pub fn q(&self) -> f64 {
        match *self {
            BoundVariant::Abs => 1.0,
            BoundVariant::Holder { p } | BoundVariant::HolderRelaxed { p } => conjugate(p),
            BoundVariant::PowerMean { q } => q,
        }
    }

    /// Factor multiplying the corner term.
    pub fn constant(&self, r: &Rect) -> f64 {
        let area = r.area();
        match *self {
            BoundVariant::Abs | BoundVariant::PowerMean { .. } => area / 16.0,
            BoundVariant::Holder { p } => area / (4.0 * (p + 1.0).powf(2.0 / p)),
            BoundVariant::HolderRelaxed { .. } => area / 4.0,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            BoundVariant::Abs => "ABS".to_string(),
            BoundVariant::Holder { p } => format!("HOLDER(p={p})"),
            BoundVariant::HolderRelaxed { p } => format!("HOLDER_RELAXED(p={p})"),
            BoundVariant::PowerMean { q } => format!("POWER_MEAN(q={q})"),
        }
    }
}

/// Right-hand side of a bound, with the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRhs {
    /// Constant times the four-corner maximum root.
    pub rhs: f64,
    /// Constant times `max{|f_xy(a,b)|^q, |f_xy(c,d)|^q}^(1/q)` with the
    /// endpoint pairs read as points; `None` if `f_xy` is undefined there.
    pub rhs_printed_pair: Option<f64>,
    pub corner: CornerMax,
    pub hypothesis: Verdict,
}

/// Co-ordinate quasi-convexity of `|f_xy|^q`, required by every bound.
pub fn bound_hypothesis(fts: &Expr, r: &Rect, q: f64, settings: &Settings) -> Result<Verdict> {
    let target = AbsPower { inner: fts, q };
    let verdict = check_quasiconvex_coords(&target, r, &settings.check)?;
    if !verdict.passed() {
        return Err(Error::HypothesisViolated {
            hypothesis: format!("|f_xy|^{q} quasi-convex on the co-ordinates"),
            verdict: Box::new(verdict),
        });
    }
    Ok(verdict)
}

pub fn bound_rhs(variant: BoundVariant, f: &Expr, r: &Rect, settings: &Settings) -> Result<BoundRhs> {
    variant.validate()?;
    let fts = mixed_partial(f)?;
    let q = variant.q();
    let hypothesis = bound_hypothesis(&fts, r, q, settings)?;
    let corner = corner_max(&fts, r, q)?;
    let k = variant.constant(r);
    let rhs_printed_pair = printed_pair_max(&fts, r, q)
        .ok()
        .map(|m| k * if q == 1.0 { m } else { m.powf(1.0 / q) });
    Ok(BoundRhs {
        rhs: k * corner.root(),
        rhs_printed_pair,
        corner,
        hypothesis,
    })
}

/// The statement a [`BoundCheck`] tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "statement", rename_all = "kebab-case")]
pub enum Inequality {
    /// `|gap| <= bound`
    Trapezoid { variant: BoundVariant },
    /// `mean(f) <= four-level corner/edge/midpoint combination` from mapping `G`.
    GMean { form: crate::mappings::GForm },
}

impl Inequality {
    pub fn name(&self) -> String {
        match self {
            Inequality::Trapezoid { variant } => variant.name(),
            Inequality::GMean { form } => format!("G_MEAN({})", form.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub inequality: Inequality,
    pub lhs: f64,
    pub rhs: f64,
    /// Equal to `rhs` for trapezoid bounds, reported next to `rhs_printed_pair`.
    pub rhs_four_corner: Option<f64>,
    pub rhs_printed_pair: Option<f64>,
    /// `rhs - lhs`
    pub margin: f64,
    pub status: Status,
    /// Quadrature uncertainty in `lhs`.
    pub lhs_error: f64,
}

/// Pass iff `margin >= -tol_margin`. A failure that the quadrature
/// uncertainty could explain is reported as inconclusive.
pub fn margin_status(margin: f64, lhs_error: f64, tol_margin: f64) -> Status {
    if margin >= -tol_margin {
        Status::Pass
    } else if margin + lhs_error >= -tol_margin {
        Status::Inconclusive
    } else {
        Status::Fail
    }
}

pub fn check_bound(variant: BoundVariant, f: &Expr, r: &Rect, settings: &Settings) -> Result<BoundCheck> {
    let bound = bound_rhs(variant, f, r, settings)?;
    let gap = trapezoid_gap(f, r, &settings.quad)?;
    let lhs = gap.gap.abs();
    let margin = bound.rhs - lhs;
    Ok(BoundCheck {
        inequality: Inequality::Trapezoid { variant },
        lhs,
        rhs: bound.rhs,
        rhs_four_corner: Some(bound.rhs),
        rhs_printed_pair: bound.rhs_printed_pair,
        margin,
        status: margin_status(margin, gap.quad_error, settings.tol_margin),
        lhs_error: gap.quad_error,
    })
}

/// The five members of the chain, left to right, for co-ordinate convex `f`:
/// midpoint value, mean of the two mid-line means, integral mean, quarter-sum
/// of the four edge means, corner average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub values: [f64; 5],
    pub monotone: bool,
    pub quad_error: f64,
}

pub fn check_chain(f: &Expr, r: &Rect, settings: &Settings) -> Result<ChainResult> {
    let verdict = check_convex_coords(f, r, &settings.check)?;
    if !verdict.passed() {
        return Err(Error::HypothesisViolated {
            hypothesis: "f convex on the co-ordinates".to_string(),
            verdict: Box::new(verdict),
        });
    }
    chain_values(f, r, &settings.quad)
}

/// The chain without the hypothesis check.
pub fn chain_values<B: Bivariate + ?Sized>(f: &B, r: &Rect, quad: &QuadOptions) -> Result<ChainResult> {
    let v1 = f.value(r.mid_x(), r.mid_y())?;
    let mid_x_line = mean_along_x(f, r, r.mid_y(), quad)?;
    let mid_y_line = mean_along_y(f, r, r.mid_x(), quad)?;
    let v2 = 0.5 * (mid_x_line.value + mid_y_line.value);
    let mean = integral_mean(f, r, quad)?;
    let edges = [
        mean_along_x(f, r, r.c(), quad)?,
        mean_along_x(f, r, r.d(), quad)?,
        mean_along_y(f, r, r.a(), quad)?,
        mean_along_y(f, r, r.b(), quad)?,
    ];
    let v4 = 0.25 * edges.iter().map(|q| q.value).sum::<f64>();
    let v5 = corner_average(f, r)?;
    let quad_error = mid_x_line.error_estimate
        + mid_y_line.error_estimate
        + mean.error_estimate
        + edges.iter().map(|q| q.error_estimate).sum::<f64>();
    let values = [v1, v2, mean.value, v4, v5];
    let slack = 10.0 * quad.tol + quad_error;
    let monotone = values.windows(2).all(|w| w[0] <= w[1] + slack);
    Ok(ChainResult {
        values,
        monotone,
        quad_error,
    })
}

/// One-dimensional chain `g((a+b)/2) <= mean(g) <= (g(a)+g(b))/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chain1d {
    pub midpoint: f64,
    pub mean: f64,
    pub endpoint_avg: f64,
    pub monotone: bool,
}

pub fn chain_1d<G>(g: G, a: f64, b: f64, quad: &QuadOptions) -> Result<Chain1d>
where
    G: Fn(f64) -> Result<f64, crate::expr::EvalError>,
{
    let midpoint = g((a + b) / 2.0)?;
    let q = integrate1d(&g, a, b, quad)?;
    let mean = q.value / (b - a);
    let endpoint_avg = (g(a)? + g(b)?) / 2.0;
    let slack = 10.0 * quad.tol + q.error_estimate;
    Ok(Chain1d {
        midpoint,
        mean,
        endpoint_avg,
        monotone: midpoint <= mean + slack && mean <= endpoint_avg + slack,
    })
}
