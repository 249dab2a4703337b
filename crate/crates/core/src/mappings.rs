//! The contraction mappings on `[0, 1]^2` attached to `f` on `[a, b] x [c, d]`:
//!
//! ```text
//! H(t,s) = mean over Δ of f(t x + (1-t) mx, s y + (1-s) my)
//! G(t,s) = 1/4 Σ f(t e + (1-t) mx, s g + (1-s) my),  e ∈ {a, b}, g ∈ {c, d}
//! ```
//!
//! with `(mx, my)` the centre of the rectangle, and checks of their claimed
//! properties on a grid.

use serde::{Deserialize, Serialize};

use crate::calculus::{estimate_lipschitz, grid_point};
use crate::convexity::{check_convex_coords, Status};
use crate::expr::{Bivariate, Expr};
use crate::inequality::{corner_average, integral_mean, margin_status, BoundCheck, Inequality};
use crate::quad::{integrate2d, QuadOptions, QuadResult, Rect};
use crate::{Error, Result, Settings};

pub const DEFAULT_MAPPING_GRID: usize = 33;
/// Extra slack allowed on the Lipschitz comparison for `G`.
pub const LIPSCHITZ_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MappingKind {
    H,
    G,
}

/// Which right-hand side to use for the integral inequality of `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GForm {
    /// Corner average, the `x`-midpoint edge pair and the centre only.
    Printed,
    /// Adds the `y`-midpoint edge pair `f(a, my), f(b, my)`.
    Corrected,
}

impl GForm {
    pub fn name(&self) -> &'static str {
        match self {
            GForm::Printed => "printed",
            GForm::Corrected => "corrected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingSample {
    pub t: f64,
    pub s: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub status: Status,
    pub details: String,
    /// Witnesses on failure, extremal samples otherwise.
    pub samples: Vec<MappingSample>,
    pub grid: usize,
}

fn check_unit(t: f64, s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("(t, s) = ({t}, {s}) outside [0,1]^2")));
    }
    Ok(())
}

/// `H(t, s)` by quadrature. The returned value is already normalised by the area.
pub fn eval_h<B: Bivariate + ?Sized>(f: &B, r: &Rect, t: f64, s: f64, quad: &QuadOptions) -> Result<QuadResult> {
    check_unit(t, s)?;
    let (mx, my) = (r.mid_x(), r.mid_y());
    let q = integrate2d(|x, y| f.value(t * x + (1.0 - t) * mx, s * y + (1.0 - s) * my), r, quad)?;
    let area = r.area();
    Ok(QuadResult {
        value: q.value / area,
        error_estimate: q.error_estimate / area,
        panels: q.panels,
    })
}

/// `G(t, s)`, an exact four-point average.
pub fn eval_g<B: Bivariate + ?Sized>(f: &B, r: &Rect, t: f64, s: f64) -> Result<f64> {
    check_unit(t, s)?;
    let (mx, my) = (r.mid_x(), r.mid_y());
    let xa = t * r.a() + (1.0 - t) * mx;
    let xb = t * r.b() + (1.0 - t) * mx;
    let yc = s * r.c() + (1.0 - s) * my;
    let yd = s * r.d() + (1.0 - s) * my;
    let left = f.value(xa, yc)? + f.value(xa, yd)?;
    let right = f.value(xb, yc)? + f.value(xb, yd)?;
    Ok((left + right) / 4.0)
}

/// Mapping values on an `n x n` grid of `[0,1]^2`, row-major in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingGrid {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest quadrature error estimate over the grid (0 for `G`).
    pub max_error: f64,
}

impl MappingGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    fn sample(&self, i: usize, j: usize) -> MappingSample {
        MappingSample {
            t: self.nodes[i],
            s: self.nodes[j],
            value: self.at(i, j),
        }
    }
}

pub fn mapping_grid<B: Bivariate + ?Sized>(
    kind: MappingKind,
    f: &B,
    r: &Rect,
    n: usize,
    quad: &QuadOptions,
) -> Result<MappingGrid> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("mapping grid must be >= 3, got {n}")));
    }
    let nodes: Vec<f64> = (0..n).map(|i| grid_point(0.0, 1.0, i, n)).collect();
    let mut values = Vec::with_capacity(n * n);
    let mut max_error: f64 = 0.0;
    for &t in &nodes {
        for &s in &nodes {
            match kind {
                MappingKind::H => {
                    let q = eval_h(f, r, t, s, quad)?;
                    max_error = max_error.max(q.error_estimate);
                    values.push(q.value);
                }
                MappingKind::G => values.push(eval_g(f, r, t, s)?),
            }
        }
    }
    Ok(MappingGrid {
        n,
        nodes,
        values,
        max_error,
    })
}

fn report(property: &str, ok: bool, details: String, samples: Vec<MappingSample>, grid: usize) -> PropertyReport {
    PropertyReport {
        property: property.to_string(),
        status: if ok { Status::Pass } else { Status::Fail },
        details,
        samples,
        grid,
    }
}

/// Midpoint convexity along every grid row and column, over all symmetric triples.
fn coordinate_convexity(g: &MappingGrid, tol: f64) -> PropertyReport {
    let n = g.n;
    let mut worst: (f64, Vec<MappingSample>) = (f64::NEG_INFINITY, Vec::new());
    for line in 0..n {
        for m in 1..n - 1 {
            for k in 1..=m.min(n - 1 - m) {
                // along t with s fixed, then along s with t fixed
                for (lo, mid, hi) in [
                    ((m - k, line), (m, line), (m + k, line)),
                    ((line, m - k), (line, m), (line, m + k)),
                ] {
                    let v = g.at(mid.0, mid.1) - 0.5 * (g.at(lo.0, lo.1) + g.at(hi.0, hi.1));
                    if v > worst.0 {
                        worst = (
                            v,
                            vec![g.sample(lo.0, lo.1), g.sample(mid.0, mid.1), g.sample(hi.0, hi.1)],
                        );
                    }
                }
            }
        }
    }
    let ok = worst.0 <= tol;
    let details = if ok {
        format!("largest midpoint excess {:.3e} <= {tol:.1e}", worst.0.max(0.0))
    } else {
        format!(
            "midpoint excess {:.3e} > {tol:.1e} (endpoints, midpoint in samples)",
            worst.0
        )
    };
    report(
        "coordinate-convexity",
        ok,
        details,
        if ok { Vec::new() } else { worst.1 },
        n,
    )
}

/// Grid minimum at `(0,0)` and maximum at `(1,1)`.
fn extremes(g: &MappingGrid, tol: f64) -> PropertyReport {
    let n = g.n;
    let (mut imin, mut imax) = ((0, 0), (0, 0));
    for i in 0..n {
        for j in 0..n {
            if g.at(i, j) < g.at(imin.0, imin.1) {
                imin = (i, j);
            }
            if g.at(i, j) > g.at(imax.0, imax.1) {
                imax = (i, j);
            }
        }
    }
    let origin = g.at(0, 0);
    let corner = g.at(n - 1, n - 1);
    let ok = g.at(imin.0, imin.1) >= origin - tol && g.at(imax.0, imax.1) <= corner + tol;
    let details = format!(
        "grid min {} at ({}, {}), value at (0,0) {}; grid max {} at ({}, {}), value at (1,1) {}",
        g.at(imin.0, imin.1),
        g.nodes[imin.0],
        g.nodes[imin.1],
        origin,
        g.at(imax.0, imax.1),
        g.nodes[imax.0],
        g.nodes[imax.1],
        corner
    );
    report(
        "bounds",
        ok,
        details,
        vec![
            g.sample(imin.0, imin.1),
            g.sample(imax.0, imax.1),
            g.sample(0, 0),
            g.sample(n - 1, n - 1),
        ],
        n,
    )
}

/// Values at `(0,0)` and `(1,1)` against their closed forms.
fn endpoint_identities(g: &MappingGrid, at_origin: f64, at_corner: f64, what: &str, tol: f64) -> PropertyReport {
    let n = g.n;
    let d0 = (g.at(0, 0) - at_origin).abs();
    let d1 = (g.at(n - 1, n - 1) - at_corner).abs();
    let ok = d0 <= tol && d1 <= tol;
    report(
        "endpoint-identities",
        ok,
        format!("|value(0,0) - f(centre)| = {d0:.3e}, |value(1,1) - {what}| = {d1:.3e}, tol {tol:.1e}"),
        vec![g.sample(0, 0), g.sample(n - 1, n - 1)],
        n,
    )
}

/// Non-decreasing along every row and column.
fn monotonicity(g: &MappingGrid, tol: f64) -> PropertyReport {
    let n = g.n;
    let mut worst = (f64::NEG_INFINITY, Vec::new());
    for line in 0..n {
        for k in 0..n - 1 {
            for (a, b) in [((k, line), (k + 1, line)), ((line, k), (line, k + 1))] {
                let drop = g.at(a.0, a.1) - g.at(b.0, b.1);
                if drop > worst.0 {
                    worst = (drop, vec![g.sample(a.0, a.1), g.sample(b.0, b.1)]);
                }
            }
        }
    }
    let ok = worst.0 <= tol;
    let details = format!(
        "largest decrease between neighbours {:.3e}, tol {tol:.1e}",
        worst.0.max(0.0)
    );
    report("monotone", ok, details, if ok { Vec::new() } else { worst.1 }, n)
}

/// Empirical per-axis Lipschitz constants of a grid of mapping values.
pub fn grid_lipschitz(g: &MappingGrid) -> (f64, f64) {
    let n = g.n;
    let (mut lt, mut ls): (f64, f64) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i + 1 < n {
                lt = lt.max((g.at(i + 1, j) - g.at(i, j)).abs() / (g.nodes[i + 1] - g.nodes[i]));
            }
            if j + 1 < n {
                ls = ls.max((g.at(i, j + 1) - g.at(i, j)).abs() / (g.nodes[j + 1] - g.nodes[j]));
            }
        }
    }
    (lt, ls)
}

fn lipschitz<B: Bivariate + ?Sized>(g: &MappingGrid, f: &B, r: &Rect, settings: &Settings) -> Result<PropertyReport> {
    let (lt, ls) = grid_lipschitz(g);
    let lf = estimate_lipschitz(f, r, settings.check.trials, settings.check.seed)?;
    let bound_t = lf.l1 * r.width() / 2.0;
    let bound_s = lf.l2 * r.height() / 2.0;
    let ok = lt.is_finite() && ls.is_finite() && lt <= bound_t + LIPSCHITZ_SLACK && ls <= bound_s + LIPSCHITZ_SLACK;
    Ok(report(
        "lipschitz",
        ok,
        format!(
            "G constants ({lt}, {ls}); f constants ({}, {}) scaled by half-widths give ({bound_t}, {bound_s})",
            lf.l1, lf.l2
        ),
        Vec::new(),
        g.n,
    ))
}

fn g_integral_identity<B: Bivariate + ?Sized>(f: &B, r: &Rect, quad: &QuadOptions, n: usize) -> Result<PropertyReport> {
    let over_unit = integrate2d(|t, s| eval_g(f, r, t, s).map_err(eval_only), &Rect::unit(), quad)?;
    let mean = integral_mean(f, r, quad)?;
    let diff = (over_unit.value - mean.value).abs();
    let tol = 10.0 * quad.tol;
    Ok(report(
        "integral-identity",
        diff <= tol,
        format!(
            "∫∫G = {}, mean of f = {}, difference {diff:.3e}, tol {tol:.1e}",
            over_unit.value, mean.value
        ),
        Vec::new(),
        n,
    ))
}

fn eval_only(e: Error) -> crate::expr::EvalError {
    match e {
        Error::Eval(inner) => inner,
        other => crate::expr::EvalError::NonFinite {
            node: other.to_string(),
        },
    }
}

fn require_convex_coords(f: &Expr, r: &Rect, settings: &Settings) -> Result<()> {
    let verdict = check_convex_coords(f, r, &settings.check)?;
    if !verdict.passed() {
        return Err(Error::HypothesisViolated {
            hypothesis: "f convex on the co-ordinates".to_string(),
            verdict: Box::new(verdict),
        });
    }
    Ok(())
}

/// Checks the claimed properties of `H` or `G` on an `n x n` grid.
///
/// `H`: coordinate convexity, extremes at `(0,0)`/`(1,1)` with their closed
/// forms, monotonicity. `G`: coordinate convexity, extremes and closed forms,
/// Lipschitz constants against those of `f` scaled by the half-widths, and
/// `∫∫G = mean(f)`.
pub fn check_mapping_properties(
    kind: MappingKind,
    f: &Expr,
    r: &Rect,
    settings: &Settings,
    n: usize,
) -> Result<Vec<PropertyReport>> {
    require_convex_coords(f, r, settings)?;
    let grid = mapping_grid(kind, f, r, n, &settings.quad)?;
    let tol = settings.check.tol + 4.0 * grid.max_error;
    let centre = f.eval(r.mid_x(), r.mid_y())?;
    let mut out = vec![coordinate_convexity(&grid, tol), extremes(&grid, tol)];
    match kind {
        MappingKind::H => {
            let mean = integral_mean(f, r, &settings.quad)?;
            out.push(endpoint_identities(
                &grid,
                centre,
                mean.value,
                "mean of f",
                tol + 10.0 * settings.quad.tol,
            ));
            out.push(monotonicity(&grid, tol));
        }
        MappingKind::G => {
            out.push(endpoint_identities(
                &grid,
                centre,
                corner_average(f, r)?,
                "corner average",
                0.0,
            ));
            out.push(lipschitz(&grid, f, r, settings)?);
            out.push(g_integral_identity(f, r, &settings.quad, n)?);
        }
    }
    Ok(out)
}

/// Right-hand side of the integral inequality for `G`.
pub fn g_mean_rhs<B: Bivariate + ?Sized>(f: &B, r: &Rect, form: GForm) -> Result<f64> {
    let (mx, my) = (r.mid_x(), r.mid_y());
    let corners = corner_average(f, r)?;
    let x_mid_pair = (f.value(mx, r.c())? + f.value(mx, r.d())?) / 2.0;
    let centre = f.value(mx, my)?;
    Ok(match form {
        GForm::Printed => (corners + x_mid_pair + centre) / 4.0,
        GForm::Corrected => {
            let y_mid_pair = (f.value(r.a(), my)? + f.value(r.b(), my)?) / 2.0;
            (corners + y_mid_pair + x_mid_pair + centre) / 4.0
        }
    })
}

/// `mean(f) <= g_mean_rhs(form)` for co-ordinate convex `f`.
pub fn check_g_integral_inequality(f: &Expr, r: &Rect, form: GForm, settings: &Settings) -> Result<BoundCheck> {
    require_convex_coords(f, r, settings)?;
    let mean = integral_mean(f, r, &settings.quad)?;
    let rhs = g_mean_rhs(f, r, form)?;
    let margin = rhs - mean.value;
    Ok(BoundCheck {
        inequality: Inequality::GMean { form },
        lhs: mean.value,
        rhs,
        rhs_four_corner: None,
        rhs_printed_pair: None,
        margin,
        status: margin_status(margin, mean.error_estimate, settings.tol_margin),
        lhs_error: mean.error_estimate,
    })
}
