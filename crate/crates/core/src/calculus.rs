//! Mixed partials, corner maxima and empirical Lipschitz constants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::expr::{AbsPower, Bivariate, DiffError, EvalError, Expr, Var};
use crate::quad::{Corner, Rect};
use crate::{Error, Result};

/// Nodes per axis of the deterministic grid scanned before random sampling.
pub const LIPSCHITZ_GRID: usize = 65;
pub const MIN_LIPSCHITZ_SAMPLES: usize = 100;

/// `∂²f/∂x∂y`, differentiating in `x` first.
pub fn mixed_partial(f: &Expr) -> Result<Expr, DiffError> {
    f.differentiate(Var::X)?.differentiate(Var::Y)
}

/// `∂²f/∂y∂x`, differentiating in `y` first. Equal to [`mixed_partial`] pointwise.
pub fn mixed_partial_yx(f: &Expr) -> Result<Expr, DiffError> {
    f.differentiate(Var::Y)?.differentiate(Var::X)
}

/// Central difference of `f` along `var` with step `h`.
pub fn central_difference<B: Bivariate + ?Sized>(f: &B, var: Var, x: f64, y: f64, h: f64) -> Result<f64, EvalError> {
    let (fp, fm) = match var {
        Var::X => (f.value(x + h, y)?, f.value(x - h, y)?),
        Var::Y => (f.value(x, y + h)?, f.value(x, y - h)?),
    };
    Ok((fp - fm) / (2.0 * h))
}

/// Four-point central stencil for `∂²f/∂x∂y`.
pub fn central_mixed_difference<B: Bivariate + ?Sized>(f: &B, x: f64, y: f64, h: f64) -> Result<f64, EvalError> {
    let pp = f.value(x + h, y + h)?;
    let pm = f.value(x + h, y - h)?;
    let mp = f.value(x - h, y + h)?;
    let mm = f.value(x - h, y - h)?;
    Ok((pp - pm - mp + mm) / (4.0 * h * h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerMax {
    /// `max |f_ts|^q` over the four corners, before taking the `1/q` root.
    pub value: f64,
    pub argmax_corner: Corner,
    pub q: f64,
}

impl CornerMax {
    /// `value^(1/q)`.
    pub fn root(&self) -> f64 {
        if self.q == 1.0 {
            self.value
        } else {
            self.value.powf(1.0 / self.q)
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("exponent q must be >= 1, got {q}")));
    }
    Ok(())
}

/// Largest `|fts|^q` over the corners of `r`; ties go to the earlier corner
/// in `(a,c), (a,d), (b,c), (b,d)` order.
pub fn corner_max(fts: &Expr, r: &Rect, q: f64) -> Result<CornerMax> {
    check_q(q)?;
    let g = AbsPower { inner: fts, q };
    let mut best: Option<CornerMax> = None;
    for corner in Corner::ALL {
        let (x, y) = r.corner(corner);
        let value = g.value(x, y)?;
        if best.is_none_or(|b| value > b.value) {
            best = Some(CornerMax {
                value,
                argmax_corner: corner,
                q,
            });
        }
    }
    Ok(best.expect("four corners"))
}

/// `max{|fts(a,b)|^q, |fts(c,d)|^q}` with the endpoint pairs taken literally
/// as points of the plane. Reported next to [`corner_max`] for comparison;
/// the points need not lie in `r`, so evaluation can fail.
pub fn printed_pair_max(fts: &Expr, r: &Rect, q: f64) -> Result<f64> {
    check_q(q)?;
    let g = AbsPower { inner: fts, q };
    let first = g.value(r.a(), r.b())?;
    let second = g.value(r.c(), r.d())?;
    Ok(first.max(second))
}

/// Per-axis Lipschitz constants `(L1, L2)` such that
/// `|f(p) - f(q)| <= L1 |p_x - q_x| + L2 |p_y - q_y|` on the sampled pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub l1: f64,
    pub l2: f64,
    pub samples: usize,
}

fn slope<B: Bivariate + ?Sized>(f: &B, p: (f64, f64), q: (f64, f64), delta: f64) -> Result<Option<f64>> {
    if delta == 0.0 {
        return Ok(None);
    }
    Ok(Some((f.value(p.0, p.1)? - f.value(q.0, q.1)?).abs() / delta))
}

/// Empirical per-axis Lipschitz constants of `f` on `r`.
///
/// Adjacent pairs of a `65 x 65` grid are scanned first, then `samples`
/// random axis-aligned pairs are drawn (one `x`-pair and one `y`-pair each).
/// The result is a lower estimate of the true constants and is deterministic
/// in `seed`.
pub fn estimate_lipschitz<B: Bivariate + ?Sized>(
    f: &B,
    r: &Rect,
    samples: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    if samples < MIN_LIPSCHITZ_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_LIPSCHITZ_SAMPLES} Lipschitz samples, got {samples}"
        )));
    }
    let n = LIPSCHITZ_GRID;
    let xs: Vec<f64> = (0..n).map(|i| grid_point(r.a(), r.b(), i, n)).collect();
    let ys: Vec<f64> = (0..n).map(|j| grid_point(r.c(), r.d(), j, n)).collect();
    let mut values = vec![0.0; n * n];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            values[i * n + j] = f.value(x, y)?;
        }
    }
    let mut l1: f64 = 0.0;
    let mut l2: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i + 1 < n {
                let s = (values[(i + 1) * n + j] - values[i * n + j]).abs() / (xs[i + 1] - xs[i]);
                l1 = l1.max(s);
            }
            if j + 1 < n {
                let s = (values[i * n + j + 1] - values[i * n + j]).abs() / (ys[j + 1] - ys[j]);
                l2 = l2.max(s);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let y = rng.gen_range(r.c()..=r.d());
        let (u, v) = (rng.gen_range(r.a()..=r.b()), rng.gen_range(r.a()..=r.b()));
        if let Some(s) = slope(f, (u, y), (v, y), (u - v).abs())? {
            l1 = l1.max(s);
        }
        let x = rng.gen_range(r.a()..=r.b());
        let (u, v) = (rng.gen_range(r.c()..=r.d()), rng.gen_range(r.c()..=r.d()));
        if let Some(s) = slope(f, (x, u), (x, v), (u - v).abs())? {
            l2 = l2.max(s);
        }
    }
    Ok(LipschitzEstimate { l1, l2, samples })
}

/// `i`-th of `n` equispaced points on `[lo, hi]`, hitting both ends exactly.
pub fn grid_point(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i == 0 {
        lo
    } else if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * (i as f64 / (n - 1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn mixed_partial_examples() {
        let f = mixed_partial(&p("x^2*y^2")).unwrap();
        assert!((f.eval(0.3, 0.7).unwrap() - 4.0 * 0.3 * 0.7).abs() < 1e-14);
        assert_eq!(mixed_partial(&p("x+y")).unwrap(), Expr::Const(0.0));
        let f = mixed_partial(&p("exp(x+y)")).unwrap();
        assert!((f.eval(0.2, 0.5).unwrap() - 0.7f64.exp()).abs() < 1e-14);
        assert!(mixed_partial(&p("abs(x*y)")).is_err());
    }

    #[test]
    fn corner_max_examples() {
        let fts = p("4*x*y");
        let m = corner_max(&fts, &Rect::unit(), 1.0).unwrap();
        assert_eq!((m.value, m.argmax_corner), (4.0, Corner::Bd));
        let m2 = corner_max(&fts, &Rect::unit(), 2.0).unwrap();
        assert_eq!((m2.value, m2.argmax_corner), (16.0, Corner::Bd));
        assert_eq!(m2.root(), 4.0);
        let z = corner_max(&p("0"), &Rect::new(-3.0, 1.0, 2.0, 5.0).unwrap(), 1.0).unwrap();
        assert_eq!((z.value, z.argmax_corner), (0.0, Corner::Ac));
    }

    #[test]
    fn corner_max_ties_keep_first_corner() {
        let m = corner_max(&p("x*y"), &Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap(), 1.0).unwrap();
        assert_eq!((m.value, m.argmax_corner), (1.0, Corner::Ac));
    }

    #[test]
    fn corner_max_rejects_small_q() {
        assert!(corner_max(&p("x"), &Rect::unit(), 0.5).is_err());
    }

    #[test]
    fn corner_max_domain_error() {
        let err = corner_max(&p("1/x"), &Rect::unit(), 1.0).unwrap_err();
        assert!(matches!(err, Error::Eval(EvalError::DivisionByZero { .. })));
    }

    #[test]
    fn printed_pair_uses_literal_points() {
        // fts = 4xy on [1,3]x[-1,2]: points (1,3) and (-1,2) give 12 and 8
        let v = printed_pair_max(&p("4*x*y"), &Rect::new(1.0, 3.0, -1.0, 2.0).unwrap(), 1.0).unwrap();
        assert_eq!(v, 12.0);
    }

    #[test]
    fn lipschitz_examples() {
        let u = Rect::unit();
        let l = estimate_lipschitz(&p("x+y"), &u, 1000, 7).unwrap();
        assert!((l.l1 - 1.0).abs() < 1e-9 && (l.l2 - 1.0).abs() < 1e-9, "{l:?}");
        let l = estimate_lipschitz(&p("5"), &u, 1000, 7).unwrap();
        assert_eq!((l.l1, l.l2), (0.0, 0.0));
        let l = estimate_lipschitz(&p("x^2*y^2"), &u, 1000, 7).unwrap();
        assert!(l.l1 <= 2.0 + 1e-9 && l.l1 > 1.98, "{l:?}");
        assert!(l.l2 <= 2.0 + 1e-9 && l.l2 > 1.98, "{l:?}");
        assert!(estimate_lipschitz(&p("x"), &u, 99, 7).is_err());
    }

    #[test]
    fn lipschitz_is_seed_deterministic() {
        let f = p("sin(3*x)*cos(2*y)");
        let r = Rect::new(-1.0, 2.0, 0.5, 1.5).unwrap();
        let a = estimate_lipschitz(&f, &r, 500, 11).unwrap();
        let b = estimate_lipschitz(&f, &r, 500, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_points_hit_ends() {
        assert_eq!(grid_point(-1.0, 1.0, 0, 65), -1.0);
        assert_eq!(grid_point(-1.0, 1.0, 64, 65), 1.0);
        assert_eq!(grid_point(-1.0, 1.0, 32, 65), 0.0);
    }
}
