//! Sampling-based falsification of convexity and quasi-convexity, jointly
//! along segments and on the co-ordinates (partial maps).
//!
//! Every check first scans a fixed grid (65 x 65 by default), keeping the
//! largest violation, then draws `trials` random configurations from a seeded
//! ChaCha stream and stops at the first violation. A `Pass` only means no
//! violation was found.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::grid_point;
use crate::expr::{Bivariate, Var};
use crate::quad::Rect;
use crate::{Error, Result};

pub const DEFAULT_TRIALS: usize = 10_000;
pub const MIN_TRIALS: usize = 1_000;
pub const DEFAULT_GRID: usize = 65;
pub const DEFAULT_SEED: u64 = 42;
/// Absolute slack on every violation.
pub const VIOLATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// The inequality a witness violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// `f(λp + (1-λ)q) <= max(f(p), f(q))`
    QuasiConvex,
    /// `f(λp + (1-λ)q) <= λ f(p) + (1-λ) f(q)`
    Convex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    /// Arbitrary segments in the rectangle.
    Joint,
    /// Segments parallel to an axis (partial maps).
    Coordinates,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub condition: Condition,
    pub points: [(f64, f64); 2],
    pub lambda: f64,
    /// `f` at the combined point.
    pub lhs: f64,
    /// Right-hand side of `condition` at the endpoints.
    pub rhs: f64,
}

impl Witness {
    pub fn point(&self) -> (f64, f64) {
        let [(x, y), (z, w)] = self.points;
        let l = self.lambda;
        // clamped so rounding never leaves the segment
        let mix = |u: f64, v: f64| (l * u + (1.0 - l) * v).clamp(u.min(v), u.max(v));
        (mix(x, z), mix(y, w))
    }

    pub fn violation(&self) -> f64 {
        self.lhs - self.rhs
    }

    fn build<B: Bivariate + ?Sized>(
        f: &B,
        condition: Condition,
        p: (f64, f64),
        q: (f64, f64),
        lambda: f64,
    ) -> Result<Witness> {
        let mut w = Witness {
            condition,
            points: [p, q],
            lambda,
            lhs: 0.0,
            rhs: 0.0,
        };
        let (lhs, rhs) = w.evaluate(f)?;
        w.lhs = lhs;
        w.rhs = rhs;
        Ok(w)
    }

    /// Recomputes `(lhs, rhs)` from the stored points by direct evaluation.
    pub fn evaluate<B: Bivariate + ?Sized>(&self, f: &B) -> Result<(f64, f64)> {
        let (mx, my) = self.point();
        let lhs = f.value(mx, my)?;
        let fp = f.value(self.points[0].0, self.points[0].1)?;
        let fq = f.value(self.points[1].0, self.points[1].1)?;
        let rhs = match self.condition {
            Condition::QuasiConvex => fp.max(fq),
            Condition::Convex => self.lambda * fp + (1.0 - self.lambda) * fq,
        };
        Ok((lhs, rhs))
    }

    /// True when direct re-evaluation still violates the condition beyond `tol`.
    pub fn reverify<B: Bivariate + ?Sized>(&self, f: &B, tol: f64) -> Result<bool> {
        let (lhs, rhs) = self.evaluate(f)?;
        Ok(lhs > rhs + tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub condition: Condition,
    pub scope: Scope,
    pub status: Status,
    pub witness: Option<Witness>,
    /// Random trials executed (the failing one included).
    pub trials: usize,
    /// Grid nodes per axis scanned before the random trials.
    pub grid: usize,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn label(&self) -> String {
        match (&self.status, &self.witness) {
            (Status::Fail, Some(w)) => {
                format!("violation {:.3e} at {:?}, lambda {}", w.violation(), w.points, w.lambda)
            }
            _ => format!(
                "no violation found ({} trials, {}x{} grid)",
                self.trials, self.grid, self.grid
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub trials: usize,
    pub seed: u64,
    pub grid: usize,
    pub tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            grid: DEFAULT_GRID,
            tol: VIOLATION_TOL,
        }
    }
}

impl CheckOptions {
    fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_TRIALS} trials, got {}",
                self.trials
            )));
        }
        if self.grid < 3 {
            return Err(Error::InvalidArgument(format!("grid must be >= 3, got {}", self.grid)));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid tolerance {}", self.tol)));
        }
        Ok(())
    }
}

/// Endpoints and mixing weight of a sampled segment.
type Segment = ((f64, f64), (f64, f64), f64);

/// Largest violation seen so far, ties broken by a secondary key (smaller wins).
struct Best {
    violation: f64,
    key: (f64, f64),
    candidate: Option<Segment>,
}

impl Best {
    fn new() -> Self {
        Best {
            violation: f64::NEG_INFINITY,
            key: (f64::INFINITY, f64::INFINITY),
            candidate: None,
        }
    }

    fn offer(&mut self, violation: f64, key: (f64, f64), p: (f64, f64), q: (f64, f64), lambda: f64) {
        let scale = 1e-12 * violation.abs().max(1.0);
        let better =
            violation > self.violation + scale || ((violation - self.violation).abs() <= scale && key < self.key);
        if better {
            self.violation = violation;
            self.key = key;
            self.candidate = Some((p, q, lambda));
        }
    }
}

struct Grid {
    n: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    values: Vec<f64>,
}

impl Grid {
    fn sample<B: Bivariate + ?Sized>(f: &B, r: &Rect, n: usize) -> Result<Self> {
        let xs: Vec<f64> = (0..n).map(|i| grid_point(r.a(), r.b(), i, n)).collect();
        let ys: Vec<f64> = (0..n).map(|j| grid_point(r.c(), r.d(), j, n)).collect();
        let mut values = Vec::with_capacity(n * n);
        for &x in &xs {
            for &y in &ys {
                values.push(f.value(x, y)?);
            }
        }
        Ok(Grid { n, xs, ys, values })
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Values of the partial map in `axis` with the other coordinate frozen at
    /// node `k`: `(values, moving coordinates, frozen coordinate)`.
    fn line(&self, axis: Var, k: usize) -> (Vec<f64>, &[f64], f64) {
        let n = self.n;
        match axis {
            // partial map in x, y frozen
            Var::X => ((0..n).map(|i| self.at(i, k)).collect(), &self.xs, self.ys[k]),
            Var::Y => ((0..n).map(|j| self.at(k, j)).collect(), &self.ys, self.xs[k]),
        }
    }
}

fn on_axis(axis: Var, moving: f64, frozen: f64) -> (f64, f64) {
    match axis {
        Var::X => (moving, frozen),
        Var::Y => (frozen, moving),
    }
}

fn finish<B: Bivariate + ?Sized>(
    f: &B,
    condition: Condition,
    scope: Scope,
    opts: &CheckOptions,
    best: Best,
    mut random: impl FnMut(&mut ChaCha8Rng) -> Result<Option<Witness>>,
) -> Result<Verdict> {
    let fail = |witness: Witness, trials: usize| Verdict {
        condition,
        scope,
        status: Status::Fail,
        witness: Some(witness),
        trials,
        grid: opts.grid,
    };
    if best.violation > opts.tol {
        if let Some((p, q, lambda)) = best.candidate {
            let w = Witness::build(f, condition, p, q, lambda)?;
            if w.violation() > opts.tol {
                return Ok(fail(w, 0));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for trial in 1..=opts.trials {
        if let Some(w) = random(&mut rng)? {
            if w.violation() > opts.tol {
                return Ok(fail(w, trial));
            }
        }
    }
    Ok(Verdict {
        condition,
        scope,
        status: Status::Pass,
        witness: None,
        trials: opts.trials,
        grid: opts.grid,
    })
}

fn center_distance(r: &Rect, x: f64, y: f64) -> f64 {
    ((x - r.mid_x()) / r.width()).abs() + ((y - r.mid_y()) / r.height()).abs()
}

/// Joint quasi-convexity: `f(λp + (1-λ)q) <= max(f(p), f(q))` for all
/// `p, q` in `r`.
pub fn check_quasiconvex_joint<B: Bivariate + ?Sized>(f: &B, r: &Rect, opts: &CheckOptions) -> Result<Verdict> {
    opts.validate()?;
    let g = Grid::sample(f, r, opts.grid)?;
    let n = g.n as isize;
    let mut best = Best::new();
    // every pair of grid nodes whose midpoint is also a node
    for mi in 0..n {
        for mj in 0..n {
            let fm = g.at(mi as usize, mj as usize);
            let reach_i = mi.min(n - 1 - mi);
            let reach_j = mj.min(n - 1 - mj);
            let centre = center_distance(r, g.xs[mi as usize], g.ys[mj as usize]);
            for di in 0..=reach_i {
                for dj in -reach_j..=reach_j {
                    if di == 0 && dj <= 0 {
                        continue;
                    }
                    let (pi, pj) = ((mi - di) as usize, (mj - dj) as usize);
                    let (qi, qj) = ((mi + di) as usize, (mj + dj) as usize);
                    let violation = fm - g.at(pi, pj).max(g.at(qi, qj));
                    if violation > best.violation - 1e-12 * violation.abs().max(1.0) {
                        let key = (centre, (di * di + dj * dj) as f64);
                        best.offer(violation, key, (g.xs[pi], g.ys[pj]), (g.xs[qi], g.ys[qj]), 0.5);
                    }
                }
            }
        }
    }
    finish(f, Condition::QuasiConvex, Scope::Joint, opts, best, |rng| {
        let p = (rng.gen_range(r.a()..=r.b()), rng.gen_range(r.c()..=r.d()));
        let q = (rng.gen_range(r.a()..=r.b()), rng.gen_range(r.c()..=r.d()));
        let lambda = rng.gen_range(0.0..=1.0);
        Witness::build(f, Condition::QuasiConvex, p, q, lambda).map(Some)
    })
}

fn random_partial_segment(rng: &mut ChaCha8Rng, r: &Rect, axis: Var) -> ((f64, f64), (f64, f64), f64) {
    let (lo, hi, flo, fhi) = match axis {
        Var::X => (r.a(), r.b(), r.c(), r.d()),
        Var::Y => (r.c(), r.d(), r.a(), r.b()),
    };
    let frozen = rng.gen_range(flo..=fhi);
    let u = rng.gen_range(lo..=hi);
    let v = rng.gen_range(lo..=hi);
    let lambda = rng.gen_range(0.0..=1.0);
    (on_axis(axis, u, frozen), on_axis(axis, v, frozen), lambda)
}

fn coords_check<B: Bivariate + ?Sized>(f: &B, r: &Rect, opts: &CheckOptions, condition: Condition) -> Result<Verdict> {
    opts.validate()?;
    let g = Grid::sample(f, r, opts.grid)?;
    let n = g.n;
    let mut best = Best::new();
    for axis in [Var::X, Var::Y] {
        for k in 0..n {
            let (vals, moving, frozen) = g.line(axis, k);
            let frozen_key = match axis {
                Var::X => ((frozen - r.mid_y()) / r.height()).abs(),
                Var::Y => ((frozen - r.mid_x()) / r.width()).abs(),
            };
            match condition {
                Condition::QuasiConvex => {
                    // g_m exceeds max(g_i, g_k) for some i < m < k iff it exceeds
                    // both the prefix minimum and the suffix minimum
                    let mut suffix_min = vec![(f64::INFINITY, n); n + 1];
                    for idx in (0..n).rev() {
                        let next = suffix_min[idx + 1];
                        suffix_min[idx] = if vals[idx] <= next.0 { (vals[idx], idx) } else { next };
                    }
                    let mut prefix = (vals[0], 0usize);
                    for m in 1..n - 1 {
                        let right = suffix_min[m + 1];
                        let violation = vals[m] - prefix.0.max(right.0);
                        let (i, kk) = (prefix.1, right.1);
                        let lambda = (moving[kk] - moving[m]) / (moving[kk] - moving[i]);
                        let key = (frozen_key, ((m as f64) / (n - 1) as f64 - 0.5).abs());
                        best.offer(
                            violation,
                            key,
                            on_axis(axis, moving[i], frozen),
                            on_axis(axis, moving[kk], frozen),
                            lambda,
                        );
                        if vals[m] < prefix.0 {
                            prefix = (vals[m], m);
                        }
                    }
                }
                Condition::Convex => {
                    for i in 0..n {
                        for kk in i + 2..n {
                            let span = moving[kk] - moving[i];
                            for m in i + 1..kk {
                                let lambda = (moving[kk] - moving[m]) / span;
                                let chord = lambda * vals[i] + (1.0 - lambda) * vals[kk];
                                let violation = vals[m] - chord;
                                if violation > best.violation - 1e-12 * violation.abs().max(1.0) {
                                    let key = (frozen_key, ((kk - i) as f64).recip());
                                    best.offer(
                                        violation,
                                        key,
                                        on_axis(axis, moving[i], frozen),
                                        on_axis(axis, moving[kk], frozen),
                                        lambda,
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut counter = 0usize;
    finish(f, condition, Scope::Coordinates, opts, best, |rng| {
        let axis = if counter.is_multiple_of(2) { Var::X } else { Var::Y };
        counter += 1;
        let (p, q, lambda) = random_partial_segment(rng, r, axis);
        Witness::build(f, condition, p, q, lambda).map(Some)
    })
}

/// Quasi-convexity of every partial map `u -> f(u, y)` and `v -> f(x, v)`.
pub fn check_quasiconvex_coords<B: Bivariate + ?Sized>(f: &B, r: &Rect, opts: &CheckOptions) -> Result<Verdict> {
    coords_check(f, r, opts, Condition::QuasiConvex)
}

/// Convexity of every partial map (convexity on the co-ordinates).
pub fn check_convex_coords<B: Bivariate + ?Sized>(f: &B, r: &Rect, opts: &CheckOptions) -> Result<Verdict> {
    coords_check(f, r, opts, Condition::Convex)
}
