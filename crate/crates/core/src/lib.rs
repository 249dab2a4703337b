//! Numerical workbench for Hadamard-type inequalities of functions on
//! rectangles `[a, b] x [c, d]`.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`]: parse, evaluate and differentiate expressions in `x`, `y`;
//! * [`quad`]: Gauss-Legendre tensor-product quadrature with error estimates;
//! * [`calculus`]: mixed partials, corner maxima, Lipschitz estimates;
//! * [`convexity`]: sampling-based (quasi-)convexity falsification;
//! * [`inequality`]: trapezoid-type gap, its integral identity, the bounds and
//!   the five-term chain for co-ordinate convex functions;
//! * [`mappings`]: the contraction mappings `H` and `G` and their properties;
//! * [`harness`]: builtin corpus, suite runner, configuration and reports.

pub mod calculus;
pub mod convexity;
mod error;
pub mod expr;
pub mod harness;
pub mod inequality;
pub mod mappings;
pub mod quad;
mod settings;

pub use error::{Error, Result};
pub use expr::{parse, Expr, Var};
pub use quad::{QuadOptions, QuadResult, Rect};
pub use settings::{Settings, DEFAULT_TOL_MARGIN};
