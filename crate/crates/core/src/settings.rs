use serde::{Deserialize, Serialize};

use crate::convexity::CheckOptions;
use crate::quad::QuadOptions;

/// Margin separating a verified bound from a violated one.
pub const DEFAULT_TOL_MARGIN: f64 = 1e-7;

/// Numerical knobs shared by the inequality and mapping checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub quad: QuadOptions,
    pub check: CheckOptions,
    pub tol_margin: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            quad: QuadOptions::default(),
            check: CheckOptions::default(),
            tol_margin: DEFAULT_TOL_MARGIN,
        }
    }
}
