//! Smooth cutoff profiles with prescribed plateaus and supports.
//!
//! Every profile is built from the smoothstep `S(t) = f(t) / (f(t) + f(1 - t))`
//! with `f(t) = exp(-1/t)` for `t > 0`. `S` is `C^inf`, vanishes for `t <= 0`,
//! equals one for `t >= 1`, and `S(t) + S(1 - t) = 1`.

use serde::{Deserialize, Serialize};

/// Version tag recorded in experiment outputs.
pub const PROFILE_VERSION: &str = "smoothstep-exp-v1";

fn f(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = f(t);
        a / (a + f(1.0 - t))
    }
}

/// Rises on `[a, b]`, equals one on `[b, c]`, falls on `[c, d]`.
pub fn window(t: f64, a: f64, b: f64, c: f64, d: f64) -> f64 {
    smoothstep((t - a) / (b - a)) * smoothstep((d - t) / (d - c))
}

/// Even bump: one for `|t| <= plateau`, zero for `|t| >= support`.
pub fn plateau_bump(t: f64, plateau: f64, support: f64) -> f64 {
    smoothstep((support - t.abs()) / (support - plateau))
}

/// The named one-dimensional profiles used by the test-function families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    /// Plateau `[-1/2, 1/2]`, support `[-1, 1]`.
    SlabPhi,
    /// Plateau `[1/2, 3/4]`, support `[1/4, 1]`.
    SlabPsi,
    /// Radial: plateau `|t| <= 1/20`, support `|t| <= 1/10`.
    Chi,
    /// Plateau `|t| <= eps`, support `|t| <= 2 eps`.
    Focus { eps: f64 },
    /// Plateau `[2/3, 3/2]`, support `[1/2, 2]`.
    AnisoPhi,
    /// Plateau `[0, 1]`, support `[0, 2]` (used on `t >= 0`).
    AnisoPsi,
    /// Plateau `[0, 1/2]`, zero on `[1, inf)` (used on `t >= 0`).
    LowPass,
}

impl Profile {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Profile::SlabPhi => plateau_bump(t, 0.5, 1.0),
            Profile::SlabPsi => window(t, 0.25, 0.5, 0.75, 1.0),
            Profile::Chi => plateau_bump(t, 0.05, 0.1),
            Profile::Focus { eps } => plateau_bump(t, eps, 2.0 * eps),
            Profile::AnisoPhi => window(t, 0.5, 2.0 / 3.0, 1.5, 2.0),
            Profile::AnisoPsi => smoothstep(2.0 - t),
            Profile::LowPass => plateau_bump(t, 0.5, 1.0),
        }
    }

    /// Closed plateau `[lo, hi]` on which the profile equals one.
    pub fn plateau(self) -> (f64, f64) {
        match self {
            Profile::SlabPhi => (-0.5, 0.5),
            Profile::SlabPsi => (0.5, 0.75),
            Profile::Chi => (-0.05, 0.05),
            Profile::Focus { eps } => (-eps, eps),
            Profile::AnisoPhi => (2.0 / 3.0, 1.5),
            Profile::AnisoPsi => (0.0, 1.0),
            Profile::LowPass => (0.0, 0.5),
        }
    }

    /// Closed interval outside of which the profile vanishes.
    pub fn support(self) -> (f64, f64) {
        match self {
            Profile::SlabPhi => (-1.0, 1.0),
            Profile::SlabPsi => (0.25, 1.0),
            Profile::Chi => (-0.1, 0.1),
            Profile::Focus { eps } => (-2.0 * eps, 2.0 * eps),
            Profile::AnisoPhi => (0.5, 2.0),
            Profile::AnisoPsi => (0.0, 2.0),
            Profile::LowPass => (0.0, 1.0),
        }
    }
}
