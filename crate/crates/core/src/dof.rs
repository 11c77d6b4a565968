//! Degrees-of-freedom versus information accounting for five camera-knowledge
//! regimes.
//!
//! A body of p traced points over k frames supplies at most 2*k*p image
//! measurements. Each regime's unknown count is linear in p and k:
//!
//! | regime                     | degrees of freedom          |
//! |----------------------------|-----------------------------|
//! | orthogonal                 | -1 + 3p + 5(k-1)            |
//! | perspective, unknown+varying | -1 + 3p + 3 + 9(k-1)      |
//! | perspective, known         | -1 + 3p + 6(k-1)            |
//! | perspective, unknown fixed | -1 + 3p + 3 + 6(k-1)        |
//! | perspective, autofocus     | -1 + 3p + 1 + 7(k-1)        |
//!
//! The balance is necessary, not sufficient: with two frames and unknown
//! geometry, measurements beyond the seventh point are redundant, so the
//! verdict carries an advisory flag for the affected regimes.

use serde::{Deserialize, Serialize};

/// What is known about the relative position of focal point and image plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Orthogonal projection.
    Orthogonal,
    /// Perspective; camera geometry unknown and free to change every frame.
    PerspectiveUnknownVarying,
    /// Perspective; camera geometry fully known.
    PerspectiveKnown,
    /// Perspective; geometry unknown but identical across frames.
    PerspectiveUnknownFixed,
    /// Perspective; geometry known up to the plane-focal distance, which may
    /// change per frame (unsupervised autofocus).
    PerspectiveAutofocus,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::Orthogonal,
        Regime::PerspectiveUnknownVarying,
        Regime::PerspectiveKnown,
        Regime::PerspectiveUnknownFixed,
        Regime::PerspectiveAutofocus,
    ];

    /// (first-frame constant beyond -1 + 3p, per-extra-frame motion cost)
    fn coefficients(self) -> (i64, i64) {
        match self {
            Regime::Orthogonal => (0, 5),
            Regime::PerspectiveUnknownVarying => (3, 9),
            Regime::PerspectiveKnown => (0, 6),
            Regime::PerspectiveUnknownFixed => (3, 6),
            Regime::PerspectiveAutofocus => (1, 7),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Orthogonal => "orthogonal",
            Regime::PerspectiveUnknownVarying => "perspective-unknown-varying",
            Regime::PerspectiveKnown => "perspective-known",
            Regime::PerspectiveUnknownFixed => "perspective-unknown-fixed",
            Regime::PerspectiveAutofocus => "perspective-autofocus",
        }
    }
}

/// A (regime, points, frames) query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofScenario {
    pub regime: Regime,
    /// Traced points, >= 1.
    pub points: u32,
    /// Frames, >= 1.
    pub frames: u32,
}

/// Counting verdict for one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofVerdict {
    pub dof: i64,
    /// 2 * frames * points.
    pub info: i64,
    pub balanced: bool,
    pub margin: i64,
    /// Set where the balance is known to mislead: with k = 2 and unknown
    /// geometry (varying or fixed), points beyond the seventh only supply
    /// redundant information.
    pub redundancy_caveat: bool,
}

/// Unknown-parameter count for the scenario's regime.
pub fn degrees_of_freedom(s: DofScenario) -> i64 {
    let (extra, motion) = s.regime.coefficients();
    let (p, k) = (s.points as i64, s.frames as i64);
    -1 + 3 * p + extra + motion * (k - 1)
}

/// Full information balance for a scenario.
pub fn verdict(s: DofScenario) -> DofVerdict {
    let dof = degrees_of_freedom(s);
    let info = 2 * s.frames as i64 * s.points as i64;
    let margin = info - dof;
    let redundancy_caveat = s.frames == 2
        && matches!(
            s.regime,
            Regime::PerspectiveUnknownVarying | Regime::PerspectiveUnknownFixed
        );
    DofVerdict {
        dof,
        info,
        balanced: margin >= 0,
        margin,
        redundancy_caveat,
    }
}

/// Smallest count satisfying a balance threshold, or never.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Threshold {
    At(u32),
    Never,
}

/// Smallest p with a balanced verdict for the given frame count.
pub fn min_points(regime: Regime, frames: u32) -> Threshold {
    // info - dof = p(2k - 3) - (extra - 1 + motion(k-1)) is linear in p
    let k = frames as i64;
    let (extra, motion) = regime.coefficients();
    let slope = 2 * k - 3;
    let constant = extra - 1 + motion * (k - 1);
    if slope > 0 {
        let p = div_ceil(constant, slope).max(1);
        Threshold::At(p as u32)
    } else {
        // k = 1: balanced iff p <= -constant
        if constant <= -1 {
            Threshold::At(1)
        } else {
            Threshold::Never
        }
    }
}

/// Smallest k with a balanced verdict for the given point count.
pub fn min_frames(regime: Regime, points: u32) -> Threshold {
    let p = points as i64;
    let (extra, motion) = regime.coefficients();
    // info - dof = k(2p - motion) - (3p + extra - 1 - motion)
    let slope = 2 * p - motion;
    let constant = 3 * p + extra - 1 - motion;
    if slope > 0 {
        let k = div_ceil(constant, slope).max(1);
        Threshold::At(k as u32)
    } else if slope >= constant {
        // non-positive slope: only k = 1 can work
        Threshold::At(1)
    } else {
        Threshold::Never
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    if a <= 0 {
        // margin already non-negative at the smallest admissible count
        1
    } else {
        (a + b - 1) / b
    }
}
