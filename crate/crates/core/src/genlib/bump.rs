//! Smooth transition bumps used to assemble Fourier-domain generators.
//!
//! Everything here is built from the classical C^∞ cutoff
//! `sigma(x) = exp(-1/x)` for `x > 0` (zero otherwise).  The derived
//! transition `bump_g` rises smoothly from 0 to 1 on `[0, 1]` and satisfies
//! the exact complementarity identity
//!
//! ```text
//! bump_g(x)^2 + bump_g(1 - x)^2 = 1
//! ```
//!
//! which is what makes shifted products of `bump_g` tile the line with unit
//! fiber mass.  The windows `g0`, `g1` and the dyadic levels `h_level` are
//! the building blocks of the sparse series generators in
//! [`super::series`].

use std::f64::consts::{FRAC_PI_2, SQRT_2};

/// `exp(-1/x)` for positive `x`, zero for `x <= 0`.  C^∞ on all of ℝ.
#[inline]
pub fn sigma(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step `sigma(x) / (sigma(x) + sigma(1 - x))`: 0 for `x <= 0`,
/// 1 for `x >= 1`, strictly increasing in between, and satisfying
/// `smooth_step(x) + smooth_step(1 - x) = 1` exactly.
#[inline]
pub fn smooth_step(x: f64) -> f64 {
    let a = sigma(x);
    let b = sigma(1.0 - x);
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        1.0
    } else {
        a / (a + b)
    }
}

/// Smooth transition `sin(pi/2 * smooth_step(x))`: 0 for `x <= 0`, 1 for
/// `x >= 1`, with `bump_g(x)^2 + bump_g(1 - x)^2 = 1` for every `x`.
#[inline]
pub fn bump_g(x: f64) -> f64 {
    (FRAC_PI_2 * smooth_step(x)).sin()
}

/// Symmetric window `bump_g(x + 1) * bump_g(-x + 1)`, supported on
/// `[-1, 1]`, identically 1 at 0, even.
#[inline]
pub fn g0(x: f64) -> f64 {
    bump_g(x + 1.0) * bump_g(1.0 - x)
}

/// Asymmetric window `bump_g(x + 1) * bump_g(-2x + 1)`, supported on
/// `[-1, 1/2]`, equal to 1 only at `x = 0`.
#[inline]
pub fn g1(x: f64) -> f64 {
    bump_g(x + 1.0) * bump_g(1.0 - 2.0 * x)
}

/// Dyadic level window.
///
/// * `level == 0`: `g0(4x)`, supported on `[-1/4, 1/4]`, peak 1 at 0.
/// * `level == j >= 1`: `g1(2^(j+1) x - 2^j + 1)`, supported on
///   `[1/2 - 2^-j, 1/2 - 2^-(j+2)]`, peak 1 exactly at `1/2 - 2^-(j+1)`.
///
/// Consecutive levels overlap so that `h_level(j, x)^2 + h_level(j+1, x)^2`
/// sums to 1 across the shared strip: the rising edge of level `j + 1` is
/// the complement of the falling edge of level `j`.
#[inline]
pub fn h_level(level: u32, x: f64) -> f64 {
    if level == 0 {
        g0(4.0 * x)
    } else {
        let scale = exp2_u32(level + 1);
        g1(scale * x - scale / 2.0 + 1.0)
    }
}

/// Support interval `[lo, hi]` of `h_level(level, ·)`.
#[inline]
pub fn h_support(level: u32) -> (f64, f64) {
    if level == 0 {
        (-0.25, 0.25)
    } else {
        let p = exp2_u32(level); // 2^level
        (0.5 - 1.0 / p, 0.5 - 0.25 / p)
    }
}

/// Point where `h_level(level, ·)` attains its peak value 1.
#[inline]
pub fn h_peak(level: u32) -> f64 {
    if level == 0 {
        0.0
    } else {
        0.5 - 0.5 / exp2_u32(level)
    }
}

/// `2^k` as f64 (exact for every k in range).
#[inline]
pub fn exp2_u32(k: u32) -> f64 {
    (k as f64).exp2()
}

/// `sqrt(2)/2`, the value of `bump_g` at the midpoint `x = 1/2`.
pub const BUMP_G_MIDPOINT: f64 = SQRT_2 / 2.0;
