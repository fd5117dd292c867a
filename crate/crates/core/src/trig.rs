//! Generalized trigonometric functions for a constant curvature `κ`.
//!
//! `sn_κ` solves `ẍ + κx = 0` with `x(0) = 0`, `ẋ(0) = 1`:
//!
//! ```text
//! sn_κ(t) = sin(√κ t)/√κ     κ > 0
//!           t                κ = 0
//!           sinh(√-κ t)/√-κ  κ < 0
//! ```
//!
//! `ct_κ = sn'_κ / sn_κ` solves the Riccati equation `ẋ + x² + κ = 0` on
//! `(0, π_κ)`, where `π_κ` is the first positive zero of `sn_κ`.
//!
//! For fixed `t`, `sn_κ(t)` is decreasing in `κ`. Every bound in
//! [`crate::bounds`] is built from these three functions.

use crate::error::{Error, Result};

/// Below this value of `|κ| t²` the Taylor expansion is used instead of the
/// closed forms, which keeps `sn` continuous across `κ = 0`.
const SERIES_THRESHOLD: f64 = 1e-8;

/// Generalized sine `sn_κ(t)`.
pub fn sn(kappa: f64, t: f64) -> f64 {
    let x = kappa * t * t;
    if x.abs() < SERIES_THRESHOLD {
        // t - κt³/6 + κ²t⁵/120
        return t * (1.0 - x / 6.0 + x * x / 120.0);
    }
    if kappa > 0.0 {
        let s = kappa.sqrt();
        (s * t).sin() / s
    } else {
        let s = (-kappa).sqrt();
        (s * t).sinh() / s
    }
}

/// Derivative of [`sn`] with respect to `t`.
pub fn sn_prime(kappa: f64, t: f64) -> f64 {
    let x = kappa * t * t;
    if x.abs() < SERIES_THRESHOLD {
        return 1.0 - x / 2.0 + x * x / 24.0;
    }
    if kappa > 0.0 {
        (kappa.sqrt() * t).cos()
    } else {
        ((-kappa).sqrt() * t).cosh()
    }
}

/// First positive zero of `sn_κ`: `π/√κ` for `κ > 0`, `+∞` otherwise.
pub fn pi_kappa(kappa: f64) -> f64 {
    if kappa > 0.0 {
        std::f64::consts::PI / kappa.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Generalized cotangent `ct_κ(t) = sn'_κ(t)/sn_κ(t)` on `(0, π_κ)`.
pub fn ct(kappa: f64, t: f64) -> Result<f64> {
    let limit = pi_kappa(kappa);
    if !(t > 0.0 && t < limit) {
        return Err(Error::domain("ct", t, format!("(0, {limit})")));
    }
    Ok(sn_prime(kappa, t) / sn(kappa, t))
}

/// `ζ_{1,κ}(r) = max{1, r ct_κ(r)}`, the upper Hessian bound of `½d(·,p)²`.
///
/// For `κ ≥ 0` this is identically 1 (where `ct` is defined, `r ct_κ(r) ≤ 1`),
/// so any `r > 0` is accepted.
pub fn zeta1(kappa: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain("zeta1", r, "(0, ∞)"));
    }
    if kappa >= 0.0 {
        return Ok(1.0);
    }
    Ok(f64::max(1.0, r * ct(kappa, r)?))
}

/// `ζ_{2,κ}(r) = min{1, r ct_κ(r)}`, the lower Hessian bound of `½d(·,p)²`.
pub fn zeta2(kappa: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain("zeta2", r, "(0, ∞)"));
    }
    if kappa <= 0.0 {
        return Ok(1.0);
    }
    Ok(f64::min(1.0, r * ct(kappa, r)?))
}
