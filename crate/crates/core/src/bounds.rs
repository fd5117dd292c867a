//! Closed-form curvature bounds on the exponential map.
//!
//! All bounds are stated for a manifold of `(δ, Δ, Λ)`-bounded geometry
//! ([`CurvatureProfile`]): sectional curvature in `[δ, Δ]`, a bound `Λ` on the
//! covariant derivative of the curvature tensor, and a positive injectivity
//! radius. For a unit vector `v` and a radius `r`:
//!
//! * first order: `min{1, sn_Δ(r)/r} ≤ ‖(d exp_p)_{rv}‖ ≤ max{1, sn_δ(r)/r}`;
//! * radial part of the Hessian on normal `w`: between `1/r − sn_{4δ}(r)/r²`
//!   and `1/r − sn_{4Δ}(r)/r²`;
//! * normal part: `ρ(r)`, valid for `r < π_{(Δ+δ)/2}`;
//! * full Hessian: a single bilinear bound valid for `r < π_{(Δ+δ)/2}`.
//!
//! Radii are enforced: asking for a bound outside its radius is a
//! [`Error::Domain`], never a clamped value. `r = 0` is rejected as well; the
//! limits there are 1 for the first-order bounds and 0 for the second-order ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trig::{pi_kappa, sn, zeta1, zeta2};

/// Curvature data `(δ, Δ, Λ)` plus a lower bound on the injectivity radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    /// Lower sectional-curvature bound `δ`.
    pub sec_lower: f64,
    /// Upper sectional-curvature bound `Δ`.
    pub sec_upper: f64,
    /// Bound `Λ ≥ 0` on the covariant derivative of the curvature tensor.
    pub lambda: f64,
    /// Lower bound on the injectivity radius; `+∞` for Hadamard manifolds.
    /// Serialized as `null` when infinite.
    #[serde(with = "inf_as_null")]
    pub inj_lower: f64,
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_some(x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl CurvatureProfile {
    pub const EUCLIDEAN: Self = Self::raw(0.0, 0.0, 0.0, f64::INFINITY);
    pub const UNIT_SPHERE: Self = Self::raw(1.0, 1.0, 0.0, std::f64::consts::PI);
    pub const HYPERBOLIC: Self = Self::raw(-1.0, -1.0, 0.0, f64::INFINITY);
    /// `SO(n)`, `n > 3`, with `⟨X, Y⟩ = tr(XᵀY)`: `sec(X,Y) = ¼‖[X,Y]‖² ≤ ¼`.
    pub const SPECIAL_ORTHOGONAL: Self = Self::raw(0.0, 0.25, 0.0, SQRT2_PI);
    /// `SO(3)` with the Frobenius metric: `‖[X,Y]‖ ≤ ‖X‖‖Y‖/√2` gives `sec ≤ 1/8`.
    pub const SPECIAL_ORTHOGONAL_3: Self = Self::raw(0.0, 0.125, 0.0, SQRT2_PI);
    /// Real Grassmannian with the canonical metric: `0 ≤ sec ≤ 2`, `inj = π/2`.
    pub const GRASSMANNIAN: Self = Self::raw(0.0, 2.0, 0.0, std::f64::consts::FRAC_PI_2);

    const fn raw(sec_lower: f64, sec_upper: f64, lambda: f64, inj_lower: f64) -> Self {
        Self {
            sec_lower,
            sec_upper,
            lambda,
            inj_lower,
        }
    }

    pub fn new(sec_lower: f64, sec_upper: f64, lambda: f64, inj_lower: f64) -> Result<Self> {
        let p = Self::raw(sec_lower, sec_upper, lambda, inj_lower);
        p.validate()?;
        Ok(p)
    }

    /// Profile of a space of constant curvature `κ` (`∇R = 0`).
    pub fn constant(kappa: f64) -> Self {
        Self::raw(kappa, kappa, 0.0, pi_kappa(kappa))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.sec_lower.is_finite() || !self.sec_upper.is_finite() || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite curvature profile {self:?}")));
        }
        if self.sec_lower > self.sec_upper {
            return Err(Error::InvalidArgument(format!(
                "sec_lower {} exceeds sec_upper {}",
                self.sec_lower, self.sec_upper
            )));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidArgument(format!("lambda {} is negative", self.lambda)));
        }
        if !(self.inj_lower > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "injectivity radius bound {} is not positive",
                self.inj_lower
            )));
        }
        Ok(())
    }

    /// `ε = (Δ − δ)/2`.
    pub fn eps(&self) -> f64 {
        0.5 * (self.sec_upper - self.sec_lower)
    }

    /// `μ = (Δ + δ)/2`.
    pub fn mu(&self) -> f64 {
        0.5 * (self.sec_upper + self.sec_lower)
    }

    /// `max{|Δ|, |δ|}`.
    pub fn kmax(&self) -> f64 {
        self.sec_upper.abs().max(self.sec_lower.abs())
    }

    /// `π_Δ`: radius of the first-order lower bound and of the radial bounds.
    pub fn radius_first(&self) -> f64 {
        pi_kappa(self.sec_upper)
    }

    /// `π_{(Δ+δ)/2}`: radius of the normal and full second-order bounds.
    pub fn radius_second(&self) -> f64 {
        pi_kappa(self.mu())
    }
}

const SQRT2_PI: f64 = std::f64::consts::SQRT_2 * std::f64::consts::PI;

/// Every bound evaluated at one radius.
///
/// Fields whose radius of validity is `π_Δ` are `None` when `π_Δ ≤ r <
/// π_{(Δ+δ)/2}`. The intermediate `σ` of the tighter full bound is kept in
/// `radial_envelope`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub r: f64,
    pub dexp_lo: Option<f64>,
    pub dexp_hi: f64,
    pub hess_radial_lo: Option<f64>,
    pub hess_radial_hi: Option<f64>,
    pub hess_normal: f64,
    pub hess_full: f64,
    pub radial_envelope: Option<f64>,
    pub hess_full_tight: Option<f64>,
    pub radius_first: f64,
    pub radius_second: f64,
}

/// Weak-convexity constant of the pullback `f ∘ exp_p` on a ball of radius `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakConvexityReport {
    pub alpha: f64,
    pub r: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha_hat: f64,
}

fn check_radius(what: &'static str, r: f64, limit: f64, inclusive: bool) -> Result<()> {
    let ok = r > 0.0 && r.is_finite() && if inclusive { r <= limit } else { r < limit };
    if ok {
        Ok(())
    } else {
        let close = if inclusive { "]" } else { ")" };
        Err(Error::domain(what, r, format!("(0, {limit}{close}")))
    }
}

/// `(min{1, sn_Δ(r)/r}, max{1, sn_δ(r)/r})`. Requires `0 < r ≤ π_Δ`.
pub fn first_order_bounds(prof: &CurvatureProfile, r: f64) -> Result<(f64, f64)> {
    check_radius("first_order_bounds", r, prof.radius_first(), true)?;
    Ok((first_order_lower(prof, r), first_order_upper(prof, r)))
}

fn first_order_lower(prof: &CurvatureProfile, r: f64) -> f64 {
    f64::min(1.0, sn(prof.sec_upper, r) / r)
}

/// `max{1, sn_δ(r)/r}`; this bound holds up to the conjugate radius, so only
/// `r > 0` is required.
pub fn first_order_upper(prof: &CurvatureProfile, r: f64) -> f64 {
    f64::max(1.0, sn(prof.sec_lower, r) / r)
}

/// Bounds on `⟨(∇d exp_p)_{rv}(w, w), γ̇(r)⟩` for unit `w ⟂ v`:
/// `(1/r − sn_{4δ}(r)/r², 1/r − sn_{4Δ}(r)/r²)`. Requires `0 < r < π_Δ`.
pub fn hess_radial_bounds(prof: &CurvatureProfile, r: f64) -> Result<(f64, f64)> {
    check_radius("hess_radial_bounds", r, prof.radius_first(), false)?;
    let r2 = r * r;
    Ok((
        (r - sn(4.0 * prof.sec_lower, r)) / r2,
        (r - sn(4.0 * prof.sec_upper, r)) / r2,
    ))
}

/// `ρ(r) = 8/(9r²) sn_δ(r/2)² (3Λ sn_δ(r/2)² + 2(Δ−δ) sn_δ(r))`, the bound on
/// the normal part of the Hessian. Requires `0 < r < π_{(Δ+δ)/2}`.
pub fn hess_normal_bound(prof: &CurvatureProfile, r: f64) -> Result<f64> {
    check_radius("hess_normal_bound", r, prof.radius_second(), false)?;
    let d = prof.sec_lower;
    let half = sn(d, 0.5 * r).powi(2);
    let spread = prof.sec_upper - prof.sec_lower;
    Ok(8.0 / (9.0 * r * r) * half * (3.0 * prof.lambda * half + 2.0 * spread * sn(d, r)))
}

/// `‖(∇d exp_p)_{rv}(w₁, w₂)‖ ≤ bound · ‖w₁‖‖w₂‖` with
/// `bound = 8/(3r²) sn_δ(r/2)² (Λ sn_δ(r/2)² + 2 max{|Δ|,|δ|} sn_δ(r))`.
pub fn hess_full_bound(prof: &CurvatureProfile, r: f64) -> Result<f64> {
    check_radius("hess_full_bound", r, prof.radius_second(), false)?;
    Ok(full_numerator(prof, r) / (r * r))
}

/// `8/3 sn_δ(r/2)² (Λ sn_δ(r/2)² + 2 max{|Δ|,|δ|} sn_δ(r))`, shared by the full
/// Hessian bound (divided by `r²`) and the constant `C₂`.
fn full_numerator(prof: &CurvatureProfile, r: f64) -> f64 {
    let d = prof.sec_lower;
    let half = sn(d, 0.5 * r).powi(2);
    8.0 / 3.0 * half * (prof.lambda * half + 2.0 * prof.kmax() * sn(d, r))
}

/// `σ = max{|r − sn_{4δ}(r)|, |r − sn_{4Δ}(r)|}/r²`, the envelope of the
/// radial bounds.
pub fn radial_envelope(prof: &CurvatureProfile, r: f64) -> Result<f64> {
    check_radius("radial_envelope", r, prof.radius_first(), false)?;
    let a = (r - sn(4.0 * prof.sec_lower, r)).abs();
    let b = (r - sn(4.0 * prof.sec_upper, r)).abs();
    Ok(a.max(b) / (r * r))
}

/// `√(σ² + ρ²)`. Requires `0 < r < π_Δ`.
pub fn hess_full_tight(prof: &CurvatureProfile, r: f64) -> Result<f64> {
    let sigma = radial_envelope(prof, r)?;
    let rho = hess_normal_bound(prof, r)?;
    Ok(sigma.hypot(rho))
}

/// `α̂_r = α (C₁ + C₂)` with `C₁ = max{1, sn_δ(r)²/r²}` and
/// `C₂ = r² · hess_full_bound(r)`.
pub fn weak_convexity_constant(alpha: f64, prof: &CurvatureProfile, r: f64) -> Result<WeakConvexityReport> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain("weak_convexity_constant alpha", alpha, "(0, ∞)"));
    }
    check_radius("weak_convexity_constant", r, prof.radius_second(), false)?;
    let c1 = f64::max(1.0, (sn(prof.sec_lower, r) / r).powi(2));
    let c2 = full_numerator(prof, r);
    Ok(WeakConvexityReport {
        alpha,
        r,
        c1,
        c2,
        alpha_hat: alpha * (c1 + c2),
    })
}

/// `α̂_s` extended to `s = 0` by its limit `α`.
pub fn alpha_hat_at(alpha: f64, prof: &CurvatureProfile, s: f64) -> Result<f64> {
    if s == 0.0 {
        if !(alpha > 0.0) {
            return Err(Error::domain("alpha_hat_at alpha", alpha, "(0, ∞)"));
        }
        return Ok(alpha);
    }
    Ok(weak_convexity_constant(alpha, prof, s)?.alpha_hat)
}

/// Right-hand sides of the law of cosines in a ball `B_p(R)`, `R ≤ π_Δ`:
///
/// ```text
/// upper = ζ_{1,δ}(R) d(x,y)² + d(x,p)² − 2 d(x,y) d(x,p) cos α
/// lower = ζ_{2,Δ}(R) d(x,y)² + d(x,p)² − 2 d(x,y) d(x,p) cos α
/// ```
///
/// At `R = π_Δ` exactly `ζ_{2,Δ}` diverges to `−∞` and so does `lower`.
pub fn law_of_cosines_rhs(
    prof: &CurvatureProfile,
    radius: f64,
    dxy: f64,
    dxp: f64,
    cos_alpha: f64,
) -> Result<(f64, f64)> {
    let limit = prof.radius_first();
    check_radius("law_of_cosines radius", radius, limit, true)?;
    // x and y lie in B_p(R), so d(x,y) ≤ 2R by the triangle inequality.
    for (what, d, cap) in [
        ("law_of_cosines d(x,y)", dxy, 2.0 * radius),
        ("law_of_cosines d(x,p)", dxp, radius),
    ] {
        if !(0.0..=cap).contains(&d) {
            return Err(Error::domain(what, d, format!("[0, {cap}]")));
        }
    }
    if !(-1.0..=1.0).contains(&cos_alpha) {
        return Err(Error::domain("law_of_cosines cos", cos_alpha, "[-1, 1]"));
    }
    let common = dxp * dxp - 2.0 * dxy * dxp * cos_alpha;
    let z1 = zeta1(prof.sec_lower, radius)?;
    let z2 = if radius < limit {
        zeta2(prof.sec_upper, radius)?
    } else {
        f64::NEG_INFINITY
    };
    let lower = if dxy == 0.0 { common } else { z2 * dxy * dxy + common };
    Ok((z1 * dxy * dxy + common, lower))
}

/// All bounds at radius `r`, `0 < r < π_{(Δ+δ)/2}`.
pub fn certify(prof: &CurvatureProfile, r: f64) -> Result<BoundCertificate> {
    prof.validate()?;
    let radius_first = prof.radius_first();
    let radius_second = prof.radius_second();
    check_radius("certify", r, radius_second, false)?;
    let inside_first = r < radius_first;
    let radial = inside_first.then(|| hess_radial_bounds(prof, r)).transpose()?;
    let envelope = inside_first.then(|| radial_envelope(prof, r)).transpose()?;
    Ok(BoundCertificate {
        r,
        dexp_lo: (r <= radius_first).then(|| first_order_lower(prof, r)),
        dexp_hi: first_order_upper(prof, r),
        hess_radial_lo: radial.map(|b| b.0),
        hess_radial_hi: radial.map(|b| b.1),
        hess_normal: hess_normal_bound(prof, r)?,
        hess_full: hess_full_bound(prof, r)?,
        radial_envelope: envelope,
        hess_full_tight: inside_first.then(|| hess_full_tight(prof, r)).transpose()?,
        radius_first,
        radius_second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    const FLAT: CurvatureProfile = CurvatureProfile::EUCLIDEAN;
    const SPHERE: CurvatureProfile = CurvatureProfile::UNIT_SPHERE;
    const HYP: CurvatureProfile = CurvatureProfile::HYPERBOLIC;
    const SO: CurvatureProfile = CurvatureProfile::SPECIAL_ORTHOGONAL;
    const GR: CurvatureProfile = CurvatureProfile::GRASSMANNIAN;

    fn prof(d: f64, big: f64, l: f64) -> CurvatureProfile {
        CurvatureProfile::new(d, big, l, 1.0).unwrap()
    }

    #[test]
    fn profile_validation() {
        assert!(CurvatureProfile::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(CurvatureProfile::new(0.0, 1.0, -1.0, 1.0).is_err());
        assert!(CurvatureProfile::new(0.0, 1.0, 0.0, 0.0).is_err());
        let p = CurvatureProfile::new(-1.0, 3.0, 0.5, 2.0).unwrap();
        assert_eq!(p.eps(), 2.0);
        assert_eq!(p.mu(), 1.0);
        assert_eq!(p.kmax(), 3.0);
    }

    #[test]
    fn profile_json_uses_null_for_infinite_radius() {
        let s = serde_json::to_string(&HYP).unwrap();
        assert!(s.contains("\"inj_lower\":null"), "{s}");
        let back: CurvatureProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(back, HYP);
    }

    #[test]
    fn first_order_examples() {
        assert_eq!(first_order_bounds(&FLAT, 1.0).unwrap(), (1.0, 1.0));
        let (lo, hi) = first_order_bounds(&SPHERE, FRAC_PI_2).unwrap();
        assert_relative_eq!(lo, 2.0 / PI, max_relative = 1e-15);
        assert_eq!(hi, 1.0);
        let (lo, hi) = first_order_bounds(&HYP, 1.0).unwrap();
        assert_eq!(lo, 1.0);
        assert_relative_eq!(hi, 1.1752011936438014, max_relative = 1e-14);
        assert!(first_order_bounds(&SPHERE, 3.5).is_err());
        assert!(first_order_bounds(&SPHERE, 0.0).is_err());
        assert!(first_order_bounds(&SPHERE, PI).is_ok());
    }

    #[test]
    fn radial_examples() {
        assert_eq!(hess_radial_bounds(&FLAT, 2.0).unwrap(), (0.0, 0.0));
        let (lo, hi) = hess_radial_bounds(&SPHERE, 1.0).unwrap();
        // ODE oracle: ẍ = 4κ sn_{4κ}(t), x(0) = ẋ(0) = 0 has x(t) = t − sn_{4κ}(t).
        let oracle = 1.0 - 2f64.sin() / 2.0;
        assert_relative_eq!(lo, oracle, max_relative = 1e-14);
        assert_relative_eq!(hi, oracle, max_relative = 1e-14);
        assert_relative_eq!(oracle, 0.545_351_286_587_152, max_relative = 1e-12);

        let (lo, hi) = hess_radial_bounds(&prof(-1.0, 1.0, 0.0), 0.5).unwrap();
        assert_relative_eq!(lo, 2.0 - (0.5f64 * 2.0).sinh() / 2.0 / 0.25, max_relative = 1e-14);
        assert_relative_eq!(hi, 2.0 - (0.5f64 * 2.0).sin() / 2.0 / 0.25, max_relative = 1e-14);
        assert!(lo < 0.0 && hi > 0.0);
        assert!(hess_radial_bounds(&SPHERE, PI).is_err());
    }

    #[test]
    fn normal_examples() {
        for k in [-2.0, 0.0, 0.7] {
            assert_eq!(hess_normal_bound(&CurvatureProfile::constant(k), 1.0).unwrap(), 0.0);
        }
        assert_relative_eq!(hess_normal_bound(&SO, 2.0).unwrap(), 2.0 / 9.0, max_relative = 1e-14);
        assert_relative_eq!(hess_normal_bound(&GR, 1.0).unwrap(), 8.0 / 9.0, max_relative = 1e-14);
        // Radius π_{(Δ+δ)/2} = 2√2π for SO(n).
        assert!(hess_normal_bound(&SO, 8.88).is_ok());
        assert!(hess_normal_bound(&SO, 8.89).is_err());
    }

    #[test]
    fn full_examples() {
        assert_relative_eq!(hess_full_bound(&SO, 3.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(hess_full_bound(&GR, 1.0).unwrap(), 8.0 / 3.0, max_relative = 1e-14);
        assert_eq!(hess_full_bound(&FLAT, 1.0).unwrap(), 0.0);
        for r in [0.5, 1.0, 4.0, 8.0] {
            assert_relative_eq!(hess_full_bound(&SO, r).unwrap(), r / 3.0, max_relative = 1e-14);
            assert_relative_eq!(hess_normal_bound(&SO, r).unwrap(), r / 9.0, max_relative = 1e-14);
        }
        assert!(hess_full_bound(&GR, PI).is_err());
    }

    #[test]
    fn tight_examples() {
        assert_eq!(hess_full_tight(&FLAT, 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            hess_full_tight(&SPHERE, 1.0).unwrap(),
            1.0 - 2f64.sin() / 2.0,
            max_relative = 1e-14
        );
        // On SO(n) the tighter bound stays below 2r/9 for r < 2π.
        for i in 1..63 {
            let r = 0.1 * i as f64;
            assert!(hess_full_tight(&SO, r).unwrap() <= 2.0 * r / 9.0);
        }
        // For small r: σ ≈ r/6 and ρ = r/9, so √(σ²+ρ²) ≈ r √(1/36 + 1/81).
        let small = hess_full_tight(&SO, 0.1).unwrap();
        let leading = 0.1 * (1.0f64 / 36.0 + 1.0 / 81.0).sqrt();
        assert!((small - leading).abs() < 1e-4, "{small} vs {leading}");
        assert!(small <= 0.2 / 9.0);
    }

    #[test]
    fn weak_convexity_examples() {
        for r in [0.1, 1.0, 10.0] {
            let rep = weak_convexity_constant(3.0, &FLAT, r).unwrap();
            assert_eq!((rep.c1, rep.c2, rep.alpha_hat), (1.0, 0.0, 3.0));
        }
        let rep = weak_convexity_constant(1.0, &SO, 1.0).unwrap();
        assert_eq!(rep.c1, 1.0);
        assert_relative_eq!(rep.c2, 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(rep.alpha_hat, 4.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(rep.c2, 1.0 * hess_full_bound(&SO, 1.0).unwrap(), max_relative = 1e-14);
        let rep = weak_convexity_constant(1.0, &HYP, 1.0).unwrap();
        assert_relative_eq!(rep.c1, 1.1752011936438014f64.powi(2), max_relative = 1e-14);
        assert!(weak_convexity_constant(0.0, &SO, 1.0).is_err());
        assert!(weak_convexity_constant(1.0, &SPHERE, PI).is_err());
        assert_eq!(alpha_hat_at(2.0, &SPHERE, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn law_of_cosines_flat_is_euclidean() {
        let (u, l) = law_of_cosines_rhs(&FLAT, 10.0, 3.0, 4.0, 0.0).unwrap();
        assert_eq!((u, l), (25.0, 25.0));
        let (u, l) = law_of_cosines_rhs(&FLAT, 10.0, 3.0, 4.0, 0.5).unwrap();
        assert_eq!((u, l), (13.0, 13.0));
    }

    #[test]
    fn law_of_cosines_spherical_right_angle() {
        let d = FRAC_PI_4;
        let (u, l) = law_of_cosines_rhs(&SPHERE, FRAC_PI_2, d, d, 0.0).unwrap();
        // Spherical law of cosines with a right angle: cos c = cos a cos b.
        let truth = (d.cos() * d.cos()).acos().powi(2);
        let z2 = zeta2(1.0, FRAC_PI_2).unwrap();
        assert_relative_eq!(l, z2 * d * d + d * d, max_relative = 1e-14);
        assert!(l <= truth && truth <= u, "{l} {truth} {u}");
    }

    #[test]
    fn law_of_cosines_hyperbolic_degenerate() {
        let (u, _) = law_of_cosines_rhs(&HYP, 2.0, 0.8, 1.1, -1.0).unwrap();
        // Degenerate triangle with x between y and p: d(y,p) = dxy + dxp.
        assert!(u >= (0.8f64 + 1.1).powi(2));
    }

    #[test]
    fn law_of_cosines_domain() {
        assert!(law_of_cosines_rhs(&SPHERE, 4.0, 1.0, 1.0, 0.0).is_err());
        assert!(law_of_cosines_rhs(&SPHERE, 1.0, 2.5, 1.0, 0.0).is_err());
        assert!(law_of_cosines_rhs(&SPHERE, 1.0, 1.0, 1.5, 0.0).is_err());
        assert!(law_of_cosines_rhs(&SPHERE, 1.0, 0.5, 0.5, 1.5).is_err());
        let (_, l) = law_of_cosines_rhs(&SPHERE, PI, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(l, f64::NEG_INFINITY);
    }

    #[test]
    fn full_bound_vanishes_at_origin() {
        for p in [SO, GR, SPHERE, HYP, prof(-2.0, 3.0, 1.5)] {
            assert!(hess_full_bound(&p, 1e-4).unwrap() <= 1e-3);
        }
    }

    #[test]
    fn certificate_fields() {
        let c = certify(&SO, 7.0).unwrap();
        assert!(c.dexp_lo.is_none() && c.hess_radial_lo.is_none() && c.hess_full_tight.is_none());
        assert_relative_eq!(c.hess_full, 7.0 / 3.0, max_relative = 1e-14);
        let c = certify(&SPHERE, 1.0).unwrap();
        assert!(c.dexp_lo.unwrap() <= 1.0 && 1.0 <= c.dexp_hi);
        assert!(c.hess_normal >= 0.0 && c.hess_full >= 0.0);
        assert!(c.r < c.radius_second);
        assert!(certify(&SPHERE, PI).is_err());
    }

    #[test]
    fn envelope_can_shrink_when_widened_past_half_radius() {
        let narrow = CurvatureProfile::constant(0.749);
        let wide = prof(0.749 - 0.96, 0.749 + 0.96, 0.0);
        let r = 2.2;
        assert!(r > pi_kappa(4.0 * wide.sec_upper) && r < wide.radius_first());
        let x = radial_envelope(&narrow, r).unwrap();
        let y = radial_envelope(&wide, r).unwrap();
        let s = (4.0f64 * 0.749).sqrt();
        assert_relative_eq!(x, (r - (s * r).sin() / s).abs() / (r * r), max_relative = 1e-12);
        assert!(y < x - 0.02, "narrow {x} wide {y}");
    }

    proptest! {
        #[test]
        fn sandwich_is_ordered(d in -3.0f64..3.0, gap in 0.0f64..3.0, frac in 0.001f64..1.0) {
            let p = prof(d, d + gap, 0.0);
            let r = frac * p.radius_first().min(6.0);
            let (lo, hi) = first_order_bounds(&p, r).unwrap();
            prop_assert!(lo <= 1.0 && 1.0 <= hi);
        }

        #[test]
        fn tight_below_full_in_constant_curvature(k in -3.0f64..3.0, frac in 0.01f64..0.99) {
            let p = CurvatureProfile::constant(k);
            let r = frac * p.radius_first().min(4.0);
            // ρ = 0 here, so the comparison is between σ and the full bound.
            let tight = hess_full_tight(&p, r).unwrap();
            let full = hess_full_bound(&p, r).unwrap();
            prop_assume!(k <= 0.0 || r < 2.0 / k.sqrt());
            prop_assert!(tight <= full * (1.0 + 1e-12), "k={} r={} tight={} full={}", k, r, tight, full);
        }

        #[test]
        fn monotone_in_lambda_and_spread(
            d in -2.0f64..2.0, gap in 0.0f64..2.0, extra in 0.0f64..1.0,
            l in 0.0f64..2.0, dl in 0.0f64..2.0, frac in 0.01f64..0.99,
        ) {
            // Widening the curvature interval or increasing Λ never decreases a bound.
            let narrow = prof(d, d + gap, l);
            let wide = prof(d - extra, d + gap + extra, l + dl);
            let r = frac * wide.radius_second().min(5.0);
            let a = certify(&narrow, r).unwrap();
            let b = certify(&wide, r).unwrap();
            let tol = 1e-12;
            prop_assert!(b.dexp_hi >= a.dexp_hi - tol);
            if let (Some(x), Some(y)) = (a.dexp_lo, b.dexp_lo) { prop_assert!(y <= x + tol); }
            prop_assert!(b.hess_normal >= a.hess_normal - tol);
            prop_assert!(b.hess_full >= a.hess_full - tol);
            // σ only looks at the endpoint curvatures, so it is monotone only
            // while sn_{4κ}(r) is monotone in κ, i.e. r < π_{4Δ}.
            if r < pi_kappa(4.0 * wide.sec_upper) {
                if let (Some(x), Some(y)) = (a.radial_envelope, b.radial_envelope) { prop_assert!(y >= x - tol); }
                if let (Some(x), Some(y)) = (a.hess_full_tight, b.hess_full_tight) { prop_assert!(y >= x - tol); }
            }
        }

        #[test]
        fn law_of_cosines_upper_dominates(
            d in -2.0f64..2.0, gap in 0.0f64..2.0, frac in 0.01f64..1.0,
            a in 0.0f64..1.0, b in 0.0f64..1.0, c in -1.0f64..1.0,
        ) {
            let p = prof(d, d + gap, 0.0);
            let radius = frac * p.radius_first().min(5.0);
            let (u, l) = law_of_cosines_rhs(&p, radius, a * radius, b * radius, c).unwrap();
            prop_assert!(u >= l);
        }
    }
}
