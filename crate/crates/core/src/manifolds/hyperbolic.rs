use super::*;
use crate::linalg::sinhc;

/// Hyperbolic space `H^d` as the upper sheet of `⟨x, x⟩ = −1` in Minkowski
/// space `R^{1,d}`, with `⟨x, y⟩ = −x₀y₀ + Σ xᵢyᵢ` (curvature −1).
#[derive(Clone, Debug)]
pub struct Hyperbolic {
    dim: usize,
}

/// Minkowski bilinear form.
pub fn minkowski(u: &Tangent, v: &Tangent) -> f64 {
    u.dot(v) - 2.0 * u[0] * v[0]
}

impl Hyperbolic {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(dim_error("hyperbolic", dim));
        }
        Ok(Self { dim })
    }

    fn velocity(p: &Point, u: &Tangent, r: f64) -> Tangent {
        u * r.cosh() + p * r.sinh()
    }

    fn spacelike_norm(v: &Tangent) -> f64 {
        minkowski(v, v).max(0.0).sqrt()
    }
}

impl Manifold for Hyperbolic {
    fn spec(&self) -> ManifoldSpec {
        ManifoldSpec::Hyperbolic { dim: self.dim }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.dim + 1, 1)
    }

    fn inner(&self, _p: &Point, u: &Tangent, v: &Tangent) -> f64 {
        minkowski(u, v)
    }

    fn project_tangent(&self, p: &Point, w: &Tangent) -> Tangent {
        w + p * minkowski(p, w)
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        check_point_shape(self, p)?;
        let err = (minkowski(p, p) + 1.0).abs();
        if p[0] <= 0.0 {
            return Err(Error::InvalidPoint("lower sheet of the hyperboloid".into()));
        }
        if err <= INVARIANT_TOL * p[0] * p[0] {
            Ok(())
        } else {
            Err(Error::InvalidPoint(format!("|⟨x, x⟩ + 1| = {err:e}")))
        }
    }

    fn check_tangent(&self, p: &Point, v: &Tangent) -> Result<()> {
        check_tangent_shape(self, v)?;
        let err = minkowski(p, v).abs();
        if err <= INVARIANT_TOL * (p.norm() * v.norm()).max(1.0) {
            Ok(())
        } else {
            Err(Error::InvalidTangent(format!("⟨x, v⟩ = {err:e}")))
        }
    }

    fn exp(&self, p: &Point, v: &Tangent) -> Point {
        let r = Self::spacelike_norm(v);
        p * r.cosh() + v * sinhc(r)
    }

    fn log(&self, p: &Point, q: &Point) -> Result<Tangent> {
        let u = q + p * minkowski(p, q);
        let s = Self::spacelike_norm(&u);
        if s == 0.0 {
            return Ok(Tangent::zeros(p.nrows(), 1));
        }
        // ‖u‖ = sinh d(p, q)
        Ok(u * (s.asinh() / s))
    }

    fn distance(&self, p: &Point, q: &Point) -> f64 {
        // ⟨p − q, p − q⟩ = 4 sinh²(d/2)
        2.0 * (0.5 * Self::spacelike_norm(&(p - q))).asinh()
    }

    fn dexp(&self, p: &Point, v: &Tangent, w: &Tangent) -> Tangent {
        let r = Self::spacelike_norm(v);
        if r == 0.0 {
            return w.clone();
        }
        let u = v / r;
        let radial = minkowski(&u, w);
        let normal = w - &u * radial;
        Self::velocity(p, &u, r) * radial + normal * sinhc(r)
    }

    fn riemann(&self, _p: &Point, x: &Tangent, y: &Tangent, z: &Tangent) -> Result<Tangent> {
        Ok(y * minkowski(z, x) - x * minkowski(z, y))
    }

    fn parallel_transport(&self, p: &Point, v: &Tangent, u: &Tangent) -> Result<Tangent> {
        let r = Self::spacelike_norm(v);
        if r == 0.0 {
            return Ok(u.clone());
        }
        let dir = v / r;
        let b = minkowski(&dir, u);
        Ok(u - &dir * b + Self::velocity(p, &dir, r) * b)
    }

    fn curvature_profile(&self) -> CurvatureProfile {
        CurvatureProfile::HYPERBOLIC
    }

    fn origin(&self) -> Point {
        let mut p = Point::zeros(self.dim + 1, 1);
        p[0] = 1.0;
        p
    }

    /// `exp` at the origin of a Gaussian tangent vector with per-coordinate
    /// variance `1/d`, so typical points sit at distance about 1.
    fn random_point(&self, rng: &mut ManifoldRng) -> Point {
        let o = self.origin();
        let mut v = gaussian(self.dim + 1, 1, rng) / (self.dim as f64).sqrt();
        v[0] = 0.0;
        self.exp(&o, &v)
    }
}
