use super::*;
use crate::linalg::sinc;

/// Unit sphere `S^d ⊂ R^{d+1}` with the round metric (curvature 1).
#[derive(Clone, Debug)]
pub struct Sphere {
    dim: usize,
}

impl Sphere {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(dim_error("sphere", dim));
        }
        Ok(Self { dim })
    }

    /// Unit velocity of the geodesic from `p` with unit direction `u` at time `r`.
    fn velocity(p: &Point, u: &Tangent, r: f64) -> Tangent {
        u * r.cos() - p * r.sin()
    }
}

impl Manifold for Sphere {
    fn spec(&self) -> ManifoldSpec {
        ManifoldSpec::Sphere { dim: self.dim }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.dim + 1, 1)
    }

    fn inner(&self, _p: &Point, u: &Tangent, v: &Tangent) -> f64 {
        u.dot(v)
    }

    fn project_tangent(&self, p: &Point, w: &Tangent) -> Tangent {
        w - p * p.dot(w)
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        check_point_shape(self, p)?;
        let err = (p.norm() - 1.0).abs();
        if err <= INVARIANT_TOL {
            Ok(())
        } else {
            Err(Error::InvalidPoint(format!("| ‖x‖ − 1 | = {err:e}")))
        }
    }

    fn check_tangent(&self, p: &Point, v: &Tangent) -> Result<()> {
        check_tangent_shape(self, v)?;
        let err = p.dot(v).abs();
        if err <= INVARIANT_TOL * v.norm().max(1.0) {
            Ok(())
        } else {
            Err(Error::InvalidTangent(format!("⟨x, v⟩ = {err:e}")))
        }
    }

    fn exp(&self, p: &Point, v: &Tangent) -> Point {
        let r = v.norm();
        p * r.cos() + v * sinc(r)
    }

    fn log(&self, p: &Point, q: &Point) -> Result<Tangent> {
        let c = p.dot(q);
        let u = q - p * c;
        let s = u.norm();
        if c < 0.0 && s < 1e-8 {
            return Err(Error::CutLocus("antipodal points on the sphere".into()));
        }
        let theta = s.atan2(c);
        if s == 0.0 {
            return Ok(Tangent::zeros(p.nrows(), 1));
        }
        Ok(u * (theta / s))
    }

    fn distance(&self, p: &Point, q: &Point) -> f64 {
        let c = p.dot(q);
        (q - p * c).norm().atan2(c)
    }

    fn dexp(&self, p: &Point, v: &Tangent, w: &Tangent) -> Tangent {
        let r = v.norm();
        if r == 0.0 {
            return w.clone();
        }
        let u = v / r;
        let radial = u.dot(w);
        let normal = w - &u * radial;
        Self::velocity(p, &u, r) * radial + normal * sinc(r)
    }

    fn riemann(&self, _p: &Point, x: &Tangent, y: &Tangent, z: &Tangent) -> Result<Tangent> {
        Ok(x * z.dot(y) - y * z.dot(x))
    }

    fn parallel_transport(&self, p: &Point, v: &Tangent, u: &Tangent) -> Result<Tangent> {
        let r = v.norm();
        if r == 0.0 {
            return Ok(u.clone());
        }
        let dir = v / r;
        let b = dir.dot(u);
        Ok(u - &dir * b + Self::velocity(p, &dir, r) * b)
    }

    fn curvature_profile(&self) -> CurvatureProfile {
        CurvatureProfile::UNIT_SPHERE
    }

    fn origin(&self) -> Point {
        let mut p = Point::zeros(self.dim + 1, 1);
        p[0] = 1.0;
        p
    }

    fn random_point(&self, rng: &mut ManifoldRng) -> Point {
        let g = gaussian(self.dim + 1, 1, rng);
        let n = g.norm();
        g / n
    }

    fn tangent_basis(&self, p: &Point) -> Vec<Tangent> {
        // Start from the coordinate axes least aligned with p.
        let n = self.dim + 1;
        let mut axes: Vec<usize> = (0..n).collect();
        axes.sort_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs()));
        let candidates = axes.into_iter().map(|i| {
            let mut e = Tangent::zeros(n, 1);
            e[i] = 1.0;
            self.project_tangent(p, &e)
        });
        gram_schmidt(self, p, candidates, self.dim)
    }
}
