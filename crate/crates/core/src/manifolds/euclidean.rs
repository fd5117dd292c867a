use super::*;

/// Flat `R^n` with the standard inner product; `exp_p(v) = p + v`.
#[derive(Clone, Debug)]
pub struct Euclidean {
    dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(dim_error("euclidean", dim));
        }
        Ok(Self { dim })
    }
}

impl Manifold for Euclidean {
    fn spec(&self) -> ManifoldSpec {
        ManifoldSpec::Euclidean { dim: self.dim }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.dim, 1)
    }

    fn inner(&self, _p: &Point, u: &Tangent, v: &Tangent) -> f64 {
        u.dot(v)
    }

    fn project_tangent(&self, _p: &Point, w: &Tangent) -> Tangent {
        w.clone()
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        check_point_shape(self, p)?;
        if p.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidPoint("non-finite coordinates".into()))
        }
    }

    fn check_tangent(&self, _p: &Point, v: &Tangent) -> Result<()> {
        check_tangent_shape(self, v)
    }

    fn exp(&self, p: &Point, v: &Tangent) -> Point {
        p + v
    }

    fn log(&self, p: &Point, q: &Point) -> Result<Tangent> {
        Ok(q - p)
    }

    fn distance(&self, p: &Point, q: &Point) -> f64 {
        (q - p).norm()
    }

    fn dexp(&self, _p: &Point, _v: &Tangent, w: &Tangent) -> Tangent {
        w.clone()
    }

    fn riemann(&self, _p: &Point, x: &Tangent, _y: &Tangent, _z: &Tangent) -> Result<Tangent> {
        Ok(Tangent::zeros(x.nrows(), x.ncols()))
    }

    fn parallel_transport(&self, _p: &Point, _v: &Tangent, u: &Tangent) -> Result<Tangent> {
        Ok(u.clone())
    }

    fn curvature_profile(&self) -> CurvatureProfile {
        CurvatureProfile::EUCLIDEAN
    }

    fn origin(&self) -> Point {
        Point::zeros(self.dim, 1)
    }

    fn random_point(&self, rng: &mut ManifoldRng) -> Point {
        gaussian(self.dim, 1, rng)
    }
}
