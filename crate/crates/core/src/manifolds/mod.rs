//! Concrete Riemannian manifolds in ambient coordinates.
//!
//! Points and tangent vectors are dense matrices: column vectors for
//! [`Euclidean`], [`Sphere`] and [`Hyperbolic`], `n×n` matrices for
//! [`SpecialOrthogonal`] and `n×k` orthonormal frames for [`Grassmann`].
//! A tangent vector is always interpreted relative to a base point the caller
//! supplies alongside it.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bounds::CurvatureProfile;
use crate::error::{Error, Result};

mod euclidean;
mod grassmann;
mod hyperbolic;
mod so;
mod sphere;

pub use euclidean::Euclidean;
pub use grassmann::Grassmann;
pub use hyperbolic::{minkowski, Hyperbolic};
pub use so::SpecialOrthogonal;
pub use sphere::Sphere;

pub type Point = DMatrix<f64>;
pub type Tangent = DMatrix<f64>;
pub type ManifoldRng = ChaCha8Rng;

/// Tolerance for point and tangent-space membership checks.
pub const INVARIANT_TOL: f64 = 1e-10;

/// Geometry of a complete Riemannian manifold with a closed-form exponential.
pub trait Manifold: Send + Sync + std::fmt::Debug {
    fn spec(&self) -> ManifoldSpec;

    /// Intrinsic dimension.
    fn dim(&self) -> usize;

    /// Shape of the ambient matrices holding points and tangent vectors.
    fn ambient_shape(&self) -> (usize, usize);

    fn inner(&self, p: &Point, u: &Tangent, v: &Tangent) -> f64;

    fn norm(&self, p: &Point, v: &Tangent) -> f64 {
        self.inner(p, v, v).max(0.0).sqrt()
    }

    /// Orthogonal projection of an ambient matrix onto `T_pM`.
    fn project_tangent(&self, p: &Point, w: &Tangent) -> Tangent;

    fn check_point(&self, p: &Point) -> Result<()>;

    fn check_tangent(&self, p: &Point, v: &Tangent) -> Result<()>;

    fn exp(&self, p: &Point, v: &Tangent) -> Point;

    /// [`Manifold::exp`] after validating both inputs.
    fn exp_checked(&self, p: &Point, v: &Tangent) -> Result<Point> {
        self.check_point(p)?;
        self.check_tangent(p, v)?;
        Ok(self.exp(p, v))
    }

    /// Inverse of `exp_p` on its injectivity domain; [`Error::CutLocus`] otherwise.
    fn log(&self, p: &Point, q: &Point) -> Result<Tangent>;

    fn distance(&self, p: &Point, q: &Point) -> f64;

    /// `(d exp_p)_v(w)`, a tangent vector at `exp_p(v)`.
    fn dexp(&self, p: &Point, v: &Tangent, w: &Tangent) -> Tangent;

    /// Whether the Levi-Civita connection is the tangential projection of the
    /// ambient derivative, i.e. the representation is an isometric embedding.
    fn is_embedded(&self) -> bool {
        true
    }

    /// Curvature tensor `R(x, y)z` at `p`, with the sign convention under
    /// which `⟨R(x,y)y, x⟩` is the (unnormalized) sectional curvature.
    fn riemann(&self, p: &Point, x: &Tangent, y: &Tangent, z: &Tangent) -> Result<Tangent>;

    /// Parallel transport of `u ∈ T_pM` along `t ↦ exp_p(tv)`, `t ∈ [0, 1]`.
    fn parallel_transport(&self, p: &Point, v: &Tangent, u: &Tangent) -> Result<Tangent>;

    fn curvature_profile(&self) -> CurvatureProfile;

    /// Reference point used when a problem needs a canonical starting point.
    fn origin(&self) -> Point;

    fn random_point(&self, rng: &mut ManifoldRng) -> Point;

    /// Gaussian ambient matrix projected onto `T_pM` (not normalized).
    fn random_tangent(&self, p: &Point, rng: &mut ManifoldRng) -> Tangent {
        let (r, c) = self.ambient_shape();
        self.project_tangent(p, &gaussian(r, c, rng))
    }

    /// Orthonormal basis of `T_pM`.
    fn tangent_basis(&self, p: &Point) -> Vec<Tangent> {
        let (rows, cols) = self.ambient_shape();
        let candidates = (0..rows * cols).map(|idx| {
            let mut e = Tangent::zeros(rows, cols);
            e[(idx % rows, idx / rows)] = 1.0;
            self.project_tangent(p, &e)
        });
        gram_schmidt(self, p, candidates, self.dim())
    }

    /// Point equality up to the representation's symmetries.
    fn same_point(&self, p: &Point, q: &Point, tol: f64) -> bool {
        (p - q).norm() <= tol
    }

    fn random_point_seeded(&self, seed: u64) -> Point {
        self.random_point(&mut ManifoldRng::seed_from_u64(seed))
    }

    fn random_tangent_seeded(&self, p: &Point, seed: u64) -> Tangent {
        self.random_tangent(p, &mut ManifoldRng::seed_from_u64(seed))
    }

    /// `v / ‖v‖`, or `None` for the zero vector.
    fn normalize(&self, p: &Point, v: &Tangent) -> Option<Tangent> {
        let n = self.norm(p, v);
        (n > 0.0).then(|| v / n)
    }
}

/// Serializable identifier of a manifold and its dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldSpec {
    /// `R^dim`.
    Euclidean { dim: usize },
    /// Unit sphere `S^dim ⊂ R^{dim+1}`.
    Sphere { dim: usize },
    /// Hyperbolic space `H^dim` in the hyperboloid model in `R^{dim+1}`.
    Hyperbolic { dim: usize },
    /// `SO(n)` with `⟨X, Y⟩ = tr(XᵀY)`.
    SpecialOrthogonal { n: usize },
    /// `Gr(n, k)` as `n×k` orthonormal frames modulo `O(k)`.
    Grassmann { n: usize, k: usize },
}

impl ManifoldSpec {
    pub fn build(&self) -> Result<Box<dyn Manifold>> {
        Ok(match *self {
            ManifoldSpec::Euclidean { dim } => Box::new(Euclidean::new(dim)?),
            ManifoldSpec::Sphere { dim } => Box::new(Sphere::new(dim)?),
            ManifoldSpec::Hyperbolic { dim } => Box::new(Hyperbolic::new(dim)?),
            ManifoldSpec::SpecialOrthogonal { n } => Box::new(SpecialOrthogonal::new(n)?),
            ManifoldSpec::Grassmann { n, k } => Box::new(Grassmann::new(n, k)?),
        })
    }

    pub fn name(&self) -> String {
        match *self {
            ManifoldSpec::Euclidean { dim } => format!("R^{dim}"),
            ManifoldSpec::Sphere { dim } => format!("S^{dim}"),
            ManifoldSpec::Hyperbolic { dim } => format!("H^{dim}"),
            ManifoldSpec::SpecialOrthogonal { n } => format!("SO({n})"),
            ManifoldSpec::Grassmann { n, k } => format!("Gr({n},{k})"),
        }
    }
}

pub(crate) fn gaussian(rows: usize, cols: usize, rng: &mut ManifoldRng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Modified Gram–Schmidt under the manifold metric, keeping at most `target`
/// vectors and discarding numerically dependent candidates.
pub(crate) fn gram_schmidt<M: Manifold + ?Sized>(
    m: &M,
    p: &Point,
    candidates: impl IntoIterator<Item = Tangent>,
    target: usize,
) -> Vec<Tangent> {
    let mut basis: Vec<Tangent> = Vec::with_capacity(target);
    for mut c in candidates {
        if basis.len() == target {
            break;
        }
        for _ in 0..2 {
            for b in &basis {
                let proj = m.inner(p, &c, b);
                c -= b * proj;
            }
        }
        let n = m.norm(p, &c);
        if n > 1e-8 {
            basis.push(c / n);
        }
    }
    basis
}

pub(crate) fn dim_error(what: &str, got: usize) -> Error {
    Error::InvalidArgument(format!("{what}: unsupported dimension {got}"))
}

fn shape_check(name: &str, expected: (usize, usize), got: (usize, usize), invalid: fn(String) -> Error) -> Result<()> {
    if expected != got {
        return Err(invalid(format!("{name}: expected shape {expected:?}, got {got:?}")));
    }
    Ok(())
}

pub(crate) fn check_point_shape<M: Manifold + ?Sized>(m: &M, p: &Point) -> Result<()> {
    shape_check(&m.spec().name(), m.ambient_shape(), p.shape(), Error::InvalidPoint)
}

pub(crate) fn check_tangent_shape<M: Manifold + ?Sized>(m: &M, v: &Tangent) -> Result<()> {
    shape_check(&m.spec().name(), m.ambient_shape(), v.shape(), Error::InvalidTangent)
}

/// Central difference of `exp_p` in direction `w` at `v`, projected onto the
/// tangent space at `exp_p(v)`.
pub(crate) fn central_difference_dexp<M: Manifold + ?Sized>(
    m: &M,
    p: &Point,
    v: &Tangent,
    w: &Tangent,
    h: f64,
) -> Tangent {
    let plus = m.exp(p, &(v + w * h));
    let minus = m.exp(p, &(v - w * h));
    let q = m.exp(p, v);
    m.project_tangent(&q, &((plus - minus) / (2.0 * h)))
}
