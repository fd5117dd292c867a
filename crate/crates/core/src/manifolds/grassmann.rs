use super::*;
use crate::linalg::{frobenius_inner, orthonormalize, sinc, Mat};

/// Real Grassmannian `Gr(n, k)` of `k`-planes in `R^n`.
///
/// A point is an `n×k` frame `Y` with `YᵀY = I`, identified with `YO` for any
/// `O ∈ O(k)`. Tangent vectors are horizontal lifts `H` with `YᵀH = 0`, and
/// `⟨H₁, H₂⟩ = tr(H₁ᵀH₂)`, which equals `½tr(XᵀY)` on the corresponding
/// skew-symmetric `n×n` generators. With this metric `0 ≤ sec ≤ 2`.
///
/// `dexp` is a central finite difference of the closed-form exponential; the
/// curvature tensor and parallel transport are not provided.
#[derive(Clone, Debug)]
pub struct Grassmann {
    n: usize,
    k: usize,
}

/// Step for the finite-difference differential of `exp`.
const DEXP_STEP: f64 = 1e-5;

impl Grassmann {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::InvalidArgument(format!(
                "Grassmannian needs 0 < k < n, got n={n}, k={k}"
            )));
        }
        Ok(Self { n, k })
    }

    /// Principal angles between the spans of `y` and `z`, ascending.
    pub fn principal_angles(y: &Point, z: &Point) -> Vec<f64> {
        let cos = (y.transpose() * z).singular_values();
        let perp = z - y * (y.transpose() * z);
        let sin = perp.singular_values();
        let mut c: Vec<f64> = cos.iter().copied().collect();
        let mut s: Vec<f64> = sin.iter().copied().collect();
        c.sort_by(|a, b| b.total_cmp(a));
        s.sort_by(|a, b| a.total_cmp(b));
        // perp has min(n, k) singular values; only the k smallest pair with cosines.
        s.truncate(c.len());
        c.iter().zip(&s).map(|(c, s)| s.atan2(*c)).collect()
    }
}

impl Manifold for Grassmann {
    fn spec(&self) -> ManifoldSpec {
        ManifoldSpec::Grassmann { n: self.n, k: self.k }
    }

    fn dim(&self) -> usize {
        self.k * (self.n - self.k)
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.n, self.k)
    }

    fn inner(&self, _p: &Point, u: &Tangent, v: &Tangent) -> f64 {
        frobenius_inner(u, v)
    }

    fn project_tangent(&self, p: &Point, w: &Tangent) -> Tangent {
        w - p * (p.transpose() * w)
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        check_point_shape(self, p)?;
        let err = (p.transpose() * p - Mat::identity(self.k, self.k)).norm();
        if err <= INVARIANT_TOL {
            Ok(())
        } else {
            Err(Error::InvalidPoint(format!("‖YᵀY − I‖ = {err:e}")))
        }
    }

    fn check_tangent(&self, p: &Point, v: &Tangent) -> Result<()> {
        check_tangent_shape(self, v)?;
        let err = (p.transpose() * v).norm();
        if err <= INVARIANT_TOL * v.norm().max(1.0) {
            Ok(())
        } else {
            Err(Error::InvalidTangent(format!("‖YᵀH‖ = {err:e}")))
        }
    }

    /// `Y W cos(S) Wᵀ + H W sinc(S) Wᵀ` where `HᵀH = W S² Wᵀ`. Unlike the
    /// SVD form this is smooth in `H`, which the finite-difference `dexp` needs.
    fn exp(&self, p: &Point, v: &Tangent) -> Point {
        let eig = (v.transpose() * v).symmetric_eigen();
        let s = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
        let w = &eig.eigenvectors;
        let cos = Mat::from_diagonal(&s.map(f64::cos));
        let sinc_s = Mat::from_diagonal(&s.map(sinc));
        (p * w * cos + v * w * sinc_s) * w.transpose()
    }

    fn log(&self, p: &Point, q: &Point) -> Result<Tangent> {
        let ytz = p.transpose() * q;
        let smallest = ytz.singular_values().min();
        if smallest < 1e-8 {
            return Err(Error::CutLocus("principal angle π/2".into()));
        }
        let inv = ytz
            .try_inverse()
            .ok_or_else(|| Error::CutLocus("YᵀZ is singular".into()))?;
        let t = (q - p * (p.transpose() * q)) * inv;
        let svd = t.svd(true, true);
        let u = svd.u.expect("requested U");
        let vt = svd.v_t.expect("requested Vᵀ");
        let theta = Mat::from_diagonal(&svd.singular_values.map(f64::atan));
        Ok(u * theta * vt)
    }

    fn distance(&self, p: &Point, q: &Point) -> f64 {
        Self::principal_angles(p, q).iter().map(|t| t * t).sum::<f64>().sqrt()
    }

    fn dexp(&self, p: &Point, v: &Tangent, w: &Tangent) -> Tangent {
        central_difference_dexp(self, p, v, w, DEXP_STEP)
    }

    fn is_embedded(&self) -> bool {
        false
    }

    fn riemann(&self, _p: &Point, _x: &Tangent, _y: &Tangent, _z: &Tangent) -> Result<Tangent> {
        Err(Error::unsupported("curvature tensor", self.spec().name()))
    }

    fn parallel_transport(&self, _p: &Point, _v: &Tangent, _u: &Tangent) -> Result<Tangent> {
        Err(Error::unsupported("parallel transport", self.spec().name()))
    }

    fn curvature_profile(&self) -> CurvatureProfile {
        CurvatureProfile::GRASSMANNIAN
    }

    fn origin(&self) -> Point {
        Mat::identity(self.n, self.k)
    }

    fn random_point(&self, rng: &mut ManifoldRng) -> Point {
        orthonormalize(&gaussian(self.n, self.k, rng))
    }

    /// Equality of spans, via the orthogonal projectors.
    fn same_point(&self, p: &Point, q: &Point, tol: f64) -> bool {
        (p * p.transpose() - q * q.transpose()).norm() <= tol
    }
}
