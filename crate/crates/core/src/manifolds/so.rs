use super::*;
use crate::linalg::{expm, frobenius_inner, logm, orthonormalize, skew, sym, Mat};

/// Special orthogonal group `SO(n)` with the bi-invariant metric
/// `⟨X, Y⟩ = tr(XᵀY)` inherited from `R^{n×n}`.
///
/// Tangent vectors at `Q` are `QΩ` with `Ω` skew-symmetric. Geodesics are
/// `Q expm(tΩ)`, the curvature tensor is `R(X,Y)Z = −¼[[X,Y],Z]` in the Lie
/// algebra, and sectional curvatures lie in `[0, ¼]` (`[0, ⅛]` for `n = 3`).
#[derive(Clone, Debug)]
pub struct SpecialOrthogonal {
    n: usize,
}

fn bracket(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

impl SpecialOrthogonal {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(dim_error("special orthogonal group", n));
        }
        Ok(Self { n })
    }

    /// Left-trivialized differential of `expm` at `Ω`:
    /// `Σ_k (−ad_Ω)^k(Ξ)/(k+1)!`, so that `d expm_Ω(Ξ) = expm(Ω)·φ`.
    pub fn dexp_left(omega: &Mat, xi: &Mat) -> Mat {
        let mut term = xi.clone();
        let mut sum = xi.clone();
        for k in 1..400 {
            term = bracket(&term, omega) / (k + 1) as f64;
            sum += &term;
            let t = term.norm();
            if k > 4 && t <= 1e-17 * sum.norm().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        sum
    }

    /// Rotation angles of `a ∈ SO(n)`, each conjugate pair contributing twice.
    fn rotation_angles(a: &Mat) -> Vec<f64> {
        a.clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.im.atan2(z.re))
            .collect()
    }
}

impl Manifold for SpecialOrthogonal {
    fn spec(&self) -> ManifoldSpec {
        ManifoldSpec::SpecialOrthogonal { n: self.n }
    }

    fn dim(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.n, self.n)
    }

    fn inner(&self, _p: &Point, u: &Tangent, v: &Tangent) -> f64 {
        frobenius_inner(u, v)
    }

    fn project_tangent(&self, p: &Point, w: &Tangent) -> Tangent {
        p * skew(&(p.transpose() * w))
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        check_point_shape(self, p)?;
        let err = (p.transpose() * p - Mat::identity(self.n, self.n)).norm();
        if err > INVARIANT_TOL {
            return Err(Error::InvalidPoint(format!("‖QᵀQ − I‖ = {err:e}")));
        }
        if p.determinant() <= 0.0 {
            return Err(Error::InvalidPoint("det Q ≤ 0".into()));
        }
        Ok(())
    }

    fn check_tangent(&self, p: &Point, v: &Tangent) -> Result<()> {
        check_tangent_shape(self, v)?;
        let err = sym(&(p.transpose() * v)).norm();
        if err <= INVARIANT_TOL * v.norm().max(1.0) {
            Ok(())
        } else {
            Err(Error::InvalidTangent(format!("‖sym(QᵀV)‖ = {err:e}")))
        }
    }

    fn exp(&self, p: &Point, v: &Tangent) -> Point {
        p * expm(&skew(&(p.transpose() * v)))
    }

    fn log(&self, p: &Point, q: &Point) -> Result<Tangent> {
        let a = p.transpose() * q;
        let id = Mat::identity(self.n, self.n);
        let smallest = (&a + &id).singular_values().min();
        if smallest < 1e-7 {
            return Err(Error::CutLocus("rotation angle π".into()));
        }
        let omega = logm(&a).ok_or_else(|| Error::CutLocus("matrix logarithm failed".into()))?;
        Ok(p * skew(&omega))
    }

    fn distance(&self, p: &Point, q: &Point) -> f64 {
        let a = p.transpose() * q;
        match self.log(p, q) {
            Ok(v) => v.norm(),
            Err(_) => Self::rotation_angles(&a).iter().map(|t| t * t).sum::<f64>().sqrt(),
        }
    }

    fn dexp(&self, p: &Point, v: &Tangent, w: &Tangent) -> Tangent {
        let omega = skew(&(p.transpose() * v));
        let xi = skew(&(p.transpose() * w));
        p * expm(&omega) * Self::dexp_left(&omega, &xi)
    }

    fn riemann(&self, p: &Point, x: &Tangent, y: &Tangent, z: &Tangent) -> Result<Tangent> {
        let pt = p.transpose();
        let (x, y, z) = (&pt * x, &pt * y, &pt * z);
        Ok(p * bracket(&bracket(&x, &y), &z) * -0.25)
    }

    fn parallel_transport(&self, p: &Point, v: &Tangent, u: &Tangent) -> Result<Tangent> {
        // Left-trivialized transport along expm(tΩ) solves ξ' = −½[Ω, ξ].
        let omega = skew(&(p.transpose() * v));
        let half = expm(&(&omega * 0.5));
        Ok(p * &half * (p.transpose() * u) * &half)
    }

    fn curvature_profile(&self) -> CurvatureProfile {
        match self.n {
            2 => CurvatureProfile {
                sec_upper: 0.0,
                ..CurvatureProfile::SPECIAL_ORTHOGONAL
            },
            3 => CurvatureProfile::SPECIAL_ORTHOGONAL_3,
            _ => CurvatureProfile::SPECIAL_ORTHOGONAL,
        }
    }

    fn origin(&self) -> Point {
        Mat::identity(self.n, self.n)
    }

    /// Haar-distributed rotation (QR of a Gaussian matrix with sign fix).
    fn random_point(&self, rng: &mut ManifoldRng) -> Point {
        let mut q = orthonormalize(&gaussian(self.n, self.n, rng));
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        q
    }

    fn tangent_basis(&self, p: &Point) -> Vec<Tangent> {
        let mut out = Vec::with_capacity(self.dim());
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let mut e = Mat::zeros(self.n, self.n);
                e[(i, j)] = -scale;
                e[(j, i)] = scale;
                out.push(p * e);
            }
        }
        out
    }
}
