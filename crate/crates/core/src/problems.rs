//! Benchmark objectives with known optima and analytic Hessian bounds.
//!
//! Every `alpha` is a conservative analytic bound on the operator norm of the
//! Riemannian Hessian; [`sampled_hessian_norm`] gives an empirical estimate
//! for diagnostics.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_inner, sym_spectral_norm, Mat};
use crate::manifolds::{gaussian, Hyperbolic, Manifold, ManifoldRng, ManifoldSpec, Point, Tangent};
use crate::optimize::Objective;
use crate::trig::zeta1;

/// `f(x) = ½‖x − b‖²` on `R^n`: `α = 1`, `f* = 0`.
#[derive(Clone, Debug)]
pub struct Quadratic {
    target: DMatrix<f64>,
}

pub fn quadratic(target: &DMatrix<f64>) -> Quadratic {
    Quadratic { target: target.clone() }
}

impl Objective for Quadratic {
    fn value(&self, x: &Point) -> f64 {
        0.5 * (x - &self.target).norm_squared()
    }

    fn gradient(&self, x: &Point) -> Tangent {
        x - &self.target
    }

    fn alpha(&self) -> f64 {
        1.0
    }

    fn f_star(&self) -> f64 {
        0.0
    }
}

fn check_symmetric(a: &Mat) -> Result<()> {
    if !a.is_square() {
        return Err(Error::InvalidArgument(format!(
            "matrix must be square, got {:?}",
            a.shape()
        )));
    }
    let asym = (a - a.transpose()).norm();
    if asym > 1e-12 * a.norm().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric (‖A − Aᵀ‖ = {asym:e})"
        )));
    }
    Ok(())
}

/// Ascending eigenvalues of a symmetric matrix.
fn sorted_eigenvalues(a: &Mat) -> Vec<f64> {
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Rayleigh quotient `f(x) = xᵀAx` on the unit sphere.
///
/// `α = 4‖A‖₂`: on `T_xS`, `Hess f = 2(P A P − xᵀAx·I)`, each term bounded by `‖A‖₂`.
#[derive(Clone, Debug)]
pub struct Rayleigh {
    a: Mat,
    lambda_min: f64,
    norm: f64,
}

pub fn rayleigh(a: &Mat) -> Result<Rayleigh> {
    check_symmetric(a)?;
    Ok(Rayleigh {
        a: a.clone(),
        lambda_min: sorted_eigenvalues(a)[0],
        norm: sym_spectral_norm(a),
    })
}

impl Objective for Rayleigh {
    fn value(&self, x: &Point) -> f64 {
        (x.transpose() * &self.a * x)[0]
    }

    fn gradient(&self, x: &Point) -> Tangent {
        let ax = &self.a * x;
        (&ax - x * x.dot(&ax)) * 2.0
    }

    fn alpha(&self) -> f64 {
        4.0 * self.norm
    }

    fn f_star(&self) -> f64 {
        self.lambda_min
    }
}

/// Orthogonal Procrustes `f(Q) = ½‖Q − B‖²_F` on `SO(n)`.
///
/// Along a unit-speed geodesic `Q expm(tΩ)` the second derivative is
/// `−tr((QΩ²)ᵀB)`, bounded by `‖B‖₂`; the shipped `α = 1 + ‖B‖₂` keeps a margin.
/// `f*` is attained at the special-orthogonal polar factor of `B`.
#[derive(Clone, Debug)]
pub struct Procrustes {
    b: Mat,
    minimizer: Mat,
    f_star: f64,
    norm: f64,
}

/// Nearest rotation to `b` (Kabsch): `U diag(1, …, 1, det(UVᵀ)) Vᵀ`.
pub fn nearest_rotation(b: &Mat) -> Mat {
    let n = b.nrows();
    let svd = b.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vᵀ");
    let mut d = DVector::from_element(n, 1.0);
    if (&u * &vt).determinant() < 0.0 {
        d[n - 1] = -1.0;
    }
    u * DMatrix::from_diagonal(&d) * vt
}

pub fn procrustes(b: &Mat) -> Result<Procrustes> {
    if !b.is_square() {
        return Err(Error::InvalidArgument(format!(
            "target must be square, got {:?}",
            b.shape()
        )));
    }
    let minimizer = nearest_rotation(b);
    let f_star = 0.5 * (&minimizer - b).norm_squared();
    Ok(Procrustes {
        b: b.clone(),
        minimizer,
        f_star,
        norm: b.clone().singular_values().max(),
    })
}

impl Procrustes {
    pub fn minimizer(&self) -> &Mat {
        &self.minimizer
    }
}

impl Objective for Procrustes {
    fn value(&self, q: &Point) -> f64 {
        0.5 * (q - &self.b).norm_squared()
    }

    fn gradient(&self, q: &Point) -> Tangent {
        let w = q - &self.b;
        let qtw = q.transpose() * w;
        q * (&qtw - qtw.transpose()) * 0.5
    }

    fn alpha(&self) -> f64 {
        1.0 + self.norm
    }

    fn f_star(&self) -> f64 {
        self.f_star
    }
}

/// Karcher mean `f(x) = ½ Σ d(x, xᵢ)²` on hyperbolic space.
///
/// The Hessian of `½d(·, xᵢ)²` at distance `R` is bounded by `ζ_{1,−1}(R) = R coth R`.
/// On the working ball `B(c, ρ)` around the normalized Minkowski average `c`,
/// `d(x, xᵢ) ≤ d(c, xᵢ) + ρ =: Rᵢ`, so `α = Σ ζ_{1,−1}(Rᵢ)`. The default `ρ`
/// is `max d(c, xᵢ)`; the minimizer lies in the convex hull of the points and
/// hence in that ball. `f* = 0` is the trivial lower bound.
#[derive(Clone, Debug)]
pub struct KarcherMean {
    space: Hyperbolic,
    points: Vec<Point>,
    center: Point,
    working_radius: f64,
    alpha: f64,
}

pub fn karcher_mean(points: &[Point], working_radius: Option<f64>) -> Result<KarcherMean> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidArgument("Karcher mean of an empty set".into()))?;
    let space = Hyperbolic::new(first.nrows().saturating_sub(1))?;
    for x in points {
        space.check_point(x)?;
    }
    let sum = points.iter().fold(Point::zeros(first.nrows(), 1), |acc, x| acc + x);
    let scale = (-crate::manifolds::minkowski(&sum, &sum)).sqrt();
    let center = sum / scale;
    let spread = points.iter().map(|x| space.distance(&center, x)).fold(0.0, f64::max);
    let working_radius = working_radius.unwrap_or(spread);
    if !(working_radius >= 0.0 && working_radius.is_finite()) {
        return Err(Error::domain("working_radius", working_radius, "[0, ∞)"));
    }
    let mut alpha = 0.0;
    for x in points {
        let r = space.distance(&center, x) + working_radius;
        alpha += if r > 0.0 { zeta1(-1.0, r)? } else { 1.0 };
    }
    Ok(KarcherMean {
        space,
        points: points.to_vec(),
        center,
        working_radius,
        alpha,
    })
}

impl KarcherMean {
    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn working_radius(&self) -> f64 {
        self.working_radius
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }
}

impl Objective for KarcherMean {
    fn value(&self, x: &Point) -> f64 {
        self.points
            .iter()
            .map(|p| 0.5 * self.space.distance(x, p).powi(2))
            .sum()
    }

    fn gradient(&self, x: &Point) -> Tangent {
        let mut g = Tangent::zeros(x.nrows(), 1);
        for p in &self.points {
            // Points are never antipodal in hyperbolic space, so log cannot fail.
            g -= self.space.log(x, p).expect("hyperbolic log is global");
        }
        g
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn f_star(&self) -> f64 {
        0.0
    }
}

/// Block Rayleigh quotient `f(Y) = tr(YᵀAY)` on `Gr(n, k)`.
///
/// `α = 4‖A‖₂` as for [`Rayleigh`]; `f*` is the sum of the `k` smallest eigenvalues.
#[derive(Clone, Debug)]
pub struct GrassmannTrace {
    a: Mat,
    f_star: f64,
    norm: f64,
}

pub fn grassmann_trace(a: &Mat, k: usize) -> Result<GrassmannTrace> {
    check_symmetric(a)?;
    if k == 0 || k >= a.nrows() {
        return Err(Error::InvalidArgument(format!(
            "need 0 < k < n, got k={k}, n={}",
            a.nrows()
        )));
    }
    Ok(GrassmannTrace {
        a: a.clone(),
        f_star: sorted_eigenvalues(a)[..k].iter().sum(),
        norm: sym_spectral_norm(a),
    })
}

impl Objective for GrassmannTrace {
    fn value(&self, y: &Point) -> f64 {
        frobenius_inner(y, &(&self.a * y))
    }

    fn gradient(&self, y: &Point) -> Tangent {
        let ay = &self.a * y;
        (&ay - y * (y.transpose() * &ay)) * 2.0
    }

    fn alpha(&self) -> f64 {
        4.0 * self.norm
    }

    fn f_star(&self) -> f64 {
        self.f_star
    }
}

/// Random symmetric matrix with spectral norm exactly 1.
pub fn random_symmetric(n: usize, seed: u64) -> Mat {
    let mut rng = ManifoldRng::seed_from_u64(seed);
    let g = gaussian(n, n, &mut rng);
    let a = (&g + g.transpose()) * 0.5;
    let norm = sym_spectral_norm(&a);
    a / norm
}

/// Dense matrix stored row-major for JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixData {
    pub fn from_matrix(m: &Mat) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.transpose().iter().copied().collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::InvalidArgument(format!(
                "matrix data has {} entries, expected {}×{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(Mat::from_row_slice(self.rows, self.cols, &self.data))
    }
}

/// Problem data, tagged by `problem`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum ProblemKind {
    Quadratic {
        target: Vec<f64>,
    },
    Rayleigh {
        matrix: MatrixData,
    },
    Procrustes {
        target: MatrixData,
    },
    KarcherMean {
        points: Vec<Vec<f64>>,
        #[serde(default)]
        working_radius: Option<f64>,
    },
    GrassmannTrace {
        matrix: MatrixData,
        k: usize,
    },
}

/// A fully specified, serializable optimization problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub manifold: ManifoldSpec,
    #[serde(flatten)]
    pub kind: ProblemKind,
    pub f_star: f64,
    pub alpha: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ProblemInstance {
    fn finish(kind: ProblemKind, seed: Option<u64>) -> Result<Self> {
        let (manifold, obj) = kind.build()?;
        Ok(Self {
            manifold,
            f_star: obj.f_star(),
            alpha: obj.alpha(),
            kind,
            seed,
        })
    }

    pub fn new(kind: ProblemKind) -> Result<Self> {
        Self::finish(kind, None)
    }

    /// Rayleigh quotient on `S^{n−1}` with a random `A`, `‖A‖₂ = 1`.
    pub fn random_rayleigh(n: usize, seed: u64) -> Result<Self> {
        let matrix = MatrixData::from_matrix(&random_symmetric(n, seed));
        Self::finish(ProblemKind::Rayleigh { matrix }, Some(seed))
    }

    /// Procrustes on `SO(n)` with a Gaussian target.
    pub fn random_procrustes(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ManifoldRng::seed_from_u64(seed);
        let target = MatrixData::from_matrix(&gaussian(n, n, &mut rng));
        Self::finish(ProblemKind::Procrustes { target }, Some(seed))
    }

    /// `count` points on `H^dim` within distance `spread` of the origin.
    pub fn random_karcher(dim: usize, count: usize, spread: f64, seed: u64) -> Result<Self> {
        let h = Hyperbolic::new(dim)?;
        let mut rng = ManifoldRng::seed_from_u64(seed);
        let o = h.origin();
        let points = (0..count)
            .map(|_| {
                let v = h.random_tangent(&o, &mut rng);
                let n = h.norm(&o, &v);
                let r = spread * rand::Rng::random::<f64>(&mut rng);
                h.exp(&o, &(v * (r / n))).iter().copied().collect()
            })
            .collect();
        Self::finish(
            ProblemKind::KarcherMean {
                points,
                working_radius: None,
            },
            Some(seed),
        )
    }

    pub fn random_grassmann_trace(n: usize, k: usize, seed: u64) -> Result<Self> {
        let matrix = MatrixData::from_matrix(&random_symmetric(n, seed));
        Self::finish(ProblemKind::GrassmannTrace { matrix, k }, Some(seed))
    }

    /// Manifold and objective; `f_star` and `alpha` are recomputed from the data.
    pub fn build(&self) -> Result<(Box<dyn Manifold>, Box<dyn Objective>)> {
        let (spec, obj) = self.kind.build()?;
        if spec != self.manifold {
            return Err(Error::InvalidArgument(format!(
                "problem lives on {}, instance declares {}",
                spec.name(),
                self.manifold.name()
            )));
        }
        Ok((spec.build()?, obj))
    }

    /// Starting point for a run: the working-ball center for a Karcher mean,
    /// where its `α` holds, and `random_point_seeded(seed)` otherwise.
    pub fn default_start(&self, m: &dyn Manifold, seed: u64) -> Result<Point> {
        match &self.kind {
            ProblemKind::KarcherMean { points, working_radius } => {
                let pts: Vec<Point> = points
                    .iter()
                    .map(|x| DMatrix::from_column_slice(x.len(), 1, x))
                    .collect();
                Ok(karcher_mean(&pts, *working_radius)?.center().clone())
            }
            _ => Ok(m.random_point_seeded(seed)),
        }
    }
}

impl ProblemKind {
    pub fn build(&self) -> Result<(ManifoldSpec, Box<dyn Objective>)> {
        Ok(match self {
            ProblemKind::Quadratic { target } => {
                if target.is_empty() {
                    return Err(Error::InvalidArgument("empty quadratic target".into()));
                }
                let b = DMatrix::from_column_slice(target.len(), 1, target);
                (ManifoldSpec::Euclidean { dim: target.len() }, Box::new(quadratic(&b)))
            }
            ProblemKind::Rayleigh { matrix } => {
                let a = matrix.to_matrix()?;
                let n = a.nrows();
                if n < 2 {
                    return Err(Error::InvalidArgument("Rayleigh quotient needs n ≥ 2".into()));
                }
                (ManifoldSpec::Sphere { dim: n - 1 }, Box::new(rayleigh(&a)?))
            }
            ProblemKind::Procrustes { target } => {
                let b = target.to_matrix()?;
                (
                    ManifoldSpec::SpecialOrthogonal { n: b.nrows() },
                    Box::new(procrustes(&b)?),
                )
            }
            ProblemKind::KarcherMean { points, working_radius } => {
                let pts: Vec<Point> = points
                    .iter()
                    .map(|x| DMatrix::from_column_slice(x.len(), 1, x))
                    .collect();
                let obj = karcher_mean(&pts, *working_radius)?;
                let dim = pts[0].nrows() - 1;
                (ManifoldSpec::Hyperbolic { dim }, Box::new(obj))
            }
            ProblemKind::GrassmannTrace { matrix, k } => {
                let a = matrix.to_matrix()?;
                (
                    ManifoldSpec::Grassmann { n: a.nrows(), k: *k },
                    Box::new(grassmann_trace(&a, *k)?),
                )
            }
        })
    }
}

/// Largest `|d²/dt² f(exp_x(tu))|` at `t = 0` over random points and unit
/// directions, by second differences with step `h`. A lower estimate of the
/// Hessian operator norm.
pub fn sampled_hessian_norm(m: &dyn Manifold, obj: &dyn Objective, samples: usize, seed: u64, h: f64) -> f64 {
    let mut rng = ManifoldRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = m.random_point(&mut rng);
        let Some(u) = m.normalize(&x, &m.random_tangent(&x, &mut rng)) else {
            continue;
        };
        let f = |t: f64| obj.value(&m.exp(&x, &(&u * t)));
        let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        worst = worst.max(second.abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{Grassmann, SpecialOrthogonal, Sphere};
    use crate::optimize::{directional_derivative_error, dynamic_trivialization, OptimizerConfig, StoppingRule};
    use approx::assert_relative_eq;

    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn rayleigh_examples() {
        let s = Sphere::new(2).unwrap();
        let id = rayleigh(&Mat::identity(3, 3)).unwrap();
        let x = s.random_point_seeded(0);
        assert_relative_eq!(id.value(&x), 1.0, epsilon = 1e-15);
        assert!(id.gradient(&x).norm() < 1e-15);

        let r = rayleigh(&diag(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(r.f_star(), 1.0);
        let e1 = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        assert_eq!(r.value(&e1), 1.0);
        assert!(r.gradient(&e1).norm() == 0.0);
        assert_eq!(r.alpha(), 12.0);

        let mut nonsym = Mat::identity(3, 3);
        nonsym[(0, 1)] = 1.0;
        assert!(rayleigh(&nonsym).is_err());
    }

    #[test]
    fn random_symmetric_has_unit_norm() {
        let a = random_symmetric(10, 0);
        assert_relative_eq!(sym_spectral_norm(&a), 1.0, epsilon = 1e-14);
        assert_eq!(a, a.transpose());
    }

    #[test]
    fn procrustes_examples() {
        let so = SpecialOrthogonal::new(3).unwrap();
        let b = so.random_point_seeded(1);
        let p = procrustes(&b).unwrap();
        assert!(p.f_star().abs() < 1e-24);
        assert!((p.minimizer() - &b).norm() < 1e-12);

        let zero = procrustes(&Mat::zeros(3, 3)).unwrap();
        let q = so.random_point_seeded(2);
        assert_relative_eq!(zero.value(&q), 1.5, epsilon = 1e-14);
        assert!(zero.gradient(&q).norm() < 1e-15);
        assert_eq!(zero.alpha(), 1.0);
    }

    /// Kabsch minimizer beats random rotations and has vanishing gradient.
    #[test]
    fn procrustes_minimizer_is_critical_and_optimal() {
        let so = SpecialOrthogonal::new(4).unwrap();
        for seed in 0..5 {
            let inst = ProblemInstance::random_procrustes(4, seed).unwrap();
            let (_, obj) = inst.build().unwrap();
            let b = match &inst.kind {
                ProblemKind::Procrustes { target } => target.to_matrix().unwrap(),
                _ => unreachable!(),
            };
            let u = nearest_rotation(&b);
            so.check_point(&u).unwrap();
            assert!(obj.gradient(&u).norm() < 1e-12);
            for s in 0..50 {
                assert!(obj.value(&so.random_point_seeded(100 + s)) >= obj.f_star() - 1e-12);
            }
        }
    }

    #[test]
    fn grassmann_trace_examples() {
        let g = Grassmann::new(5, 2).unwrap();
        let y = g.random_point_seeded(0);
        let id = grassmann_trace(&Mat::identity(5, 5), 2).unwrap();
        assert_relative_eq!(id.value(&y), 2.0, epsilon = 1e-14);
        assert!(id.gradient(&y).norm() < 1e-14);
        let d = grassmann_trace(&diag(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2).unwrap();
        assert_eq!(d.f_star(), 3.0);
        assert!(grassmann_trace(&Mat::identity(3, 3), 3).is_err());
    }

    #[test]
    fn karcher_examples() {
        let h = Hyperbolic::new(2).unwrap();
        let p = h.random_point_seeded(4);
        let single = karcher_mean(std::slice::from_ref(&p), None).unwrap();
        assert!(single.value(&p) < 1e-20);
        assert!(single.gradient(&p).norm() < 1e-10);
        assert!((single.center() - &p).norm() < 1e-12);

        let q = h.random_point_seeded(5);
        let pair = karcher_mean(&[p.clone(), q.clone()], None).unwrap();
        let mid = h.exp(&p, &(h.log(&p, &q).unwrap() * 0.5));
        assert!(h.norm(&mid, &pair.gradient(&mid)) < 1e-10);
        assert!(karcher_mean(&[], None).is_err());
    }

    fn all_instances() -> Vec<ProblemInstance> {
        vec![
            ProblemInstance::new(ProblemKind::Quadratic {
                target: vec![1.0, -1.0, 0.5],
            })
            .unwrap(),
            ProblemInstance::random_rayleigh(6, 1).unwrap(),
            ProblemInstance::random_procrustes(3, 2).unwrap(),
            ProblemInstance::random_procrustes(4, 3).unwrap(),
            ProblemInstance::random_karcher(3, 10, 1.0, 4).unwrap(),
            ProblemInstance::random_grassmann_trace(6, 2, 5).unwrap(),
        ]
    }

    #[test]
    fn gradients_pass_directional_derivative_check() {
        let t = 1e-5;
        for inst in all_instances() {
            let (m, obj) = inst.build().unwrap();
            for seed in 0..20 {
                let x = m.random_point_seeded(seed);
                let u = m.normalize(&x, &m.random_tangent_seeded(&x, seed + 99)).unwrap();
                m.check_tangent(&x, &obj.gradient(&x)).unwrap();
                let scale = 1.0 + obj.value(&x).abs() + m.norm(&x, &obj.gradient(&x));
                let err = directional_derivative_error(m.as_ref(), obj.as_ref(), &x, &u, t);
                assert!(err < 10.0 * t * t * scale, "{:?} seed {seed}: {err:e}", inst.manifold);
            }
        }
    }

    #[test]
    fn alpha_dominates_sampled_hessian() {
        for inst in all_instances() {
            let (m, obj) = inst.build().unwrap();
            // Karcher's α is only valid on its working ball, so sample there.
            if let ProblemKind::KarcherMean { .. } = inst.kind {
                continue;
            }
            let sampled = sampled_hessian_norm(m.as_ref(), obj.as_ref(), 50, 7, 1e-4);
            assert!(
                sampled <= obj.alpha() + 1e-5,
                "{:?}: {sampled} > {}",
                inst.manifold,
                obj.alpha()
            );
        }
    }

    #[test]
    fn karcher_alpha_dominates_hessian_on_working_ball() {
        let inst = ProblemInstance::random_karcher(3, 10, 1.0, 4).unwrap();
        let (m, obj) = inst.build().unwrap();
        let ProblemKind::KarcherMean { points, .. } = &inst.kind else {
            unreachable!()
        };
        let pts: Vec<Point> = points.iter().map(|x| DMatrix::from_column_slice(4, 1, x)).collect();
        let km = karcher_mean(&pts, None).unwrap();
        let mut rng = ManifoldRng::seed_from_u64(8);
        let h = 1e-4;
        for _ in 0..50 {
            let c = km.center();
            let dir = m.normalize(c, &m.random_tangent(c, &mut rng)).unwrap();
            let x = m.exp(c, &(dir * (km.working_radius() * rand::Rng::random::<f64>(&mut rng))));
            let u = m.normalize(&x, &m.random_tangent(&x, &mut rng)).unwrap();
            let f = |t: f64| obj.value(&m.exp(&x, &(&u * t)));
            let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
            assert!(second.abs() <= obj.alpha() + 1e-4);
        }
    }

    #[test]
    fn instances_round_trip_through_json() {
        for inst in all_instances() {
            let json = serde_json::to_string(&inst).unwrap();
            let back: ProblemInstance = serde_json::from_str(&json).unwrap();
            assert_eq!(back, inst);
        }
        let inst = ProblemInstance::random_rayleigh(2, 0).unwrap();
        let v = serde_json::to_value(&inst).unwrap();
        assert_eq!(v["problem"], "rayleigh");
        assert_eq!(v["manifold"]["kind"], "sphere");
        assert_eq!(v["matrix"]["rows"], 2);
    }

    #[test]
    fn row_major_layout() {
        let m = Mat::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let d = MatrixData::from_matrix(&m);
        assert_eq!(d.data, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(d.to_matrix().unwrap(), m);
        assert!(MatrixData {
            rows: 2,
            cols: 2,
            data: vec![1.0]
        }
        .to_matrix()
        .is_err());
    }

    #[test]
    fn rayleigh_optimizer_reaches_lambda_min() {
        let inst = ProblemInstance::random_rayleigh(8, 11).unwrap();
        let (m, obj) = inst.build().unwrap();
        let x0 = m.random_point_seeded(12);
        let cfg = OptimizerConfig::new(1.0, 1e-7);
        let st = dynamic_trivialization(m.as_ref(), obj.as_ref(), &x0, &cfg, StoppingRule::Always).unwrap();
        assert!(st.converged);
        let f = obj.value(&st.point(m.as_ref()));
        // ‖grad‖ < ε bounds the gap by O(ε²/gap) near a nondegenerate minimum.
        assert!((f - inst.f_star).abs() < 1e-6, "{f} vs {}", inst.f_star);
    }

    #[test]
    fn procrustes_optimizer_reaches_polar_factor() {
        let inst = ProblemInstance::random_procrustes(3, 21).unwrap();
        let (m, obj) = inst.build().unwrap();
        let cfg = OptimizerConfig::new(1.0, 1e-8);
        let st = dynamic_trivialization(m.as_ref(), obj.as_ref(), &m.origin(), &cfg, StoppingRule::Always).unwrap();
        assert!(st.converged);
        assert!((obj.value(&st.point(m.as_ref())) - inst.f_star).abs() < 1e-8);
    }

    #[test]
    fn grassmann_optimizer_matches_eigensolver() {
        let inst = ProblemInstance::random_grassmann_trace(6, 2, 31).unwrap();
        let (m, obj) = inst.build().unwrap();
        let cfg = OptimizerConfig::new(0.5, 1e-6);
        let x0 = m.random_point_seeded(32);
        let st = dynamic_trivialization(m.as_ref(), obj.as_ref(), &x0, &cfg, StoppingRule::Always).unwrap();
        assert!(st.converged);
        assert!((obj.value(&st.point(m.as_ref())) - inst.f_star).abs() < 1e-5);
    }

    /// Independent fixed-point iteration `x ← exp_x(mean log_x(xᵢ))`.
    fn karcher_fixed_point(h: &Hyperbolic, pts: &[Point]) -> Point {
        let mut x = pts[0].clone();
        for _ in 0..500 {
            let mut step = Tangent::zeros(x.nrows(), 1);
            for p in pts {
                step += h.log(&x, p).unwrap();
            }
            step /= pts.len() as f64;
            x = h.exp(&x, &step);
            if h.norm(&x, &step) < 1e-15 {
                break;
            }
        }
        x
    }

    #[test]
    fn default_start_is_the_karcher_center() {
        let inst = ProblemInstance::random_karcher(2, 6, 1.0, 5).unwrap();
        let (m, _) = inst.build().unwrap();
        let x0 = inst.default_start(m.as_ref(), 0).unwrap();
        let ProblemKind::KarcherMean { points, .. } = &inst.kind else {
            unreachable!()
        };
        let pts: Vec<Point> = points.iter().map(|x| DMatrix::from_column_slice(3, 1, x)).collect();
        let km = karcher_mean(&pts, None).unwrap();
        assert_eq!(&x0, km.center());
        m.check_point(&x0).unwrap();

        let ray = ProblemInstance::random_rayleigh(4, 5).unwrap();
        let (s, _) = ray.build().unwrap();
        assert_eq!(ray.default_start(s.as_ref(), 3).unwrap(), s.random_point_seeded(3));
    }

    #[test]
    fn karcher_rules_agree_with_fixed_point() {
        let inst = ProblemInstance::random_karcher(2, 10, 1.0, 41).unwrap();
        let (m, obj) = inst.build().unwrap();
        let ProblemKind::KarcherMean { points, .. } = &inst.kind else {
            unreachable!()
        };
        let pts: Vec<Point> = points.iter().map(|x| DMatrix::from_column_slice(3, 1, x)).collect();
        let h = Hyperbolic::new(2).unwrap();
        let oracle = karcher_fixed_point(&h, &pts);
        let cfg = OptimizerConfig::new(1.0, 1e-9);
        let x0 = m.origin();
        let a = dynamic_trivialization(m.as_ref(), obj.as_ref(), &x0, &cfg, StoppingRule::Always).unwrap();
        let rule = StoppingRule::GradRatio {
            eps_low: 0.1,
            eps_high: 10.0,
        };
        let b = dynamic_trivialization(m.as_ref(), obj.as_ref(), &x0, &cfg, rule).unwrap();
        assert!(a.converged && b.converged);
        assert_eq!(b.clips, 0);
        let (xa, xb) = (a.point(m.as_ref()), b.point(m.as_ref()));
        assert!(h.norm(&xb, &obj.gradient(&xb)) < 1e-6);
        assert!(h.distance(&xa, &xb) < 1e-6);
        assert!(h.distance(&xa, &oracle) < 1e-6);
    }
}
